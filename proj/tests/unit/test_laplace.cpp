#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <tuple>

#include "bondindiff/laplace.hpp"

using namespace bondindiff;

namespace {

// E[exp(-e^s e^{+-I})] for Gaussian I, by Simpson over the density.
double gaussian_oracle(const AffineModel& m, double T, double r, double s, GrowthSide side) {
    const Complex lcf = integrated_rate_log_cf(m, 0.0, T, r, Complex(1.0, 0.0));
    const double mu = lcf.imag(), sd = std::sqrt(-2.0 * lcf.real());
    const int n = 20000;
    const double lo = -12.0, hi = 12.0, h = (hi - lo) / n;
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double u = lo + k * h;
        const double I = mu + sd * u;
        const double y = side == GrowthSide::Growth ? I : -I;
        const double f = std::exp(-std::exp(s + y) - 0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
        sum += (k == 0 || k == n ? 1.0 : (k % 2 ? 4.0 : 2.0)) * f;
    }
    return sum * h / 3.0;
}

const AffineModel& vasicek() {
    static const AffineModel m = AffineModel::vasicek(reference_vasicek());
    return m;
}

}  // namespace

TEST(Laplace, MatchesGaussianOracle) {
    const MarketState st{};
    for (double T : {0.5, 5.0, 30.0}) {
        for (double z : {0.01, 0.2, 1.0, 5.0}) {
            const double expect = gaussian_oracle(vasicek(), T, st.r, std::log(z * st.x), GrowthSide::Growth);
            EXPECT_NEAR(laplace_mm(vasicek(), st, T, z, {}), expect, 1e-12) << T << " " << z;
        }
    }
}

TEST(Laplace, GrowthTransformBothSides) {
    for (auto side : {GrowthSide::Growth, GrowthSide::Discount}) {
        const GrowthLaplace L(vasicek(), 0.0, 10.0, 0.01, side, {});
        for (double s : {-25.0, -3.0, -0.1, 0.0, 0.5, 2.0, 4.0}) {
            const double expect = gaussian_oracle(vasicek(), 10.0, 0.01, s, side);
            EXPECT_NEAR(L.value(s), expect, 1e-13) << s;
            EXPECT_NEAR(L.complement(s), 1.0 - expect, 1e-13) << s;
        }
    }
}

TEST(Laplace, ComplementKeepsRelativePrecision) {
    // For tiny e^s, 1 - Lambda ~ e^s E[G].
    const GrowthLaplace L(vasicek(), 0.0, 5.0, 0.01, GrowthSide::Growth, {});
    const double s = -28.0;
    EXPECT_NEAR(L.complement(s) / (std::exp(s + L.log_mean())), 1.0, 1e-9);
}

TEST(Laplace, DifferenceMatchesSeparateValues) {
    const GrowthLaplace L(vasicek(), 0.0, 5.0, 0.01, GrowthSide::Growth, {});
    for (auto [s1, s2, lf] : {std::tuple{0.3, 0.1, -0.2}, std::tuple{-2.0, -2.5, -0.01}, std::tuple{3.0, 2.9, 0.1}}) {
        EXPECT_NEAR(L.difference(s1, s2, lf), L.value(s1) - std::exp(lf) * L.value(s2), 1e-13);
    }
}

TEST(Laplace, MonotoneAndBounded) {
    const GrowthLaplace L(vasicek(), 0.0, 20.0, 0.01, GrowthSide::Discount, {});
    double prev = 1.0;
    for (double s = -10.0; s <= 6.0; s += 0.25) {
        const double v = L.value(s);
        EXPECT_LE(v, prev + 1e-15);
        EXPECT_GE(v, -1e-15);
        prev = v;
    }
}

TEST(Laplace, ZeroHorizonIsExponential) {
    const MarketState st{2.0, 5.0, 0.03};
    EXPECT_NEAR(laplace_mm(vasicek(), st, 2.0, 0.3, {}), std::exp(-1.5), 1e-13);
}

TEST(Laplace, DeterministicRate) {
    const VasicekParams p{0.05, 0.03, 0.0};
    const AffineModel m = AffineModel::vasicek(p);
    const MarketState st{};
    const double T = 7.0;
    const double I = p.theta * T + (st.r - p.theta) * (-std::expm1(-p.kappa * T)) / p.kappa;
    EXPECT_NEAR(laplace_mm(m, st, T, 0.4, {}), std::exp(-0.4 * st.x * std::exp(I)), 1e-13);
}

TEST(Laplace, ContourHeightIndependence) {
    const MarketState st{};
    for (double T : {1.0, 8.0}) {
        QuadratureConfig a, b;
        a.omega_i = 0.25;
        b.omega_i = 1.0;
        EXPECT_NEAR(laplace_mm(vasicek(), st, T, 0.7, a), laplace_mm(vasicek(), st, T, 0.7, b), 1e-10);
    }
}

TEST(Laplace, KernelRejectsBadArguments) {
    const auto grid = omega_grid(QuadratureConfig{});
    EXPECT_THROW(laplace_kernel(vasicek(), 0.0, 1.0, 0.01, 0.0, grid), Error);
    EXPECT_THROW(laplace_kernel(vasicek(), 2.0, 1.0, 0.01, 1.0, grid), Error);
    try {
        (void)laplace_kernel(vasicek(), 0.0, 1.0, 0.01, 1.0, {Complex(1.0, 0.0)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Contour);
    }
}

TEST(Laplace, ConfigValidation) {
    auto code_of = [](QuadratureConfig q) {
        try {
            q.validate();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Validation;  // sentinel unused
    };
    QuadratureConfig q;
    q.omega_i = 0.0;
    EXPECT_EQ(code_of(q), ErrorCode::Contour);
    q = {};
    q.omega_i_neg = -1.0;
    EXPECT_EQ(code_of(q), ErrorCode::Contour);
    q = {};
    q.n_omega = 2000;
    EXPECT_THROW(q.validate(), Error);
    q = {};
    q.z_log_min = 20.0;
    EXPECT_THROW(q.validate(), Error);
    EXPECT_NO_THROW(QuadratureConfig{}.validate());
}

TEST(Laplace, TruncationIsReported) {
    QuadratureConfig q;
    q.omega_max = 3.0;
    q.n_omega = 101;
    try {
        (void)laplace_mm(vasicek(), MarketState{}, 1.0, 0.5, q);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Truncation);
    }
}

TEST(Laplace, InvalidStateAndMaturity) {
    EXPECT_THROW(laplace_mm(vasicek(), MarketState{0.0, -1.0, 0.01}, 1.0, 0.5, {}), Error);
    EXPECT_THROW(laplace_mm(vasicek(), MarketState{3.0, 5.0, 0.01}, 1.0, 0.5, {}), Error);
    EXPECT_THROW(GrowthLaplace(vasicek(), 3.0, 1.0, 0.01, GrowthSide::Growth, {}), Error);
}

TEST(Laplace, RandomStatesAgreeWithOracle) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> T(0.1, 15.0), r(-0.02, 0.1), s(-5.0, 3.0);
    for (int k = 0; k < 10; ++k) {
        const double TT = T(rng), rr = r(rng), ss = s(rng);
        const GrowthLaplace L(vasicek(), 0.0, TT, rr, GrowthSide::Growth, {});
        EXPECT_NEAR(L.value(ss), gaussian_oracle(vasicek(), TT, rr, ss, GrowthSide::Growth), 1e-12);
    }
}
