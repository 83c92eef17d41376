#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bondindiff/affine_model.hpp"

using namespace bondindiff;

namespace {
// Textbook zero-coupon bond: P = exp(A - B r), Bv = (1 - e^{-k tau}) / k.
double textbook_log_bond(const VasicekParams& p, double r, double tau) {
    const double k = p.kappa, d2 = p.delta * p.delta;
    const double Bv = -std::expm1(-k * tau) / k;
    const double Av = (p.theta - d2 / (2 * k * k)) * (Bv - tau) - d2 * Bv * Bv / (4 * k);
    return Av - Bv * r;
}
}  // namespace

TEST(Affine, ReferenceParameters) {
    const auto p = reference_vasicek();
    EXPECT_DOUBLE_EQ(p.kappa, 0.05);
    EXPECT_DOUBLE_EQ(p.theta, 0.03);
    EXPECT_NEAR(p.delta, std::sqrt(2 * 0.05 * 0.05 * 0.03), 1e-16);
}

TEST(Affine, BondPriceIsCfAtMinusI) {
    // E[e^{-I}] is the characteristic function at omega = i.
    const auto p = reference_vasicek();
    const auto m = AffineModel::vasicek(p);
    for (double tau : {0.1, 1.0, 5.0, 30.0}) {
        const Complex lcf = integrated_rate_log_cf(m, 0.0, tau, 0.02, Complex(0.0, 1.0));
        EXPECT_NEAR(lcf.real(), textbook_log_bond(p, 0.02, tau), 1e-13) << tau;
        EXPECT_NEAR(lcf.imag(), 0.0, 1e-14);
    }
}

TEST(Affine, ClosedFormMatchesExampleB) {
    const auto p = reference_vasicek();
    const auto v = vasicek_riccati_closed_form(p, 0.0, Complex(0.0, 1.0), 1.0);
    EXPECT_NEAR(v.B.real(), -(1 - std::exp(-0.05)) / 0.05, 1e-14);
    EXPECT_NEAR(v.B.real(), -0.9754115, 1e-7);
}

TEST(Affine, ClosedFormVsNumeric) {
    const auto p = reference_vasicek();
    const auto m = AffineModel::vasicek(p);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-20.0, 20.0), tau(0.0, 15.0);
    for (int k = 0; k < 25; ++k) {
        const Complex w(u(rng), u(rng));
        const double T = tau(rng);
        const auto a = vasicek_riccati_closed_form(p, 0.0, w, T);
        const auto b = solve_riccati_numeric(m, 0.0, w, T, default_riccati_steps(T));
        EXPECT_LT(std::abs(a.A - b.A), 1e-8);
        EXPECT_LT(std::abs(a.B - b.B), 1e-10);
    }
}

TEST(Affine, SmallHorizonBranch) {
    // x = kappa tau < 0.1 uses series brackets; compare against a generic model
    const auto p = reference_vasicek();
    const auto m = AffineModel::constant(p.kappa * p.theta, -p.kappa, p.delta * p.delta, 0.0);
    for (double tau : {1e-9, 1e-4, 0.5, 1.99, 2.01}) {
        const Complex w(1.3, 0.7);
        const auto a = vasicek_riccati_closed_form(p, 0.0, w, tau);
        const auto b = solve_riccati_numeric(m, 0.0, w, tau, 2000);
        EXPECT_LT(std::abs(a.A - b.A), 1e-12) << tau;
        EXPECT_LT(std::abs(a.B - b.B), 1e-12) << tau;
    }
}

TEST(Affine, ZeroHorizonIsIdentity) {
    const auto m = AffineModel::vasicek(reference_vasicek());
    EXPECT_EQ(integrated_rate_log_cf(m, 2.0, 2.0, 0.05, Complex(3.0, 1.0)), Complex(0.0, 0.0));
}

TEST(Affine, DeterministicRate) {
    VasicekParams p{0.05, 0.03, 0.0};
    const auto m = AffineModel::vasicek(p);
    const double tau = 4.0, r = 0.01;
    const double I = p.theta * tau + (r - p.theta) * (-std::expm1(-p.kappa * tau)) / p.kappa;
    const Complex w(2.5, 0.3);
    const Complex lcf = integrated_rate_log_cf(m, 0.0, tau, r, w);
    EXPECT_LT(std::abs(lcf - Complex(0.0, 1.0) * w * I), 1e-13);
}

TEST(Affine, RiccatiSolutionCaches) {
    const auto m = AffineModel::vasicek(reference_vasicek());
    RiccatiSolution sol(m);
    const Complex w(0.5, 0.5);
    EXPECT_EQ(sol(0.0, w, 3.0).A, sol.A(0.0, w, 3.0));
    EXPECT_LT(std::abs(sol.B(0.0, w, 3.0) - vasicek_riccati_closed_form(reference_vasicek(), 0.0, w, 3.0).B), 1e-15);
}

TEST(Affine, ValidationErrors) {
    EXPECT_THROW(AffineModel::vasicek({0.0, 0.03, 0.01}), Error);
    EXPECT_THROW(AffineModel::vasicek({0.05, 0.03, -0.01}), Error);
    EXPECT_THROW(AffineModel::vasicek({0.05, NAN, 0.01}), Error);
    EXPECT_THROW(AffineModel(nullptr, nullptr, nullptr, nullptr), Error);
}

TEST(Affine, BlowUpIsReported) {
    // CIR-like sig1 > 0 explodes for large real argument
    const auto m = AffineModel::constant(0.0, 0.0, 0.0, 4.0);
    try {
        (void)solve_riccati_numeric(m, 0.0, Complex(0.0, -50.0), 30.0, 3000);
        FAIL() << "expected blow-up";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BlowUp);
    }
}
