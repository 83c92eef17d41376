#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "bondindiff/pricer.hpp"

using namespace bondindiff;

namespace {

const AffineModel& vasicek() {
    static const AffineModel m = AffineModel::vasicek(reference_vasicek());
    return m;
}

// E[exp(-e^s Y)] with Y = e^{+-I}, I Gaussian; Simpson over the density.
double oracle_lambda(double T, double r, double s, GrowthSide side) {
    const Complex lcf = integrated_rate_log_cf(vasicek(), 0.0, T, r, Complex(1.0, 0.0));
    const double mu = lcf.imag(), sd = std::sqrt(-2.0 * lcf.real());
    const int n = 20000;
    const double h = 24.0 / n;
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double u = -12.0 + k * h;
        const double y = side == GrowthSide::Growth ? mu + sd * u : -(mu + sd * u);
        sum += (k == 0 || k == n ? 1.0 : (k % 2 ? 4.0 : 2.0)) * std::exp(-std::exp(s + y) - 0.5 * u * u);
    }
    return sum * h / 3.0 / std::sqrt(2.0 * std::numbers::pi);
}

double discount(const VasicekParams& p, double r, double tau) {
    return std::exp(-(p.theta * tau + (r - p.theta) * (-std::expm1(-p.kappa * tau)) / p.kappa));
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::Validation;
}

}  // namespace

TEST(Pricer, ExponentialBondRegression) {
    const auto res = BondNumerairePricer(vasicek(), MarketState{}, 5.0).price_exponential(1.0, 0.15);
    EXPECT_NEAR(res.price, 0.941428171688, 1e-11);
    EXPECT_NEAR(res.yield, 0.0120714450303, 1e-12);
}

TEST(Pricer, ExponentialBondAgainstOracle) {
    const MarketState st{};
    const double T = 5.0, nu = 1.0, gamma = 0.15;
    const double lg = std::log(gamma);
    auto f = [&](double p) {
        return oracle_lambda(T, st.r, lg + std::log(st.x), GrowthSide::Growth) -
               std::exp(-gamma * nu) * oracle_lambda(T, st.r, lg + std::log(st.x - nu * p), GrowthSide::Growth);
    };
    double lo = 0.5, hi = 1.2;
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (f(lo) > 0) == (f(mid) > 0) ? lo = mid : hi = mid;
    }
    const auto res = BondNumerairePricer(vasicek(), st, T).price_exponential(nu, gamma);
    EXPECT_NEAR(res.price, 0.5 * (lo + hi), 1e-10);
}

TEST(Pricer, MoneyMarketExponentialClosedForm) {
    const MoneyMarketState st{};
    const double T = 10.0, nu = 2.0, gamma = 0.3;
    const double expect =
        -(st.m / (gamma * nu)) * std::log(oracle_lambda(T, st.r, std::log(gamma * nu / st.m), GrowthSide::Discount));
    const auto res = MoneyMarketNumerairePricer(vasicek(), st, T).price_exponential(nu, gamma);
    EXPECT_NEAR(res.price, expect, 1e-11);
}

TEST(Pricer, DeterministicRatesGiveDiscountBond) {
    VasicekParams p{0.05, 0.03, 0.0};
    const AffineModel m = AffineModel::vasicek(p);
    const double T = 8.0, want = discount(p, 0.01, T);
    const BondNumerairePricer bond(m, MarketState{}, T);
    const MoneyMarketNumerairePricer money(m, MoneyMarketState{}, T);
    EXPECT_TRUE(money.degenerate());
    for (double nu : {-3.0, 0.5, 2.0}) {
        EXPECT_NEAR(bond.price_exponential(nu, 0.2).price, want, 1e-9);
        EXPECT_NEAR(bond.price_power(nu, 0.5).price, want, 1e-9);
        EXPECT_NEAR(bond.price_power(nu, 3.0).price, want, 1e-9);
        EXPECT_NEAR(money.price_exponential(nu, 0.2).price, want, 1e-9);
        EXPECT_NEAR(money.price_power(nu, 0.5).price, want, 1e-9);
    }
}

TEST(Pricer, ResidualsAreSmall) {
    const MarketState st{};
    for (double T : {1.0, 10.0}) {
        const BondNumerairePricer bond(vasicek(), st, T);
        const MoneyMarketNumerairePricer money(vasicek(), {0.0, st.x, 5.0, st.r}, T);
        for (const auto& r : {bond.price_exponential(1.0, 0.15), bond.price_exponential(-2.0, 0.15),
                              bond.price_power(1.0, 0.5), bond.price_power(-1.0, 2.0),
                              money.price_exponential(1.0, 0.5), money.price_power(1.0, 2.0)}) {
            EXPECT_LT(r.relative_residual(), 1e-10);
            EXPECT_GT(r.price, 0.0);
        }
    }
}

TEST(Pricer, RiskAversionRaisesBondPrice) {
    // in bond units the bond is the riskless asset
    const BondNumerairePricer bond(vasicek(), MarketState{}, 10.0);
    double prev = 0.0;
    for (double gamma : {0.05, 0.1, 0.2, 0.4}) {
        const double p = bond.price_exponential(1.0, gamma).price;
        EXPECT_GT(p, prev);
        prev = p;
    }
    EXPECT_NE(bond.price_exponential(-1.0, 0.2).price, bond.price_exponential(1.0, 0.2).price);
}

TEST(Pricer, PowerYieldIsHomothetic) {
    const double T = 5.0;
    const auto a = BondNumerairePricer(vasicek(), MarketState{0.0, 5.0, 0.01}, T).price_power(1.0, 2.0);
    const auto b = BondNumerairePricer(vasicek(), MarketState{0.0, 10.0, 0.01}, T).price_power(2.0, 2.0);
    EXPECT_NEAR(a.price, b.price, 1e-10);
}

TEST(Pricer, ZeroHorizonPriceIsOne) {
    const MarketState st{3.0, 5.0, 0.02};
    const auto r = BondNumerairePricer(vasicek(), st, 3.0).price_exponential(1.0, 0.15);
    EXPECT_NEAR(r.price, 1.0, 1e-10);
    EXPECT_EQ(r.yield, 0.0);
}

TEST(Pricer, MoneyMarketShortIsRejectedWhenRatesAreRandom) {
    const MoneyMarketNumerairePricer money(vasicek(), MoneyMarketState{}, 5.0);
    EXPECT_FALSE(money.degenerate());
    EXPECT_EQ(code_of([&] { (void)money.price_exponential(-1.0, 0.15); }), ErrorCode::Domain);
    EXPECT_EQ(code_of([&] { (void)money.price_power(-1.0, 2.0); }), ErrorCode::Domain);
}

TEST(Pricer, PowerShortLongHorizonFailsLoudly) {
    // wealth can go negative; no finite price is returned
    const BondNumerairePricer bond(vasicek(), MarketState{}, 30.0);
    EXPECT_THROW((void)bond.price_power(-1.0, 2.0), Error);
}

TEST(Pricer, RequestValidation) {
    const MarketState st{};
    PricingRequest req;
    req.gamma = -1.0;
    EXPECT_EQ(code_of([&] { (void)indifference_price(vasicek(), st, 5.0, req); }), ErrorCode::Validation);
    req = {};
    req.nu = 0.0;
    EXPECT_EQ(code_of([&] { (void)indifference_price(vasicek(), st, 5.0, req); }), ErrorCode::Validation);
    req = {};
    req.utility = Utility::Power;
    req.gamma = 1.0;
    EXPECT_EQ(code_of([&] { (void)indifference_price(vasicek(), st, 5.0, req); }), ErrorCode::Validation);
    req = {};
    req.T = -1.0;
    EXPECT_EQ(code_of([&] { (void)indifference_price(vasicek(), st, 5.0, req); }), ErrorCode::Validation);
    req = {};
    req.utility = Utility::Power;
    EXPECT_EQ(code_of([&] { (void)indifference_price_exp(vasicek(), st, req); }), ErrorCode::Validation);
    EXPECT_EQ(code_of([&] { (void)indifference_price(vasicek(), st, -1.0, {5.0, 1.0, 0.15, Utility::Exponential,
                                                                          Numeraire::MoneyMarket}); }),
              ErrorCode::Validation);
}

TEST(Pricer, DispatchMatchesDirectCalls) {
    const MarketState st{};
    PricingRequest req{5.0, 1.0, 2.0, Utility::Power, Numeraire::MoneyMarket};
    const auto a = indifference_price(vasicek(), st, 4.0, req);
    const auto b = MoneyMarketNumerairePricer(vasicek(), {0.0, st.x, 4.0, st.r}, 5.0).price_power(1.0, 2.0);
    EXPECT_EQ(a.price, b.price);
}

TEST(Pricer, YieldHelper) {
    EXPECT_NEAR(indifference_yield(std::exp(-0.1), 0.0, 2.0), 0.05, 1e-15);
    EXPECT_THROW(indifference_yield(0.0, 0.0, 1.0), Error);
    EXPECT_THROW(indifference_yield(0.9, 1.0, 1.0), Error);
}

TEST(Pricer, SimpsonWeightsIntegrateCubics) {
    const int n = 11;
    const double h = 0.1;
    const auto w = detail::simpson_weights(n, h);
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += w[k] * std::pow(k * h, 3);
    EXPECT_NEAR(s, 0.25, 1e-14);
}
