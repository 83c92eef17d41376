#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "bondindiff/affine_model.hpp"
#include "bondindiff/errors.hpp"
#include "bondindiff/laplace.hpp"
#include "bondindiff/pricer.hpp"

namespace bondindiff {

/// Exponent pair of the risk-neutral Vasicek bond price e^{A + r B}.
struct MarketCoefficients {
    double A = 0.0;
    double B = 0.0;
};

/// Long-run mean under the risk-neutral measure.
inline double risk_neutral_theta(const VasicekParams& p, double lambda) { return p.theta - p.delta * lambda / p.kappa; }

namespace detail {

inline void check_market_inputs(const VasicekParams& p, double t, double r, double T, double lambda) {
    p.validate();
    if (!std::isfinite(t) || !std::isfinite(r) || !std::isfinite(T) || !std::isfinite(lambda)) {
        throw Error(ErrorCode::Validation, "market_model", "market inputs must be finite");
    }
    if (!(T >= t)) throw Error(ErrorCode::Domain, "market_model", "maturity must satisfy T >= t");
}

}  // namespace detail

/// A(t, i; T) and B(t, i; T) of the Vasicek closed form with theta replaced
/// by its risk-neutral value.
inline MarketCoefficients market_coefficients(const VasicekParams& p, double t, double T, double lambda) {
    detail::check_market_inputs(p, t, 0.0, T, lambda);
    const double k = p.kappa, tau = T - t;
    const auto [first, second] = detail::vasicek_brackets(k * tau);
    MarketCoefficients c;
    c.A = -risk_neutral_theta(p, lambda) / k * first - p.delta * p.delta / (4.0 * k * k * k) * second;
    c.B = std::expm1(-k * tau) / k;
    return c;
}

inline double market_bond_price(const VasicekParams& p, double t, double r, double T, double lambda) {
    detail::check_market_inputs(p, t, r, T, lambda);
    const auto c = market_coefficients(p, t, T, lambda);
    return std::exp(c.A + r * c.B);
}

inline double market_yield(const VasicekParams& p, double t, double r, double T, double lambda) {
    detail::check_market_inputs(p, t, r, T, lambda);
    if (!(T > t)) throw Error(ErrorCode::Domain, "market_model", "yield undefined for T <= t");
    const auto c = market_coefficients(p, t, T, lambda);
    return -(c.A + r * c.B) / (T - t);
}

struct DriftVol {
    double Q = 0.0;  // drift of the bond price, per unit price
    double S = 0.0;  // volatility of the bond price, per unit price
};

/// Q = (d/dt + mu d/dr + delta^2/2 d^2/dr^2 - r) p / p under the physical
/// drift mu = kappa (theta - r), and S = delta dp/dr / p.
inline DriftVol bond_drift_vol(const VasicekParams& p, double t, double r, double T, double lambda) {
    detail::check_market_inputs(p, t, r, T, lambda);
    const auto c = market_coefficients(p, t, T, lambda);
    const double k = p.kappa, d2 = p.delta * p.delta, tau = T - t;
    const double dB_dt = std::exp(-k * tau);
    const double dA_dt = -k * risk_neutral_theta(p, lambda) * c.B - 0.5 * d2 * c.B * c.B;
    DriftVol out;
    out.Q = dA_dt + r * dB_dt - r + k * (p.theta - r) * c.B + 0.5 * d2 * c.B * c.B;
    out.S = p.delta * c.B;
    return out;
}

/// Same Q by central differences of the price; a check on the closed form.
inline double bond_drift_finite_difference(const VasicekParams& p, double t, double r, double T, double lambda,
                                           double h_t = 1e-6, double h_r = 1e-6) {
    detail::check_market_inputs(p, t, r, T, lambda);
    if (!(T - t > h_t)) throw Error(ErrorCode::Domain, "market_model", "finite difference needs T - t > h_t");
    auto P = [&](double tt, double rr) { return market_bond_price(p, tt, rr, T, lambda); };
    const double p0 = P(t, r);
    const double dt = (P(t + h_t, r) - P(t - h_t, r)) / (2.0 * h_t);
    const double up = P(t, r + h_r), down = P(t, r - h_r);
    const double dr = (up - down) / (2.0 * h_r);
    const double drr = (up - 2.0 * p0 + down) / (h_r * h_r);
    return (dt + p.kappa * (p.theta - r) * dr + 0.5 * p.delta * p.delta * drr - r * p0) / p0;
}

/// lambda with market_bond_price(lambda) = price. log p is affine in lambda
/// with slope delta (e^{-k tau} - 1 + k tau) / k^2; a bracketed root solve on
/// the price confirms the linear solution.
inline double implied_lambda_from_price(const VasicekParams& p, double t, double r, double T, double price) {
    detail::check_market_inputs(p, t, r, T, 0.0);
    if (!(price > 0.0) || !std::isfinite(price)) {
        throw Error(ErrorCode::Domain, "market_model", "implied lambda needs a positive finite price");
    }
    if (p.delta == 0.0) {
        throw Error(ErrorCode::Unidentifiable, "market_model", "lambda is unidentifiable when delta = 0");
    }
    const double k = p.kappa;
    const double first = detail::vasicek_brackets(k * (T - t)).first;
    if (!(first > 0.0)) {
        throw Error(ErrorCode::Unidentifiable, "market_model", "lambda is unidentifiable at zero time to maturity");
    }
    const auto c0 = market_coefficients(p, t, T, 0.0);
    const double slope = p.delta * first / (k * k);
    const double lambda = (std::log(price) - c0.A - r * c0.B) / slope;

    auto g = [&](double l) {
        const auto c = market_coefficients(p, t, T, l);
        return c.A + r * c.B - std::log(price);
    };
    const double width = 1e-6 * std::max(1.0, std::abs(lambda));
    double lo = lambda - width, hi = lambda + width;
    double glo = g(lo), ghi = g(hi);
    for (int j = 0; j < 60 && (glo > 0.0) == (ghi > 0.0); ++j) {
        lo -= (hi - lo), hi += (hi - lo);
        glo = g(lo), ghi = g(hi);
    }
    if ((glo > 0.0) == (ghi > 0.0)) {
        throw Error(ErrorCode::Bracket, "market_model", "implied lambda root is not bracketed");
    }
    std::uintmax_t iters = 100;
    const auto [a, b] = boost::math::tools::toms748_solve(
        g, lo, hi, glo, ghi, [](double u, double v) { return std::abs(u - v) <= 1e-15 * std::max(1.0, std::abs(u)); },
        iters);
    const double check = 0.5 * (a + b);
    if (std::abs(check - lambda) > 1e-9 * std::max(1.0, std::abs(lambda))) {
        std::ostringstream msg;
        msg << "closed-form implied lambda " << lambda << " disagrees with root solve " << check;
        throw Error(ErrorCode::Convergence, "market_model", msg.str());
    }
    return lambda;
}

/// The investor's indifference price of interest-rate risk: the lambda whose
/// risk-neutral price equals the indifference price. m is the money-market
/// value for that numeraire; non-positive means m = x.
inline double implied_price_of_risk(const AffineModel& model, const MarketState& state, const PricingRequest& req,
                                    const QuadratureConfig& quad = {}, double m = 0.0) {
    if (!model.is_vasicek()) {
        throw Error(ErrorCode::Validation, "market_model", "the market price of risk is defined for Vasicek models");
    }
    const VasicekParams& p = *model.vasicek_params();
    if (p.delta == 0.0) {
        throw Error(ErrorCode::Unidentifiable, "market_model", "lambda is unidentifiable when delta = 0");
    }
    const double price = indifference_price(model, state, m > 0.0 ? m : state.x, req, quad).price;
    return implied_lambda_from_price(p, state.t, state.r, req.T, price);
}

}  // namespace bondindiff
