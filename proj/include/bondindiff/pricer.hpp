#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "bondindiff/affine_model.hpp"
#include "bondindiff/errors.hpp"
#include "bondindiff/laplace.hpp"

namespace bondindiff {

enum class Utility { Exponential, Power };
enum class Numeraire { Bond, MoneyMarket };

inline const char* to_string(Utility u) { return u == Utility::Exponential ? "exponential" : "power"; }
inline const char* to_string(Numeraire n) { return n == Numeraire::Bond ? "bond" : "money-market"; }

struct PricingRequest {
    double T = 5.0;
    double nu = 1.0;
    double gamma = 0.15;
    Utility utility = Utility::Exponential;
    Numeraire numeraire = Numeraire::Bond;

    void validate(double t) const {
        if (!std::isfinite(T) || !std::isfinite(nu) || !std::isfinite(gamma)) {
            throw Error(ErrorCode::Validation, "indifference_pricer", "pricing request must be finite");
        }
        if (!(gamma > 0.0)) throw Error(ErrorCode::Validation, "indifference_pricer", "gamma must be > 0");
        if (utility == Utility::Power && gamma == 1.0) {
            throw Error(ErrorCode::Validation, "indifference_pricer",
                        "power utility requires gamma != 1 (log utility is not supported)");
        }
        // Every price is indifferent when no bonds change hands.
        if (nu == 0.0) throw Error(ErrorCode::Validation, "indifference_pricer", "nu must be non-zero");
        if (!(T >= t)) throw Error(ErrorCode::Validation, "indifference_pricer", "maturity must satisfy T >= t");
    }
};

/// Money-market numeraire state: wealth x held in the account whose current
/// value is m.
struct MoneyMarketState {
    double t = 0.0;
    double x = 5.0;
    double m = 5.0;
    double r = 0.01;

    void validate() const {
        if (!std::isfinite(t) || !std::isfinite(x) || !std::isfinite(m) || !std::isfinite(r)) {
            throw Error(ErrorCode::Validation, "indifference_pricer", "money-market state must be finite");
        }
        if (t < 0.0) throw Error(ErrorCode::Validation, "indifference_pricer", "t must be >= 0");
        if (!(x > 0.0)) throw Error(ErrorCode::Validation, "indifference_pricer", "x must be > 0");
        if (!(m > 0.0)) throw Error(ErrorCode::Validation, "indifference_pricer", "m must be > 0");
    }
};

struct IndifferenceResult {
    double price = 0.0;
    double yield = 0.0;
    double residual = 0.0;  // root-equation value at the returned price
    double scale = 1.0;     // magnitude of the nu = 0 term of that equation
    int iterations = 0;

    double relative_residual() const { return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual); }
};

/// y = -log(p) / (T - t).
inline double indifference_yield(double price, double t, double T) {
    if (!(price > 0.0)) throw Error(ErrorCode::Domain, "indifference_pricer", "price must be > 0");
    if (!(T > t)) throw Error(ErrorCode::Domain, "indifference_pricer", "yield undefined for T <= t");
    return -std::log(price) / (T - t);
}

namespace detail {

inline double yield_or_zero(double price, double t, double T) {
    return T > t ? indifference_yield(price, t, T) : 0.0;
}

struct RootOutcome {
    double root = 0.0;
    int iterations = 0;
};

/// Finds the root of g on (lo, hi), starting the bracket search at p0 and
/// widening geometrically. Rejects brackets whose interior shows more than
/// one sign change.
template <class F>
RootOutcome solve_price(F&& g, double p0, double lo, double hi, const char* module) {
    p0 = std::clamp(p0, lo, hi);
    int evals = 0;
    auto eval = [&](double p) {
        ++evals;
        const double v = g(p);
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "root equation is not finite at p = " << p;
            throw Error(ErrorCode::Convergence, module, msg.str());
        }
        return v;
    };

    const double g0 = eval(p0);
    if (g0 == 0.0) return {p0, evals};

    double a = p0, b = p0, ga = g0, gb = g0;
    bool found = false;
    // Probe outward: p0 (1 + 0.02 * 2^j) to the right, p0 / (1 + 0.02 * 2^j) to the left.
    double right = p0, left = p0, g_right = g0, g_left = g0;
    for (int j = 0; j < 64 && !found; ++j) {
        const double factor = 1.0 + 0.02 * std::ldexp(1.0, j);
        if (right < hi) {
            const double next = std::min(p0 * factor, hi);
            const double gn = eval(next);
            if ((gn > 0.0) != (g_right > 0.0) || gn == 0.0) {
                a = right, ga = g_right, b = next, gb = gn, found = true;
                break;
            }
            right = next, g_right = gn;
        }
        if (left > lo) {
            const double next = std::max(p0 / factor, lo);
            const double gn = eval(next);
            if ((gn > 0.0) != (g_left > 0.0) || gn == 0.0) {
                a = next, ga = gn, b = left, gb = g_left, found = true;
                break;
            }
            left = next, g_left = gn;
        }
        if (right >= hi && left <= lo) break;
    }
    if (!found) {
        std::ostringstream msg;
        msg << "no sign change of the indifference equation on [" << lo << ", " << hi << "]";
        throw Error(ErrorCode::Bracket, module, msg.str());
    }
    if (gb == 0.0) return {b, evals};

    // A monotone equation changes sign exactly once inside the bracket.
    {
        int changes = 0;
        double prev = ga;
        for (int k = 1; k <= 8; ++k) {
            const double p = k < 8 ? a + (b - a) * k / 8.0 : b;
            const double v = k < 8 ? eval(p) : gb;
            if ((v > 0.0) != (prev > 0.0)) ++changes;
            prev = v;
        }
        if (changes != 1) {
            std::ostringstream msg;
            msg << "indifference equation changes sign " << changes << " times on [" << a << ", " << b << "]";
            throw Error(ErrorCode::Bracket, module, msg.str());
        }
    }

    std::uintmax_t max_iter = 200;
    auto tolerance = [](double u, double v) { return std::abs(u - v) <= 1e-12 * std::max(std::abs(u), std::abs(v)); };
    const auto [r0, r1] = boost::math::tools::toms748_solve(eval, a, b, ga, gb, tolerance, max_iter);
    if (max_iter >= 200) throw Error(ErrorCode::Convergence, module, "root solver did not converge");
    return {0.5 * (r0 + r1), evals};
}

/// Composite Simpson weights on n (odd) equally spaced nodes.
inline std::vector<double> simpson_weights(int n, double h) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        w[k] = (k == 0 || k == n - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        w[k] *= h / 3.0;
    }
    return w;
}

/// Grid for the outer integral over u = log z.
struct OuterGrid {
    double u_min = 0.0;
    double u_max = 0.0;
    std::vector<double> u;
    std::vector<double> z;
    std::vector<double> weight;  // Simpson weight times e^{(gamma - 1) u}

    OuterGrid(double lo, double hi, int n, double gamma) : u_min(lo), u_max(hi) {
        const double h = (hi - lo) / (n - 1);
        const auto w = simpson_weights(n, h);
        u.resize(w.size());
        z.resize(w.size());
        weight.resize(w.size());
        for (std::size_t k = 0; k < w.size(); ++k) {
            u[k] = lo + static_cast<double>(k) * h;
            z[k] = std::exp(u[k]);
            weight[k] = w[k] * std::exp((gamma - 1.0) * u[k]);
        }
    }
};

/// First u >= 0 (in steps of 0.25) past which `magnitude` stays below
/// `threshold` for two consecutive probes.
template <class M>
double find_outer_cap(M&& magnitude, double threshold, double u_limit, const char* module) {
    int quiet = 0;
    for (double u = 0.0; u <= u_limit; u += 0.25) {
        const double v = magnitude(u);
        if (std::isnan(v)) break;
        quiet = v < threshold ? quiet + 1 : 0;
        if (quiet == 2) return u;
    }
    throw Error(ErrorCode::Convergence, module,
                "outer z-integral does not decay within z_log_max; the position may exceed what wealth can cover");
}

inline double log_one_minus(double complement) { return std::log1p(-complement); }

}  // namespace detail

/// Indifference pricing with the bond as numeraire for one (model, state, T).
///
/// The Laplace-transform kernels depend only on (t, T, r) and are built once,
/// so a single instance prices any number of (nu, gamma) requests.
class BondNumerairePricer {
public:
    BondNumerairePricer(const AffineModel& model, const MarketState& state, double T,
                        const QuadratureConfig& quad = {})
        : state_(state),
          T_(T),
          quad_(quad),
          transform_((state.validate(), quad.validate(), model), state.t, T, state.r, GrowthSide::Growth, quad) {
        if (!(T >= state.t)) throw Error(ErrorCode::Domain, "indifference_pricer", "maturity must satisfy T >= t");
        log_mean_growth_ = transform_.log_mean();
        expected_discount_ = std::exp(integrated_rate_log_cf(model, state.t, T, state.r, Complex(0.0, 1.0),
                                                             quad.riccati_steps)
                                          .real());
    }

    /// E[exp(-int_t^T R ds)] under the physical measure; the search starts here.
    double expected_discount() const { return expected_discount_; }
    const GrowthLaplace& transform() const { return transform_; }

    /// Exponential utility: L(x, gamma) - e^{-gamma nu} L(x - nu p, gamma).
    double exponential_equation(double p, double nu, double gamma) const {
        const double wealth = state_.x - nu * p;
        if (!(wealth > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        const double lg = std::log(gamma);
        return transform_.difference(lg + std::log(state_.x), lg + std::log(wealth), -gamma * nu);
    }

    double exponential_scale(double gamma) const { return transform_.value(std::log(gamma) + std::log(state_.x)); }

    IndifferenceResult price_exponential(double nu, double gamma) const {
        PricingRequest req{T_, nu, gamma, Utility::Exponential, Numeraire::Bond};
        req.validate(state_.t);
        const auto [lo, hi] = admissible(nu);
        const auto root = detail::solve_price([&](double p) { return exponential_equation(p, nu, gamma); },
                                              expected_discount_, lo, hi, "indifference_pricer");
        IndifferenceResult out;
        out.price = root.root;
        out.yield = detail::yield_or_zero(out.price, state_.t, T_);
        out.residual = exponential_equation(out.price, nu, gamma);
        out.scale = exponential_scale(gamma);
        out.iterations = root.iterations;
        return out;
    }

    /// Grid for the power-utility outer integral, capped where both terms of
    /// the integrand are negligible at the reference price.
    detail::OuterGrid power_grid(double nu, double gamma, double p_ref) const {
        const double a = std::log(state_.x);
        const double wealth = state_.x - nu * p_ref;
        if (!(wealth > 0.0)) throw Error(ErrorCode::Domain, "indifference_pricer", "x - nu p must be > 0");
        const double b = std::log(wealth);
        const double threshold = 1e-16 * std::max(1.0, approximate_power_scale(gamma));
        const double cap = detail::find_outer_cap(
            [&](double u) {
                const double z = std::exp(u);
                return std::exp((gamma - 1.0) * u) *
                       (std::abs(transform_.value(u + a)) + std::exp(-z * nu) * std::abs(transform_.value(u + b)));
            },
            threshold, quad_.z_log_max, "indifference_pricer");
        return detail::OuterGrid(quad_.z_log_min, std::max(cap, quad_.z_log_min + 1.0), quad_.n_z, gamma);
    }

    /// Power utility:
    ///   int_0^inf dz z^{gamma-2} [L(x, z) - e^{-z nu} L(x - nu p, z)]
    /// over u = log z on `grid`, plus the analytic contribution of
    /// z < e^{u_min} where the bracket is z nu (1 - p E[G]) to first order.
    double power_equation(double p, double nu, double gamma, const detail::OuterGrid& grid) const {
        const double wealth = state_.x - nu * p;
        if (!(wealth > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        const double a = std::log(state_.x);
        const double b = std::log(wealth);
        double acc = 0.0;
        for (std::size_t k = 0; k < grid.u.size(); ++k) {
            const double log_factor = -grid.z[k] * nu;
            if (log_factor > 700.0) return std::numeric_limits<double>::quiet_NaN();
            acc += grid.weight[k] * transform_.difference(grid.u[k] + a, grid.u[k] + b, log_factor);
        }
        const double slope = nu * (1.0 - p * std::exp(log_mean_growth_));
        acc += slope * std::exp(gamma * grid.u_min) / gamma;
        return acc;
    }

    /// Gamma(gamma) |V(t, x, r; T, 0, gamma)| on `grid`.
    double power_scale(double gamma, const detail::OuterGrid& grid) const {
        const double a = std::log(state_.x);
        double acc = 0.0;
        if (gamma < 1.0) {
            for (std::size_t k = 0; k < grid.u.size(); ++k) acc += grid.weight[k] * transform_.complement(grid.u[k] + a);
            acc += state_.x * std::exp(log_mean_growth_) * std::exp(gamma * grid.u_min) / gamma;
        } else {
            for (std::size_t k = 0; k < grid.u.size(); ++k) acc += grid.weight[k] * transform_.value(grid.u[k] + a);
            acc += std::exp((gamma - 1.0) * grid.u_min) / (gamma - 1.0);
        }
        return std::abs(acc);
    }

    IndifferenceResult price_power(double nu, double gamma) const {
        PricingRequest req{T_, nu, gamma, Utility::Power, Numeraire::Bond};
        req.validate(state_.t);
        const auto [lo, hi] = admissible(nu);
        const double p_ref = std::clamp(expected_discount_, lo, hi);
        auto grid = power_grid(nu, gamma, p_ref);

        auto solve = [&](const detail::OuterGrid& g) {
            return detail::solve_price([&](double p) { return power_equation(p, nu, gamma, g); }, p_ref, lo, hi,
                                       "indifference_pricer");
        };
        auto root = solve(grid);
        const double scale = power_scale(gamma, grid);
        if (tail_magnitude(root.root, nu, gamma, grid.u_max) > 1e-12 * scale) {
            // The reference price understated the tail; rebuild at the root.
            grid = power_grid(nu, gamma, root.root);
            root = solve(grid);
            if (tail_magnitude(root.root, nu, gamma, grid.u_max) > 1e-12 * scale) {
                throw Error(ErrorCode::Convergence, "indifference_pricer",
                            "outer z-integral tail exceeds tolerance at the solved price");
            }
        }
        IndifferenceResult out;
        out.price = root.root;
        out.yield = detail::yield_or_zero(out.price, state_.t, T_);
        out.residual = power_equation(out.price, nu, gamma, grid);
        out.scale = power_scale(gamma, grid);
        out.iterations = root.iterations;
        return out;
    }

    IndifferenceResult price(const PricingRequest& req) const {
        if (req.numeraire != Numeraire::Bond) {
            throw Error(ErrorCode::Validation, "indifference_pricer", "BondNumerairePricer handles the bond numeraire");
        }
        if (req.T != T_) throw Error(ErrorCode::Validation, "indifference_pricer", "request maturity mismatch");
        return req.utility == Utility::Exponential ? price_exponential(req.nu, req.gamma)
                                                   : price_power(req.nu, req.gamma);
    }

private:
    std::pair<double, double> admissible(double nu) const {
        constexpr double lo = 1e-10;
        const double hi = nu > 0.0 ? state_.x / nu * (1.0 - 1e-10) : std::numeric_limits<double>::max() / 4.0;
        return {lo, hi};
    }

    double approximate_power_scale(double gamma) const {
        const double mean_wealth = state_.x * std::exp(log_mean_growth_);
        return boost::math::tgamma(gamma) * std::pow(mean_wealth, 1.0 - gamma) / std::abs(1.0 - gamma);
    }

    double tail_magnitude(double p, double nu, double gamma, double u) const {
        const double wealth = state_.x - nu * p;
        const double z = std::exp(u);
        return std::exp((gamma - 1.0) * u) * (std::abs(transform_.value(u + std::log(state_.x))) +
                                             std::exp(-z * nu) * std::abs(transform_.value(u + std::log(wealth))));
    }

    MarketState state_;
    double T_;
    QuadratureConfig quad_;
    GrowthLaplace transform_;
    double log_mean_growth_ = 0.0;
    double expected_discount_ = 1.0;
};

/// Indifference pricing with the money-market account as numeraire.
///
/// The bond pays 1 / G in account units, G = exp(int_t^T R ds). Short
/// positions (nu < 0) make the terminal wealth unbounded below whenever
/// int R ds is not a.s. constant; their expected utility is then infinite and
/// only the degenerate (deterministic-rate) case has a price.
class MoneyMarketNumerairePricer {
public:
    MoneyMarketNumerairePricer(const AffineModel& model, const MoneyMarketState& state, double T,
                               const QuadratureConfig& quad = {})
        : model_(model), state_(state), T_(T), quad_(quad) {
        state.validate();
        quad.validate();
        if (!(T >= state.t)) throw Error(ErrorCode::Domain, "indifference_pricer", "maturity must satisfy T >= t");
        const double log_disc =
            integrated_rate_log_cf(model, state.t, T, state.r, Complex(0.0, 1.0), quad.riccati_steps).real();
        const double log_growth =
            integrated_rate_log_cf(model, state.t, T, state.r, Complex(0.0, -1.0), quad.riccati_steps).real();
        expected_discount_ = std::exp(log_disc);
        // Jensen: log E[G] + log E[1/G] >= 0 with equality iff int R ds is constant.
        degenerate_ = (log_disc + log_growth) <= 1e-13;
    }

    double expected_discount() const { return expected_discount_; }
    bool degenerate() const { return degenerate_; }

    /// p = -(m / (gamma nu)) log E[exp(-(gamma nu / m) / G)].
    IndifferenceResult price_exponential(double nu, double gamma) const {
        PricingRequest req{T_, nu, gamma, Utility::Exponential, Numeraire::MoneyMarket};
        req.validate(state_.t);
        if (nu < 0.0) return short_position();
        const double s = std::log(gamma * nu / state_.m);
        const GrowthLaplace& tr = transform();
        const double log_integral = s < 0.0 ? detail::log_one_minus(tr.complement(s)) : std::log(tr.value(s));
        if (!std::isfinite(log_integral)) {
            throw Error(ErrorCode::Domain, "indifference_pricer",
                        "money-market exponential integral is not positive; check the quadrature");
        }
        IndifferenceResult out;
        out.price = -state_.m / (gamma * nu) * log_integral;
        out.yield = detail::yield_or_zero(out.price, state_.t, T_);
        // e^{-gamma (x - nu p) / m} E[...] - e^{-gamma x / m}, relative to e^{-gamma x / m}
        out.residual = std::expm1(gamma * nu * out.price / state_.m + log_integral);
        out.scale = 1.0;
        return out;
    }

    /// Power utility:
    ///   int_0^inf dz z^{gamma-2} e^{-z x/m} (1 - e^{z nu p/m} J(z)) = 0,
    ///   J(z) = E[exp(-(z nu / m) / G)].
    double power_equation(double p, double nu, double gamma, const detail::OuterGrid& grid) const {
        const double wealth = state_.x - nu * p;
        if (!(wealth > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        const GrowthLaplace& tr = transform();
        const double shift = std::log(nu / state_.m);
        const double xm = state_.x / state_.m, pm = nu * p / state_.m, wm = wealth / state_.m;
        double acc = 0.0;
        for (std::size_t k = 0; k < grid.u.size(); ++k) {
            const double z = grid.z[k];
            const double comp = tr.complement(grid.u[k] + shift);
            // e^{-z x/m}(1 - e^{z nu p/m}) + e^{-z (x - nu p)/m} (1 - J)
            const double lead = z * pm < 1.0 ? -std::exp(-z * xm) * std::expm1(z * pm)
                                             : std::exp(-z * xm) - std::exp(-z * wm);
            acc += grid.weight[k] * (lead + std::exp(-z * wm) * comp);
        }
        acc += -nu / state_.m * (p - expected_discount_) * std::exp(gamma * grid.u_min) / gamma;
        return acc;
    }

    double power_scale(double gamma) const {
        return boost::math::tgamma(gamma) * std::pow(state_.x / state_.m, 1.0 - gamma) / std::abs(1.0 - gamma);
    }

    detail::OuterGrid power_grid(double nu, double gamma, double p_ref) const {
        const double wm = (state_.x - nu * p_ref) / state_.m;
        if (!(wm > 0.0)) throw Error(ErrorCode::Domain, "indifference_pricer", "x - nu p must be > 0");
        const double xm = state_.x / state_.m;
        const double threshold = 1e-16 * std::max(1.0, power_scale(gamma));
        const double cap = detail::find_outer_cap(
            [&](double u) {
                const double z = std::exp(u);
                return std::exp((gamma - 1.0) * u) * (std::exp(-z * xm) + std::exp(-z * wm));
            },
            threshold, quad_.z_log_max, "indifference_pricer");
        return detail::OuterGrid(quad_.z_log_min, std::max(cap, quad_.z_log_min + 1.0), quad_.n_z, gamma);
    }

    IndifferenceResult price_power(double nu, double gamma) const {
        PricingRequest req{T_, nu, gamma, Utility::Power, Numeraire::MoneyMarket};
        req.validate(state_.t);
        if (nu < 0.0) return short_position();
        const double lo = 1e-10, hi = state_.x / nu * (1.0 - 1e-10);
        const double p_ref = std::clamp(expected_discount_, lo, hi);
        // The integrand decays at least like e^{-z (x - nu p)/m}; size the grid
        // for the largest admissible price near the reference.
        const auto grid = power_grid(nu, gamma, std::min(hi, 0.5 * (p_ref + hi)));
        const auto root = detail::solve_price([&](double p) { return power_equation(p, nu, gamma, grid); }, p_ref,
                                              lo, hi, "indifference_pricer");
        IndifferenceResult out;
        out.price = root.root;
        out.yield = detail::yield_or_zero(out.price, state_.t, T_);
        out.residual = power_equation(out.price, nu, gamma, grid);
        out.scale = power_scale(gamma);
        out.iterations = root.iterations;
        return out;
    }

    IndifferenceResult price(const PricingRequest& req) const {
        if (req.numeraire != Numeraire::MoneyMarket) {
            throw Error(ErrorCode::Validation, "indifference_pricer",
                        "MoneyMarketNumerairePricer handles the money-market numeraire");
        }
        return req.utility == Utility::Exponential ? price_exponential(req.nu, req.gamma)
                                                   : price_power(req.nu, req.gamma);
    }

private:
    const GrowthLaplace& transform() const {
        if (!transform_) {
            transform_.emplace(model_, state_.t, T_, state_.r, GrowthSide::Discount, quad_);
        }
        return *transform_;
    }

    IndifferenceResult short_position() const {
        if (!degenerate_) {
            throw Error(ErrorCode::Domain, "indifference_pricer",
                        "short bond positions under the money-market numeraire have unbounded losses when rates "
                        "are stochastic; expected utility is infinite");
        }
        // With int R ds deterministic the bond is riskless: p = exp(-int R ds).
        IndifferenceResult out;
        out.price = expected_discount_;
        out.yield = detail::yield_or_zero(out.price, state_.t, T_);
        out.residual = 0.0;
        out.scale = 1.0;
        return out;
    }

    AffineModel model_;
    MoneyMarketState state_;
    double T_;
    QuadratureConfig quad_;
    mutable std::optional<GrowthLaplace> transform_;
    double expected_discount_ = 1.0;
    bool degenerate_ = false;
};

inline IndifferenceResult indifference_price_exp(const AffineModel& model, const MarketState& state,
                                                 const PricingRequest& req, const QuadratureConfig& quad = {}) {
    if (req.utility != Utility::Exponential) {
        throw Error(ErrorCode::Validation, "indifference_pricer", "request is not for exponential utility");
    }
    req.validate(state.t);
    return BondNumerairePricer(model, state, req.T, quad).price_exponential(req.nu, req.gamma);
}

inline IndifferenceResult indifference_price_pow(const AffineModel& model, const MarketState& state,
                                                 const PricingRequest& req, const QuadratureConfig& quad = {}) {
    if (req.utility != Utility::Power) {
        throw Error(ErrorCode::Validation, "indifference_pricer", "request is not for power utility");
    }
    req.validate(state.t);
    return BondNumerairePricer(model, state, req.T, quad).price_power(req.nu, req.gamma);
}

inline IndifferenceResult indifference_price_exp_mmnumeraire(const AffineModel& model, const MoneyMarketState& state,
                                                             const PricingRequest& req,
                                                             const QuadratureConfig& quad = {}) {
    req.validate(state.t);
    return MoneyMarketNumerairePricer(model, state, req.T, quad).price_exponential(req.nu, req.gamma);
}

inline IndifferenceResult indifference_price_pow_mmnumeraire(const AffineModel& model, const MoneyMarketState& state,
                                                             const PricingRequest& req,
                                                             const QuadratureConfig& quad = {}) {
    req.validate(state.t);
    return MoneyMarketNumerairePricer(model, state, req.T, quad).price_power(req.nu, req.gamma);
}

/// Dispatch on utility and numeraire. The money-market account value m is
/// only used by the money-market numeraire.
inline IndifferenceResult indifference_price(const AffineModel& model, const MarketState& state, double m,
                                             const PricingRequest& req, const QuadratureConfig& quad = {}) {
    if (req.numeraire == Numeraire::Bond) {
        return req.utility == Utility::Exponential ? indifference_price_exp(model, state, req, quad)
                                                   : indifference_price_pow(model, state, req, quad);
    }
    const MoneyMarketState mm{state.t, state.x, m, state.r};
    return req.utility == Utility::Exponential ? indifference_price_exp_mmnumeraire(model, mm, req, quad)
                                               : indifference_price_pow_mmnumeraire(model, mm, req, quad);
}

}  // namespace bondindiff
