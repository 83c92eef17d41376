#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "bondindiff/affine_model.hpp"
#include "bondindiff/errors.hpp"
#include "bondindiff/laplace.hpp"
#include "bondindiff/pricer.hpp"

namespace bondindiff {

enum class Scheme { Euler, ExactVasicek };

inline const char* to_string(Scheme s) { return s == Scheme::Euler ? "euler" : "exact-vasicek"; }

struct SimConfig {
    std::int64_t n_paths = 100000;
    int n_steps = 500;
    std::uint64_t seed = 20240611;
    Scheme scheme = Scheme::ExactVasicek;
    int threads = 0;  // 0: hardware concurrency

    void validate() const {
        if (n_paths < 1) throw Error(ErrorCode::Validation, "mc_oracle", "n_paths must be >= 1");
        if (n_steps < 1) throw Error(ErrorCode::Validation, "mc_oracle", "n_steps must be >= 1");
        if (threads < 0) throw Error(ErrorCode::Validation, "mc_oracle", "threads must be >= 0");
    }
};

struct PathBatch {
    double t = 0.0;
    double T = 0.0;
    double x = 0.0;
    std::vector<double> terminal_R;
    std::vector<double> terminal_X;
    std::vector<double> integrated_R;

    std::size_t size() const { return terminal_X.size(); }
};

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

struct McPrice {
    double price = 0.0;
    double std_error = 0.0;
    double ci_halfwidth = 0.0;  // 3 standard errors
};

namespace detail {

// SplitMix64: one independent stream per (seed, path).
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    explicit SplitMix64(std::uint64_t state) : state_(state) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path) {
    SplitMix64 mix(seed ^ (0x632be59bd9b4e019ULL * (path + 1)));
    mix();
    return mix();
}

struct ExactStep {
    double b = 1.0;       // e^{-k dt}
    double drift_i = 0;   // theta dt
    double load_i = 0;    // (1 - b) / k
    double sd_r = 0;
    double load_z1 = 0;   // Cov(R, I) / sd_r
    double sd_z2 = 0;     // residual sd of I
};

inline ExactStep exact_step(const VasicekParams& p, double dt) {
    const double k = p.kappa, d2 = p.delta * p.delta;
    ExactStep s;
    s.b = std::exp(-k * dt);
    const double one_minus_b = -std::expm1(-k * dt);
    s.drift_i = p.theta * dt;
    s.load_i = one_minus_b / k;
    const double var_r = d2 * one_minus_b * (1.0 + s.b) / (2.0 * k);
    const double cov = d2 * one_minus_b * one_minus_b / (2.0 * k * k);
    // dt - 2 (1 - b)/k + (1 - b^2)/(2k), summed as a series for small k dt
    const double x = k * dt;
    double bracket = 0.0;
    if (x < 0.1) {
        // 2 sum_{n>=3} (-1)^{n+1} (2^{n-2} - 1) x^n / n!, over k
        double term_fact = 6.0, xn = x * x * x;
        double pow2 = 2.0;  // 2^{n-2} at n = 3
        int sign = 1;
        for (int n = 3; n <= 26; ++n) {
            bracket += sign * xn * (pow2 - 1.0) / term_fact;
            xn *= x;
            term_fact *= n + 1;
            pow2 *= 2.0;
            sign = -sign;
        }
        bracket *= 2.0 / k;
    } else {
        bracket = dt - 2.0 * one_minus_b / k + one_minus_b * (1.0 + s.b) / (2.0 * k);
    }
    const double var_i = d2 / (k * k) * bracket;
    s.sd_r = std::sqrt(var_r);
    s.load_z1 = s.sd_r > 0.0 ? cov / s.sd_r : 0.0;
    s.sd_z2 = std::sqrt(std::max(var_i - s.load_z1 * s.load_z1, 0.0));
    return s;
}

}  // namespace detail

/// Simulates (R, int R ds, X) on [state.t, T]. Each path draws from its own
/// counter-seeded stream, so output is independent of the thread count.
inline PathBatch simulate(const AffineModel& model, const MarketState& state, double T, const SimConfig& cfg) {
    state.validate();
    cfg.validate();
    if (!(T >= state.t)) throw Error(ErrorCode::Domain, "mc_oracle", "maturity must satisfy T >= t");
    if (cfg.scheme == Scheme::ExactVasicek && !model.is_vasicek()) {
        throw Error(ErrorCode::SchemeMismatch, "mc_oracle", "exact-vasicek scheme requires a Vasicek model");
    }
    const auto n = static_cast<std::size_t>(cfg.n_paths);
    PathBatch batch;
    batch.t = state.t;
    batch.T = T;
    batch.x = state.x;
    batch.terminal_R.resize(n);
    batch.terminal_X.resize(n);
    batch.integrated_R.resize(n);

    const double dt = (T - state.t) / cfg.n_steps;
    detail::ExactStep step;
    double theta = 0.0;
    if (cfg.scheme == Scheme::ExactVasicek) {
        step = detail::exact_step(*model.vasicek_params(), dt);
        theta = model.vasicek_params()->theta;
    }

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            detail::SplitMix64 rng(detail::path_seed(cfg.seed, i));
            std::normal_distribution<double> normal;
            double r = state.r, integral = 0.0;
            if (T > state.t) {
                if (cfg.scheme == Scheme::ExactVasicek) {
                    for (int k = 0; k < cfg.n_steps; ++k) {
                        const double z1 = normal(rng), z2 = normal(rng);
                        integral += step.drift_i + (r - theta) * step.load_i + step.load_z1 * z1 + step.sd_z2 * z2;
                        r = theta + (r - theta) * step.b + step.sd_r * z1;
                    }
                } else {
                    const double sq = std::sqrt(dt);
                    for (int k = 0; k < cfg.n_steps; ++k) {
                        const double s = state.t + k * dt;
                        const double z = normal(rng);
                        const double next = r + model.drift(s, r) * dt +
                                            std::sqrt(std::max(model.variance(s, r), 0.0)) * sq * z;
                        integral += 0.5 * (r + next) * dt;
                        r = next;
                    }
                }
            }
            batch.terminal_R[i] = r;
            batch.integrated_R[i] = integral;
            batch.terminal_X[i] = state.x * std::exp(integral);
        }
    };

    unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, n / 1024))));
    if (threads == 1) {
        run_range(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const std::size_t b = std::min(n, w * chunk), e = std::min(n, b + chunk);
            pool.emplace_back(run_range, b, e);
        }
        for (auto& th : pool) th.join();
    }
    return batch;
}

namespace detail {

inline McEstimate mean_and_error(const std::vector<double>& v) {
    const auto n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double a : v) mean += a;
    mean /= n;
    double ss = 0.0;
    for (double a : v) ss += (a - mean) * (a - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace detail

/// Sample mean and standard error of exp(-z X_T).
inline McEstimate mc_laplace(const PathBatch& batch, double z) {
    if (!(z >= 0.0) || !std::isfinite(z)) throw Error(ErrorCode::Domain, "mc_oracle", "z must be >= 0");
    if (batch.size() < 2) {
        throw Error(ErrorCode::DegenerateSample, "mc_oracle", "standard error needs at least two paths");
    }
    if (z == 0.0) return {1.0, 0.0};
    std::vector<double> v(batch.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-z * batch.terminal_X[i]);
    return detail::mean_and_error(v);
}

/// Solves the indifference equation on the simulated sample by bisection with
/// common random numbers on both sides. Terminal wealth in numeraire units:
///   bond:          W0 = x G,   W1 = (x - nu p) G + nu
///   money market:  W0 = x / m, W1 = (x - nu p) / m + (nu / m) / G
/// with G = exp(int R ds). The standard error is the delta-method error of
/// the utility gap divided by its slope in p.
inline McPrice mc_indifference_price(const PathBatch& batch, double x, double nu, double gamma, Utility utility,
                                     Numeraire numeraire = Numeraire::Bond, double m = 0.0) {
    if (batch.size() < 2) {
        throw Error(ErrorCode::DegenerateSample, "mc_oracle", "standard error needs at least two paths");
    }
    if (!(x > 0.0) || !(gamma > 0.0) || nu == 0.0 || (utility == Utility::Power && gamma == 1.0)) {
        throw Error(ErrorCode::Validation, "mc_oracle", "invalid (x, nu, gamma) for the oracle");
    }
    if (m <= 0.0) m = x;
    const std::size_t n = batch.size();
    std::vector<double> growth(n);
    for (std::size_t i = 0; i < n; ++i) growth[i] = std::exp(batch.integrated_R[i]);

    auto utility_of = [&](double w) {
        if (utility == Utility::Exponential) return -std::exp(-gamma * w);
        if (!(w > 0.0)) return -std::numeric_limits<double>::infinity();
        return std::pow(w, 1.0 - gamma) / (1.0 - gamma);
    };
    auto marginal = [&](double w) {
        return utility == Utility::Exponential ? gamma * std::exp(-gamma * w) : std::pow(w, -gamma);
    };
    auto wealth0 = [&](std::size_t i) { return numeraire == Numeraire::Bond ? x * growth[i] : x / m; };
    auto wealth1 = [&](std::size_t i, double p) {
        return numeraire == Numeraire::Bond ? (x - nu * p) * growth[i] + nu : (x - nu * p) / m + nu / m / growth[i];
    };
    std::vector<double> base(n);
    for (std::size_t i = 0; i < n; ++i) base[i] = utility_of(wealth0(i));
    auto gap = [&](double p) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += utility_of(wealth1(i, p)) - base[i];
        return acc / static_cast<double>(n);
    };

    // gap is monotone in p with sign -nu.
    double discount = 0.0;
    for (double g : growth) discount += 1.0 / g;
    discount /= static_cast<double>(n);
    double lo = discount, hi = discount;
    auto increasing_side = [&](double p) { return nu > 0.0 ? gap(p) > 0.0 : gap(p) < 0.0; };
    // Below the root the buyer gains (gap > 0 for nu > 0).
    const double cap = nu > 0.0 ? x / nu : std::numeric_limits<double>::max();
    for (int j = 0; j < 200 && increasing_side(lo) == false; ++j) lo *= 0.5;
    for (int j = 0; j < 200 && increasing_side(hi); ++j) hi = std::min(2.0 * hi, 0.5 * (hi + cap));
    if (!increasing_side(lo) || increasing_side(hi)) {
        throw Error(ErrorCode::Bracket, "mc_oracle", "indifference price is not bracketed on the sample");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (increasing_side(mid)) lo = mid;
        else hi = mid;
    }
    const double price = 0.5 * (lo + hi);

    std::vector<double> diff(n);
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w1 = wealth1(i, price);
        diff[i] = utility_of(w1) - base[i];
        const double dw_dp = numeraire == Numeraire::Bond ? -nu * growth[i] : -nu / m;
        slope += marginal(w1) * dw_dp;
    }
    slope /= static_cast<double>(n);
    const McEstimate g = detail::mean_and_error(diff);
    McPrice out;
    out.price = price;
    out.std_error = slope != 0.0 && std::isfinite(g.std_error) ? g.std_error / std::abs(slope) : 0.0;
    out.ci_halfwidth = 3.0 * out.std_error;
    return out;
}

}  // namespace bondindiff
