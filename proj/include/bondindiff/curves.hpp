#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "bondindiff/affine_model.hpp"
#include "bondindiff/errors.hpp"
#include "bondindiff/laplace.hpp"
#include "bondindiff/market.hpp"
#include "bondindiff/pricer.hpp"

namespace bondindiff {

enum class SweepKind { Gamma, Nu, Lambda };

inline const char* to_string(SweepKind k) {
    switch (k) {
        case SweepKind::Gamma: return "gamma";
        case SweepKind::Nu: return "nu";
        case SweepKind::Lambda: return "lambda";
    }
    return "?";
}

/// n maturities spaced geometrically on [lo, hi].
inline std::vector<double> geometric_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) {
        if (n == 1 && lo > 0.0) return {lo};
        throw Error(ErrorCode::Validation, "curves", "geometric grid needs 0 < lo < hi and n >= 2");
    }
    std::vector<double> g(static_cast<std::size_t>(n));
    const double ratio = std::log(hi / lo) / (n - 1);
    for (int k = 0; k < n; ++k) g[k] = lo * std::exp(ratio * k);
    g.front() = lo;
    g.back() = hi;
    return g;
}

inline std::vector<double> default_maturities() { return geometric_grid(0.25, 30.0, 60); }

struct CurveSpec {
    std::vector<double> maturities = default_maturities();
    SweepKind sweep = SweepKind::Gamma;
    std::vector<double> values{0.1, 0.125, 0.15, 0.175, 0.2};
    PricingRequest fixed{};  // T is taken from maturities, the swept field from values
    MarketState state{};
    double m = 5.0;  // money-market account value, money-market numeraire only
    AffineModel model = AffineModel::vasicek(reference_vasicek());
    QuadratureConfig quad{};
    bool reference = true;  // add the lambda = 0 market curve
    int threads = 0;

    void validate() const {
        state.validate();
        quad.validate();
        if (maturities.empty()) throw Error(ErrorCode::Validation, "curves", "maturity grid is empty");
        if (values.empty()) throw Error(ErrorCode::Validation, "curves", "sweep values are empty");
        for (std::size_t k = 0; k < maturities.size(); ++k) {
            if (!(maturities[k] > state.t) || !std::isfinite(maturities[k])) {
                throw Error(ErrorCode::Validation, "curves", "every maturity must exceed t");
            }
            if (k > 0 && !(maturities[k] > maturities[k - 1])) {
                throw Error(ErrorCode::Validation, "curves", "maturities must be strictly increasing");
            }
        }
        for (double v : values) {
            if (!std::isfinite(v)) throw Error(ErrorCode::Validation, "curves", "sweep values must be finite");
        }
        if (threads < 0) throw Error(ErrorCode::Validation, "curves", "threads must be >= 0");
    }
};

struct CurveRow {
    std::string series;  // "market", "indifference" or "implied-lambda"
    double T = 0.0;
    double sweep_value = 0.0;
    double yield = std::numeric_limits<double>::quiet_NaN();
    double price = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    double lambda = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";  // error code name for failed rows
    std::string message;

    bool ok() const { return status == "ok"; }
};

struct CurveTable {
    SweepKind sweep = SweepKind::Gamma;
    std::vector<CurveRow> rows;

    /// Rows of one series in maturity order.
    std::vector<CurveRow> series(const std::string& name, std::optional<double> value = std::nullopt) const {
        std::vector<CurveRow> out;
        for (const auto& r : rows) {
            if (r.series == name && (!value || r.sweep_value == *value)) out.push_back(r);
        }
        return out;
    }
};

namespace detail {

inline int series_rank(const std::string& s) { return s == "market" ? 0 : (s == "indifference" ? 1 : 2); }

inline void sort_rows(std::vector<CurveRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const CurveRow& a, const CurveRow& b) {
        return std::make_tuple(a.T, series_rank(a.series), a.sweep_value) <
               std::make_tuple(b.T, series_rank(b.series), b.sweep_value);
    });
}

/// Runs job(k) for k in [0, n) on a small pool; results land in
/// per-index slots so completion order does not matter.
template <class Job>
void parallel_for(std::size_t n, int threads, Job&& job) {
    unsigned w = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
    w = std::max(1u, std::min<unsigned>(w, static_cast<unsigned>(n)));
    if (w == 1) {
        for (std::size_t k = 0; k < n; ++k) job(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < w; ++i) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < n; k = next++) job(k);
        });
    }
    for (auto& th : pool) th.join();
}

inline CurveRow failed_row(std::string series, double T, double v, const std::exception& e) {
    CurveRow row;
    row.series = std::move(series);
    row.T = T;
    row.sweep_value = v;
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        row.status = to_string(err->code());
    } else {
        row.status = "internal";
    }
    row.message = e.what();
    return row;
}

inline PricingRequest swept_request(const CurveSpec& spec, double T, double v) {
    PricingRequest req = spec.fixed;
    req.T = T;
    if (spec.sweep == SweepKind::Gamma) req.gamma = v;
    if (spec.sweep == SweepKind::Nu) req.nu = v;
    return req;
}

inline CurveRow market_row(const VasicekParams& p, const MarketState& s, double T, double lambda) {
    CurveRow row;
    row.series = "market";
    row.T = T;
    row.sweep_value = lambda;
    row.lambda = lambda;
    row.price = market_bond_price(p, s.t, s.r, T, lambda);
    row.yield = market_yield(p, s.t, s.r, T, lambda);
    row.residual = 0.0;
    return row;
}

/// Indifference rows for one maturity, sharing one set of transform kernels.
inline std::vector<CurveRow> indifference_rows(const CurveSpec& spec, double T, bool with_lambda) {
    std::vector<CurveRow> out;
    const char* series = with_lambda ? "implied-lambda" : "indifference";
    std::optional<BondNumerairePricer> bond;
    std::optional<MoneyMarketNumerairePricer> money;
    try {
        if (spec.fixed.numeraire == Numeraire::Bond) {
            bond.emplace(spec.model, spec.state, T, spec.quad);
        } else {
            money.emplace(spec.model, MoneyMarketState{spec.state.t, spec.state.x, spec.m, spec.state.r}, T,
                          spec.quad);
        }
    } catch (const std::exception& e) {
        for (double v : spec.values) out.push_back(failed_row(series, T, v, e));
        return out;
    }
    for (double v : spec.values) {
        try {
            const PricingRequest req = swept_request(spec, T, v);
            req.validate(spec.state.t);
            const IndifferenceResult res = bond ? bond->price(req) : money->price(req);
            CurveRow row;
            row.series = series;
            row.T = T;
            row.sweep_value = v;
            row.price = res.price;
            row.yield = res.yield;
            row.residual = res.relative_residual();
            if (with_lambda) {
                row.lambda =
                    implied_lambda_from_price(*spec.model.vasicek_params(), spec.state.t, spec.state.r, T, res.price);
            }
            out.push_back(std::move(row));
        } catch (const std::exception& e) {
            out.push_back(failed_row(series, T, v, e));
        }
    }
    return out;
}

}  // namespace detail

/// Indifference yield curves over a gamma or nu sweep, one row per
/// (T, value), plus the lambda = 0 market curve for Vasicek models.
inline CurveTable build_indifference_curves(const CurveSpec& spec) {
    spec.validate();
    if (spec.sweep == SweepKind::Lambda) {
        throw Error(ErrorCode::Validation, "curves", "indifference curves sweep gamma or nu");
    }
    std::vector<std::vector<CurveRow>> slots(spec.maturities.size());
    detail::parallel_for(spec.maturities.size(), spec.threads, [&](std::size_t k) {
        const double T = spec.maturities[k];
        auto rows = detail::indifference_rows(spec, T, false);
        if (spec.reference && spec.model.is_vasicek()) {
            rows.push_back(detail::market_row(*spec.model.vasicek_params(), spec.state, T, 0.0));
        }
        slots[k] = std::move(rows);
    });
    CurveTable table;
    table.sweep = spec.sweep;
    for (auto& s : slots) table.rows.insert(table.rows.end(), s.begin(), s.end());
    detail::sort_rows(table.rows);
    return table;
}

/// Lambda sweep: market yield curves per lambda. Gamma or nu sweep: the
/// investor's implied price of risk per (T, value), with the indifference
/// price and yield it came from.
inline CurveTable build_lambda_curves(const CurveSpec& spec) {
    spec.validate();
    if (!spec.model.is_vasicek()) {
        throw Error(ErrorCode::Validation, "curves", "lambda curves need a Vasicek model");
    }
    const VasicekParams& p = *spec.model.vasicek_params();
    if (spec.sweep != SweepKind::Lambda && p.delta == 0.0) {
        throw Error(ErrorCode::Unidentifiable, "curves", "lambda is unidentifiable when delta = 0");
    }
    std::vector<std::vector<CurveRow>> slots(spec.maturities.size());
    detail::parallel_for(spec.maturities.size(), spec.threads, [&](std::size_t k) {
        const double T = spec.maturities[k];
        std::vector<CurveRow> rows;
        if (spec.sweep == SweepKind::Lambda) {
            for (double lambda : spec.values) {
                try {
                    rows.push_back(detail::market_row(p, spec.state, T, lambda));
                } catch (const std::exception& e) {
                    rows.push_back(detail::failed_row("market", T, lambda, e));
                }
            }
        } else {
            rows = detail::indifference_rows(spec, T, true);
        }
        slots[k] = std::move(rows);
    });
    CurveTable table;
    table.sweep = spec.sweep;
    for (auto& s : slots) table.rows.insert(table.rows.end(), s.begin(), s.end());
    detail::sort_rows(table.rows);
    return table;
}

/// The four figure sweeps on top of a base spec (state, model,
/// quadrature and grid are kept).
inline CurveSpec figure_spec(const std::string& figure, CurveSpec base = {}) {
    base.fixed.utility = Utility::Exponential;
    base.fixed.numeraire = Numeraire::Bond;
    if (figure == "fig1-left") {
        base.sweep = SweepKind::Gamma;
        base.values = {0.1, 0.125, 0.15, 0.175, 0.2};
        base.fixed.nu = 1.0;
    } else if (figure == "fig1-right") {
        base.sweep = SweepKind::Nu;
        base.values = {-4.5, -2.0, 1.0, 2.0, 4.5};
        base.fixed.gamma = 0.15;
    } else if (figure == "fig2-left") {
        base.sweep = SweepKind::Lambda;
        base.values = {-0.05, -0.025, 0.0, 0.025, 0.05};
    } else if (figure == "fig2-right") {
        base.sweep = SweepKind::Gamma;
        base.values = {0.1, 0.125, 0.15, 0.175, 0.2};
        base.fixed.nu = 1.0;
    } else {
        throw Error(ErrorCode::Validation, "curves",
                    "unknown figure '" + figure + "' (expected fig1-left, fig1-right, fig2-left, fig2-right)");
    }
    return base;
}

inline bool figure_uses_lambda_curves(const std::string& figure) { return figure.rfind("fig2", 0) == 0; }

}  // namespace bondindiff
