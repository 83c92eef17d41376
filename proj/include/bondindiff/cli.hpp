#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bondindiff/config.hpp"
#include "bondindiff/curves.hpp"
#include "bondindiff/errors.hpp"
#include "bondindiff/laplace.hpp"
#include "bondindiff/market.hpp"
#include "bondindiff/mc_oracle.hpp"
#include "bondindiff/pricer.hpp"

namespace bondindiff::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kConfig = 2, kValidation = 3, kNumeric = 4 };

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

using Cell = std::variant<double, std::string>;

/// Rows with named columns, emitted as CSV, JSON lines or gnuplot blocks.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> blocks;  // per-row gnuplot block label; empty means one block

    void add(std::vector<Cell> row, std::string block = {}) {
        rows.push_back(std::move(row));
        blocks.push_back(std::move(block));
    }
};

inline std::string cell_text(const Cell& c) {
    return std::holds_alternative<double>(c) ? format_number(std::get<double>(c)) : std::get<std::string>(c);
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

inline void emit(const Table& t, const std::string& format, std::ostream& out) {
    if (format == "jsonl") {
        for (const auto& row : t.rows) {
            nlohmann::ordered_json rec;
            for (std::size_t k = 0; k < t.columns.size(); ++k) {
                if (const auto* d = std::get_if<double>(&row[k])) {
                    // 12 significant digits, null for non-finite values
                    rec[t.columns[k]] = std::isfinite(*d) ? nlohmann::ordered_json(std::stod(format_number(*d)))
                                                          : nlohmann::ordered_json(nullptr);
                } else {
                    rec[t.columns[k]] = std::get<std::string>(row[k]);
                }
            }
            out << rec.dump() << '\n';
        }
        return;
    }
    if (format == "dat") {
        out << '#';
        for (const auto& c : t.columns) out << ' ' << c;
        out << '\n';
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            if (r == 0 || t.blocks[r] != t.blocks[r - 1]) {
                if (r > 0) out << "\n\n";
                if (!t.blocks[r].empty()) out << "# " << t.blocks[r] << '\n';
            }
            for (std::size_t k = 0; k < t.rows[r].size(); ++k) out << (k ? " " : "") << cell_text(t.rows[r][k]);
            out << '\n';
        }
        return;
    }
    for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << t.columns[k];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << csv_field(cell_text(row[k]));
        out << '\n';
    }
}

inline void print_error(std::ostream& err, const std::string& code, const std::string& module,
                        const std::string& message) {
    nlohmann::ordered_json rec;
    rec["code"] = code;
    rec["module"] = module;
    rec["message"] = message;
    err << rec.dump() << '\n';
}

namespace detail {

inline Table price_table(const RunConfig& cfg) {
    const AffineModel model = cfg.model();
    const IndifferenceResult res = indifference_price(model, cfg.state, cfg.m, cfg.request, cfg.quad);
    Table t;
    t.columns = {"utility", "numeraire", "gamma", "nu", "T", "price", "yield", "residual"};
    t.add({std::string(cfg.request.utility == Utility::Exponential ? "exp" : "power"),
           std::string(to_string(cfg.request.numeraire)), cfg.request.gamma, cfg.request.nu, cfg.request.T, res.price,
           res.yield, res.relative_residual()});
    return t;
}

inline Table yield_table(const RunConfig& cfg) {
    const AffineModel model = cfg.model();
    const IndifferenceResult res = indifference_price(model, cfg.state, cfg.m, cfg.request, cfg.quad);
    double market = std::numeric_limits<double>::quiet_NaN();
    if (model.is_vasicek()) market = market_yield(cfg.vasicek, cfg.state.t, cfg.state.r, cfg.request.T, cfg.lambda);
    Table t;
    t.columns = {"T", "yield", "market_yield", "lambda"};
    t.add({cfg.request.T, res.yield, market, cfg.lambda});
    return t;
}

inline Table implied_lambda_table(const RunConfig& cfg) {
    const AffineModel model = cfg.model();
    const IndifferenceResult res = indifference_price(model, cfg.state, cfg.m, cfg.request, cfg.quad);
    if (!model.is_vasicek()) {
        throw Error(ErrorCode::Validation, "market_model", "the market price of risk is defined for Vasicek models");
    }
    const double lambda = implied_lambda_from_price(cfg.vasicek, cfg.state.t, cfg.state.r, cfg.request.T, res.price);
    Table t;
    t.columns = {"T", "gamma", "nu", "price", "lambda"};
    t.add({cfg.request.T, cfg.request.gamma, cfg.request.nu, res.price, lambda});
    return t;
}

inline SweepKind parse_sweep(const std::string& s) {
    if (s == "gamma") return SweepKind::Gamma;
    if (s == "nu") return SweepKind::Nu;
    if (s == "lambda") return SweepKind::Lambda;
    throw Error(ErrorCode::ConfigParse, "cli", "--sweep must be gamma, nu or lambda");
}

inline Table curve_table(const RunConfig& cfg, const std::string& figure, const std::string& sweep,
                         const std::string& values, bool lambda_mode) {
    CurveSpec spec;
    spec.maturities = cfg.maturities();
    spec.fixed = cfg.request;
    spec.state = cfg.state;
    spec.m = cfg.m;
    spec.model = cfg.model();
    spec.quad = cfg.quad;
    spec.threads = cfg.curve_threads;
    bool lambda_curves = lambda_mode;
    if (!figure.empty()) {
        spec = figure_spec(figure, spec);
        lambda_curves = figure_uses_lambda_curves(figure);
    }
    if (!sweep.empty()) spec.sweep = parse_sweep(sweep);
    if (!values.empty()) spec.values = config_detail::parse_list("--values", values);
    if (spec.sweep == SweepKind::Lambda) lambda_curves = true;

    const CurveTable table = lambda_curves ? build_lambda_curves(spec) : build_indifference_curves(spec);
    const std::string name = to_string(spec.sweep);
    Table t;
    t.columns = {"series", "T", name, "yield", "price", "residual", "lambda", "status"};
    for (const auto& r : table.rows) {
        t.add({r.series, r.T, r.sweep_value, r.yield, r.price, r.residual, r.lambda, r.status},
              r.series + " " + name + "=" + format_number(r.sweep_value));
    }
    return t;
}

/// Regroups rows so each gnuplot block is contiguous.
inline Table group_blocks(const Table& t) {
    Table g;
    g.columns = t.columns;
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (!members.count(t.blocks[r])) order.push_back(t.blocks[r]);
        members[t.blocks[r]].push_back(r);
    }
    for (const auto& b : order) {
        for (std::size_t r : members[b]) g.add(t.rows[r], b);
    }
    return g;
}

inline Table oracle_table(const RunConfig& cfg, const std::string& verify, double z) {
    const AffineModel model = cfg.model();
    const PathBatch batch = simulate(model, cfg.state, cfg.request.T, cfg.oracle);
    double analytic = 0.0;
    McEstimate mc;
    std::string quantity;
    if (verify == "laplace") {
        quantity = "laplace";
        analytic = laplace_mm(model, cfg.state, cfg.request.T, z, cfg.quad);
        mc = mc_laplace(batch, z);
    } else if (verify == "price") {
        quantity = "price";
        analytic = indifference_price(model, cfg.state, cfg.m, cfg.request, cfg.quad).price;
        const McPrice p = mc_indifference_price(batch, cfg.state.x, cfg.request.nu, cfg.request.gamma,
                                                cfg.request.utility, cfg.request.numeraire, cfg.m);
        mc = {p.price, p.std_error};
    } else {
        throw Error(ErrorCode::ConfigParse, "cli", "--verify must be price or laplace");
    }
    const double diff = analytic - mc.estimate;
    const double score = mc.std_error > 0.0 ? diff / mc.std_error : (diff == 0.0 ? 0.0 : INFINITY);
    const bool pass = std::abs(diff) <= 3.0 * mc.std_error + 1e-12 * std::max(1.0, std::abs(analytic));
    Table t;
    t.columns = {"quantity", "analytic", "mc", "std_error", "z_score", "verdict"};
    t.add({quantity, analytic, mc.estimate, mc.std_error, score, std::string(pass ? "PASS" : "FAIL")});
    return t;
}

inline int exit_code_for(ErrorCode c) {
    if (c == ErrorCode::ConfigParse) return kConfig;
    if (c == ErrorCode::Validation) return kValidation;
    return kNumeric;
}

}  // namespace detail

/// Command-line entry point. args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Utility-indifference bond pricing under affine short-rate models", "bondindiff"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_help_all_flag("--help-all");

    std::string config_path;
    std::vector<std::string> settings;
    app.add_option("-c,--config", config_path, "INI-style config file");
    app.add_option("--set", settings, "Override any config key: section.key=value")->take_all();

    // flag -> config key; applied after the config file
    const std::vector<std::pair<std::string, std::string>> flag_keys = {
        {"--utility", "request.utility"},     {"--numeraire", "request.numeraire"}, {"--gamma", "request.gamma"},
        {"--nu", "request.nu"},               {"--maturity", "request.maturity"},   {"--t", "state.t"},
        {"--x", "state.x"},                   {"--r", "state.r"},                   {"--m", "state.m"},
        {"--kappa", "model.kappa"},           {"--theta", "model.theta"},           {"--delta", "model.delta"},
        {"--lambda", "market.lambda"},        {"--paths", "oracle.paths"},          {"--steps", "oracle.steps"},
        {"--seed", "oracle.seed"},            {"--scheme", "oracle.scheme"},        {"--threads", "oracle.threads"},
        {"--format", "output.format"},        {"--output", "output.path"},          {"--t-min", "curve.t_min"},
        {"--t-max", "curve.t_max"},           {"--points", "curve.points"},
    };
    std::map<std::string, std::string> flag_values;
    std::vector<std::pair<CLI::Option*, std::string>> flag_options;
    for (const auto& [flag, key] : flag_keys) {
        flag_options.emplace_back(app.add_option(flag, flag_values[key], "Overrides " + key), key);
    }

    auto* price = app.add_subcommand("price", "Indifference price for the configured request");
    auto* yield = app.add_subcommand("yield", "Indifference yield next to the market yield");
    auto* curve = app.add_subcommand("curve", "Yield or price-of-risk curves over maturity");
    auto* implied = app.add_subcommand("implied-lambda", "Investor's indifference price of interest-rate risk");
    auto* oracle = app.add_subcommand("oracle", "Compare an analytic value with the Monte Carlo oracle");
    auto* dump = app.add_subcommand("dump-config", "Print the effective configuration");

    std::string figure, sweep, values;
    bool lambda_mode = false;
    curve->add_option("--figure", figure, "fig1-left | fig1-right | fig2-left | fig2-right");
    curve->add_option("--sweep", sweep, "gamma | nu | lambda");
    curve->add_option("--values", values, "Comma-separated sweep values");
    curve->add_flag("--implied-lambda", lambda_mode, "Report implied lambda for a gamma or nu sweep");

    std::string verify = "price";
    double z = 0.5;
    oracle->add_option("--verify", verify, "price | laplace");
    oracle->add_option("--z", z, "Transform argument for --verify laplace");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::Success&) {
        const CLI::App* target = &app;
        for (const auto* sub : app.get_subcommands()) target = sub;
        out << target->help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        print_error(err, "usage", "cli", e.what());
        return kUsage;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw Error(ErrorCode::ConfigParse, "config", "cannot open config file '" + config_path + "'");
            cfg = load_config(in, cfg);
        }
        for (const auto& [opt, key] : flag_options) {
            if (opt->count() > 0) apply_setting(cfg, key, flag_values[key]);
        }
        for (const auto& s : settings) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                throw Error(ErrorCode::ConfigParse, "config", "--set expects section.key=value, got '" + s + "'");
            }
            apply_setting(cfg, config_detail::trim(s.substr(0, eq)), s.substr(eq + 1));
        }
        cfg.validate();

        std::ofstream file;
        std::ostream* sink = &out;
        if (!cfg.output_path.empty() && !dump->parsed()) {
            file.open(cfg.output_path, std::ios::binary);
            if (!file) throw Error(ErrorCode::Validation, "cli", "cannot write '" + cfg.output_path + "'");
            sink = &file;
        }

        if (dump->parsed()) {
            out << dump_config(cfg);
            return kOk;
        }
        Table table;
        if (price->parsed()) table = detail::price_table(cfg);
        if (yield->parsed()) table = detail::yield_table(cfg);
        if (implied->parsed()) table = detail::implied_lambda_table(cfg);
        if (oracle->parsed()) table = detail::oracle_table(cfg, verify, z);
        if (curve->parsed()) {
            table = detail::curve_table(cfg, figure, sweep, values, lambda_mode);
            if (cfg.format == "dat") table = detail::group_blocks(table);
        }
        emit(table, cfg.format, *sink);
        sink->flush();
        return kOk;
    } catch (const Error& e) {
        print_error(err, to_string(e.code()), e.module(), e.what());
        return detail::exit_code_for(e.code());
    } catch (const std::exception& e) {
        print_error(err, "internal", "cli", e.what());
        return kNumeric;
    }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<std::string> args;
    for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
    return run(args, out, err);
}

}  // namespace bondindiff::cli
