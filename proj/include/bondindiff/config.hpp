#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bondindiff/affine_model.hpp"
#include "bondindiff/curves.hpp"
#include "bondindiff/errors.hpp"
#include "bondindiff/laplace.hpp"
#include "bondindiff/mc_oracle.hpp"
#include "bondindiff/pricer.hpp"

namespace bondindiff {

/// Piecewise-linear coefficient of time, flat outside the knots.
class CoefficientTable {
public:
    CoefficientTable(std::vector<double> times, std::vector<double> values)
        : times_(std::move(times)), values_(std::move(values)) {
        if (times_.empty() || times_.size() != values_.size()) {
            throw Error(ErrorCode::Validation, "config", "coefficient table needs one value per time knot");
        }
        for (std::size_t k = 1; k < times_.size(); ++k) {
            if (!(times_[k] > times_[k - 1])) {
                throw Error(ErrorCode::Validation, "config", "coefficient knots must be strictly increasing");
            }
        }
    }

    double operator()(double t) const {
        if (t <= times_.front()) return values_.front();
        if (t >= times_.back()) return values_.back();
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const std::size_t k = static_cast<std::size_t>(it - times_.begin());
        const double w = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
        return values_[k - 1] + w * (values_[k] - values_[k - 1]);
    }

private:
    std::vector<double> times_, values_;
};

struct RunConfig {
    std::string model_type = "vasicek";
    VasicekParams vasicek = reference_vasicek();
    std::vector<double> times{0.0};
    std::vector<double> mu0{reference_vasicek().kappa * reference_vasicek().theta};
    std::vector<double> mu1{-reference_vasicek().kappa};
    std::vector<double> sig0{reference_vasicek().delta * reference_vasicek().delta};
    std::vector<double> sig1{0.0};
    double lambda = 0.0;

    MarketState state{};
    double m = 5.0;
    PricingRequest request{};
    QuadratureConfig quad{};
    SimConfig oracle{};

    std::string format = "csv";
    std::string output_path;

    double curve_t_min = 0.25;
    double curve_t_max = 30.0;
    int curve_points = 60;
    int curve_threads = 0;

    AffineModel model() const {
        if (model_type == "vasicek") return AffineModel::vasicek(vasicek);
        return AffineModel(CoefficientTable(times, mu0), CoefficientTable(times, mu1), CoefficientTable(times, sig0),
                           CoefficientTable(times, sig1));
    }

    std::vector<double> maturities() const {
        if (curve_points == 1) return {curve_t_max};
        return geometric_grid(curve_t_min, curve_t_max, curve_points);
    }

    void validate() const {
        if (model_type != "vasicek" && model_type != "affine") {
            throw Error(ErrorCode::Validation, "config", "model.type must be vasicek or affine");
        }
        (void)model();
        if (model_type == "vasicek") vasicek.validate();
        state.validate();
        if (!(m > 0.0) || !std::isfinite(m)) throw Error(ErrorCode::Validation, "config", "state.m must be > 0");
        if (!std::isfinite(lambda)) throw Error(ErrorCode::Validation, "config", "market.lambda must be finite");
        request.validate(state.t);
        quad.validate();
        oracle.validate();
        if (format != "csv" && format != "jsonl" && format != "dat") {
            throw Error(ErrorCode::Validation, "config", "output.format must be csv, jsonl or dat");
        }
        if (curve_points < 1) throw Error(ErrorCode::Validation, "config", "curve.points must be >= 1");
        if (curve_threads < 0) throw Error(ErrorCode::Validation, "config", "curve.threads must be >= 0");
        if (!(curve_t_min > state.t) || !(curve_t_max >= curve_t_min)) {
            throw Error(ErrorCode::Validation, "config", "curve maturities need t < t_min <= t_max");
        }
    }
};

namespace config_detail {

inline std::string format_exact(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
    return std::string(buf, res.ptr);
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ConfigParse, "config", "'" + key + "' expects a number, got '" + text + "'");
    }
    return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    Int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ConfigParse, "config", "'" + key + "' expects an integer, got '" + text + "'");
    }
    return v;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw Error(ErrorCode::ConfigParse, "config", "'" + key + "' expects a comma-separated list");
    return out;
}

inline std::string format_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + format_exact(v[k]);
    return s;
}

struct Key {
    std::string section;
    std::string name;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;

    std::string full() const { return section + "." + name; }
};

template <class Getter>
Key real(std::string section, std::string name, Getter field) {
    const std::string full = section + "." + name;
    return {section, name, [field](const RunConfig& c) {
                RunConfig copy = c;
                return format_exact(field(copy));
            },
            [field, full](RunConfig& c, const std::string& v) { field(c) = parse_double(full, v); }};
}

template <class Int, class Getter>
Key integer(std::string section, std::string name, Getter field) {
    const std::string full = section + "." + name;
    return {section, name, [field](const RunConfig& c) {
                RunConfig copy = c;
                return std::to_string(field(copy));
            },
            [field, full](RunConfig& c, const std::string& v) { field(c) = parse_int<Int>(full, v); }};
}

template <class Getter>
Key list(std::string section, std::string name, Getter field) {
    const std::string full = section + "." + name;
    return {section, name, [field](const RunConfig& c) {
                RunConfig copy = c;
                return format_list(field(copy));
            },
            [field, full](RunConfig& c, const std::string& v) { field(c) = parse_list(full, v); }};
}

inline Utility parse_utility(const std::string& s) {
    if (s == "exp" || s == "exponential") return Utility::Exponential;
    if (s == "power" || s == "pow") return Utility::Power;
    throw Error(ErrorCode::ConfigParse, "config", "request.utility must be exp or power, got '" + s + "'");
}

inline Numeraire parse_numeraire(const std::string& s) {
    if (s == "bond") return Numeraire::Bond;
    if (s == "money-market" || s == "mm") return Numeraire::MoneyMarket;
    throw Error(ErrorCode::ConfigParse, "config", "request.numeraire must be bond or money-market, got '" + s + "'");
}

inline Scheme parse_scheme(const std::string& s) {
    if (s == "exact-vasicek" || s == "exact") return Scheme::ExactVasicek;
    if (s == "euler") return Scheme::Euler;
    throw Error(ErrorCode::ConfigParse, "config", "oracle.scheme must be euler or exact-vasicek, got '" + s + "'");
}

inline const std::vector<Key>& keys() {
    static const std::vector<Key> table = [] {
        std::vector<Key> k;
        k.push_back({"model", "type", [](const RunConfig& c) { return c.model_type; },
                     [](RunConfig& c, const std::string& v) {
                         if (v != "vasicek" && v != "affine") {
                             throw Error(ErrorCode::ConfigParse, "config", "model.type must be vasicek or affine");
                         }
                         c.model_type = v;
                     }});
        k.push_back(real("model", "kappa", [](RunConfig& c) -> double& { return c.vasicek.kappa; }));
        k.push_back(real("model", "theta", [](RunConfig& c) -> double& { return c.vasicek.theta; }));
        k.push_back(real("model", "delta", [](RunConfig& c) -> double& { return c.vasicek.delta; }));
        k.push_back(list("model", "times", [](RunConfig& c) -> std::vector<double>& { return c.times; }));
        k.push_back(list("model", "mu0", [](RunConfig& c) -> std::vector<double>& { return c.mu0; }));
        k.push_back(list("model", "mu1", [](RunConfig& c) -> std::vector<double>& { return c.mu1; }));
        k.push_back(list("model", "sig0", [](RunConfig& c) -> std::vector<double>& { return c.sig0; }));
        k.push_back(list("model", "sig1", [](RunConfig& c) -> std::vector<double>& { return c.sig1; }));
        k.push_back(real("market", "lambda", [](RunConfig& c) -> double& { return c.lambda; }));
        k.push_back(real("state", "t", [](RunConfig& c) -> double& { return c.state.t; }));
        k.push_back(real("state", "x", [](RunConfig& c) -> double& { return c.state.x; }));
        k.push_back(real("state", "r", [](RunConfig& c) -> double& { return c.state.r; }));
        k.push_back(real("state", "m", [](RunConfig& c) -> double& { return c.m; }));
        k.push_back({"request", "utility",
                     [](const RunConfig& c) {
                         return std::string(c.request.utility == Utility::Exponential ? "exp" : "power");
                     },
                     [](RunConfig& c, const std::string& v) { c.request.utility = parse_utility(v); }});
        k.push_back({"request", "numeraire", [](const RunConfig& c) { return std::string(to_string(c.request.numeraire)); },
                     [](RunConfig& c, const std::string& v) { c.request.numeraire = parse_numeraire(v); }});
        k.push_back(real("request", "gamma", [](RunConfig& c) -> double& { return c.request.gamma; }));
        k.push_back(real("request", "nu", [](RunConfig& c) -> double& { return c.request.nu; }));
        k.push_back(real("request", "maturity", [](RunConfig& c) -> double& { return c.request.T; }));
        k.push_back(real("quadrature", "omega_i", [](RunConfig& c) -> double& { return c.quad.omega_i; }));
        k.push_back(real("quadrature", "omega_i_neg", [](RunConfig& c) -> double& { return c.quad.omega_i_neg; }));
        k.push_back(real("quadrature", "omega_max", [](RunConfig& c) -> double& { return c.quad.omega_max; }));
        k.push_back(integer<int>("quadrature", "n_omega", [](RunConfig& c) -> int& { return c.quad.n_omega; }));
        k.push_back(real("quadrature", "z_log_min", [](RunConfig& c) -> double& { return c.quad.z_log_min; }));
        k.push_back(real("quadrature", "z_log_max", [](RunConfig& c) -> double& { return c.quad.z_log_max; }));
        k.push_back(integer<int>("quadrature", "n_z", [](RunConfig& c) -> int& { return c.quad.n_z; }));
        k.push_back(real("quadrature", "tol", [](RunConfig& c) -> double& { return c.quad.tol; }));
        k.push_back(integer<int>("quadrature", "riccati_steps",
                                 [](RunConfig& c) -> int& { return c.quad.riccati_steps; }));
        k.push_back(integer<std::int64_t>("oracle", "paths",
                                          [](RunConfig& c) -> std::int64_t& { return c.oracle.n_paths; }));
        k.push_back(integer<int>("oracle", "steps", [](RunConfig& c) -> int& { return c.oracle.n_steps; }));
        k.push_back(integer<std::uint64_t>("oracle", "seed",
                                           [](RunConfig& c) -> std::uint64_t& { return c.oracle.seed; }));
        k.push_back({"oracle", "scheme", [](const RunConfig& c) { return std::string(to_string(c.oracle.scheme)); },
                     [](RunConfig& c, const std::string& v) { c.oracle.scheme = parse_scheme(v); }});
        k.push_back(integer<int>("oracle", "threads", [](RunConfig& c) -> int& { return c.oracle.threads; }));
        k.push_back({"output", "format", [](const RunConfig& c) { return c.format; },
                     [](RunConfig& c, const std::string& v) {
                         if (v != "csv" && v != "jsonl" && v != "dat") {
                             throw Error(ErrorCode::ConfigParse, "config", "output.format must be csv, jsonl or dat");
                         }
                         c.format = v;
                     }});
        k.push_back({"output", "path", [](const RunConfig& c) { return c.output_path; },
                     [](RunConfig& c, const std::string& v) { c.output_path = v; }});
        k.push_back(real("curve", "t_min", [](RunConfig& c) -> double& { return c.curve_t_min; }));
        k.push_back(real("curve", "t_max", [](RunConfig& c) -> double& { return c.curve_t_max; }));
        k.push_back(integer<int>("curve", "points", [](RunConfig& c) -> int& { return c.curve_points; }));
        k.push_back(integer<int>("curve", "threads", [](RunConfig& c) -> int& { return c.curve_threads; }));
        return k;
    }();
    return table;
}

inline const Key* find_key(const std::string& full) {
    for (const auto& k : keys()) {
        if (k.full() == full) return &k;
    }
    return nullptr;
}

}  // namespace config_detail

/// Sets one "section.key" entry from its text form.
inline void apply_setting(RunConfig& cfg, const std::string& full_key, const std::string& value) {
    const auto* key = config_detail::find_key(full_key);
    if (!key) throw Error(ErrorCode::ConfigParse, "config", "unknown config key '" + full_key + "'");
    key->set(cfg, config_detail::trim(value));
}

/// Reads an INI-style file on top of `base`. Unknown sections or keys fail.
inline RunConfig load_config(std::istream& in, RunConfig base = {}) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw Error(ErrorCode::ConfigParse, "config", e.what());
    }
    for (const auto& [section, entries] : tree) {
        if (entries.empty() && !entries.data().empty()) {
            throw Error(ErrorCode::ConfigParse, "config", "key '" + section + "' must sit inside a [section]");
        }
        for (const auto& [name, value] : entries) apply_setting(base, section + "." + name, value.data());
    }
    return base;
}

inline RunConfig load_config_text(const std::string& text, RunConfig base = {}) {
    std::istringstream in(text);
    return load_config(in, std::move(base));
}

/// Every key, grouped by section, in a form load_config reads back exactly.
inline std::string dump_config(const RunConfig& cfg) {
    std::string out, section;
    for (const auto& k : config_detail::keys()) {
        if (k.section != section) {
            out += (section.empty() ? "" : "\n") + std::string("[") + k.section + "]\n";
            section = k.section;
        }
        out += k.name + " = " + k.get(cfg) + "\n";
    }
    return out;
}

}  // namespace bondindiff
