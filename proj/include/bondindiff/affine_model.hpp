#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "bondindiff/errors.hpp"
#include "bondindiff/gamma.hpp"

namespace bondindiff {

/// Vasicek short rate dR = kappa (theta - R) dt + delta dW.
struct VasicekParams {
    double kappa = 0.05;
    double theta = 0.03;
    double delta = 0.0;

    void validate() const {
        if (!std::isfinite(kappa) || !std::isfinite(theta) || !std::isfinite(delta)) {
            throw Error(ErrorCode::Validation, "affine_model", "Vasicek parameters must be finite");
        }
        // The closed form has a removable singularity at kappa = 0 which is not
        // handled; below this threshold use the numeric Riccati solver.
        if (kappa < 1e-8) {
            throw Error(ErrorCode::Validation, "affine_model",
                        "Vasicek kappa must be >= 1e-8 (use a generic affine model for kappa -> 0)");
        }
        if (delta < 0.0) throw Error(ErrorCode::Validation, "affine_model", "Vasicek delta must be >= 0");
    }
};

/// Parameters of the running example: kappa = 0.05, theta = 0.03,
/// delta = sqrt(2 kappa^2 theta).
inline VasicekParams reference_vasicek() {
    VasicekParams p;
    p.kappa = 0.05;
    p.theta = 0.03;
    p.delta = std::sqrt(2.0 * p.kappa * p.kappa * p.theta);
    return p;
}

using CoefficientFn = std::function<double(double)>;

/// One-factor affine short rate:
///   mu(t, r)      = mu0(t) + mu1(t) r
///   sigma^2(t, r) = sig0(t) + sig1(t) r
/// Immutable after construction. Vasicek models remember their parameters so
/// callers can use closed forms.
class AffineModel {
public:
    AffineModel(CoefficientFn mu0, CoefficientFn mu1, CoefficientFn sig0, CoefficientFn sig1)
        : mu0_(std::move(mu0)), mu1_(std::move(mu1)), sig0_(std::move(sig0)), sig1_(std::move(sig1)) {
        if (!mu0_ || !mu1_ || !sig0_ || !sig1_) {
            throw Error(ErrorCode::Validation, "affine_model", "affine coefficient functions must be set");
        }
    }

    static AffineModel vasicek(const VasicekParams& p) {
        p.validate();
        AffineModel m([p](double) { return p.kappa * p.theta; }, [p](double) { return -p.kappa; },
                      [p](double) { return p.delta * p.delta; }, [](double) { return 0.0; });
        m.vasicek_ = p;
        return m;
    }

    /// Constant coefficients, handy for degenerate and CIR-like tests.
    static AffineModel constant(double mu0, double mu1, double sig0, double sig1) {
        return AffineModel([mu0](double) { return mu0; }, [mu1](double) { return mu1; },
                           [sig0](double) { return sig0; }, [sig1](double) { return sig1; });
    }

    double mu0(double t) const { return mu0_(t); }
    double mu1(double t) const { return mu1_(t); }
    double sig0(double t) const { return sig0_(t); }
    double sig1(double t) const { return sig1_(t); }

    double drift(double t, double r) const { return mu0_(t) + mu1_(t) * r; }
    double variance(double t, double r) const { return sig0_(t) + sig1_(t) * r; }

    const std::optional<VasicekParams>& vasicek_params() const { return vasicek_; }
    bool is_vasicek() const { return vasicek_.has_value(); }

private:
    CoefficientFn mu0_, mu1_, sig0_, sig1_;
    std::optional<VasicekParams> vasicek_;
};

/// Value of the Riccati pair at one (t, omega, T).
struct RiccatiValue {
    Complex A{};
    Complex B{};
};

/// Fixed-step count used when the caller does not supply one: 1000 per year
/// of horizon, at least 100.
inline int default_riccati_steps(double horizon) {
    return std::max(100, static_cast<int>(std::ceil(1000.0 * horizon)));
}

/// Integrates
///   dB/dtau = mu1 B + sig1 B^2 / 2 + i omega,   dA/dtau = mu0 B + sig0 B^2 / 2
/// backward from the terminal condition A = B = 0 at T, with tau = T - s,
/// by classical fourth-order Runge-Kutta.
inline RiccatiValue solve_riccati_numeric(const AffineModel& model, double t, Complex omega, double T, int steps) {
    if (!(t <= T) || t < 0.0) throw Error(ErrorCode::Domain, "affine_model", "Riccati solve requires 0 <= t <= T");
    if (steps < 1) throw Error(ErrorCode::Domain, "affine_model", "Riccati solve requires steps >= 1");
    if (t == T) return {};

    const Complex iw = Complex(0.0, 1.0) * omega;
    const double h = (T - t) / steps;
    constexpr double kGuard = 1e150;

    auto rhs = [&](double s, Complex B) {
        const double m0 = model.mu0(s), m1 = model.mu1(s), s0 = model.sig0(s), s1 = model.sig1(s);
        return std::pair<Complex, Complex>{m0 * B + 0.5 * s0 * B * B, m1 * B + 0.5 * s1 * B * B + iw};
    };

    Complex A(0.0, 0.0), B(0.0, 0.0);
    for (int k = 0; k < steps; ++k) {
        const double s = T - k * h;  // calendar time at start of step; moving toward t
        const auto [a1, b1] = rhs(s, B);
        const auto [a2, b2] = rhs(s - 0.5 * h, B + 0.5 * h * b1);
        const auto [a3, b3] = rhs(s - 0.5 * h, B + 0.5 * h * b2);
        const auto [a4, b4] = rhs(s - h, B + h * b3);
        A += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        B += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        if (!(std::abs(B) < kGuard) || !(std::abs(A) < kGuard)) {
            std::ostringstream msg;
            msg << "Riccati solution blew up at s = " << s - h << " for omega = (" << omega.real() << ", "
                << omega.imag() << ")";
            throw Error(ErrorCode::BlowUp, "affine_model", msg.str());
        }
    }
    return {A, B};
}

namespace detail {

// e^{-x} - 1 + x and e^{-2x} - 4 e^{-x} + 3 - 2x. Both cancel to O(x^2) and
// O(x^3), so small x sums their Taylor series.
inline std::pair<double, double> vasicek_brackets(double x) {
    if (x < 0.1) {
        double first = 0.0, second = 0.0, fact = 2.0, xn = x * x, pow_m2 = 4.0, pow_m1 = 1.0;
        for (int n = 2; n <= 24; ++n) {
            first += pow_m1 * xn / fact;
            second += (pow_m2 - 4.0 * pow_m1) * xn / fact;
            xn *= x;
            fact *= n + 1;
            pow_m2 *= -2.0;
            pow_m1 = -pow_m1;
        }
        return {first, second};
    }
    return {std::expm1(-x) + x, std::expm1(-2.0 * x) - 4.0 * std::expm1(-x) - 2.0 * x};
}

}  // namespace detail

/// Closed-form Vasicek solution:
///   A = (i w theta / k)(e^{-k tau} - 1 + k tau)
///       + (w^2 delta^2 / (4 k^3))(e^{-2 k tau} - 4 e^{-k tau} + 3 - 2 k tau)
///   B = (i w / k)(1 - e^{-k tau})
inline RiccatiValue vasicek_riccati_closed_form(const VasicekParams& p, double t, Complex omega, double T) {
    p.validate();
    if (!(t <= T)) throw Error(ErrorCode::Domain, "affine_model", "Riccati solve requires t <= T");
    const double k = p.kappa;
    const double tau = T - t;
    const Complex iw = Complex(0.0, 1.0) * omega;
    const auto [first, second] = detail::vasicek_brackets(k * tau);
    RiccatiValue out;
    out.A = iw * p.theta / k * first + omega * omega * p.delta * p.delta / (4.0 * k * k * k) * second;
    out.B = iw / k * (-std::expm1(-k * tau));
    return out;
}

/// A(t, w; T) + r B(t, w; T), i.e. log E[exp(i w int_t^T R ds)] under the
/// model. Uses the Vasicek closed form when available.
inline Complex integrated_rate_log_cf(const AffineModel& model, double t, double T, double r, Complex omega,
                                      int steps = 0) {
    const RiccatiValue v = model.is_vasicek()
                               ? vasicek_riccati_closed_form(*model.vasicek_params(), t, omega, T)
                               : solve_riccati_numeric(model, t, omega, T,
                                                       steps > 0 ? steps : default_riccati_steps(T - t));
    return v.A + r * v.B;
}

/// Evaluable Riccati pair for a fixed model; closed form for Vasicek unless
/// numeric integration is forced.
class RiccatiSolution {
public:
    explicit RiccatiSolution(AffineModel model, bool force_numeric = false, int steps = 0)
        : model_(std::move(model)), force_numeric_(force_numeric), steps_(steps) {}

    RiccatiValue operator()(double t, Complex omega, double T) const {
        if (model_.is_vasicek() && !force_numeric_) {
            return vasicek_riccati_closed_form(*model_.vasicek_params(), t, omega, T);
        }
        return solve_riccati_numeric(model_, t, omega, T, steps_ > 0 ? steps_ : default_riccati_steps(T - t));
    }

    Complex A(double t, Complex omega, double T) const { return (*this)(t, omega, T).A; }
    Complex B(double t, Complex omega, double T) const { return (*this)(t, omega, T).B; }

    const AffineModel& model() const { return model_; }

private:
    AffineModel model_;
    bool force_numeric_;
    int steps_;
};

}  // namespace bondindiff
