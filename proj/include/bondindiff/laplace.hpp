#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "bondindiff/affine_model.hpp"
#include "bondindiff/errors.hpp"
#include "bondindiff/gamma.hpp"

namespace bondindiff {

/// Evaluation time, money-market wealth and current short rate.
struct MarketState {
    double t = 0.0;
    double x = 5.0;
    double r = 0.01;

    void validate() const {
        if (!std::isfinite(t) || !std::isfinite(x) || !std::isfinite(r)) {
            throw Error(ErrorCode::Validation, "laplace_transform", "market state must be finite");
        }
        if (t < 0.0) throw Error(ErrorCode::Validation, "laplace_transform", "market state t must be >= 0");
        if (x <= 0.0) throw Error(ErrorCode::Validation, "laplace_transform", "market state x must be > 0");
    }
};

/// Discretisation of the contour integrals.
///
/// The inner integral runs along Im(omega) = omega_i over |Re(omega)| <=
/// omega_max on n_omega equally spaced nodes (trapezoid rule). Transforms of
/// small arguments are evaluated on the shifted contour Im(omega) = omega_i_neg
/// in (-1, 0) after taking the residue at omega = 0. The outer integral of the
/// power-utility equations runs over u = log z in [z_log_min, cap], where the
/// cap is found automatically but never exceeds z_log_max.
struct QuadratureConfig {
    double omega_i = 0.5;
    double omega_i_neg = -0.5;
    double omega_max = 60.0;
    int n_omega = 2001;
    double z_log_min = -30.0;
    double z_log_max = 12.0;
    int n_z = 801;
    double tol = 1e-12;
    int riccati_steps = 0;  // 0 selects default_riccati_steps

    void validate() const {
        if (!(omega_i > 0.0)) {
            throw Error(ErrorCode::Contour, "laplace_transform", "contour height omega_i must be > 0");
        }
        if (!(omega_i_neg > -1.0 && omega_i_neg < 0.0)) {
            throw Error(ErrorCode::Contour, "laplace_transform", "shifted contour height must lie in (-1, 0)");
        }
        if (!(omega_max > 0.0)) throw Error(ErrorCode::Validation, "laplace_transform", "omega_max must be > 0");
        if (n_omega < 16 || n_omega % 2 == 0) {
            throw Error(ErrorCode::Validation, "laplace_transform", "n_omega must be odd and >= 16");
        }
        if (n_z < 16 || n_z % 2 == 0) {
            throw Error(ErrorCode::Validation, "laplace_transform", "n_z must be odd and >= 16");
        }
        if (!(z_log_min < z_log_max)) {
            throw Error(ErrorCode::Validation, "laplace_transform", "z_log_min must be < z_log_max");
        }
        if (!(tol > 0.0)) throw Error(ErrorCode::Validation, "laplace_transform", "tol must be > 0");
    }

    double omega_step() const { return 2.0 * omega_max / (n_omega - 1); }
};

/// Nodes omega_r + i * height, omega_r uniform on [-omega_max, omega_max].
inline std::vector<Complex> omega_grid(const QuadratureConfig& quad, double height) {
    std::vector<Complex> grid(static_cast<std::size_t>(quad.n_omega));
    const double h = quad.omega_step();
    for (int k = 0; k < quad.n_omega; ++k) grid[k] = Complex(-quad.omega_max + k * h, height);
    return grid;
}

inline std::vector<Complex> omega_grid(const QuadratureConfig& quad) { return omega_grid(quad, quad.omega_i); }

/// Per-node factors z^{i w} Gamma(-i w) e^{A(t,w;T) + r B(t,w;T)}.
/// The wealth factor e^{i w log x} is left out so it can vary independently.
inline std::vector<Complex> laplace_kernel(const AffineModel& model, double t, double T, double r, double z,
                                           const std::vector<Complex>& grid, int riccati_steps = 0) {
    if (!(z > 0.0)) throw Error(ErrorCode::Domain, "laplace_transform", "Laplace argument z must be > 0");
    if (!(t <= T)) throw Error(ErrorCode::Domain, "laplace_transform", "requires t <= T");
    const Complex i(0.0, 1.0);
    const double log_z = std::log(z);
    std::vector<Complex> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const Complex w = grid[k];
        if (!(w.imag() > 0.0)) {
            throw Error(ErrorCode::Contour, "laplace_transform", "kernel nodes must satisfy Im(omega) > 0");
        }
        // Assembled in log space: |Gamma| and e^{A + rB} over/underflow separately.
        out[k] = std::exp(i * w * log_z + log_gamma_complex(-i * w) +
                          integrated_rate_log_cf(model, t, T, r, w, riccati_steps));
    }
    return out;
}

/// Full diagnostic output of one transform evaluation.
struct LaplaceEvaluation {
    double value = 0.0;           // real part
    double imag_residual = 0.0;   // discarded imaginary part
    double tail_magnitude = 0.0;  // largest |integrand| at +-omega_max
};

inline LaplaceEvaluation laplace_mm_detail(const AffineModel& model, const MarketState& state, double T, double z,
                                           const QuadratureConfig& quad) {
    quad.validate();
    state.validate();
    if (!(T >= state.t)) throw Error(ErrorCode::Domain, "laplace_transform", "maturity must satisfy T >= t");
    const auto grid = omega_grid(quad);
    const auto kernel = laplace_kernel(model, state.t, T, state.r, z, grid, quad.riccati_steps);
    const Complex i(0.0, 1.0);
    const double log_x = std::log(state.x);
    const double h = quad.omega_step();

    Complex sum(0.0, 0.0);
    const std::size_t n = grid.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double weight = (k == 0 || k + 1 == n) ? 0.5 * h : h;
        sum += weight * kernel[k] * std::exp(i * grid[k] * log_x);
    }
    sum /= 2.0 * std::numbers::pi;

    LaplaceEvaluation out;
    out.value = sum.real();
    out.imag_residual = sum.imag();
    out.tail_magnitude = std::max(std::abs(kernel.front() * std::exp(i * grid.front() * log_x)),
                                  std::abs(kernel.back() * std::exp(i * grid.back() * log_x))) /
                         (2.0 * std::numbers::pi);
    return out;
}

/// L(t, x, r; T, z) = E[exp(-z X_T)] from the contour integral along
/// Im(omega) = quad.omega_i.
inline double laplace_mm(const AffineModel& model, const MarketState& state, double T, double z,
                         const QuadratureConfig& quad) {
    const LaplaceEvaluation ev = laplace_mm_detail(model, state, T, z, quad);
    if (ev.tail_magnitude > quad.tol) {
        std::ostringstream msg;
        msg << "integrand at +-omega_max = " << quad.omega_max << " is " << ev.tail_magnitude
            << ", above tol = " << quad.tol << "; increase omega_max";
        throw Error(ErrorCode::Truncation, "laplace_transform", msg.str());
    }
    if (std::abs(ev.imag_residual) > 1e-9 * std::abs(ev.value) + quad.tol) {
        std::ostringstream msg;
        msg << "transform has imaginary residual " << ev.imag_residual << " for value " << ev.value;
        throw Error(ErrorCode::Convergence, "laplace_transform", msg.str());
    }
    return ev.value;
}

/// Which power of the accumulation factor G = exp(int_t^T R ds) a transform
/// refers to: G itself (wealth in the money-market account) or 1/G (bond
/// payoff measured in money-market units).
enum class GrowthSide { Growth, Discount };

/// Lambda(s) = E[exp(-e^s Y)] with Y = G or 1/G, for one (model, t, T, r).
///
/// Kernels are built once per contour height and reused for every argument s,
/// so root solvers only pay for the e^{i w s} factor. For s >= 0 the contour
/// sits above the real axis, at the prepared height with the smallest
/// integrand peak for that s; for s < 0 it is moved below the pole of
/// Gamma(-i w) at w = 0,
/// which contributes the residue 1 and leaves 1 - Lambda(s) to the integral.
/// This keeps full relative precision in 1 - Lambda for tiny e^s.
class GrowthLaplace {
public:
    GrowthLaplace(const AffineModel& model, double t, double T, double r, GrowthSide side,
                  const QuadratureConfig& quad)
        : quad_(quad), side_(side) {
        quad.validate();
        if (!(t <= T)) throw Error(ErrorCode::Domain, "laplace_transform", "requires t <= T");
        auto log_cf = [&](Complex w) {
            return integrated_rate_log_cf(model, t, T, r, side == GrowthSide::Growth ? w : -w, quad.riccati_steps);
        };

        heights_.push_back(quad.omega_i_neg);
        for (double c : {quad.omega_i, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
            if (c >= quad.omega_i && c > heights_.back()) heights_.push_back(c);
        }

        const double h = quad.omega_step();
        const int half = (quad.n_omega - 1) / 2;
        nodes_.resize(static_cast<std::size_t>(half) + 1);
        for (int k = 0; k <= half; ++k) nodes_[k] = k * h;

        const Complex i(0.0, 1.0);
        for (std::size_t level = 0; level < heights_.size(); ++level) {
            // Contours above the first positive one only sharpen precision at
            // large s; drop them where the transform is not finite.
            const bool optional = level >= 2;
            std::vector<Complex> K(nodes_.size());
            try {
                for (std::size_t k = 0; k < nodes_.size(); ++k) {
                    const Complex w(nodes_[k], heights_[level]);
                    // Conjugate symmetry folds the negative half of the grid onto
                    // the positive one: weight 2h inside, h at both ends.
                    const double weight = (k == 0 || k + 1 == nodes_.size()) ? h : 2.0 * h;
                    K[k] = weight / (2.0 * std::numbers::pi) * std::exp(log_gamma_complex(-i * w) + log_cf(w));
                }
            } catch (const Error& e) {
                if (!optional || e.code() != ErrorCode::BlowUp) throw;
                heights_.resize(level);
                break;
            }
            const double tail = std::abs(K.back()) / h;
            const bool finite = std::isfinite(std::abs(K.front())) && std::isfinite(tail);
            if (!finite || tail > quad.tol * std::max(1.0, std::abs(K.front()) / h)) {
                if (optional) {
                    heights_.resize(level);
                    break;
                }
                std::ostringstream msg;
                msg << "kernel at omega_max = " << quad.omega_max << " on contour " << heights_[level] << " is "
                    << tail << "; increase omega_max";
                throw Error(ErrorCode::Truncation, "laplace_transform", msg.str());
            }
            log_peak_.push_back(std::log(std::abs(K.front())));
            kernels_.push_back(std::move(K));
        }
        log_mean_ = log_cf(Complex(0.0, -1.0)).real();  // log E[Y]
    }

    /// Lambda(s) = E exp(-e^s Y).
    double value(double s) const {
        if (s < 0.0) return 1.0 - complement(s);
        return sum_on(level_for(s), s);
    }

    /// 1 - Lambda(s), accurate when Lambda is close to 1.
    double complement(double s) const {
        if (s < 0.0) return -sum_on(0, s);
        return 1.0 - value(s);
    }

    /// Lambda(s1) - e^{log_factor} Lambda(s2), with the two exponentials
    /// combined node by node before the kernel multiplies them.
    double difference(double s1, double s2, double log_factor) const {
        const double factor = std::exp(log_factor);
        const double mid = 0.5 * (s1 + s2);
        if (mid < 0.0) {
            // Residues contribute 1 - factor.
            return -std::expm1(log_factor) + sum_pair(0, s1, s2, factor);
        }
        return sum_pair(level_for(mid), s1, s2, factor);
    }

    /// log E[Y], the first moment used for small-argument expansions.
    double log_mean() const { return log_mean_; }
    GrowthSide side() const { return side_; }
    const QuadratureConfig& quadrature() const { return quad_; }

private:
    // Positive contour with the smallest integrand peak |K(ic)| e^{-cs};
    // rounding error in the sum scales with that peak.
    std::size_t level_for(double s) const {
        std::size_t level = 1;
        double best = log_peak_[1] - heights_[1] * s;
        for (std::size_t j = 2; j < heights_.size(); ++j) {
            const double v = log_peak_[j] - heights_[j] * s;
            if (v < best) best = v, level = j;
        }
        return level;
    }

    // Re sum_k K_k e^{i w_k s}
    double sum_on(std::size_t level, double s) const {
        const auto& K = kernels_[level];
        double acc = 0.0;
        for (std::size_t k = 0; k < K.size(); ++k) {
            const double phase = nodes_[k] * s;
            acc += K[k].real() * std::cos(phase) - K[k].imag() * std::sin(phase);
        }
        return std::exp(-heights_[level] * s) * acc;
    }

    double sum_pair(std::size_t level, double s1, double s2, double factor) const {
        const auto& K = kernels_[level];
        const double c = heights_[level];
        const double a1 = std::exp(-c * s1);
        const double a2 = factor * std::exp(-c * s2);
        double acc = 0.0;
        for (std::size_t k = 0; k < K.size(); ++k) {
            const double p1 = nodes_[k] * s1, p2 = nodes_[k] * s2;
            const double re = a1 * std::cos(p1) - a2 * std::cos(p2);
            const double im = a1 * std::sin(p1) - a2 * std::sin(p2);
            acc += K[k].real() * re - K[k].imag() * im;
        }
        return acc;
    }

    QuadratureConfig quad_;
    GrowthSide side_;
    std::vector<double> heights_;  // heights_[0] is the shifted (negative) contour
    std::vector<double> nodes_;    // non-negative real parts
    std::vector<std::vector<Complex>> kernels_;
    std::vector<double> log_peak_;
    double log_mean_ = 0.0;
};

}  // namespace bondindiff
