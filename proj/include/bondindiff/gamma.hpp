#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "bondindiff/errors.hpp"

namespace bondindiff {

using Complex = std::complex<double>;

namespace detail {

// Lanczos approximation, g = 7, nine coefficients.
inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczosCoefficients = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};

inline constexpr double kPoleTolerance = 1e-12;

inline void check_pole(Complex s) {
    if (s.real() > 0.5) return;
    const double nearest = std::round(s.real());
    if (nearest <= 0.0 && std::abs(s - Complex(nearest, 0.0)) < kPoleTolerance) {
        std::ostringstream msg;
        msg << "Gamma evaluated at pole s = (" << s.real() << ", " << s.imag() << ")";
        throw Error(ErrorCode::Pole, "special_functions", msg.str());
    }
}

// log(sin(pi s)) without overflow for large |Im s|. Branch is arbitrary but
// consistent; only exp() of the result matters.
inline Complex log_sin_pi(Complex s) {
    constexpr double pi = std::numbers::pi;
    const Complex i(0.0, 1.0);
    if (std::abs(s.imag()) < 20.0) return std::log(std::sin(pi * s));
    if (s.imag() > 0.0) {
        // sin(pi s) = (i/2) e^{-i pi s} (1 - e^{2 i pi s}),  |e^{2 i pi s}| << 1
        return -i * pi * s + Complex(-std::log(2.0), pi / 2.0) + std::log(1.0 - std::exp(2.0 * i * pi * s));
    }
    return std::conj(log_sin_pi(std::conj(s)));
}

// log Gamma for Re s >= 0.5 via Lanczos.
inline Complex log_gamma_right(Complex s) {
    const Complex z = s - 1.0;
    Complex series(kLanczosCoefficients[0], 0.0);
    for (std::size_t k = 1; k < kLanczosCoefficients.size(); ++k) {
        series += kLanczosCoefficients[k] / (z + static_cast<double>(k));
    }
    const Complex t = z + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(series);
}

}  // namespace detail

/// Principal-ish log Gamma for complex argument. The real part is ln|Gamma(s)|;
/// the imaginary part is a phase consistent with gamma_complex(s) but not
/// necessarily on the principal branch.
inline Complex log_gamma_complex(Complex s) {
    detail::check_pole(s);
    if (s.real() >= 0.5) return detail::log_gamma_right(s);
    // Reflection: Gamma(s) Gamma(1 - s) = pi / sin(pi s).
    return std::log(std::numbers::pi) - detail::log_sin_pi(s) - detail::log_gamma_right(1.0 - s);
}

inline Complex gamma_complex(Complex s) {
    detail::check_pole(s);
    if (s.real() >= 0.5 && std::abs(s) < 20.0) {
        // Direct form keeps full relative precision where nothing overflows.
        const Complex z = s - 1.0;
        Complex series(detail::kLanczosCoefficients[0], 0.0);
        for (std::size_t k = 1; k < detail::kLanczosCoefficients.size(); ++k) {
            series += detail::kLanczosCoefficients[k] / (z + static_cast<double>(k));
        }
        const Complex t = z + detail::kLanczosG + 0.5;
        return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) * series;
    }
    return std::exp(log_gamma_complex(s));
}

}  // namespace bondindiff
