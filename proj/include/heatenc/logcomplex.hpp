#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace heatenc {

// Complex value carried as (log-magnitude, phase).  Exponents of order
// tau*T reach ~1e3, far beyond double range, so magnitudes live in the log
// domain from production to consumption.
struct LogComplex {
    double log_abs = -std::numeric_limits<double>::infinity();
    double phase = 0.0;

    bool is_zero() const { return std::isinf(log_abs) && log_abs < 0; }

    LogComplex& operator*=(const LogComplex& o) {
        log_abs += o.log_abs;
        phase += o.phase;
        return *this;
    }
    friend LogComplex operator*(LogComplex a, const LogComplex& b) { return a *= b; }

    // Finite complex value; overflows to inf / underflows to 0 as doubles do.
    std::complex<double> to_complex() const {
        if (is_zero()) return {0.0, 0.0};
        const double m = std::exp(log_abs);
        return {m * std::cos(phase), m * std::sin(phase)};
    }

    static LogComplex from_complex(std::complex<double> z) {
        if (z == std::complex<double>(0.0, 0.0)) return {};
        return {std::log(std::abs(z)), std::arg(z)};
    }

    static LogComplex from_real(double sign_carrier, double log_abs) {
        return {log_abs, sign_carrier < 0 ? M_PI : 0.0};
    }
};

// |I| floor of the shifted accumulator.  Results below this magnitude are
// reported as floor hits, not errors.
inline constexpr double kIndicatorFloor = 1e-300;
inline const double kLogIndicatorFloor = std::log(kIndicatorFloor);

// Max-shifted accumulation of log-polar complex terms: the running sum is
// kept scaled by exp(-shift) where shift tracks the largest term seen.
class LogComplexAccumulator {
public:
    void add(const LogComplex& term) {
        if (term.is_zero()) return;
        if (term.log_abs > shift_) {
            if (std::isfinite(shift_)) sum_ *= std::exp(shift_ - term.log_abs);
            shift_ = term.log_abs;
        }
        const double m = std::exp(term.log_abs - shift_);
        sum_ += std::complex<double>(m * std::cos(term.phase), m * std::sin(term.phase));
    }

    void add(const LogComplex& term, double log_weight) {
        LogComplex t = term;
        t.log_abs += log_weight;
        add(t);
    }

    LogComplex result() const {
        const double a = std::abs(sum_);
        if (!std::isfinite(shift_) || a == 0.0) return {};
        return {shift_ + std::log(a), std::arg(sum_)};
    }

private:
    double shift_ = -std::numeric_limits<double>::infinity();
    std::complex<double> sum_{0.0, 0.0};
};

} // namespace heatenc
