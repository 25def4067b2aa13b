#pragma once

// Extended-real helpers and numerically stable scalar kernels shared by the
// discrepancy, condition and certificate code.

#include <cmath>
#include <limits>

#include "hdl/errors.hpp"

namespace hdl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_pos_inf(double x) { return x == kInf; }

/// a + b with +inf propagation; inf - inf is a hard error.
inline double ext_add(double a, double b) {
    if (std::isinf(a) && std::isinf(b) && (a > 0) != (b > 0)) {
        throw Error(ErrorKind::Arithmetic, "inf - inf in extended-real sum");
    }
    return a + b;
}

inline double ext_sub(double a, double b) { return ext_add(a, -b); }

/// a * b with the measure-theoretic convention 0 * inf = 0.
inline double ext_mul(double a, double b) {
    if ((a == 0.0 && std::isinf(b)) || (b == 0.0 && std::isinf(a))) return 0.0;
    return a * b;
}

/// x^p for x >= 0 with 0^0 = 1 and inf^p = inf (p > 0).
inline double ext_pow(double x, double p) {
    if (p == 0.0) return 1.0;
    if (std::isinf(x)) return p > 0 ? kInf : 0.0;
    return std::pow(x, p);
}

/// e^a - 1 - a, accurate near zero.
inline double exp_excess(double a) {
    if (std::isinf(a)) return kInf;
    if (std::fabs(a) < 0.5) {
        // a^2/2 + a^3/6 + ...
        double term = a * a / 2.0;
        double sum = term;
        for (int n = 3; n < 40; ++n) {
            term *= a / n;
            sum += term;
            if (std::fabs(term) <= 1e-18 * std::fabs(sum)) break;
        }
        return sum;
    }
    return std::expm1(a) - a;
}

/// cosh(a) - 1 = (e^a + e^-a - 2) / 2, accurate near zero.
inline double cosh_m1(double a) {
    if (std::isinf(a)) return kInf;
    if (std::fabs(a) < 1.0) {
        const double a2 = a * a;
        double term = a2 / 2.0;
        double sum = term;
        for (int n = 4; n < 60; n += 2) {
            term *= a2 / (static_cast<double>(n - 1) * n);
            sum += term;
            if (term <= 1e-18 * sum) break;
        }
        return sum;
    }
    return std::cosh(a) - 1.0;
}

/// w * (e^a - 1 - a) given log w, without overflowing when a is large and w tiny.
inline double weighted_exp_excess(double log_w, double a) {
    if (log_w == -kInf) return 0.0;
    if (a == kInf) return kInf;
    if (a < 600.0) return std::exp(log_w) * exp_excess(a);
    return std::exp(log_w + a + std::log1p(-(1.0 + a) * std::exp(-a)));
}

/// w * (e^a + e^-a - 2) given log w, overflow-safe.
inline double weighted_cosh_excess(double log_w, double a) {
    if (log_w == -kInf) return 0.0;
    const double m = std::fabs(a);
    if (m == kInf) return kInf;
    if (m < 600.0) return std::exp(log_w) * 2.0 * cosh_m1(m);
    return std::exp(log_w + m + std::log1p(-2.0 * std::exp(-m) + std::exp(-2.0 * m)));
}

}  // namespace hdl
