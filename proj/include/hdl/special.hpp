#pragma once

// Self-contained special functions: erfc (Cody's rational Chebyshev
// approximations), the standard normal pdf/cdf, and a Lanczos gamma.

#include <array>
#include <cmath>
#include <numbers>

#include "hdl/errors.hpp"

namespace hdl {

namespace detail {

inline double cody_erfc_tail(double y) {
    // y > 0.46875; returns erfc(y).
    static constexpr std::array<double, 9> c = {
        5.64188496988670089e-1, 8.88314979438837594e0, 6.61191906371416295e1,
        2.98635138197400131e2,  8.81952221241769090e2, 1.71204761263407058e3,
        2.05107837782607147e3,  1.23033935479799725e3, 2.15311535474403846e-8};
    static constexpr std::array<double, 8> d = {
        1.57449261107098347e1, 1.17693950891312499e2, 5.37181101862009858e2,
        1.62138957456669019e3, 3.29079923573345963e3, 4.36261909014324716e3,
        3.43936767414372164e3, 1.23033935480374942e3};
    static constexpr std::array<double, 6> p = {
        3.05326634961232344e-1, 3.60344899949804439e-1, 1.25781726111229246e-1,
        1.60837851487422766e-2, 6.58749161529837803e-4, 1.63153871373020978e-2};
    static constexpr std::array<double, 5> q = {
        2.56852019228982242e0, 1.87295284992346047e0, 5.27905102951428412e-1,
        6.05183413124413191e-2, 2.33520497626869185e-3};
    constexpr double inv_sqrt_pi = 0.56418958354775628695;

    double result = 0.0;
    if (y <= 4.0) {
        double num = c[8] * y;
        double den = y;
        for (int i = 0; i < 7; ++i) {
            num = (num + c[i]) * y;
            den = (den + d[i]) * y;
        }
        result = (num + c[7]) / (den + d[7]);
    } else {
        const double ysq = 1.0 / (y * y);
        double num = p[5] * ysq;
        double den = ysq;
        for (int i = 0; i < 4; ++i) {
            num = (num + p[i]) * ysq;
            den = (den + q[i]) * ysq;
        }
        result = ysq * (num + p[4]) / (den + q[4]);
        result = (inv_sqrt_pi - result) / y;
    }
    // exp(-y^2) split as exp(-ysq^2) * exp(-del) to keep the exponent exact.
    const double ysq = std::trunc(y * 16.0) / 16.0;
    const double del = (y - ysq) * (y + ysq);
    return std::exp(-ysq * ysq) * std::exp(-del) * result;
}

inline double cody_erf_small(double x) {
    // |x| <= 0.46875; returns erf(x).
    static constexpr std::array<double, 5> a = {
        3.16112374387056560e0, 1.13864154151050156e2, 3.77485237685302021e2,
        3.20937758913846947e3, 1.85777706184603153e-1};
    static constexpr std::array<double, 4> b = {
        2.36012909523441209e1, 2.44024637934444173e2, 1.28261652607737228e3,
        2.84423683343917062e3};
    const double y = std::fabs(x);
    const double ysq = y > 1.11e-16 ? y * y : 0.0;
    double num = a[4] * ysq;
    double den = ysq;
    for (int i = 0; i < 3; ++i) {
        num = (num + a[i]) * ysq;
        den = (den + b[i]) * ysq;
    }
    return x * (num + a[3]) / (den + b[3]);
}

}  // namespace detail

inline double erfc(double x) {
    if (std::isnan(x)) return x;
    const double y = std::fabs(x);
    if (y <= 0.46875) return 1.0 - detail::cody_erf_small(x);
    const double tail = detail::cody_erfc_tail(y);
    return x > 0 ? tail : 2.0 - tail;
}

inline double erf(double x) {
    if (std::isnan(x)) return x;
    const double y = std::fabs(x);
    if (y <= 0.46875) return detail::cody_erf_small(x);
    const double tail = detail::cody_erfc_tail(y);
    return x > 0 ? 1.0 - tail : tail - 1.0;
}

inline double normal_pdf(double x) {
    constexpr double inv_sqrt_2pi = 0.39894228040143267794;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_log_pdf(double x) {
    constexpr double log_sqrt_2pi = 0.91893853320467274178;
    return -0.5 * x * x - log_sqrt_2pi;
}

/// Standard normal CDF; accurate in both tails because it never forms 1 - small.
inline double normal_cdf(double x) {
    return 0.5 * erfc(-x / std::numbers::sqrt2);
}

/// Gamma function on [1, 64] (Lanczos, g = 7, n = 9).
inline double gamma_fn(double k) {
    if (!(k >= 1.0 && k <= 64.0)) {
        throw Error(ErrorKind::OutOfRange, "gamma_fn requires 1 <= k <= 64");
    }
    static constexpr std::array<double, 9> coef = {
        0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,   12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    // Integer arguments are exact factorials.
    if (k == std::floor(k) && k <= 23.0) {
        double f = 1.0;
        for (int i = 2; i < static_cast<int>(k); ++i) f *= i;
        return f;
    }
    const double z = k - 1.0;
    double sum = coef[0];
    for (int i = 1; i < 9; ++i) sum += coef[i] / (z + i);
    const double t = z + 7.5;
    // sqrt(2 pi) t^(z+0.5) e^-t sum, assembled in log space to avoid overflow near 64.
    const double log_g = 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t +
                         std::log(sum);
    return std::exp(log_g);
}

}  // namespace hdl
