#pragma once

// Expectation engine. Continuous integrals are split at breakpoints into panels;
// each panel is cut at its midpoint and integrated outward in dyadic shells
// toward both endpoints, with Gauss-Kronrod 7-15 adaptive bisection inside each
// shell. Shell contributions decay geometrically next to an integrable endpoint
// singularity and stop decaying next to a non-integrable one, which is how
// divergence is diagnosed.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hdl/densities.hpp"
#include "hdl/errors.hpp"
#include "hdl/extended.hpp"
#include "hdl/random.hpp"

namespace hdl {

struct QuadConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_depth = 60;
    double tail_mass = 1e-14;
    double divergence_cap = 1e12;

    void validate() const {
        if (!(rel_tol > 0 && abs_tol > 0 && tail_mass > 0 && divergence_cap > 0) || max_depth < 10) {
            throw Error(ErrorKind::ParameterDomain, "invalid quadrature configuration");
        }
    }
};

enum class QuadStatus { Converged, Diverged, TailTruncated };

inline const char* to_string(QuadStatus s) {
    switch (s) {
    case QuadStatus::Converged: return "converged";
    case QuadStatus::Diverged: return "diverged";
    case QuadStatus::TailTruncated: return "tail_truncated";
    }
    return "?";
}

struct IntegralEstimate {
    double value = 0.0;
    double abs_err = 0.0;
    QuadStatus status = QuadStatus::Converged;
    double tail_bound = 0.0;

    bool finite() const { return std::isfinite(value); }
    bool diverged() const { return status == QuadStatus::Diverged; }

    static IntegralEstimate exact(double v) {
        IntegralEstimate e;
        e.value = v;
        if (!std::isfinite(v)) e.status = QuadStatus::Diverged;
        return e;
    }
    static IntegralEstimate infinite(double sign = 1.0) {
        IntegralEstimate e;
        e.value = sign > 0 ? kInf : -kInf;
        e.status = QuadStatus::Diverged;
        return e;
    }
};

/// Sum of two estimates: values add in extended arithmetic, errors add.
inline IntegralEstimate combine(const IntegralEstimate& a, const IntegralEstimate& b) {
    IntegralEstimate r;
    r.value = ext_add(a.value, b.value);
    r.abs_err = (std::isfinite(r.value)) ? a.abs_err + b.abs_err : 0.0;
    r.tail_bound = a.tail_bound + b.tail_bound;
    if (!std::isfinite(r.value)) {
        r.status = QuadStatus::Diverged;
    } else if (a.status == QuadStatus::TailTruncated || b.status == QuadStatus::TailTruncated) {
        r.status = QuadStatus::TailTruncated;
    }
    return r;
}

namespace detail {

struct GkResult {
    double value = 0.0;
    double err = 0.0;
    int nonfinite = 0;  // +1: +inf seen, -1: -inf seen
};

inline double checked_eval(const std::function<double(double)>& f, double x, int& nonfinite) {
    const double v = f(x);
    if (std::isnan(v)) {
        throw Error(ErrorKind::IntegrandInvalid, "integrand is NaN at x = " + std::to_string(x));
    }
    if (std::isinf(v)) {
        nonfinite = v > 0 ? 1 : -1;
        return 0.0;
    }
    return v;
}

inline GkResult gk15(const std::function<double(double)>& f, double a, double b) {
    static constexpr std::array<double, 8> xgk = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr std::array<double, 8> wgk = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    GkResult r;
    const double centr = 0.5 * (a + b);
    const double hlgth = 0.5 * (b - a);
    const double fc = checked_eval(f, centr, r.nonfinite);
    double resg = fc * wg[3];
    double resk = fc * wgk[7];
    double resabs = std::fabs(resk);
    std::array<double, 7> fv1{}, fv2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = hlgth * xgk[j];
        const double f1 = checked_eval(f, centr - dx, r.nonfinite);
        const double f2 = checked_eval(f, centr + dx, r.nonfinite);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += wgk[j] * (f1 + f2);
        resabs += wgk[j] * (std::fabs(f1) + std::fabs(f2));
        if (j % 2 == 1) resg += wg[j / 2] * (f1 + f2);
    }
    const double reskh = resk * 0.5;
    double resasc = wgk[7] * std::fabs(fc - reskh);
    for (int j = 0; j < 7; ++j) resasc += wgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));

    const double ah = std::fabs(hlgth);
    r.value = resk * hlgth;
    resabs *= ah;
    resasc *= ah;
    double err = std::fabs((resk - resg) * hlgth);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50 * eps)) err = std::max(50 * eps * resabs, err);
    r.err = err;
    return r;
}

struct Piecewise {
    double value = 0.0;
    double err = 0.0;
    int nonfinite = 0;
    long evals = 0;
};

inline void adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol,
                     double abs_density, int depth, int max_depth, Piecewise& acc) {
    const GkResult r = gk15(f, a, b);
    acc.evals += 15;
    if (r.nonfinite != 0) {
        acc.nonfinite = r.nonfinite;
        return;
    }
    const double allowed = std::max(rel_tol * std::fabs(r.value), abs_density * (b - a));
    const double m = 0.5 * (a + b);
    if (r.err <= allowed || depth >= max_depth || !(m > a && m < b) || acc.evals > 2'000'000) {
        acc.value += r.value;
        acc.err += r.err;
        return;
    }
    adaptive(f, a, m, rel_tol, abs_density, depth + 1, max_depth, acc);
    if (acc.nonfinite != 0) return;
    adaptive(f, m, b, rel_tol, abs_density, depth + 1, max_depth, acc);
}

/// Integral over the half-panel between `mid` and `end`, accumulated in dyadic
/// shells that shrink toward `end`.
inline IntegralEstimate shells_toward(const std::function<double(double)>& f, double mid, double end,
                                      const QuadConfig& cfg, double abs_density) {
    const double w = end - mid;
    IntegralEstimate out;
    double sum = 0.0;
    double err = 0.0;
    double prev = 0.0;
    std::vector<double> mags;
    int growth_run = 0;
    bool converged = false;
    double remainder = 0.0;

    for (int j = 0; j < 4000; ++j) {
        const double outer = end - w * std::ldexp(1.0, -j);
        const double inner = end - w * std::ldexp(1.0, -(j + 1));
        if (inner == end || inner == outer) break;  // resolution of doubles exhausted
        Piecewise shell;
        detail::adaptive(f, std::min(inner, outer), std::max(inner, outer), cfg.rel_tol, abs_density, 0,
                         cfg.max_depth, shell);
        if (shell.nonfinite != 0) return IntegralEstimate::infinite(shell.nonfinite);
        const double s = shell.value;
        sum += s;
        err += shell.err;
        if (std::fabs(sum) > cfg.divergence_cap) return IntegralEstimate::infinite(sum);

        const double mag = std::fabs(s);
        if (j > 0 && mag > 0 && mag >= std::fabs(prev) * (1.0 - 1e-9) && (s > 0) == (prev > 0)) {
            if (++growth_run >= 8) return IntegralEstimate::infinite(sum);
        } else {
            growth_run = 0;
        }
        prev = s;
        mags.push_back(mag);

        if (j >= 3) {
            const std::size_t n = mags.size();
            if (mags[n - 1] == 0.0 && mags[n - 2] == 0.0) {
                converged = true;
                break;
            }
            double rmax = 0.0;
            bool ok = true;
            for (std::size_t i = n - 3; i < n; ++i) {
                if (mags[i - 1] == 0.0) { ok = mags[i] == 0.0; if (!ok) break; continue; }
                rmax = std::max(rmax, mags[i] / mags[i - 1]);
            }
            if (ok && rmax < 1.0 - 1e-6) {
                remainder = mags[n - 1] * rmax / (1.0 - rmax);
                const double target = 0.1 * std::max(cfg.rel_tol * std::fabs(sum), abs_density * std::fabs(w));
                if (remainder <= target) {
                    converged = true;
                    break;
                }
            } else {
                remainder = kInf;
            }
        }
    }
    out.value = sum;
    if (converged) {
        // Geometric tail extrapolation from the last shell ratio; its size stays in the error.
        const std::size_t n = mags.size();
        if (n >= 2 && mags[n - 2] > 0.0 && mags[n - 1] > 0.0) {
            const double r = mags[n - 1] / mags[n - 2];
            if (r < 1.0) out.value += (prev > 0 ? 1.0 : -1.0) * mags[n - 1] * r / (1.0 - r);
        }
        out.abs_err = err + remainder;
    } else {
        // Ran out of representable shells before the remainder became negligible.
        out.abs_err = err + (std::isfinite(remainder) ? remainder : std::fabs(prev));
        out.status = QuadStatus::TailTruncated;
        out.tail_bound = std::isfinite(remainder) ? remainder : std::fabs(prev);
    }
    return out;
}

inline IntegralEstimate panel(const std::function<double(double)>& f, double a, double b,
                              const QuadConfig& cfg, double abs_density) {
    const double m = 0.5 * (a + b);
    const IntegralEstimate left = shells_toward(f, m, a, cfg, abs_density);
    if (left.diverged()) return left;
    const IntegralEstimate right = shells_toward(f, m, b, cfg, abs_density);
    return combine(left, right);
}

}  // namespace detail

/// Lebesgue integral of f over [a, b], split at the given breakpoints.
inline IntegralEstimate integrate(const std::function<double(double)>& f, double a, double b,
                                  std::span<const double> breaks, const QuadConfig& cfg = {}) {
    cfg.validate();
    if (!(a < b)) return IntegralEstimate::exact(0.0);
    std::vector<double> knots{a, b};
    for (double x : breaks) if (x > a && x < b) knots.push_back(x);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    const double abs_density = cfg.abs_tol / (b - a);
    IntegralEstimate total;
    std::vector<IntegralEstimate> parts;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        parts.push_back(detail::panel(f, knots[i], knots[i + 1], cfg, abs_density));
    }
    bool pos_inf = false, neg_inf = false;
    for (const auto& p : parts) {
        if (p.value == kInf) pos_inf = true;
        if (p.value == -kInf) neg_inf = true;
    }
    if (pos_inf && neg_inf) throw Error(ErrorKind::Arithmetic, "integral of the form inf - inf");
    if (pos_inf || neg_inf) return IntegralEstimate::infinite(pos_inf ? 1.0 : -1.0);
    for (const auto& p : parts) total = combine(total, p);
    if (total.status == QuadStatus::Converged &&
        total.abs_err > std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(total.value))) {
        // Accuracy target missed; report honestly as truncated work.
        total.status = QuadStatus::TailTruncated;
    }
    return total;
}

inline IntegralEstimate integrate(const std::function<double(double)>& f, double a, double b,
                                  const QuadConfig& cfg = {}) {
    return integrate(f, a, b, std::span<const double>{}, cfg);
}

/// Integrand given as kernel(x, log p(x)) = p(x) g(x); lets callers stay in log space.
using WeightedKernel = std::function<double(double x, double log_w)>;

namespace detail {

inline constexpr double kTailGrowth = 10.0;

inline IntegralEstimate expect_kernel_on(const DensityModel& P, const WeightedKernel& kernel,
                                         std::span<const double> extra_breaks, const QuadConfig& cfg,
                                         double lo, double hi, double tail_bound) {
    std::vector<double> breaks = P.breakpoints();
    breaks.insert(breaks.end(), extra_breaks.begin(), extra_breaks.end());
    auto f = [&](double x) {
        const double lw = P.log_pdf(x);
        if (lw == -kInf) return 0.0;
        return kernel(x, lw);
    };
    IntegralEstimate r = integrate(f, lo, hi, breaks, cfg);
    if (r.diverged()) return r;
    r.tail_bound += tail_bound;
    r.abs_err += tail_bound;
    if (r.status == QuadStatus::Converged && tail_bound > cfg.tail_mass) r.status = QuadStatus::TailTruncated;
    return r;
}

}  // namespace detail

/// P-expectation of the kernel. Real-line supports are truncated to a window that
/// grows until the tail contribution bound falls below cfg.tail_mass.
inline IntegralEstimate expect_kernel(const DensityModel& P, const WeightedKernel& kernel,
                                      std::span<const double> extra_breaks, const QuadConfig& cfg = {}) {
    cfg.validate();
    if (!P.support().continuous()) {
        throw Error(ErrorKind::IncompatibleSupport, "expect on an atom support; use expect_discrete");
    }
    if (P.support().kind != Support::Kind::RealLine) {
        const auto [lo, hi] = P.window();
        return detail::expect_kernel_on(P, kernel, extra_breaks, cfg, lo, hi, 0.0);
    }
    double tail = 0.0;
    double lo = 0.0, hi = 0.0;
    for (double extra = 0.0; extra <= 30.0; extra += 1.0) {
        std::tie(lo, hi) = P.window(extra);
        const double g_edge = std::max(std::fabs(kernel(lo, 0.0)), std::fabs(kernel(hi, 0.0)));
        tail = ext_mul(P.mass_outside(lo, hi), g_edge) * detail::kTailGrowth;
        if (tail <= cfg.tail_mass) break;
    }
    if (std::isnan(tail)) tail = kInf;
    return detail::expect_kernel_on(P, kernel, extra_breaks, cfg, lo, hi, tail);
}

/// P g = integral of g dP over the support of P.
inline IntegralEstimate expect(const DensityModel& P, const std::function<double(double)>& g,
                               std::span<const double> extra_breaks, const QuadConfig& cfg = {}) {
    return expect_kernel(
        P,
        [&g](double x, double log_w) {
            const double v = g(x);
            if (v == 0.0) return 0.0;
            return std::exp(log_w) * v;
        },
        extra_breaks, cfg);
}

inline IntegralEstimate expect(const DensityModel& P, const std::function<double(double)>& g,
                               const QuadConfig& cfg = {}) {
    return expect(P, g, std::span<const double>{}, cfg);
}

/// Exact sum over atoms; atoms of mass zero are ignored, +inf on a positive-mass atom diverges.
inline IntegralEstimate expect_discrete(const DiscreteDist& P, const std::function<double(double)>& g) {
    double sum = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) {
        if (P.masses[i] == 0.0) continue;
        const double v = g(P.atoms[i]);
        if (std::isnan(v)) throw Error(ErrorKind::IntegrandInvalid, "NaN on a positive-mass atom");
        sum = ext_add(sum, ext_mul(P.masses[i], v));
    }
    return IntegralEstimate::exact(sum);
}

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    long n = 0;
};

/// Sample mean and standard error of g over n i.i.d. draws from P (Welford).
inline MonteCarloEstimate mc_expect(const DensityModel& P, const std::function<double(double)>& g, long n,
                                    std::uint64_t seed) {
    if (n < 2) throw Error(ErrorKind::ParameterDomain, "mc_expect needs n >= 2");
    if (!P.has_sampler()) throw Error(ErrorKind::NoSampler, P.tag().label());
    Rng rng(seed);
    double mean = 0.0, m2 = 0.0;
    for (long i = 0; i < n; ++i) {
        const double v = g(P.sample(rng));
        const double d = v - mean;
        mean += d / static_cast<double>(i + 1);
        m2 += d * (v - mean);
    }
    MonteCarloEstimate r;
    r.mean = mean;
    r.n = n;
    r.std_err = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    return r;
}

}  // namespace hdl
