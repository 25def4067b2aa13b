#pragma once

// The regularity-condition functionals (UB), (CM), (FM), (WS), (NC), (L1), (Lk).

#include <algorithm>
#include <cmath>
#include <optional>
#include <type_traits>
#include <vector>

#include "hdl/discrepancy.hpp"
#include "hdl/errors.hpp"
#include "hdl/extended.hpp"
#include "hdl/integrate.hpp"
#include "hdl/pair.hpp"

namespace hdl {

/// Conditioning events of P0-mass below this are treated as null (conditional mean 0).
inline constexpr double kNullEventMass = 1e-14;

namespace detail {

inline double ratio_power_kernel(double lw, double lr, double delta) {
    if (lr == kInf) return kInf;
    return std::exp(lw + delta * lr);
}

}  // namespace detail

/// P0((p0/p)^delta 1{p0/p > 4}).
template <class Pair>
IntegralEstimate eval_nc(const Pair& pr, double delta) {
    require_delta(delta);
    return pr.p0_expect([delta](double lw, double lr) { return detail::ratio_power_kernel(lw, lr, delta); },
                        RatioEvent{4.0, true});
}

/// P0((log(p0/p))^k 1{p0/p > 4}).
template <class Pair>
IntegralEstimate eval_lk(const Pair& pr, double k) {
    if (!(k > 0.0)) throw Error(ErrorKind::ParameterDomain, "L_k needs k > 0");
    return pr.p0_expect(
        [k](double lw, double lr) { return lr == kInf ? kInf : std::exp(lw) * std::pow(lr, k); },
        RatioEvent{4.0, true});
}

/// P0((p0/p)^delta 1{p0/p > e^(1/delta)}).
template <class Pair>
IntegralEstimate eval_ws(const Pair& pr, double delta) {
    require_delta(delta);
    return pr.p0_expect([delta](double lw, double lr) { return detail::ratio_power_kernel(lw, lr, delta); },
                        RatioEvent{std::exp(1.0 / delta), true});
}

/// P0(p0/p).
template <class Pair>
IntegralEstimate eval_fm(const Pair& pr) {
    return pr.p0_expect([](double lw, double lr) { return detail::ratio_power_kernel(lw, lr, 1.0); });
}

template <class Pair>
UbValue eval_ub(const Pair& pr) {
    return pr.ub();
}

/// P0(p0/p | p0/p >= t), defined as 0 when the event is (numerically) null.
struct ConditionalMoment {
    double value = 0.0;
    double abs_err = 0.0;
    double event_mass = 0.0;
};

template <class Pair>
ConditionalMoment conditional_ratio_moment(const Pair& pr, double t) {
    const RatioEvent ev{t, false};
    const IntegralEstimate num =
        pr.p0_expect([](double lw, double lr) { return detail::ratio_power_kernel(lw, lr, 1.0); }, ev);
    const IntegralEstimate den = pr.p0_expect([](double lw, double) { return std::exp(lw); }, ev);
    ConditionalMoment r;
    r.event_mass = den.value;
    // Quadrature noise can leave a tiny positive mass on an empty event; exact sums cannot.
    const double null_mass = std::is_same_v<Pair, DiscretePair> ? 0.0 : kNullEventMass;
    if (den.value <= null_mass) return r;
    if (!num.finite()) {
        r.value = kInf;
        return r;
    }
    r.value = num.value / den.value;
    r.abs_err = num.abs_err / den.value + num.value * den.abs_err / (den.value * den.value);
    return r;
}

inline double cm_threshold(double c) {
    const double s = 1.0 + 1.0 / (2.0 * c);
    return s * s;
}

struct CmResult {
    double value = 0.0;   // M
    double c_star = 1.0;  // minimising c
    double abs_err = 0.0;
    bool exact = false;   // candidate enumeration over ratio levels
};

/// c * P0(p0/p | p0/p >= (1 + 1/(2c))^2).
template <class Pair>
ConditionalMoment cm_objective(const Pair& pr, double c) {
    ConditionalMoment m = conditional_ratio_moment(pr, cm_threshold(c));
    m.value = ext_mul(c, m.value);
    m.abs_err *= c;
    return m;
}

namespace detail {

/// Exact M for a discrete pair. Between the c at which the threshold passes a ratio
/// level the event is fixed and c * E is increasing, so the infimum is attained at
/// c = 1 or at c_r = 1/(2(sqrt r - 1)) for a level 1 < r < 9/4.
inline CmResult cm_exact(const DiscretePair& pr) {
    const auto& m0 = pr.p0().masses;
    const auto& m1 = pr.p().masses;
    auto g_at_level = [&](double c, double level) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < m0.size(); ++i) {
            if (m0[i] == 0.0) continue;
            const double r = m1[i] == 0.0 ? kInf : m0[i] / m1[i];
            if (r >= level) {
                num = ext_add(num, ext_mul(m0[i], r));
                den += m0[i];
            }
        }
        if (den == 0.0) return 0.0;  // exact sums: only a truly empty event is null
        return ext_mul(c, num / den);
    };
    CmResult best;
    best.exact = true;
    best.c_star = 1.0;
    best.value = g_at_level(1.0, 2.25);
    for (double r : pr.ratio_levels()) {
        if (!(r > 1.0 && r < 2.25)) continue;
        const double c = 1.0 / (2.0 * (std::sqrt(r) - 1.0));
        if (!(c >= 1.0)) continue;
        const double g = g_at_level(c, r);
        if (g < best.value) {
            best.value = g;
            best.c_star = c;
        }
    }
    return best;
}

template <class Pair>
CmResult cm_search(const Pair& pr, double cap) {
    struct Probe {
        double c;
        double g;
        double err;
    };
    std::vector<Probe> probes;
    auto eval = [&](double c) {
        const ConditionalMoment m = cm_objective(pr, c);
        probes.push_back({c, m.value, m.abs_err});
        return m.value;
    };

    // Geometric scan c = 1, 2, 4, ... until g stops decreasing for 3 doublings.
    std::vector<double> scan_c, scan_g;
    int rising = 0;
    for (int i = 0; i <= 20; ++i) {
        const double c = std::ldexp(1.0, i);
        const double g = eval(c);
        if (!scan_g.empty() && g >= scan_g.back()) ++rising; else rising = 0;
        scan_c.push_back(c);
        scan_g.push_back(g);
        if (rising >= 3) break;
    }
    const auto ib = static_cast<std::size_t>(std::min_element(scan_g.begin(), scan_g.end()) - scan_g.begin());
    double a = ib == 0 ? 1.0 : scan_c[ib - 1];
    double b = ib + 1 < scan_c.size() ? scan_c[ib + 1] : scan_c[ib];
    if (std::isfinite(scan_g[ib]) && b > a) {
        // Golden-section refinement on the bracketing triple.
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
        double f1 = eval(x1), f2 = eval(x2);
        while (b - a > 1e-6) {
            if (f1 <= f2) {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - phi * (b - a);
                f1 = eval(x1);
            } else {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + phi * (b - a);
                f2 = eval(x2);
            }
        }
    }
    const auto best = *std::min_element(probes.begin(), probes.end(),
                                         [](const Probe& l, const Probe& r) { return l.g < r.g; });
    CmResult out;
    if (!(best.g <= cap)) {
        out.value = kInf;
        out.c_star = best.c;
        return out;
    }
    out.value = best.g;
    out.c_star = best.c;
    out.abs_err = best.err;
    return out;
}

}  // namespace detail

/// M = inf over c >= 1 of c P0(p0/p | p0/p >= (1 + 1/(2c))^2).
inline CmResult eval_cm(const DiscretePair& pr) { return detail::cm_exact(pr); }

inline CmResult eval_cm(const ContinuousPair& pr) {
    if (auto d = pr.exact_discrete()) return detail::cm_exact(*d);
    return detail::cm_search(pr, pr.cfg().divergence_cap);
}

struct ConditionProfile {
    UbValue ub;
    CmResult cm;
    IntegralEstimate fm;
    IntegralEstimate ws;
    IntegralEstimate nc;
    IntegralEstimate l1;
    IntegralEstimate lk;
    double delta = 1.0;
    double k = 2.0;
};

template <class Pair>
ConditionProfile condition_profile(const Pair& pr, double delta, double k) {
    ConditionProfile c;
    c.delta = delta;
    c.k = k;
    c.ub = eval_ub(pr);
    c.cm = eval_cm(pr);
    c.fm = eval_fm(pr);
    c.ws = eval_ws(pr, delta);
    c.nc = eval_nc(pr, delta);
    c.l1 = eval_lk(pr, 1.0);
    c.lk = eval_lk(pr, k);
    return c;
}

// Density-level entry points.

inline IntegralEstimate eval_nc(const DensityModel& p0, const DensityModel& p, double delta,
                                const QuadConfig& cfg = {}) {
    return eval_nc(ContinuousPair(p0, p, cfg), delta);
}
inline IntegralEstimate eval_lk(const DensityModel& p0, const DensityModel& p, double k, const QuadConfig& cfg = {}) {
    return eval_lk(ContinuousPair(p0, p, cfg), k);
}
inline IntegralEstimate eval_ws(const DensityModel& p0, const DensityModel& p, double delta,
                                const QuadConfig& cfg = {}) {
    return eval_ws(ContinuousPair(p0, p, cfg), delta);
}
inline IntegralEstimate eval_fm(const DensityModel& p0, const DensityModel& p, const QuadConfig& cfg = {}) {
    return eval_fm(ContinuousPair(p0, p, cfg));
}
inline CmResult eval_cm(const DensityModel& p0, const DensityModel& p, const QuadConfig& cfg = {}) {
    return eval_cm(ContinuousPair(p0, p, cfg));
}
inline UbValue eval_ub(const DensityModel& p0, const DensityModel& p) { return ContinuousPair(p0, p).ub(); }

}  // namespace hdl
