#pragma once

// Hellinger distance, Kullback-Leibler divergence and variations, and the
// (fractional) Bernstein and convenient norms of the log likelihood ratio.

#include <cmath>
#include <string>

#include "hdl/densities.hpp"
#include "hdl/errors.hpp"
#include "hdl/extended.hpp"
#include "hdl/integrate.hpp"
#include "hdl/pair.hpp"
#include "hdl/special.hpp"

namespace hdl {

inline void require_delta(double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorKind::ParameterDomain, "delta must lie in (0, 1]");
}

template <class Pair>
IntegralEstimate hellinger_sq(const Pair& pr) {
    return pr.hellinger_sq();
}

template <class Pair>
IntegralEstimate kl_divergence(const Pair& pr) {
    return pr.p0_expect([](double lw, double lr) { return lr == kInf ? kInf : std::exp(lw) * lr; });
}

/// V_k (centered = false) or V_{k,0}. A finite K is required for centering.
template <class Pair>
IntegralEstimate kl_variation(const Pair& pr, double k, bool centered) {
    if (!(k > 1.0)) throw Error(ErrorKind::ParameterDomain, "KL variation needs k > 1");
    double center = 0.0;
    double center_err = 0.0;
    if (centered) {
        const IntegralEstimate K = kl_divergence(pr);
        if (!K.finite()) throw Error(ErrorKind::UndefinedCentering, "centered variation with K = +inf");
        center = K.value;
        center_err = K.abs_err;
    }
    IntegralEstimate r = pr.p0_expect([k, center](double lw, double lr) {
        if (lr == kInf) return kInf;
        return std::exp(lw) * std::pow(std::fabs(lr - center), k);
    });
    // Moving the centre by e changes P0|lr - c|^k by at most k e (P0|lr - c|^k)^((k-1)/k).
    if (centered && r.finite()) r.abs_err += k * center_err * std::pow(r.value + center_err, (k - 1.0) / k);
    return r;
}

/// ||delta log(p0/p)||^2_{P0,B} = 2 P0(e^|f| - 1 - |f|).
template <class Pair>
IntegralEstimate bernstein_norm_sq(const Pair& pr, double delta) {
    require_delta(delta);
    IntegralEstimate r = pr.p0_expect(
        [delta](double lw, double lr) { return 2.0 * weighted_exp_excess(lw, delta * std::fabs(lr)); });
    return r;
}

/// P0(e^f + e^-f - 2), f = delta log(p0/p).
template <class Pair>
IntegralEstimate convenient_norm_sq(const Pair& pr, double delta) {
    require_delta(delta);
    return pr.p0_expect([delta](double lw, double lr) { return weighted_cosh_excess(lw, delta * lr); });
}

/// The pair (p0, (p0 + p)/2).
inline ContinuousPair mixture_pair(const ContinuousPair& pr) {
    return ContinuousPair(pr.p0(), half_mixture(pr.p0(), pr.p()), pr.cfg());
}

inline DiscretePair mixture_pair(const DiscretePair& pr) {
    std::vector<double> m(pr.p0().size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (pr.p0().masses[i] + pr.p().masses[i]);
    return DiscretePair(pr.p0(), DiscreteDist(pr.p0().atoms, std::move(m)));
}

/// ||log(2 p0/(p0 + p))||^2_{P0,B}; finite because the ratio is at most 2.
template <class Pair>
IntegralEstimate half_mixture_log_ratio_norm_sq(const Pair& pr) {
    return bernstein_norm_sq(mixture_pair(pr), 1.0);
}

struct DiscrepancyReport {
    IntegralEstimate h_sq;
    IntegralEstimate kl;
    IntegralEstimate v_k;
    IntegralEstimate v_k0;
    bool v_k0_defined = true;
    IntegralEstimate bern_sq;
    IntegralEstimate conv_sq;
    double delta = 1.0;
    double k = 2.0;
    double err_budget = 0.0;
};

template <class Pair>
DiscrepancyReport discrepancy_report(const Pair& pr, double delta, double k) {
    require_delta(delta);
    DiscrepancyReport r;
    r.delta = delta;
    r.k = k;
    r.h_sq = hellinger_sq(pr);
    r.kl = kl_divergence(pr);
    r.v_k = kl_variation(pr, k, false);
    if (r.kl.finite()) {
        r.v_k0 = kl_variation(pr, k, true);
    } else {
        r.v_k0_defined = false;
        r.v_k0 = IntegralEstimate::infinite();
    }
    r.bern_sq = bernstein_norm_sq(pr, delta);
    r.conv_sq = convenient_norm_sq(pr, delta);
    for (const auto* e : {&r.h_sq, &r.kl, &r.v_k, &r.v_k0, &r.bern_sq, &r.conv_sq}) {
        if (e->finite()) r.err_budget += e->abs_err;
    }
    return r;
}

// Density-level entry points.

inline IntegralEstimate hellinger_sq(const DensityModel& p0, const DensityModel& p, const QuadConfig& cfg = {}) {
    return hellinger_sq(ContinuousPair(p0, p, cfg));
}
inline IntegralEstimate kl_divergence(const DensityModel& p0, const DensityModel& p, const QuadConfig& cfg = {}) {
    return kl_divergence(ContinuousPair(p0, p, cfg));
}
inline IntegralEstimate kl_variation(const DensityModel& p0, const DensityModel& p, double k, bool centered,
                                     const QuadConfig& cfg = {}) {
    return kl_variation(ContinuousPair(p0, p, cfg), k, centered);
}
inline IntegralEstimate bernstein_norm_sq(const DensityModel& p0, const DensityModel& p, double delta,
                                          const QuadConfig& cfg = {}) {
    return bernstein_norm_sq(ContinuousPair(p0, p, cfg), delta);
}
inline IntegralEstimate convenient_norm_sq(const DensityModel& p0, const DensityModel& p, double delta,
                                           const QuadConfig& cfg = {}) {
    return convenient_norm_sq(ContinuousPair(p0, p, cfg), delta);
}
inline IntegralEstimate half_mixture_log_ratio_norm_sq(const DensityModel& p0, const DensityModel& p,
                                                       const QuadConfig& cfg = {}) {
    return half_mixture_log_ratio_norm_sq(ContinuousPair(p0, p, cfg));
}

}  // namespace hdl
