#pragma once

// Exact discrete oracle: random pairs on a shared atom set, implication-lattice
// fuzzing by exact summation, and hill-climbing searches for the separating
// examples.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hdl/certify.hpp"
#include "hdl/parallel.hpp"
#include "hdl/random.hpp"

namespace hdl {

struct LatticeTrial {
    std::uint64_t index = 0;
    DiscreteDist p0;
    DiscreteDist p;
    ConditionProfile profile;
    DiscrepancyReport report;
    std::vector<std::string> violations;
};

namespace detail {

/// Masses proportional to w, quantised to multiples of 2^-52 with the rounding
/// remainder given to the largest mass. Every partial sum of such masses is exact,
/// so they sum to exactly 1; weights below the quantum become zero atoms.
inline std::vector<double> normalize_masses(std::vector<double> w) {
    constexpr double q = 0x1.0p-52;
    double total = 0.0;
    for (double v : w) total += v;
    double used = 0.0;
    for (double& v : w) {
        v = std::floor(v / total / q) * q;
        used += v;
    }
    *std::max_element(w.begin(), w.end()) += 1.0 - used;
    return w;
}

inline std::vector<double> dirichlet(Rng& rng, std::size_t n, double alpha) {
    std::gamma_distribution<double> g(alpha, 1.0);
    for (;;) {
        std::vector<double> w(n);
        double total = 0.0;
        for (auto& v : w) total += (v = g(rng));
        if (total > 0.0) return normalize_masses(std::move(w));
    }
}

}  // namespace detail

/// Two distributions on atoms 0..n-1 drawn from a symmetric Dirichlet whose
/// concentration is picked per pair from {1/4, 1, 4}; with probability 0.2 one of
/// them loses an atom.
inline std::pair<DiscreteDist, DiscreteDist> random_discrete_pair(std::uint64_t seed, int n_atoms) {
    if (n_atoms < 1 || n_atoms > 16) throw Error(ErrorKind::ParameterDomain, "n_atoms must be in [1, 16]");
    Rng rng(seed);
    static constexpr double alphas[] = {0.25, 1.0, 4.0};
    const double alpha = alphas[rng() % 3];
    const auto n = static_cast<std::size_t>(n_atoms);
    std::vector<double> atoms(n);
    for (std::size_t i = 0; i < n; ++i) atoms[i] = static_cast<double>(i);
    auto m0 = detail::dirichlet(rng, n, alpha);
    auto m1 = detail::dirichlet(rng, n, alpha);
    if (n > 1 && uniform_open01(rng) < 0.2) {
        auto& victim = (rng() & 1) ? m0 : m1;
        const std::size_t at = rng() % n;
        std::vector<double> w = victim;
        w[at] = 0.0;
        double rest = 0.0;
        for (double v : w) rest += v;
        if (rest > 0.0) victim = detail::normalize_masses(std::move(w));
    }
    return {DiscreteDist(atoms, std::move(m0)), DiscreteDist(std::move(atoms), std::move(m1))};
}

/// Every implication and theorem inequality on one discrete pair, by exact summation.
inline std::vector<Certificate> lattice_certificates(PairEvaluator<DiscretePair>& ev) {
    std::vector<Certificate> out;
    auto append = [&out](std::vector<Certificate> v) { out.insert(out.end(), v.begin(), v.end()); };
    append(certify_cm_chain(ev));
    append(certify_half_mixture(ev));
    out.push_back(certify_nc_order(ev, 0.5, 1.0));
    out.push_back(certify_lk_order(ev, 1.0, 2.0));
    out.push_back(certify_lk_order(ev, 2.0, 3.0));
    for (double d : {0.5, 1.0}) {
        append(certify_bn(ev, d));
        for (double k : {2.0, 3.0}) append(certify_bn_vk(ev, d, k));
        for (double k : {1.0, 2.0}) out.push_back(certify_ws_bound(ev, d, k));
    }
    append(certify_kl3(ev, 2.0, 3.0));
    return out;
}

inline LatticeTrial run_trial(std::uint64_t index, DiscreteDist p0, DiscreteDist p, bool with_profile) {
    LatticeTrial t;
    t.index = index;
    t.p0 = p0;
    t.p = p;
    PairEvaluator<DiscretePair> ev(DiscretePair(std::move(p0), std::move(p)));
    for (const auto& c : lattice_certificates(ev)) {
        if (!c.pass) t.violations.push_back(c.name);
    }
    if (with_profile || !t.violations.empty()) {
        t.profile = condition_profile(ev.pair(), 1.0, 2.0);
        t.report = discrepancy_report(ev.pair(), 1.0, 2.0);
    }
    return t;
}

struct FuzzSummary {
    long trials = 0;
    std::vector<LatticeTrial> violations;
};

/// Random trials with per-trial seeds derive_seed(seed, {n_atoms, i}); returns the violating ones.
inline FuzzSummary fuzz_implications(long trials, std::uint64_t seed, int n_atoms) {
    const auto results = parallel_map<LatticeTrial>(static_cast<std::size_t>(trials), [&](std::size_t i) {
        auto [a, b] = random_discrete_pair(derive_seed(seed, {static_cast<std::uint64_t>(n_atoms), i}), n_atoms);
        LatticeTrial t = run_trial(i, std::move(a), std::move(b), false);
        if (t.violations.empty()) return LatticeTrial{};
        return t;
    });
    FuzzSummary s;
    s.trials = trials;
    for (const auto& t : results) if (!t.violations.empty()) s.violations.push_back(t);
    return s;
}

enum class GapObjective {
    NcHalfOverHsqWithFm,  // maximise NC(1/2)/h^2 subject to FM <= 2
    CmWithNcRatio,        // maximise CM subject to NC(1)/h^2 <= 6
};

inline const char* to_string(GapObjective g) {
    return g == GapObjective::NcHalfOverHsqWithFm ? "nc-half-over-hsq" : "cm-with-nc-ratio";
}

struct GapResult {
    GapObjective objective{};
    double value = -kInf;
    bool feasible = false;
    LatticeTrial best;
    long evaluations = 0;
};

namespace detail {

/// (objective, constraint violation) for one pair; identical pairs are excluded via h^2 > 0.
inline std::pair<double, double> gap_score(GapObjective obj, const DiscretePair& pr) {
    const double h2 = hellinger_sq(pr).value;
    if (!(h2 > 1e-300)) return {-kInf, kInf};
    if (obj == GapObjective::NcHalfOverHsqWithFm) {
        const double fm = eval_fm(pr).value;
        const double viol = fm == kInf ? kInf : std::max(0.0, fm - 2.0);
        return {eval_nc(pr, 0.5).value / h2, viol};
    }
    const double ratio = eval_nc(pr, 1.0).value / h2;
    const double viol = ratio == kInf ? kInf : std::max(0.0, ratio - 6.0);
    const double cm = eval_cm(pr).value;
    return {std::isfinite(cm) ? cm : -kInf, viol};
}

inline bool better(std::pair<double, double> a, std::pair<double, double> b) {
    if (a.second != b.second) return a.second < b.second;  // feasibility first
    return a.first > b.first;
}

}  // namespace detail

/// Restarted hill climbing in log-mass coordinates. A step shifts the log mass of one
/// atom in one distribution, in both (moving mass at a fixed ratio), or in opposite
/// directions (moving the ratio), by a normal step of random scale; it is kept if it
/// reduces the constraint violation or, when feasible, does not lower the objective.
/// Restarts get `steps_per_restart` steps each.
inline GapResult search_gap(GapObjective obj, long trials, std::uint64_t seed, int n_atoms = 4,
                            long steps_per_restart = 2000) {
    if (trials < 1 || steps_per_restart < 1) throw Error(ErrorKind::ParameterDomain, "search_gap needs trials >= 1");
    GapResult best;
    best.objective = obj;
    const long restarts = std::max(1L, trials / steps_per_restart);
    const long per = trials / restarts;
    std::pair<double, double> best_score{-kInf, kInf};
    DiscretePair best_pair = [&] {
        auto [a, b] = random_discrete_pair(derive_seed(seed, {0}), n_atoms);
        return DiscretePair(a, b);
    }();
    for (long r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, {1, static_cast<std::uint64_t>(r)}));
        auto [a, b] = random_discrete_pair(derive_seed(seed, {2, static_cast<std::uint64_t>(r)}), n_atoms);
        std::vector<double> l0(a.size()), l1(b.size());
        // Zero masses are revived at a small level so every coordinate can move.
        for (std::size_t i = 0; i < l0.size(); ++i) {
            l0[i] = std::log(std::max(a.masses[i], 1e-12));
            l1[i] = std::log(std::max(b.masses[i], 1e-12));
        }
        auto build = [&](const std::vector<double>& x0, const std::vector<double>& x1) {
            std::vector<double> w0(x0.size()), w1(x1.size());
            for (std::size_t i = 0; i < w0.size(); ++i) {
                w0[i] = std::exp(x0[i]);
                w1[i] = std::exp(x1[i]);
            }
            return DiscretePair(DiscreteDist(a.atoms, detail::normalize_masses(w0)),
                                DiscreteDist(a.atoms, detail::normalize_masses(w1)));
        };
        DiscretePair cur = build(l0, l1);
        auto cur_score = detail::gap_score(obj, cur);
        ++best.evaluations;
        for (long s = 0; s < per; ++s) {
            auto n0 = l0, n1 = l1;
            const double scale = std::exp(std::log(0.01) + std::log(300.0) * uniform_open01(rng));
            const double step = scale * standard_normal(rng);
            const std::size_t at = rng() % n0.size();
            switch (rng() % 4) {
            case 0: n0[at] += step; break;
            case 1: n1[at] += step; break;
            case 2: n0[at] += step; n1[at] += step; break;
            default: n0[at] += step; n1[at] -= step; break;
            }
            for (auto* x : {&n0, &n1}) {
                const double mx = *std::max_element(x->begin(), x->end());
                for (double& e : *x) e = std::max(e - mx, -600.0);
            }
            DiscretePair cand = build(n0, n1);
            const auto sc = detail::gap_score(obj, cand);
            ++best.evaluations;
            if (!detail::better(cur_score, sc)) {
                l0 = std::move(n0);
                l1 = std::move(n1);
                cur = std::move(cand);
                cur_score = sc;
            }
        }
        if (detail::better(cur_score, best_score)) {
            best_score = cur_score;
            best_pair = cur;
        }
    }
    best.value = best_score.first;
    best.feasible = best_score.second == 0.0;
    best.best = run_trial(0, best_pair.p0(), best_pair.p(), true);
    return best;
}

}  // namespace hdl
