#pragma once

// Two interchangeable "pair providers" for a (p0, p) pair. Every discrepancy and
// condition functional is a P0-expectation of a function of the log ratio
// lr = log p0 - log p, optionally restricted to an event {p0/p > t} or
// {p0/p >= t}. ContinuousPair computes these by quadrature, DiscretePair by
// exact summation; the functionals are written once against either.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hdl/densities.hpp"
#include "hdl/errors.hpp"
#include "hdl/extended.hpp"
#include "hdl/integrate.hpp"

namespace hdl {

/// Ratio event {p0/p > t} (strict) or {p0/p >= t}.
struct RatioEvent {
    double t = 1.0;
    bool strict = true;

    bool contains(double lr) const {
        const double lt = std::log(t);
        return strict ? lr > lt : lr >= lt;
    }
};

/// Kernel k(log w0, lr) returning w0 * g(lr); w0 is the P0 weight at the point.
using RatioKernel = std::function<double(double log_w0, double lr)>;

/// Essential supremum of p0/p; `analytic` is false for grid lower bounds.
struct UbValue {
    double value = 0.0;
    bool analytic = true;
};

inline double log_ratio(double lp0, double lp) {
    if (lp == -kInf) return lp0 == -kInf ? 0.0 : kInf;
    return lp0 - lp;
}

/// log(m0/m) for masses, accurate when the ratio is near 1 (m0 - m is then exact).
inline double discrete_log_ratio(double m0, double m) {
    if (m == 0.0) return m0 == 0.0 ? 0.0 : kInf;
    if (m0 == 0.0) return -kInf;
    if (m0 >= 0.5 * m && m0 <= 2.0 * m) return std::log1p((m0 - m) / m);
    return std::log(m0) - std::log(m);
}

class DiscretePair {
public:
    DiscretePair(DiscreteDist p0, DiscreteDist p) : p0_(std::move(p0)), p_(std::move(p)) {
        if (p0_.atoms != p_.atoms) {
            throw Error(ErrorKind::IncompatibleSupport, "discrete pair must share one atom set");
        }
    }

    const DiscreteDist& p0() const { return p0_; }
    const DiscreteDist& p() const { return p_; }
    std::string label() const { return "discrete[" + std::to_string(p0_.size()) + "]"; }

    IntegralEstimate p0_expect(const RatioKernel& k, std::optional<RatioEvent> ev = std::nullopt) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < p0_.size(); ++i) {
            const double m0 = p0_.masses[i];
            if (m0 == 0.0) continue;
            const double m = p_.masses[i];
            const double lr = discrete_log_ratio(m0, m);
            // Events are tested on the ratio itself so exact levels compare exactly.
            if (ev) {
                const double r = m == 0.0 ? kInf : m0 / m;
                if (ev->strict ? !(r > ev->t) : !(r >= ev->t)) continue;
            }
            const double v = k(std::log(m0), lr);
            if (std::isnan(v)) throw Error(ErrorKind::IntegrandInvalid, "NaN on a positive-mass atom");
            sum = ext_add(sum, v);
        }
        return IntegralEstimate::exact(sum);
    }

    IntegralEstimate hellinger_sq() const {
        double sum = 0.0;
        for (std::size_t i = 0; i < p0_.size(); ++i) {
            const double d = std::sqrt(p0_.masses[i]) - std::sqrt(p_.masses[i]);
            sum += d * d;
        }
        return IntegralEstimate::exact(sum);
    }

    UbValue ub() const {
        double best = 0.0;
        for (std::size_t i = 0; i < p0_.size(); ++i) {
            if (p0_.masses[i] == 0.0) continue;
            if (p_.masses[i] == 0.0) return {kInf, true};
            best = std::max(best, p0_.masses[i] / p_.masses[i]);
        }
        return {best, true};
    }

    /// Distinct finite ratio levels carried by P0-positive atoms, ascending.
    std::vector<double> ratio_levels() const {
        std::vector<double> r;
        for (std::size_t i = 0; i < p0_.size(); ++i) {
            if (p0_.masses[i] > 0.0 && p_.masses[i] > 0.0) r.push_back(p0_.masses[i] / p_.masses[i]);
        }
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        return r;
    }

private:
    DiscreteDist p0_;
    DiscreteDist p_;
};

class ContinuousPair {
public:
    ContinuousPair(DensityModel p0, DensityModel p, QuadConfig cfg = {})
        : p0_(std::move(p0)), p_(std::move(p)), cfg_(cfg) {
        cfg_.validate();
        if (!p0_.support().continuous() || !p_.support().continuous()) {
            throw Error(ErrorKind::IncompatibleSupport, "continuous pair needs continuous densities");
        }
    }
    ContinuousPair(const ContinuousPair& o) : p0_(o.p0_), p_(o.p_), cfg_(o.cfg_) {}

    const DensityModel& p0() const { return p0_; }
    const DensityModel& p() const { return p_; }
    const QuadConfig& cfg() const { return cfg_; }
    std::string label() const { return p0_.tag().label() + "|" + p_.tag().label(); }

    /// Ratio breakpoints at level t, memoized.
    const std::vector<double>& breaks_at(double t) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = breaks_.find(t);
        if (it == breaks_.end()) it = breaks_.emplace(t, ratio_breakpoints(p0_, p_, t)).first;
        return it->second;
    }

    IntegralEstimate p0_expect(const RatioKernel& k, std::optional<RatioEvent> ev = std::nullopt) const {
        std::vector<double> extra = p_.breakpoints();
        if (ev) {
            const auto& b = breaks_at(ev->t);
            extra.insert(extra.end(), b.begin(), b.end());
        }
        std::optional<double> log_t;
        if (ev) log_t = std::log(ev->t);
        const bool strict = ev ? ev->strict : true;
        const auto kernel = [&](double x, double log_w) {
            const double lr = log_ratio(p0_.log_pdf(x), p_.log_pdf(x));
            if (log_t && !(strict ? lr > *log_t : lr >= *log_t)) return 0.0;
            return k(log_w, lr);
        };
        return expect_kernel(p0_, kernel, extra, cfg_);
    }

    IntegralEstimate hellinger_sq() const {
        std::vector<double> breaks = p0_.breakpoints();
        breaks.insert(breaks.end(), p_.breakpoints().begin(), p_.breakpoints().end());
        auto f = [&](double x) {
            const double a = p0_.log_pdf(x);
            const double b = p_.log_pdf(x);
            const double hi = std::max(a, b);
            const double lo = std::min(a, b);
            if (hi == -kInf) return 0.0;
            if (lo == -kInf) return std::exp(hi);
            const double d = std::expm1(0.5 * (lo - hi));
            return std::exp(hi) * d * d;
        };
        // Union of the supports; on the real line widen until the outside mass is negligible.
        double lo = 0.0, hi = 0.0, tail = 0.0;
        for (double extra = 0.0; extra <= 30.0; extra += 1.0) {
            const auto [a0, b0] = p0_.window(extra);
            const auto [a1, b1] = p_.window(extra);
            lo = std::min(a0, a1);
            hi = std::max(b0, b1);
            tail = p0_.mass_outside(lo, hi) + p_.mass_outside(lo, hi);
            if (tail <= cfg_.tail_mass) break;
        }
        IntegralEstimate r = integrate(f, lo, hi, breaks, cfg_);
        r.tail_bound += tail;
        r.abs_err += tail;
        if (r.status == QuadStatus::Converged && tail > cfg_.tail_mass) r.status = QuadStatus::TailTruncated;
        return r;
    }

    UbValue ub() const {
        if (p0_.pieces() && p_.pieces()) {
            const auto [d0, d1] = discretize_pair(p0_, p_);
            return DiscretePair(d0, d1).ub();
        }
        if (p0_.normal_mean() && p_.normal_mean()) {
            return {*p0_.normal_mean() == *p_.normal_mean() ? 1.0 : kInf, true};
        }
        // Grid supremum refined around the maximiser; only a lower bound.
        const auto [lo, hi] = common_domain(p0_, p_);
        constexpr int n = 1 << 14;
        double best = 0.0;
        double best_x = lo;
        const double step = (hi - lo) / n;
        auto ratio = [&](double x) {
            const double lr = log_ratio(p0_.log_pdf(x), p_.log_pdf(x));
            return p0_.log_pdf(x) == -kInf ? 0.0 : std::exp(lr);
        };
        for (int i = 0; i <= n; ++i) {
            const double x = std::clamp(lo + i * step, lo, hi);
            const double r = ratio(std::clamp(x, std::nextafter(lo, hi), std::nextafter(hi, lo)));
            if (r > best) { best = r; best_x = x; }
        }
        double a = std::max(lo, best_x - step), b = std::min(hi, best_x + step);
        for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
            const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
            const double r1 = ratio(m1), r2 = ratio(m2);
            best = std::max({best, r1, r2});
            if (r1 < r2) a = m1; else b = m2;
        }
        return {best, false};
    }

    /// Exact discrete equivalent when both densities are piecewise constant.
    std::optional<DiscretePair> exact_discrete() const {
        if (!p0_.pieces() || !p_.pieces()) return std::nullopt;
        auto [d0, d1] = discretize_pair(p0_, p_);
        return DiscretePair(std::move(d0), std::move(d1));
    }

private:
    DensityModel p0_;
    DensityModel p_;
    QuadConfig cfg_;
    mutable std::mutex mu_;
    mutable std::map<double, std::vector<double>> breaks_;
};

}  // namespace hdl
