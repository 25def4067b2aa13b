#pragma once

// Sieve MLE for the normal location model with a neighbourhood of the truth
// excluded, the Monte Carlo rate experiment, and the Hellinger size of the
// location bracket.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "hdl/errors.hpp"
#include "hdl/integrate.hpp"
#include "hdl/parallel.hpp"
#include "hdl/random.hpp"
#include "hdl/special.hpp"

namespace hdl {

/// Maximiser of the N(theta, 1) likelihood over |theta| >= radius: the sample mean,
/// or the nearer sieve boundary when the mean falls inside (sign(0) = +1).
inline double mle_normal_sieve(std::span<const double> sample, double radius) {
    if (sample.empty()) throw Error(ErrorKind::EmptySample, "mle_normal_sieve needs a nonempty sample");
    if (!(radius > 0.0)) throw Error(ErrorKind::ParameterDomain, "sieve radius must be positive");
    const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(sample.size());
    if (std::fabs(mean) >= radius) return mean;
    return mean < 0.0 ? -radius : radius;
}

/// h(N(t1,1), N(t2,1))^2 = 2 - 2 exp(-(t1 - t2)^2 / 8).
inline double normal_hellinger_sq(double t1, double t2) {
    const double d = t1 - t2;
    return -2.0 * std::expm1(-d * d / 8.0);
}

struct RateConfig {
    std::vector<long> sample_sizes{100, 400, 1600, 6400};
    long replications = 200;
    std::uint64_t seed = 20240601;
    std::function<double(long)> sieve_rule = [](long n) { return 1.0 / std::sqrt(static_cast<double>(n)); };
    double tolerance_slack = 0.0;  // log-likelihood suboptimality injected into the estimator

    void validate() const {
        if (sample_sizes.empty()) throw Error(ErrorKind::ParameterDomain, "no sample sizes");
        for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
            if (sample_sizes[i] < 50) throw Error(ErrorKind::ParameterDomain, "sample sizes must be >= 50");
            if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1]) {
                throw Error(ErrorKind::ParameterDomain, "sample sizes must be strictly increasing");
            }
        }
        if (replications < 1) throw Error(ErrorKind::ParameterDomain, "replications must be positive");
        if (!(tolerance_slack >= 0.0)) throw Error(ErrorKind::ParameterDomain, "tolerance_slack must be >= 0");
    }
};

struct RateRow {
    long n = 0;
    double median_h = 0.0;
    double iqr_h = 0.0;
};

struct RateResult {
    std::vector<RateRow> rows;
    double slope = 0.0;
    double intercept = 0.0;
};

/// Linear-interpolation quantile of sorted data (type 7).
inline double quantile_sorted(const std::vector<double>& v, double q) {
    if (v.empty()) throw Error(ErrorKind::EmptySample, "quantile of empty data");
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Least-squares fit y = intercept + slope x.
inline std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return {slope, my - slope * mx};
}

/// Hellinger error of the sieve MLE for one replication with seed derive_seed(seed, {n, rep}).
inline double rate_replication(const RateConfig& cfg, long n, long rep) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)}));
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = standard_normal(rng);
    double theta = mle_normal_sieve(x, cfg.sieve_rule(n));
    if (cfg.tolerance_slack > 0.0) {
        // Move away from the maximiser until the log-likelihood has dropped by the slack.
        const double d = std::sqrt(2.0 * cfg.tolerance_slack / static_cast<double>(n));
        theta += theta >= 0.0 ? d : -d;
    }
    return std::sqrt(normal_hellinger_sq(0.0, theta));
}

inline RateResult run_rate_experiment(const RateConfig& cfg) {
    cfg.validate();
    RateResult res;
    std::vector<double> lx, ly;
    for (long n : cfg.sample_sizes) {
        auto h = parallel_map<double>(static_cast<std::size_t>(cfg.replications),
                                      [&](std::size_t rep) { return rate_replication(cfg, n, static_cast<long>(rep)); });
        std::sort(h.begin(), h.end());
        RateRow row;
        row.n = n;
        row.median_h = quantile_sorted(h, 0.5);
        row.iqr_h = quantile_sorted(h, 0.75) - quantile_sorted(h, 0.25);
        res.rows.push_back(row);
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(row.median_h));
    }
    std::tie(res.slope, res.intercept) = fit_line(lx, ly);
    return res;
}

/// h(p_U, p_L)^2 for the envelope pair of {N(theta, 1): lo <= theta <= up}:
/// p_L(x) = min over theta of phi(x - theta), p_U(x) = max over theta.
inline IntegralEstimate bracket_hellinger_sq(double lo, double up, const QuadConfig& cfg = {}) {
    if (!(lo <= up)) throw Error(ErrorKind::ParameterDomain, "bracket needs lo <= up");
    if (lo == up) return IntegralEstimate::exact(0.0);
    const double mid = 0.5 * (lo + up);
    auto log_lower = [=](double x) { return normal_log_pdf(x < mid ? x - up : x - lo); };
    auto log_upper = [=](double x) {
        if (x < lo) return normal_log_pdf(x - lo);
        if (x > up) return normal_log_pdf(x - up);
        return normal_log_pdf(0.0);
    };
    auto f = [&](double x) {
        const double a = log_upper(x), b = log_lower(x);
        const double d = std::expm1(0.5 * (b - a));
        return std::exp(a) * d * d;
    };
    constexpr double half_width = 12.0;  // tails beyond carry < 4e-33 of either envelope
    const std::vector<double> breaks{lo, mid, up};
    IntegralEstimate r = integrate(f, lo - half_width, up + half_width, breaks, cfg);
    const double tail = 4.0 * normal_cdf(-half_width);
    r.tail_bound += tail;
    r.abs_err += tail;
    return r;
}

inline double bracket_hellinger(double lo, double up, const QuadConfig& cfg = {}) {
    return std::sqrt(bracket_hellinger_sq(lo, up, cfg).value);
}

}  // namespace hdl
