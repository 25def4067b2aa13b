#pragma once

// Certificates: one instance of a theorem inequality on a concrete pair, with the
// quadrature error propagated into an error budget.

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "hdl/densities.hpp"
#include "hdl/evaluator.hpp"
#include "hdl/extended.hpp"
#include "hdl/random.hpp"
#include "hdl/special.hpp"

namespace hdl {

/// Theorem constants routed through one struct so tests can mutate them.
struct CertConstants {
    double bn_hellinger = 18.0;  // ||delta log(p0/p)||_B^2 <= C delta h^2 + 2 NC(delta)
    double suff_offset = 1.0;    // NC(1) <= (2M + c)^2 h^2
};

struct Certificate {
    std::string name;
    std::string pair;
    double delta = std::numeric_limits<double>::quiet_NaN();
    double k = std::numeric_limits<double>::quiet_NaN();
    double k_prime = std::numeric_limits<double>::quiet_NaN();
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double err_budget = 0.0;
    bool pass = true;
    bool vacuous = false;  // rhs = +inf
    bool skipped = false;  // not applicable for this pair (e.g. centering with K = +inf)
    std::string note;
};

/// Relative floating slack applied on top of the error budget.
inline constexpr double kCertSlack = 1e-12;

/// Decide lhs <= rhs + err_budget with the extended-real rules.
inline Certificate judge(std::string name, double lhs, double lhs_err, double rhs, double rhs_err) {
    Certificate c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    if (rhs == kInf) {
        c.vacuous = true;
        c.pass = true;
        c.margin = kInf;
        return c;
    }
    if (lhs == kInf) {
        c.pass = false;
        c.margin = -kInf;
        return c;
    }
    c.err_budget = (std::isfinite(lhs_err) ? lhs_err : 0.0) + (std::isfinite(rhs_err) ? rhs_err : 0.0);
    c.margin = rhs - lhs;
    c.pass = lhs <= rhs + c.err_budget + kCertSlack * std::max(std::fabs(lhs), std::fabs(rhs));
    return c;
}

inline Certificate skipped(std::string name, std::string why) {
    Certificate c;
    c.name = std::move(name);
    c.skipped = true;
    c.note = std::move(why);
    c.lhs = c.rhs = c.margin = std::numeric_limits<double>::quiet_NaN();
    return c;
}

/// Error of f at x given input errors e: the largest deviation over the corners of the
/// box x +- e (inputs clipped at zero, all inputs here being nonnegative quantities).
inline double corner_error(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                           const std::vector<double>& e) {
    const double f0 = f(x);
    if (!std::isfinite(f0)) return 0.0;
    double worst = 0.0;
    const std::size_t n = x.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::vector<double> y = x;
        for (std::size_t i = 0; i < n; ++i) y[i] = std::max(0.0, x[i] + ((mask >> i) & 1 ? e[i] : -e[i]));
        const double fy = f(y);
        if (std::isfinite(fy)) worst = std::max(worst, std::fabs(fy - f0));
    }
    return worst;
}

inline double err_of(const IntegralEstimate& e) { return e.finite() ? e.abs_err : 0.0; }

namespace detail {

inline void stamp(std::vector<Certificate>& out, const std::string& pair, double delta, double k, double kp) {
    for (auto& c : out) {
        c.pair = pair;
        c.delta = delta;
        c.k = k;
        c.k_prime = kp;
    }
}

}  // namespace detail

/// Bernstein-norm sandwich and the KL bounds of part (i).
template <class Pair>
std::vector<Certificate> certify_bn(PairEvaluator<Pair>& ev, double delta, const CertConstants& C = {}) {
    require_delta(delta);
    const auto& nc = ev.nc(delta);
    const auto& bern = ev.bern(delta);
    const auto& h2 = ev.h_sq();
    const auto& K = ev.kl();
    const double lower_c = std::pow(1.0 - std::pow(4.0, -delta), 2);
    std::vector<Certificate> out;
    out.push_back(judge("bn.lower", ext_mul(lower_c, nc.value), lower_c * err_of(nc), bern.value, err_of(bern)));
    out.push_back(judge("bn.upper", bern.value, err_of(bern),
                        ext_add(C.bn_hellinger * delta * h2.value, 2.0 * nc.value),
                        C.bn_hellinger * delta * err_of(h2) + 2.0 * err_of(nc)));
    out.push_back(judge("bn.kl.lower", h2.value, err_of(h2), K.value, err_of(K)));
    out.push_back(judge("bn.kl.upper", K.value, err_of(K), ext_add(3.0 * h2.value, nc.value / delta),
                        3.0 * err_of(h2) + err_of(nc) / delta));
    detail::stamp(out, ev.pair().label(), delta, std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN());
    return out;
}

/// 2^-k V_{k,0} <= V_k <= Gamma(k+1) delta^-k ||delta log(p0/p)||_B^2 / 2.
template <class Pair>
std::vector<Certificate> certify_bn_vk(PairEvaluator<Pair>& ev, double delta, double k) {
    require_delta(delta);
    if (!(k >= 2.0)) throw Error(ErrorKind::ParameterDomain, "certify_bn_vk needs k >= 2");
    const auto& vk = ev.v_k(k);
    const auto& bern = ev.bern(delta);
    std::vector<Certificate> out;
    if (ev.kl().finite()) {
        const auto& vk0 = ev.v_k0(k);
        const double c = std::pow(2.0, -k);
        out.push_back(judge("bn.vk.lower", ext_mul(c, vk0.value), c * err_of(vk0), vk.value, err_of(vk)));
    } else {
        out.push_back(skipped("bn.vk.lower", "K = +inf, centered variation undefined"));
    }
    const double c = 0.5 * gamma_fn(k + 1.0) * std::pow(delta, -k);
    out.push_back(judge("bn.vk.upper", vk.value, err_of(vk), ext_mul(c, bern.value), c * err_of(bern)));
    detail::stamp(out, ev.pair().label(), delta, k, std::numeric_limits<double>::quiet_NaN());
    return out;
}

/// L_k <= 4 h^{2(1 - k/k')} L_{k'}^{k/k'} for 0 < k <= k'.
template <class Pair>
Certificate certify_lk_order(PairEvaluator<Pair>& ev, double k, double k_prime) {
    if (!(k > 0.0 && k <= k_prime)) throw Error(ErrorKind::ParameterDomain, "need 0 < k <= k'");
    const auto& h2 = ev.h_sq();
    const auto& lk = ev.lk(k);
    const auto& lkp = ev.lk(k_prime);
    const double a = k / k_prime;
    const auto f = [a](const std::vector<double>& x) {
        return ext_mul(4.0 * ext_pow(x[0], 1.0 - a), ext_pow(x[1], a));
    };
    Certificate c = judge("kl3.order", lk.value, err_of(lk), f({h2.value, lkp.value}),
                          corner_error(f, {h2.value, lkp.value}, {err_of(h2), err_of(lkp)}));
    c.pair = ev.pair().label();
    c.k = k;
    c.k_prime = k_prime;
    return c;
}

/// KL divergence and variation bounds through the truncated log moments L_k.
template <class Pair>
std::vector<Certificate> certify_kl3(PairEvaluator<Pair>& ev, double k, double k_prime) {
    if (!(k >= 2.0 && k_prime >= k)) throw Error(ErrorKind::ParameterDomain, "certify_kl3 needs 2 <= k <= k'");
    const auto& h2 = ev.h_sq();
    const auto& K = ev.kl();
    const auto& l1 = ev.lk(1.0);
    const auto& lk = ev.lk(k);
    const auto& vk = ev.v_k(k);
    std::vector<Certificate> out;
    out.push_back(judge("kl3.kl.lower", ext_mul(1.0 / 3.0, l1.value), err_of(l1) / 3.0, K.value, err_of(K)));
    out.push_back(judge("kl3.kl.upper", K.value, err_of(K), ext_add(3.0 * h2.value, l1.value),
                        3.0 * err_of(h2) + err_of(l1)));
    out.push_back(judge("kl3.vk.lower", lk.value, err_of(lk), vk.value, err_of(vk)));
    const double c = 4.0 * std::max(2.0 * std::pow(std::log(4.0), k - 2.0), std::pow(k / std::numbers::e, k));
    out.push_back(judge("kl3.vk.upper", vk.value, err_of(vk), ext_add(c * h2.value, lk.value),
                        c * err_of(h2) + err_of(lk)));
    out.push_back(certify_lk_order(ev, k, k_prime));
    detail::stamp(out, ev.pair().label(), std::numeric_limits<double>::quiet_NaN(), k, k_prime);
    return out;
}

/// NC(delta) <= 4 h^{2(1 - delta/delta')} NC(delta')^{delta/delta'} for delta <= delta'.
template <class Pair>
Certificate certify_nc_order(PairEvaluator<Pair>& ev, double delta, double delta_prime) {
    require_delta(delta);
    require_delta(delta_prime);
    if (!(delta <= delta_prime)) throw Error(ErrorKind::ParameterDomain, "need delta <= delta'");
    const auto& h2 = ev.h_sq();
    const auto& a_nc = ev.nc(delta);
    const auto& b_nc = ev.nc(delta_prime);
    const double a = delta / delta_prime;
    const auto f = [a](const std::vector<double>& x) {
        return ext_mul(4.0 * ext_pow(x[0], 1.0 - a), ext_pow(x[1], a));
    };
    Certificate c = judge("nc.order", a_nc.value, err_of(a_nc), f({h2.value, b_nc.value}),
                          corner_error(f, {h2.value, b_nc.value}, {err_of(h2), err_of(b_nc)}));
    c.pair = ev.pair().label();
    c.delta = delta;
    c.k_prime = delta_prime;
    c.note = "k_prime holds delta'";
    return c;
}

/// L_k <= delta^-k [4 + e/(sqrt(e) - 1)^2 (k v log M)^k] h^2 with M = WS(delta)/h^2.
template <class Pair>
Certificate certify_ws_bound(PairEvaluator<Pair>& ev, double delta, double k) {
    require_delta(delta);
    if (!(k > 0.0)) throw Error(ErrorKind::ParameterDomain, "certify_ws_bound needs k > 0");
    const auto& h2 = ev.h_sq();
    Certificate c;
    if (!(h2.value > 0.0)) {
        c = skipped("ws.lk", "h^2 = 0");
    } else {
        const auto& ws = ev.ws(delta);
        const auto& lk = ev.lk(k);
        const double e = std::numbers::e;
        const double cst = e / std::pow(std::sqrt(e) - 1.0, 2);
        const auto f = [=](const std::vector<double>& x) {
            if (!(x[1] > 0.0)) return kInf;
            if (x[0] == kInf) return kInf;
            const double logm = x[0] > 0.0 ? std::log(x[0] / x[1]) : -kInf;
            return std::pow(delta, -k) * (4.0 + cst * std::pow(std::max(k, logm), k)) * x[1];
        };
        c = judge("ws.lk", lk.value, err_of(lk), f({ws.value, h2.value}),
                  corner_error(f, {ws.value, h2.value}, {err_of(ws), err_of(h2)}));
    }
    c.pair = ev.pair().label();
    c.delta = delta;
    c.k = k;
    return c;
}

/// (CM) => NC(1), (UB) => (CM), NC(1) => (FM).
template <class Pair>
std::vector<Certificate> certify_cm_chain(PairEvaluator<Pair>& ev, const CertConstants& C = {}) {
    const auto& h2 = ev.h_sq();
    const auto& nc1 = ev.nc(1.0);
    const auto& fm = ev.fm();
    const CmResult& cm = ev.cm();
    const UbValue& ub = ev.ub();
    std::vector<Certificate> out;
    {
        const double off = C.suff_offset;
        const auto f = [off](const std::vector<double>& x) {
            if (x[0] == kInf) return kInf;
            const double s = 2.0 * x[0] + off;
            return s * s * x[1];
        };
        out.push_back(judge("cm.nc1", nc1.value, err_of(nc1), f({cm.value, h2.value}),
                            corner_error(f, {cm.value, h2.value}, {cm.abs_err, err_of(h2)})));
    }
    if (ub.analytic) {
        out.push_back(judge("ub.cm", cm.value, cm.abs_err, ub.value, 0.0));
    } else {
        out.push_back(skipped("ub.cm", "essential supremum known only as a grid lower bound"));
    }
    {
        const auto f = [](const std::vector<double>& x) { return ext_add(x[0], 6.0 * std::sqrt(x[1]) + 1.0); };
        out.push_back(judge("nc1.fm", fm.value, err_of(fm), f({nc1.value, h2.value}),
                            corner_error(f, {nc1.value, h2.value}, {err_of(nc1), err_of(h2)})));
    }
    detail::stamp(out, ev.pair().label(), 1.0, std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN());
    return out;
}

/// Half-mixture comparisons used in the sieve MLE argument.
template <class Pair>
std::vector<Certificate> certify_half_mixture(PairEvaluator<Pair>& ev, const CertConstants& C = {}) {
    const auto& h2 = ev.h_sq();
    auto& mix = ev.mixture();
    const auto& hm2 = mix.h_sq();
    const auto& bm = mix.bern(1.0);
    const auto& km = mix.kl();
    const double lo = std::pow(1.0 - 1.0 / std::numbers::sqrt2, 2);
    std::vector<Certificate> out;
    out.push_back(judge("hm.h.lower", lo * h2.value, lo * err_of(h2), hm2.value, err_of(hm2)));
    out.push_back(judge("hm.h.upper", hm2.value, err_of(hm2), 0.5 * h2.value, 0.5 * err_of(h2)));
    out.push_back(judge("hm.bern.mix", bm.value, err_of(bm), C.bn_hellinger * hm2.value,
                        C.bn_hellinger * err_of(hm2)));
    out.push_back(judge("hm.bern", bm.value, err_of(bm), 0.5 * C.bn_hellinger * h2.value,
                        0.5 * C.bn_hellinger * err_of(h2)));
    out.push_back(judge("hm.kl.mix", km.value, err_of(km), 3.0 * hm2.value, 3.0 * err_of(hm2)));
    out.push_back(judge("hm.kl", km.value, err_of(km), 1.5 * h2.value, 1.5 * err_of(h2)));
    detail::stamp(out, ev.pair().label(), 1.0, std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN());
    return out;
}

struct GridSpec {
    std::vector<double> deltas{0.25, 0.5, 1.0};
    std::vector<double> ks{2.0, 3.0};
    std::vector<double> k_primes{3.0, 4.0};
};

/// Every certificate for one pair over the (delta, k, k') grid, in a fixed order.
template <class Pair>
std::vector<Certificate> certify_pair(PairEvaluator<Pair>& ev, const GridSpec& g = {}, const CertConstants& C = {}) {
    std::vector<Certificate> out;
    auto append = [&out](std::vector<Certificate> v) { out.insert(out.end(), v.begin(), v.end()); };
    append(certify_cm_chain(ev, C));
    append(certify_half_mixture(ev, C));
    for (double d : g.deltas) {
        append(certify_bn(ev, d, C));
        for (double dp : g.deltas) if (d < dp) out.push_back(certify_nc_order(ev, d, dp));
        out.push_back(certify_ws_bound(ev, d, 1.0));
        for (double k : g.ks) {
            append(certify_bn_vk(ev, d, k));
            out.push_back(certify_ws_bound(ev, d, k));
        }
    }
    for (double k : g.ks)
        for (double kp : g.k_primes)
            if (k <= kp) append(certify_kl3(ev, k, kp));
    return out;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) {
        v.push_back(n == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1)));
    }
    return v;
}

/// A (reference, alternative) density pair with a stable label.
struct PairSpec {
    Family family;
    double theta;
    DensityModel p0() const { return reference_for(family); }
    DensityModel p() const { return make_family(family, theta); }
};

/// The standard certification grid: the triangular pair, doom and counter on a
/// 12-point log grid in [1e-3, 0.2], and normal location shifts.
inline std::vector<PairSpec> standard_pairs() {
    std::vector<PairSpec> v{{Family::Triangular01, 0.0}};
    for (double t : log_grid(1e-3, 0.2, 12)) v.push_back({Family::Doom, t});
    for (double t : log_grid(1e-3, 0.2, 12)) v.push_back({Family::Counter, t});
    for (double t : {0.25, 0.5, 1.0, 2.0}) v.push_back({Family::NormalLoc, t});
    return v;
}

// Scalar inequalities from the norm chain, the convenient identities and the proofs.

namespace detail {

struct ScalarTally {
    Certificate worst;
    long points = 0;
    long failures = 0;
    double worst_rel = kInf;

    explicit ScalarTally(std::string name) { worst.name = std::move(name); }

    void check(double lhs, double rhs, bool strict = false) {
        ++points;
        const double scale = std::max(std::fabs(lhs), std::fabs(rhs));
        const bool ok = strict ? lhs < rhs + kCertSlack * scale : lhs <= rhs + kCertSlack * scale;
        if (!ok) ++failures;
        const double rel = scale > 0 ? (rhs - lhs) / scale : 0.0;
        if (rel < worst_rel || points == 1) {
            worst_rel = rel;
            worst.lhs = lhs;
            worst.rhs = rhs;
            worst.margin = rhs - lhs;
        }
    }
    void identity(double a, double b) {
        ++points;
        const double scale = std::max(std::fabs(a), std::fabs(b));
        const double dev = std::fabs(a - b);
        if (dev > kCertSlack * scale) ++failures;
        const double rel = scale > 0 ? -dev / scale : 0.0;
        if (rel < worst_rel || points == 1) {
            worst_rel = rel;
            worst.lhs = a;
            worst.rhs = b;
            worst.margin = -dev;
        }
    }
    Certificate done() {
        worst.pass = failures == 0;
        worst.note = std::to_string(points) + " points, " + std::to_string(failures) + " failures";
        return worst;
    }
};

}  // namespace detail

/// Each scalar inequality at n seeded random points of its domain plus the domain
/// endpoints, with 1e-12 relative slack and no other tolerance.
inline std::vector<Certificate> scalar_suite(std::uint64_t seed, long n) {
    using detail::ScalarTally;
    std::vector<Certificate> out;
    auto draw = [&](int stream, long i) { return Rng(derive_seed(seed, {static_cast<std::uint64_t>(stream),
                                                                       static_cast<std::uint64_t>(i)})); };
    // |x| log-uniform in [1e-8, 30] with a random sign, plus the endpoints.
    auto signed_x = [](Rng& r) {
        const double m = std::exp(std::log(1e-8) + (std::log(30.0) - std::log(1e-8)) * uniform_open01(r));
        return uniform_open01(r) < 0.5 ? -m : m;
    };
    // x >= 1/4, log-uniform up to 1e6.
    auto x_quarter = [](Rng& r) { return 0.25 * std::exp(std::log(4e6) * uniform_open01(r)); };

    {
        ScalarTally a("norm.sq_le_cosh"), b("norm.cosh_le_bern"), c("norm.bern_le_2cosh");
        ScalarTally i1("convenient.product"), i2("convenient.half_plus"), i3("convenient.half_minus");
        auto one = [&](double x) {
            const double cosh2 = 2.0 * cosh_m1(x);
            const double bern = 2.0 * exp_excess(std::fabs(x));
            a.check(x * x, cosh2);
            b.check(cosh2, bern);
            c.check(bern, 2.0 * cosh2);
            i1.identity(cosh2, std::expm1(x) * -std::expm1(-x));
            const double hp = std::expm1(x / 2.0), hm = std::expm1(-x / 2.0);
            i2.identity(cosh2, hp * hp * std::pow(1.0 + std::exp(-x / 2.0), 2));
            i3.identity(cosh2, hm * hm * std::pow(1.0 + std::exp(x / 2.0), 2));
        };
        for (double x : {0.0, 30.0, -30.0}) one(x);
        Rng r = draw(1, 0);
        for (long i = 0; i < n; ++i) one(signed_x(r));
        for (auto* t : {&a, &b, &c, &i1, &i2, &i3}) out.push_back(t->done());
    }
    {
        ScalarTally t("lemma.root_power");  // (sqrt(x^d) - 1)^2 <= d (sqrt(x) - 1)^2, x >= 1/4
        auto one = [&](double x, double d) {
            const double lx = std::log(x);
            const double l = std::expm1(0.5 * d * lx), rr = std::expm1(0.5 * lx);
            t.check(l * l, d * rr * rr);
        };
        for (double d : {1.0, 0.5, 1e-6}) for (double x : {0.25, 1.0}) one(x, d);
        Rng r = draw(2, 0);
        for (long i = 0; i < n; ++i) {
            const double x = x_quarter(r);
            one(x, uniform_open01(r));
        }
        out.push_back(t.done());
    }
    {
        ScalarTally t("lemma.kl_point");  // x - 1 - log x <= 3 (sqrt(x) - 1)^2, x >= 1/4
        auto one = [&](double x) {
            const double y = std::log(x);
            const double s = std::expm1(0.5 * y);
            t.check(exp_excess(y), 3.0 * s * s);
        };
        for (double x : {0.25, 1.0}) one(x);
        Rng r = draw(3, 0);
        for (long i = 0; i < n; ++i) one(x_quarter(r));
        out.push_back(t.done());
    }
    {
        ScalarTally t("lemma.log_small");  // log(1/x) < 3 (x - 1 - log x), 0 < x < 1/4
        auto one = [&](double x) { t.check(-std::log(x), 3.0 * exp_excess(std::log(x)), true); };
        one(std::nextafter(0.25, 0.0));
        one(1e-300);
        Rng r = draw(4, 0);
        for (long i = 0; i < n; ++i) one(0.25 * std::exp(std::log(1e-300) * uniform_open01(r)));
        out.push_back(t.done());
    }
    {
        ScalarTally t("lemma.log_sq");  // (log x)^2 <= 8 (sqrt(x) - 1)^2, x >= 1/4
        auto one = [&](double x) {
            const double y = std::log(x);
            const double s = std::expm1(0.5 * y);
            t.check(y * y, 8.0 * s * s);
        };
        for (double x : {0.25, 1.0}) one(x);
        Rng r = draw(5, 0);
        for (long i = 0; i < n; ++i) one(x_quarter(r));
        out.push_back(t.done());
    }
    {
        ScalarTally t("lemma.gamma");  // x^k / Gamma(k+1) <= e^x - 1 - x, k >= 2, x >= 0 (log scale)
        auto one = [&](double x, double k) {
            if (x == 0.0) {
                t.check(0.0, 0.0);
                return;
            }
            const double lhs = k * std::log(x) - std::log(gamma_fn(k + 1.0));
            const double rhs = x < 30.0 ? std::log(exp_excess(x)) : x + std::log1p(-(1.0 + x) * std::exp(-x));
            t.check(lhs, rhs);
        };
        for (double k : {2.0, 63.0}) one(0.0, k), one(1e-8, k), one(1.0, k);
        Rng r = draw(6, 0);
        for (long i = 0; i < n; ++i) {
            const double k = 2.0 + 61.0 * uniform_open01(r);
            const double x = std::exp(std::log(1e-6) + (std::log(500.0) - std::log(1e-6)) * uniform_open01(r));
            one(x, k);
        }
        out.push_back(t.done());
    }
    {
        ScalarTally t("lemma.log_power");  // (log x)^k / x <= (k/e)^k, x >= 1, maximised at x = e^k
        auto one = [&](double x, double k) {
            const double y = std::log(x);
            t.check(std::pow(y, k) / x, std::pow(k / std::numbers::e, k));
        };
        Rng r = draw(7, 0);
        for (long i = 0; i < n; ++i) {
            const double k = 20.0 * uniform_open01(r);
            if (i % 4 == 0) {
                one(std::exp(k), k);
            } else {
                one(std::exp(3.0 * (k + 1.0) * uniform_open01(r)), k);
            }
        }
        one(1.0, 2.0);
        out.push_back(t.done());
    }
    return out;
}

}  // namespace hdl
