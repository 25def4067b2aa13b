#pragma once

// Density models on the real line: the concrete families used throughout the
// library, half mixtures, and the exact discrete substrate used as an oracle.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hdl/errors.hpp"
#include "hdl/extended.hpp"
#include "hdl/random.hpp"
#include "hdl/special.hpp"

namespace hdl {

struct Support {
    enum class Kind { Interval, RealLine, Atoms };

    Kind kind = Kind::RealLine;
    double lo = -kInf;
    double hi = kInf;
    // Endpoint flags are metadata only: integrals treat endpoints as null sets.
    bool lo_closed = false;
    bool hi_closed = false;
    std::vector<double> atoms;

    static Support interval(double lo, double hi, bool lo_closed = false, bool hi_closed = false) {
        if (!(lo < hi)) throw Error(ErrorKind::ParameterDomain, "interval support needs lo < hi");
        Support s;
        s.kind = Kind::Interval;
        s.lo = lo;
        s.hi = hi;
        s.lo_closed = lo_closed;
        s.hi_closed = hi_closed;
        return s;
    }

    static Support real_line() { return Support{}; }

    static Support atom_set(std::vector<double> atoms) {
        for (std::size_t i = 1; i < atoms.size(); ++i) {
            if (!(atoms[i - 1] < atoms[i])) {
                throw Error(ErrorKind::ParameterDomain, "atoms must be strictly increasing");
            }
        }
        Support s;
        s.kind = Kind::Atoms;
        s.atoms = std::move(atoms);
        if (!s.atoms.empty()) {
            s.lo = s.atoms.front();
            s.hi = s.atoms.back();
        }
        return s;
    }

    bool continuous() const { return kind != Kind::Atoms; }
};

/// Constant density value on [lo, hi).
struct Piece {
    double lo;
    double hi;
    double value;
};

struct FamilyTag {
    std::string family;
    std::vector<double> params;

    std::string label() const {
        std::string s = family;
        for (double p : params) {
            char buf[32];
            const auto r = std::to_chars(buf, buf + sizeof buf, p);  // shortest round-trip form
            s += ':';
            s.append(buf, r.ptr);
        }
        return s;
    }
};

/// An immutable probability density. Construct through DensityModel::Parts.
class DensityModel {
public:
    struct Parts {
        Support support;
        std::function<double(double)> pdf;
        std::function<double(double)> log_pdf;
        std::vector<double> breakpoints;
        std::function<double(Rng&)> sampler;
        FamilyTag tag;
        std::optional<std::vector<Piece>> pieces;
        std::optional<double> normal_mean;
        // Real-line models: P-mass outside [lo, hi] and the default truncation centre/half-width.
        std::function<double(double, double)> mass_outside;
        double window_center = 0.0;
        double window_half_width = 9.0;
    };

    explicit DensityModel(Parts parts) : p_(std::make_shared<const Parts>(normalized(std::move(parts)))) {}

    double pdf(double x) const { return p_->pdf(x); }
    double log_pdf(double x) const { return p_->log_pdf(x); }
    const Support& support() const { return p_->support; }
    const std::vector<double>& breakpoints() const { return p_->breakpoints; }
    bool has_sampler() const { return static_cast<bool>(p_->sampler); }
    double sample(Rng& rng) const {
        if (!p_->sampler) throw Error(ErrorKind::NoSampler, p_->tag.label() + " has no sampler");
        return p_->sampler(rng);
    }
    const FamilyTag& tag() const { return p_->tag; }
    const std::optional<std::vector<Piece>>& pieces() const { return p_->pieces; }
    const std::optional<double>& normal_mean() const { return p_->normal_mean; }

    /// P-mass outside [lo, hi]; zero for bounded supports contained in it.
    double mass_outside(double lo, double hi) const {
        if (p_->mass_outside) return p_->mass_outside(lo, hi);
        const auto& s = p_->support;
        return (lo <= s.lo && hi >= s.hi) ? 0.0 : kInf;
    }

    /// Finite integration window: the support itself, or a truncation of the real line.
    std::pair<double, double> window(double extra = 0.0) const {
        const auto& s = p_->support;
        if (s.kind != Support::Kind::RealLine) return {s.lo, s.hi};
        const double w = p_->window_half_width + extra;
        return {p_->window_center - w, p_->window_center + w};
    }

private:
    static Parts normalized(Parts parts) {
        auto& bp = parts.breakpoints;
        std::sort(bp.begin(), bp.end());
        bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
        return parts;
    }

    std::shared_ptr<const Parts> p_;
};

struct DiscreteDist {
    std::vector<double> atoms;
    std::vector<double> masses;

    DiscreteDist() = default;
    DiscreteDist(std::vector<double> a, std::vector<double> m) : atoms(std::move(a)), masses(std::move(m)) {
        if (atoms.size() != masses.size()) {
            throw Error(ErrorKind::ParameterDomain, "atoms and masses differ in length");
        }
        for (std::size_t i = 1; i < atoms.size(); ++i) {
            if (!(atoms[i - 1] < atoms[i])) {
                throw Error(ErrorKind::ParameterDomain, "atoms must be strictly increasing");
            }
        }
        double total = 0.0;
        for (double w : masses) {
            if (!(w >= 0.0)) throw Error(ErrorKind::ParameterDomain, "masses must be nonnegative");
            total += w;
        }
        if (std::fabs(total - 1.0) > 1e-12) {
            throw Error(ErrorKind::ParameterDomain, "masses must sum to one");
        }
    }

    std::size_t size() const { return atoms.size(); }
};

namespace detail {

inline double piece_value(const std::vector<Piece>& pieces, double x) {
    // Pieces are sorted and contiguous; the first piece is open on the left.
    auto it = std::upper_bound(pieces.begin(), pieces.end(), x,
                               [](double v, const Piece& p) { return v < p.hi; });
    if (it == pieces.end() || x <= pieces.front().lo || x < it->lo) return 0.0;
    return it->value;
}

inline DensityModel piecewise_constant(std::vector<Piece> pieces, FamilyTag tag) {
    // Drop zero-width pieces (theta = 0 degenerate cases).
    std::erase_if(pieces, [](const Piece& p) { return !(p.hi > p.lo); });
    DensityModel::Parts parts;
    parts.support = Support::interval(pieces.front().lo, pieces.back().hi);
    std::vector<double> cum;
    double acc = 0.0;
    for (const auto& p : pieces) {
        acc += p.value * (p.hi - p.lo);
        cum.push_back(acc);
        parts.breakpoints.push_back(p.lo);
        parts.breakpoints.push_back(p.hi);
    }
    parts.pdf = [pieces](double x) { return piece_value(pieces, x); };
    parts.log_pdf = [pieces](double x) {
        const double v = piece_value(pieces, x);
        return v > 0 ? std::log(v) : -kInf;
    };
    parts.sampler = [pieces, cum](Rng& rng) {
        const double u = uniform_open01(rng) * cum.back();
        std::size_t i = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
        i = std::min(i, pieces.size() - 1);
        const double before = i == 0 ? 0.0 : cum[i - 1];
        const auto& p = pieces[i];
        if (p.value <= 0) return p.lo;
        return std::clamp(p.lo + (u - before) / p.value, p.lo, p.hi);
    };
    parts.tag = std::move(tag);
    parts.pieces = std::move(pieces);
    return DensityModel(std::move(parts));
}

}  // namespace detail

inline DensityModel uniform01() {
    return detail::piecewise_constant({{0.0, 1.0, 1.0}}, {"uniform01", {}});
}

inline DensityModel triangular01() {
    DensityModel::Parts parts;
    parts.support = Support::interval(0.0, 1.0);
    parts.breakpoints = {0.0, 1.0};
    parts.pdf = [](double x) { return (x > 0.0 && x < 1.0) ? 2.0 * x : 0.0; };
    parts.log_pdf = [](double x) {
        return (x > 0.0 && x < 1.0) ? std::numbers::ln2 + std::log(x) : -kInf;
    };
    parts.sampler = [](Rng& rng) { return std::sqrt(uniform_open01(rng)); };
    parts.tag = {"triangular01", {}};
    return DensityModel(std::move(parts));
}

inline DensityModel doom(double theta) {
    if (!(theta >= 0.0 && theta < 0.25)) {
        throw Error(ErrorKind::ParameterDomain, "doom needs theta in [0, 1/4)");
    }
    if (theta == 0.0) {
        return detail::piecewise_constant({{0.0, 1.0, 1.0}}, {"doom", {0.0}});
    }
    // Third piece (1 - t^3 - (1-t)(1-t-t^2)) / t simplifies to 2(1 - t^2).
    const double t = theta;
    return detail::piecewise_constant(
        {{0.0, t * t, t}, {t * t, 1.0 - t, 1.0 - t}, {1.0 - t, 1.0, 2.0 * (1.0 - t * t)}},
        {"doom", {theta}});
}

inline DensityModel counter(double theta) {
    if (!(theta >= 0.0 && theta < 0.25)) {
        throw Error(ErrorKind::ParameterDomain, "counter needs theta in [0, 1/4)");
    }
    if (theta == 0.0) {
        return detail::piecewise_constant({{0.0, 1.0, 1.0}}, {"counter", {0.0}});
    }
    return detail::piecewise_constant({{0.0, theta, theta}, {theta, 1.0, 1.0 + theta}},
                                      {"counter", {theta}});
}

inline DensityModel normal_loc(double mean) {
    if (!std::isfinite(mean)) throw Error(ErrorKind::ParameterDomain, "normal-loc needs a finite mean");
    DensityModel::Parts parts;
    parts.support = Support::real_line();
    parts.pdf = [mean](double x) { return normal_pdf(x - mean); };
    parts.log_pdf = [mean](double x) { return normal_log_pdf(x - mean); };
    parts.sampler = [mean](Rng& rng) { return mean + standard_normal(rng); };
    parts.tag = {"normal-loc", {mean}};
    parts.normal_mean = mean;
    parts.mass_outside = [mean](double lo, double hi) {
        return normal_cdf(lo - mean) + normal_cdf(mean - hi);
    };
    // |x| <= 9 + |theta|: covers N(theta, 1) and N(0, 1) with tail mass < 1e-17.
    parts.window_center = 0.0;
    parts.window_half_width = 9.0 + std::fabs(mean);
    return DensityModel(std::move(parts));
}

enum class Family { Uniform01, Triangular01, Doom, Counter, NormalLoc };

inline std::optional<Family> parse_family(std::string_view name) {
    if (name == "uniform01") return Family::Uniform01;
    if (name == "triangular01") return Family::Triangular01;
    if (name == "doom") return Family::Doom;
    if (name == "counter") return Family::Counter;
    if (name == "normal-loc") return Family::NormalLoc;
    return std::nullopt;
}

inline const char* family_name(Family f) {
    switch (f) {
    case Family::Uniform01: return "uniform01";
    case Family::Triangular01: return "triangular01";
    case Family::Doom: return "doom";
    case Family::Counter: return "counter";
    case Family::NormalLoc: return "normal-loc";
    }
    return "?";
}

inline DensityModel make_family(Family f, double theta) {
    switch (f) {
    case Family::Uniform01: return uniform01();
    case Family::Triangular01: return triangular01();
    case Family::Doom: return doom(theta);
    case Family::Counter: return counter(theta);
    case Family::NormalLoc: return normal_loc(theta);
    }
    throw Error(ErrorKind::UnknownFamily, "unhandled family");
}

inline DensityModel make_family(std::string_view name, double theta) {
    auto f = parse_family(name);
    if (!f) throw Error(ErrorKind::UnknownFamily, std::string(name));
    return make_family(*f, theta);
}

/// The reference density p0 each family is compared against.
inline DensityModel reference_for(Family f) {
    return f == Family::NormalLoc ? normal_loc(0.0) : uniform01();
}

namespace detail {

inline std::vector<Piece> merge_pieces(const std::vector<Piece>& a, const std::vector<Piece>& b,
                                       const std::function<double(double, double)>& combine) {
    std::vector<double> cuts;
    for (const auto& p : a) { cuts.push_back(p.lo); cuts.push_back(p.hi); }
    for (const auto& p : b) { cuts.push_back(p.lo); cuts.push_back(p.hi); }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<Piece> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        out.push_back({cuts[i], cuts[i + 1], combine(piece_value(a, mid), piece_value(b, mid))});
    }
    return out;
}

}  // namespace detail

/// x -> (p0(x) + p(x)) / 2.
inline DensityModel half_mixture(const DensityModel& p0, const DensityModel& p) {
    if (p0.support().continuous() != p.support().continuous()) {
        throw Error(ErrorKind::IncompatibleSupport, "half_mixture of atom and continuous supports");
    }
    DensityModel::Parts parts;
    const auto& s0 = p0.support();
    const auto& s1 = p.support();
    if (s0.kind == Support::Kind::Atoms) {
        std::vector<double> atoms = s0.atoms;
        atoms.insert(atoms.end(), s1.atoms.begin(), s1.atoms.end());
        std::sort(atoms.begin(), atoms.end());
        atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
        parts.support = Support::atom_set(std::move(atoms));
    } else if (s0.kind == Support::Kind::RealLine || s1.kind == Support::Kind::RealLine) {
        parts.support = Support::real_line();
    } else {
        parts.support = Support::interval(std::min(s0.lo, s1.lo), std::max(s0.hi, s1.hi));
    }
    parts.pdf = [p0, p](double x) { return 0.5 * (p0.pdf(x) + p.pdf(x)); };
    parts.log_pdf = [p0, p](double x) {
        const double a = p0.log_pdf(x);
        const double b = p.log_pdf(x);
        const double m = std::max(a, b);
        if (m == -kInf) return -kInf;
        return m + std::log1p(std::exp(std::min(a, b) - m)) - std::numbers::ln2;
    };
    parts.breakpoints = p0.breakpoints();
    parts.breakpoints.insert(parts.breakpoints.end(), p.breakpoints().begin(), p.breakpoints().end());
    if (p0.has_sampler() && p.has_sampler()) {
        parts.sampler = [p0, p](Rng& rng) {
            return (rng() >> 63) == 0 ? p0.sample(rng) : p.sample(rng);
        };
    }
    parts.tag = {"half-mixture(" + p0.tag().label() + "," + p.tag().label() + ")", {}};
    if (p0.pieces() && p.pieces()) {
        parts.pieces = detail::merge_pieces(*p0.pieces(), *p.pieces(),
                                            [](double a, double b) { return 0.5 * (a + b); });
    }
    if (parts.support.kind == Support::Kind::RealLine) {
        parts.mass_outside = [p0, p](double lo, double hi) {
            return 0.5 * (p0.mass_outside(lo, hi) + p.mass_outside(lo, hi));
        };
        const auto [a0, b0] = p0.window();
        const auto [a1, b1] = p.window();
        const double lo = std::min(a0, a1);
        const double hi = std::max(b0, b1);
        parts.window_center = 0.5 * (lo + hi);
        parts.window_half_width = 0.5 * (hi - lo);
    }
    return DensityModel(std::move(parts));
}

/// Common domain of two continuous densities, truncated to a finite window.
inline std::pair<double, double> common_domain(const DensityModel& p0, const DensityModel& p,
                                               double extra = 0.0) {
    const auto [a0, b0] = p0.window(extra);
    const auto [a1, b1] = p.window(extra);
    const bool r0 = p0.support().kind == Support::Kind::RealLine;
    const bool r1 = p.support().kind == Support::Kind::RealLine;
    if (r0 && r1) return {std::min(a0, a1), std::max(b0, b1)};
    if (r0) return {a1, b1};
    if (r1) return {a0, b0};
    return {std::max(a0, a1), std::min(b0, b1)};
}

/// Sorted solutions of p0(x) = t p(x) inside the common support, merged with both
/// densities' breakpoints.
inline std::vector<double> ratio_breakpoints(const DensityModel& p0, const DensityModel& p, double t) {
    if (!(t > 0.0)) throw Error(ErrorKind::ParameterDomain, "ratio level must be positive");
    // Wide scan window: normal tails underflow beyond ~38 standard deviations.
    const auto [lo, hi] = common_domain(p0, p, 30.0);
    std::vector<double> knots{lo, hi};
    for (double b : p0.breakpoints()) if (b > lo && b < hi) knots.push_back(b);
    for (double b : p.breakpoints()) if (b > lo && b < hi) knots.push_back(b);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    const double log_t = std::log(t);
    auto F = [&](double x) { return p0.log_pdf(x) - p.log_pdf(x) - log_t; };
    auto sign_of = [](double v) { return std::isnan(v) ? 2 : (v > 0) - (v < 0); };

    std::vector<double> roots;
    constexpr int cells = 2048;
    for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
        const double a = knots[s];
        const double b = knots[s + 1];
        const double w = b - a;
        std::vector<double> grid;
        grid.reserve(cells + 120);
        for (int j = 60; j >= 12; --j) grid.push_back(a + w * std::ldexp(1.0, -j));
        for (int i = 1; i < cells; ++i) grid.push_back(a + w * i / cells);
        for (int j = 12; j <= 60; ++j) grid.push_back(b - w * std::ldexp(1.0, -j));
        std::erase_if(grid, [&](double x) { return !(x > a && x < b); });
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

        double prev_x = 0.0;
        int prev_s = 2;
        for (double x : grid) {
            const double fx = F(x);
            const int sx = sign_of(fx);
            if (sx == 2) { prev_s = 2; continue; }
            if (sx == 0) { roots.push_back(x); continue; }
            if (prev_s != 2 && prev_s != 0 && sx != prev_s) {
                double l = prev_x, r = x;
                const int sl = prev_s;
                while (r - l > std::max(1e-13, 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(l))) {
                    const double m = 0.5 * (l + r);
                    if (m <= l || m >= r) break;
                    const int sm = sign_of(F(m));
                    if (sm == 0) { l = r = m; break; }
                    if (sm == sl) l = m; else r = m;
                }
                roots.push_back(0.5 * (l + r));
            }
            prev_x = x;
            prev_s = sx;
        }
    }
    // Keep roots where the ratio is continuous; merge with the density breakpoints.
    for (double k : knots) roots.push_back(k);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
}

/// Exact discrete equivalent of two piecewise-constant densities: one atom per cell
/// of the common refinement, carrying each density's cell mass.
inline std::pair<DiscreteDist, DiscreteDist> discretize_pair(const DensityModel& p0, const DensityModel& p) {
    if (!p0.pieces() || !p.pieces()) {
        throw Error(ErrorKind::IncompatibleSupport, "discretize_pair needs piecewise-constant densities");
    }
    auto merged0 = detail::merge_pieces(*p0.pieces(), *p.pieces(), [](double a, double) { return a; });
    auto merged1 = detail::merge_pieces(*p0.pieces(), *p.pieces(), [](double, double b) { return b; });
    std::vector<double> atoms, m0, m1;
    for (std::size_t i = 0; i < merged0.size(); ++i) {
        const double len = merged0[i].hi - merged0[i].lo;
        atoms.push_back(0.5 * (merged0[i].lo + merged0[i].hi));
        m0.push_back(merged0[i].value * len);
        m1.push_back(merged1[i].value * len);
    }
    return {DiscreteDist(atoms, m0), DiscreteDist(atoms, m1)};
}

}  // namespace hdl
