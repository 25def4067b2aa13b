#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "hdl/certify.hpp"

using namespace hdl;

namespace {

using Ev = PairEvaluator<ContinuousPair>;

Ev make(const DensityModel& p0, const DensityModel& p) { return Ev(ContinuousPair(p0, p)); }

const Certificate& find(const std::vector<Certificate>& v, const std::string& name) {
    for (const auto& c : v) {
        if (c.name == name) return c;
    }
    throw std::runtime_error("no certificate " + name);
}

}  // namespace

TEST(Judge, ExtendedRealRules) {
    auto c = judge("x", 1.0, 0.0, kInf, 0.0);
    EXPECT_TRUE(c.pass);
    EXPECT_TRUE(c.vacuous);
    c = judge("x", kInf, 0.0, 5.0, 0.0);
    EXPECT_FALSE(c.pass);
    EXPECT_EQ(c.margin, -kInf);
    c = judge("x", kInf, 0.0, kInf, 0.0);
    EXPECT_TRUE(c.pass);
    c = judge("x", 1.0 + 1e-9, 5e-10, 1.0, 5e-10);
    EXPECT_TRUE(c.pass);
    EXPECT_DOUBLE_EQ(c.err_budget, 1e-9);
    c = judge("x", 1.0 + 3e-9, 5e-10, 1.0, 5e-10);
    EXPECT_FALSE(c.pass);
    EXPECT_TRUE(judge("x", 1.0 + 1e-13, 0.0, 1.0, 0.0).pass);
}

TEST(CornerError, LinearAndProduct) {
    const auto lin = [](const std::vector<double>& x) { return 3.0 * x[0] + 2.0 * x[1]; };
    EXPECT_NEAR(corner_error(lin, {1.0, 1.0}, {0.1, 0.01}), 0.32, 1e-15);
    const auto prod = [](const std::vector<double>& x) { return x[0] * x[1]; };
    EXPECT_NEAR(corner_error(prod, {2.0, 3.0}, {0.1, 0.1}), 2.1 * 3.1 - 6.0, 1e-14);
    // Inputs are clipped at zero.
    EXPECT_NEAR(corner_error([](const std::vector<double>& x) { return std::sqrt(x[0]); }, {0.0}, {0.04}), 0.2, 1e-15);
}

TEST(CertifyBn, IdenticalPair) {
    auto ev = make(uniform01(), uniform01());
    for (const auto& c : certify_bn(ev, 1.0)) {
        EXPECT_TRUE(c.pass) << c.name;
        EXPECT_EQ(c.lhs, 0.0) << c.name;
        EXPECT_EQ(c.rhs, 0.0) << c.name;
    }
}

TEST(CertifyBn, DoomPositiveMargin) {
    auto ev = make(uniform01(), doom(0.1));
    const auto v = certify_bn(ev, 1.0);
    const auto& up = find(v, "bn.upper");
    EXPECT_TRUE(up.pass);
    EXPECT_GT(up.margin, 0.0);
    EXPECT_NEAR(ev.nc(1.0).value, 0.1, 1e-12);
    EXPECT_NEAR(up.rhs, 18.0 * ev.h_sq().value + 0.2, 1e-12);
    for (const auto& c : v) EXPECT_TRUE(c.pass) << c.name;
}

TEST(CertifyBn, TriangularIsVacuous) {
    auto ev = make(uniform01(), triangular01());
    const auto v = certify_bn(ev, 1.0);
    const auto& up = find(v, "bn.upper");
    EXPECT_TRUE(up.pass);
    EXPECT_TRUE(up.vacuous);
    EXPECT_EQ(up.rhs, kInf);
    // The lower bound then has +inf on both sides.
    EXPECT_TRUE(find(v, "bn.lower").pass);
}

TEST(CertifyBnVk, Examples) {
    auto same = make(normal_loc(0), normal_loc(0));
    for (const auto& c : certify_bn_vk(same, 1.0, 2.0)) {
        EXPECT_TRUE(c.pass);
        EXPECT_EQ(c.lhs, 0.0);
    }
    auto ev = make(normal_loc(0), normal_loc(1));
    const auto v2 = certify_bn_vk(ev, 0.5, 2.0);
    const auto& up = find(v2, "bn.vk.upper");
    EXPECT_NEAR(up.lhs, 1.25, 1e-10);
    EXPECT_NEAR(up.rhs, 0.5 * 2.0 * 4.0 * ev.bern(0.5).value, 1e-12);
    EXPECT_TRUE(up.pass);
    const auto& lo = find(v2, "bn.vk.lower");
    EXPECT_NEAR(lo.lhs, 0.25 * 1.0, 1e-10);
    EXPECT_TRUE(lo.pass);
    const auto& up3 = find(certify_bn_vk(ev, 0.5, 3.0), "bn.vk.upper");
    EXPECT_NEAR(up3.rhs, 0.5 * 6.0 * 8.0 * ev.bern(0.5).value, 1e-12);
    EXPECT_TRUE(up3.pass);
    EXPECT_THROW(certify_bn_vk(ev, 0.5, 1.5), Error);
}

TEST(CertifyBnVk, CenteringSkippedWhenKlInfinite) {
    PairEvaluator<DiscretePair> ev(
        DiscretePair(DiscreteDist({0, 1}, {0.5, 0.5}), DiscreteDist({0, 1}, {0.0, 1.0})));
    const auto v = certify_bn_vk(ev, 1.0, 2.0);
    EXPECT_TRUE(find(v, "bn.vk.lower").skipped);
}

TEST(CertifyKl3, Examples) {
    auto same = make(uniform01(), uniform01());
    for (const auto& c : certify_kl3(same, 2.0, 4.0)) {
        EXPECT_TRUE(c.pass) << c.name;
        EXPECT_EQ(c.lhs, 0.0) << c.name;
    }
    auto tri = make(uniform01(), triangular01());
    const auto v = certify_kl3(tri, 2.0, 3.0);
    const double l1 = (1.0 + std::log(4.0)) / 8.0;
    const double K = 1.0 - std::log(2.0);
    const double h2 = 2.0 - 4.0 * std::sqrt(2.0) / 3.0;
    const auto& lower = find(v, "kl3.kl.lower");
    EXPECT_NEAR(lower.lhs, l1 / 3.0, 1e-10);
    EXPECT_NEAR(lower.rhs, K, 1e-10);
    EXPECT_TRUE(lower.pass);
    const auto& upper = find(v, "kl3.kl.upper");
    EXPECT_NEAR(upper.rhs, 3.0 * h2 + l1, 1e-9);
    EXPECT_TRUE(upper.pass);
    auto doom05 = make(uniform01(), doom(0.05));
    for (const auto& c : certify_kl3(doom05, 2.0, 3.0)) EXPECT_TRUE(c.pass) << c.name;
    EXPECT_THROW(certify_kl3(doom05, 3.0, 2.0), Error);
}

TEST(CertifyWs, Examples) {
    // ub = 1.5 < e^{1/delta}: WS event empty, bracket uses k.
    PairEvaluator<DiscretePair> ev(
        DiscretePair(DiscreteDist({0, 1}, {0.6, 0.4}), DiscreteDist({0, 1}, {0.4, 0.6})));
    EXPECT_DOUBLE_EQ(ev.ub().value, 1.5);
    EXPECT_EQ(ev.ws(1.0).value, 0.0);
    const auto c = certify_ws_bound(ev, 1.0, 2.0);
    const double e = std::numbers::e;
    EXPECT_NEAR(c.rhs, (4.0 + e / std::pow(std::sqrt(e) - 1, 2) * 4.0) * ev.h_sq().value, 1e-15);
    EXPECT_EQ(c.lhs, 0.0);
    EXPECT_TRUE(c.pass);
    auto tri = make(uniform01(), triangular01());
    const auto t = certify_ws_bound(tri, 0.5, 1.0);
    const double h2 = 2.0 - 4.0 * std::sqrt(2.0) / 3.0;
    const double logm = std::log((1.0 / std::numbers::e) / h2);
    const double cst = std::numbers::e / std::pow(std::sqrt(std::numbers::e) - 1, 2);
    EXPECT_NEAR(t.rhs, 2.0 * (4.0 + cst * std::max(1.0, logm)) * h2, 1e-8);
    EXPECT_TRUE(t.pass);
    auto d = make(uniform01(), doom(0.1));
    EXPECT_TRUE(certify_ws_bound(d, 1.0, 2.0).pass);
    auto same = make(uniform01(), uniform01());
    EXPECT_TRUE(certify_ws_bound(same, 1.0, 2.0).skipped);
}

TEST(CertifyCmChain, Examples) {
    auto same = make(uniform01(), uniform01());
    const auto s = certify_cm_chain(same);
    EXPECT_EQ(find(s, "cm.nc1").lhs, 0.0);
    EXPECT_EQ(find(s, "cm.nc1").rhs, 0.0);
    EXPECT_EQ(find(s, "ub.cm").rhs, 1.0);
    EXPECT_NEAR(find(s, "nc1.fm").lhs, 1.0, 1e-12);
    EXPECT_NEAR(find(s, "nc1.fm").rhs, 1.0, 1e-12);
    for (const auto& c : s) EXPECT_TRUE(c.pass) << c.name;

    auto counter1 = make(uniform01(), counter(0.1));
    const auto& ub = find(certify_cm_chain(counter1), "ub.cm");
    EXPECT_NEAR(ub.rhs, 10.0, 1e-12);
    EXPECT_LE(ub.lhs, 10.0);
    EXPECT_TRUE(ub.pass);

    auto normal = make(normal_loc(0), normal_loc(1));
    const auto n = certify_cm_chain(normal);
    EXPECT_TRUE(find(n, "ub.cm").vacuous);
    const auto& cm = find(n, "cm.nc1");
    EXPECT_TRUE(std::isfinite(cm.rhs));
    EXPECT_TRUE(cm.pass);
    EXPECT_FALSE(cm.vacuous);
}

TEST(CertifyCmChain, GridUbIsSkipped) {
    auto ev = make(normal_loc(0), half_mixture(normal_loc(0), normal_loc(1)));
    EXPECT_TRUE(find(certify_cm_chain(ev), "ub.cm").skipped);
}

TEST(CertifyHalfMixture, Examples) {
    auto same = make(uniform01(), uniform01());
    for (const auto& c : certify_half_mixture(same)) {
        EXPECT_TRUE(c.pass) << c.name;
        EXPECT_EQ(c.lhs, 0.0) << c.name;
    }
    for (auto [p0, p] : {std::pair{uniform01(), triangular01()}, std::pair{normal_loc(0), normal_loc(2)}}) {
        auto ev = make(p0, p);
        for (const auto& c : certify_half_mixture(ev)) {
            EXPECT_TRUE(c.pass) << c.name;
            EXPECT_FALSE(c.vacuous) << c.name;
            EXPECT_GT(c.margin, 0.0) << c.name;
        }
    }
}

TEST(CertifyGrid, StandardGridAllPass) {
    std::map<std::string, int> counts;
    for (const auto& ps : standard_pairs()) {
        Ev ev(ContinuousPair(ps.p0(), ps.p()));
        for (const auto& c : certify_pair(ev)) {
            ++counts[c.name];
            if (c.skipped) continue;
            EXPECT_TRUE(c.pass) << c.pair << " " << c.name << " d=" << c.delta << " k=" << c.k << " lhs=" << c.lhs
                                << " rhs=" << c.rhs << " budget=" << c.err_budget;
            EXPECT_GE(c.err_budget, 0.0);
            if (std::isfinite(c.rhs) && c.pass) {
                EXPECT_LE(c.err_budget, 1e-6 * (1 + std::fabs(c.rhs))) << c.pair << " " << c.name;
            }
        }
    }
    EXPECT_EQ(standard_pairs().size(), 29u);
    EXPECT_GT(counts["bn.upper"], 0);
    EXPECT_GT(counts["kl3.order"], 0);
    EXPECT_GT(counts["hm.kl"], 0);
}

TEST(CertifyGrid, ConstantsHookIsWired) {
    CertConstants broken;
    broken.bn_hellinger = 0.0;
    auto ev = make(normal_loc(0), normal_loc(0.25));
    EXPECT_FALSE(find(certify_bn(ev, 1.0, broken), "bn.upper").pass);
    EXPECT_FALSE(find(certify_half_mixture(ev, broken), "hm.bern").pass);
    CertConstants off;
    off.suff_offset = 0.0;
    auto same_ratio = make(uniform01(), counter(0.2));
    const auto& c = find(certify_cm_chain(same_ratio, off), "cm.nc1");
    const double m = same_ratio.cm().value;
    EXPECT_NEAR(c.rhs, 4.0 * m * m * same_ratio.h_sq().value, 1e-12);
}

TEST(CertifyGrid, DeterministicOrder) {
    auto a = make(uniform01(), doom(0.05));
    auto b = make(uniform01(), doom(0.05));
    const auto x = certify_pair(a), y = certify_pair(b);
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(x[i].name, y[i].name);
        if (!x[i].skipped) {
            EXPECT_EQ(x[i].lhs, y[i].lhs);
            EXPECT_EQ(x[i].rhs, y[i].rhs);
        }
    }
}

TEST(ScalarSuite, AllPassAndEndpoints) {
    const auto v = scalar_suite(20240601, 100000);
    EXPECT_EQ(v.size(), 12u);
    for (const auto& c : v) EXPECT_TRUE(c.pass) << c.name << " " << c.note;
    // Boundary example: x = 1/4, delta = 1 is an equality.
    const double l = std::sqrt(0.25) - 1.0;
    EXPECT_EQ(l * l, 0.25);
    EXPECT_EQ(std::pow(std::log(std::exp(2.0)), 2.0) / std::exp(2.0), std::pow(2.0 / std::numbers::e, 2.0));
}

TEST(ScalarSuite, Deterministic) {
    const auto a = scalar_suite(7, 1000), b = scalar_suite(7, 1000);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].lhs, b[i].lhs);
        EXPECT_EQ(a[i].note, b[i].note);
    }
}
