#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "hdl/lattice.hpp"

using namespace hdl;

namespace {

DiscretePair disc(const DensityModel& p) {
    auto [a, b] = discretize_pair(uniform01(), p);
    return DiscretePair(a, b);
}

double mass_sum(const DiscreteDist& d) {
    double s = 0.0;
    for (double m : d.masses) s += m;
    return s;
}

}  // namespace

TEST(RandomPair, SingleAtom) {
    const auto [a, b] = random_discrete_pair(5, 1);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a.masses[0], 1.0);
    EXPECT_EQ(b.masses[0], 1.0);
    const DiscretePair pr(a, b);
    EXPECT_EQ(hellinger_sq(pr).value, 0.0);
    EXPECT_EQ(kl_divergence(pr).value, 0.0);
    EXPECT_EQ(bernstein_norm_sq(pr, 1.0).value, 0.0);
}

TEST(RandomPair, BitwiseReproducible) {
    for (int n : {2, 7, 16}) {
        const auto [a0, b0] = random_discrete_pair(derive_seed(11, {3}), n);
        const auto [a1, b1] = random_discrete_pair(derive_seed(11, {3}), n);
        ASSERT_EQ(a0.masses.size(), a1.masses.size());
        EXPECT_EQ(std::memcmp(a0.masses.data(), a1.masses.data(), n * sizeof(double)), 0);
        EXPECT_EQ(std::memcmp(b0.masses.data(), b1.masses.data(), n * sizeof(double)), 0);
    }
}

TEST(RandomPair, ValidSimplexAndZeroAtoms) {
    int zeros = 0;
    for (std::uint64_t i = 0; i < 2000; ++i) {
        const auto [a, b] = random_discrete_pair(derive_seed(1, {i}), 6);
        EXPECT_EQ(mass_sum(a), 1.0);
        EXPECT_EQ(mass_sum(b), 1.0);
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (a.masses[j] == 0.0 || b.masses[j] == 0.0) {
                ++zeros;
                break;
            }
        }
    }
    // One distribution zeroes an atom with probability 0.2.
    EXPECT_NEAR(zeros / 2000.0, 0.2, 0.04);
    EXPECT_THROW(random_discrete_pair(1, 0), Error);
    EXPECT_THROW(random_discrete_pair(1, 17), Error);
}

TEST(RandomPair, P0MassOnPZeroAtom) {
    const DiscretePair pr(DiscreteDist({0, 1, 2}, {0.2, 0.3, 0.5}), DiscreteDist({0, 1, 2}, {0.0, 0.5, 0.5}));
    EXPECT_EQ(kl_divergence(pr).value, kInf);
    const double h2 = hellinger_sq(pr).value;
    EXPECT_LT(h2, 2.0);
    EXPECT_NEAR(h2, 0.2 + std::pow(std::sqrt(0.3) - std::sqrt(0.5), 2), 1e-15);
    // Infinite lhs must meet infinite rhs.
    PairEvaluator<DiscretePair> ev(pr);
    for (const auto& c : lattice_certificates(ev)) {
        if (c.skipped) continue;
        EXPECT_TRUE(c.pass) << c.name;
        if (c.lhs == kInf) {
            EXPECT_EQ(c.rhs, kInf) << c.name;
        }
    }
}

TEST(Lattice, IdenticalPairsHaveNoViolations) {
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto [a, b] = random_discrete_pair(derive_seed(2, {i}), 5);
        (void)b;
        const auto t = run_trial(i, a, a, true);
        EXPECT_TRUE(t.violations.empty());
        EXPECT_EQ(t.report.h_sq.value, 0.0);
        EXPECT_EQ(t.profile.cm.value, 0.0);
    }
}

TEST(Lattice, FuzzEightAtoms) {
    const auto s = fuzz_implications(10000, 20240601, 8);
    EXPECT_EQ(s.trials, 10000);
    for (const auto& t : s.violations) ADD_FAILURE() << "trial " << t.index << ": " << t.violations.front();
}

TEST(Lattice, FuzzOtherSizes) {
    for (int n : {2, 4, 16}) {
        const auto s = fuzz_implications(2000, 99, n);
        EXPECT_TRUE(s.violations.empty()) << n;
    }
}

TEST(Lattice, DiscretizedClosedForms) {
    for (double t : log_grid(1e-3, 0.2, 12)) {
        const auto c = disc(counter(t));
        EXPECT_NEAR(eval_fm(c).value, 1.0 + (1.0 - t) / (1.0 + t), 1e-12) << t;
        EXPECT_NEAR(eval_nc(c, 0.5).value, std::sqrt(t), 1e-12) << t;
        EXPECT_NEAR(eval_nc(disc(doom(t)), 1.0).value, t, 1e-12) << t;
    }
}

TEST(GapSearch, FmDoesNotControlNc) {
    // Discretized counter at 0.01 already reaches about 10.
    const auto c = disc(counter(0.01));
    EXPECT_GE(eval_nc(c, 0.5).value / hellinger_sq(c).value, 5.0);
    const auto r = search_gap(GapObjective::NcHalfOverHsqWithFm, 100000, 20240601);
    EXPECT_TRUE(r.feasible);
    EXPECT_GE(r.value, 5.0);
    const DiscretePair best(r.best.p0, r.best.p);
    EXPECT_LE(eval_fm(best).value, 2.0);
    EXPECT_NEAR(eval_nc(best, 0.5).value / hellinger_sq(best).value, r.value, 1e-9 * r.value);
}

TEST(GapSearch, CmBlowsUpWithBoundedNcRatio) {
    const auto d = disc(doom(0.01));
    EXPECT_GE(eval_cm(d).value, 20.0);
    EXPECT_LE(eval_nc(d, 1.0).value / hellinger_sq(d).value, 6.0);
    const auto r = search_gap(GapObjective::CmWithNcRatio, 100000, 20240601);
    EXPECT_TRUE(r.feasible);
    EXPECT_GE(r.value, 20.0);
    const DiscretePair best(r.best.p0, r.best.p);
    EXPECT_LE(eval_nc(best, 1.0).value / hellinger_sq(best).value, 6.0);
}

TEST(GapSearch, DeterministicAndValidated) {
    const auto a = search_gap(GapObjective::NcHalfOverHsqWithFm, 3000, 4);
    const auto b = search_gap(GapObjective::NcHalfOverHsqWithFm, 3000, 4);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.best.p0.masses, b.best.p0.masses);
    EXPECT_THROW(search_gap(GapObjective::CmWithNcRatio, 0, 4), Error);
}
