#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hdl/conditions.hpp"
#include "hdl/sievemle.hpp"

using namespace hdl;

namespace {

std::vector<double> sample_with_mean(double m) { return {m - 0.3, m, m + 0.3}; }

// Argmax of -sum (x - theta)^2 / 2 over a 1e5-point grid on [-3, 3], restricted to
// |theta| >= r, with the sieve endpoints +-r added.
double grid_mle(const std::vector<double>& x, double r) {
    auto ll = [&](double t) {
        double s = 0.0;
        for (double v : x) s -= 0.5 * (v - t) * (v - t);
        return s;
    };
    double best_t = r, best = ll(r);
    if (ll(-r) > best) best_t = -r, best = ll(-r);
    constexpr int n = 100000;
    for (int i = 0; i <= n; ++i) {
        const double t = -3.0 + 6.0 * i / n;
        if (std::fabs(t) < r) continue;
        const double v = ll(t);
        if (v > best) best = v, best_t = t;
    }
    return best_t;
}

}  // namespace

TEST(SieveMle, Examples) {
    EXPECT_DOUBLE_EQ(mle_normal_sieve(sample_with_mean(0.5), 0.1), 0.5);
    EXPECT_EQ(mle_normal_sieve(sample_with_mean(0.02), 0.1), 0.1);
    EXPECT_EQ(mle_normal_sieve(sample_with_mean(-0.02), 0.1), -0.1);
    const std::vector<double> zero{-1.0, 1.0};
    EXPECT_EQ(mle_normal_sieve(zero, 0.1), 0.1);
    EXPECT_THROW(mle_normal_sieve(std::vector<double>{}, 0.1), Error);
    EXPECT_THROW(mle_normal_sieve(zero, 0.0), Error);
}

TEST(SieveMle, MatchesGridSearch) {
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng(derive_seed(77, {s}));
        const long n = 5 + static_cast<long>(rng() % 200);
        const double shift = 0.3 * (uniform_open01(rng) - 0.5);
        const double r = 0.05 + 0.3 * uniform_open01(rng);
        std::vector<double> x(static_cast<std::size_t>(n));
        for (auto& v : x) v = shift + standard_normal(rng);
        EXPECT_NEAR(mle_normal_sieve(x, r), grid_mle(x, r), 1e-4) << s;
    }
}

TEST(NormalHellinger, Examples) {
    EXPECT_EQ(normal_hellinger_sq(0.4, 0.4), 0.0);
    EXPECT_NEAR(normal_hellinger_sq(0, 1), 2.0 - 2.0 * std::exp(-0.125), 1e-15);
    EXPECT_NEAR(normal_hellinger_sq(0, 1), 0.2350062, 1e-7);
    EXPECT_NEAR(normal_hellinger_sq(0, 2), 0.786939, 1e-6);
    for (double t : {0.25, 1.0, 2.0, 3.5}) {
        EXPECT_NEAR(normal_hellinger_sq(0, t), hellinger_sq(normal_loc(0), normal_loc(t)).value, 1e-9) << t;
    }
    EXPECT_EQ(normal_hellinger_sq(1.0, -2.0), normal_hellinger_sq(-2.0, 1.0));
}

TEST(NormalHellinger, FirstOrderApproximation) {
    for (double t : {1e-2, 1e-3}) EXPECT_NEAR(normal_hellinger_sq(0, t) / (t * t / 4), 1.0, 0.01) << t;
}

TEST(Rate, QuantileAndFit) {
    const std::vector<double> v{1, 2, 3, 4};
    EXPECT_EQ(quantile_sorted(v, 0.5), 2.5);
    EXPECT_EQ(quantile_sorted(v, 0.25), 1.75);
    EXPECT_EQ(quantile_sorted(v, 1.0), 4.0);
    const auto [b, a] = fit_line({0, 1, 2}, {1, 3, 5});
    EXPECT_DOUBLE_EQ(b, 2.0);
    EXPECT_DOUBLE_EQ(a, 1.0);
}

TEST(Rate, ConfigValidation) {
    RateConfig c;
    EXPECT_NO_THROW(c.validate());
    c.sample_sizes = {100, 100};
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.sample_sizes = {10, 100};
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.replications = 0;
    EXPECT_THROW(c.validate(), Error);
}

TEST(Rate, Deterministic) {
    RateConfig c;
    c.replications = 1;
    const auto a = run_rate_experiment(c), b = run_rate_experiment(c);
    ASSERT_EQ(a.rows.size(), 4u);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].median_h, b.rows[i].median_h);
        EXPECT_EQ(a.rows[i].iqr_h, 0.0);
    }
    EXPECT_EQ(a.slope, b.slope);
}

TEST(Rate, SlopeNearMinusHalf) {
    const auto r = run_rate_experiment(RateConfig{});
    EXPECT_GE(r.slope, -0.6);
    EXPECT_LE(r.slope, -0.4);
    for (std::size_t i = 1; i < r.rows.size(); ++i) EXPECT_LT(r.rows[i].median_h, r.rows[i - 1].median_h);
}

TEST(Rate, MisspecifiedSievePlateaus) {
    RateConfig c;
    c.sieve_rule = [](long) { return 0.5; };
    const auto r = run_rate_experiment(c);
    const double plateau = std::sqrt(2.0 - 2.0 * std::exp(-1.0 / 32.0));
    EXPECT_LE(std::fabs(r.slope), 0.1);
    for (const auto& row : r.rows) EXPECT_NEAR(row.median_h, plateau, 1e-12) << row.n;
}

TEST(Rate, SlackMovesEstimateOutward) {
    RateConfig a, b;
    a.replications = b.replications = 20;
    b.tolerance_slack = 1.0;
    const auto ra = run_rate_experiment(a), rb = run_rate_experiment(b);
    for (std::size_t i = 0; i < ra.rows.size(); ++i) EXPECT_GT(rb.rows[i].median_h, ra.rows[i].median_h);
}

TEST(Bracket, Examples) {
    EXPECT_EQ(bracket_hellinger(0.3, 0.3), 0.0);
    EXPECT_THROW(bracket_hellinger(0.1, -0.1), Error);
    const auto wide = bracket_hellinger_sq(-0.5, 0.5);
    EXPECT_TRUE(std::isfinite(wide.value));
    EXPECT_GT(wide.value, 0.0);
    EXPECT_NE(wide.status, QuadStatus::Diverged);
    std::vector<double> ratios;
    for (double w : {0.1, 0.01, 0.001}) ratios.push_back(bracket_hellinger(-w / 2, w / 2) / w);
    const auto [mn, mx] = std::minmax_element(ratios.begin(), ratios.end());
    EXPECT_LT((*mx - *mn) / *mn, 0.25);
}

TEST(Bracket, ContainsTheFamily) {
    // p_L <= phi(x - theta) <= p_U for theta in [lo, up]; the envelopes' Hellinger
    // distance then dominates that of any two members at the bracket ends.
    for (double w : {0.1, 1.0}) {
        const double h2 = bracket_hellinger_sq(-w / 2, w / 2).value;
        EXPECT_GE(h2, normal_hellinger_sq(-w / 2, w / 2)) << w;
    }
}

TEST(Bracket, SmallWidthClosedForm) {
    // To first order h(p_U, p_L) = w/2: p_U/p_L - 1 ~ w |x| on the bulk.
    EXPECT_NEAR(bracket_hellinger(-5e-4, 5e-4) / 1e-3, 0.5, 1e-3);
}

TEST(Assumption, TruncatedLogMomentStaysBounded) {
    double prev = kInf;
    for (double n : {1e2, 1e4, 1e6}) {
        const double t = 1.0 / std::sqrt(n);
        const auto l2 = eval_lk(normal_loc(0), normal_loc(t), 2.0);
        const double ratio = l2.value / (t * t);
        EXPECT_TRUE(std::isfinite(ratio)) << n;
        EXPECT_LE(ratio, 1.0) << n;
        EXPECT_LE(ratio, prev) << n;
        prev = ratio;
    }
}
