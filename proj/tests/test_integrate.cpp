#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "hdl/integrate.hpp"

using namespace hdl;

TEST(Expect, TotalMass) {
    const auto r = expect(uniform01(), [](double) { return 1.0; });
    EXPECT_EQ(r.status, QuadStatus::Converged);
    EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(Expect, LogSingularityClosedForm) {
    // K(uniform || triangular) = 1 - log 2.
    const auto r = expect(uniform01(), [](double x) { return std::log(1.0 / (2.0 * x)); });
    EXPECT_EQ(r.status, QuadStatus::Converged);
    EXPECT_NEAR(r.value, 1.0 - std::log(2.0), 1e-10);
    EXPECT_LE(std::fabs(r.value - (1.0 - std::log(2.0))), r.abs_err + 1e-15);
}

TEST(Expect, DivergentPoleBelowBreak) {
    const std::vector<double> br{0.125};
    const auto r = expect(uniform01(), [](double x) { return x < 0.125 ? 1.0 / (2.0 * x) : 0.0; }, br);
    EXPECT_EQ(r.status, QuadStatus::Diverged);
    EXPECT_EQ(r.value, kInf);
    EXPECT_TRUE(r.diverged());
}

TEST(Expect, IntegrableSquareRootPole) {
    const std::vector<double> br{0.125};
    const auto r =
        expect(uniform01(), [](double x) { return x < 0.125 ? 1.0 / std::sqrt(2.0 * x) : 0.0; }, br);
    EXPECT_EQ(r.status, QuadStatus::Converged);
    EXPECT_NEAR(r.value, 0.5, 1e-10);
}

TEST(Expect, DivergenceDetectionPowerFamily) {
    for (double a : {0.5, 0.9, 1.0, 1.1, 2.0}) {
        const auto r = expect(uniform01(), [a](double x) { return std::pow(x, -a); });
        EXPECT_EQ(r.diverged(), a >= 1.0) << "a=" << a << " value=" << r.value;
        if (a < 1.0) {
            EXPECT_NEAR(r.value, 1.0 / (1.0 - a), 1e-8 / (1.0 - a)) << a;
        }
    }
}

TEST(Expect, NormalMoments) {
    const auto p = normal_loc(0.0);
    EXPECT_NEAR(expect(p, [](double x) { return x * x; }).value, 1.0, 1e-10);
    EXPECT_NEAR(expect(p, [](double x) { return x; }).value, 0.0, 1e-12);
    EXPECT_NEAR(expect(normal_loc(2.0), [](double x) { return x * x * x * x; }).value, 3 + 6 * 4 + 16, 1e-8);
    // Exponential growth: E e^{2X} = e^2.
    EXPECT_NEAR(expect(p, [](double x) { return std::exp(2.0 * x); }).value, std::exp(2.0), 1e-9);
}

TEST(Expect, TailBoundIsReported) {
    const auto r = expect(normal_loc(0.0), [](double x) { return x * x; });
    EXPECT_GE(r.tail_bound, 0.0);
    EXPECT_LE(r.tail_bound, QuadConfig{}.tail_mass);
}

TEST(Expect, NanIsIntegrandInvalid) {
    try {
        expect(uniform01(), [](double x) { return x > 0.5 ? std::nan("") : 1.0; });
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IntegrandInvalid);
    }
}

TEST(Integrate, InfMinusInfThrows) {
    const std::vector<double> br{0.5};
    auto f = [](double x) { return x < 0.5 ? 1.0 / x : -1.0 / (1.0 - x); };
    try {
        integrate(f, 0.0, 1.0, br);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Arithmetic);
    }
}

TEST(Integrate, Linearity) {
    const auto p = triangular01();
    auto g = [](double x) { return std::log(x); };
    auto h = [](double x) { return 1.0 / std::sqrt(x); };
    const double a = 2.5, b = -0.75;
    const auto eg = expect(p, g), eh = expect(p, h);
    const auto ec = expect(p, [&](double x) { return a * g(x) + b * h(x); });
    EXPECT_NEAR(ec.value, a * eg.value + b * eh.value,
                ec.abs_err + std::fabs(a) * eg.abs_err + std::fabs(b) * eh.abs_err + 1e-14);
    // Closed forms: E log X = -1/2, E X^{-1/2} = 4/3 under 2x.
    EXPECT_NEAR(eg.value, -0.5, 1e-10);
    EXPECT_NEAR(eh.value, 4.0 / 3.0, 1e-10);
}

TEST(Integrate, DeterministicBitwise) {
    auto run = [] {
        return expect(normal_loc(0.7), [](double x) { return std::exp(0.3 * x) * std::fabs(x); });
    };
    const auto a = run(), b = run();
    EXPECT_EQ(std::memcmp(&a.value, &b.value, sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(&a.abs_err, &b.abs_err, sizeof(double)), 0);
    EXPECT_EQ(a.status, b.status);
}

TEST(Integrate, EmptyOrReversedRangeIsZero) {
    EXPECT_EQ(integrate([](double) { return 1.0; }, 1.0, 1.0).value, 0.0);
}

TEST(QuadConfig, Validation) {
    QuadConfig c;
    EXPECT_NO_THROW(c.validate());
    c.max_depth = 5;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.rel_tol = 0.0;
    EXPECT_THROW(c.validate(), Error);
}

TEST(Combine, ExtendedSums) {
    const auto s = combine(IntegralEstimate::exact(1.0), IntegralEstimate::infinite());
    EXPECT_EQ(s.value, kInf);
    EXPECT_EQ(s.status, QuadStatus::Diverged);
    IntegralEstimate a = IntegralEstimate::exact(1.0);
    a.abs_err = 1e-12;
    const auto t = combine(a, a);
    EXPECT_EQ(t.value, 2.0);
    EXPECT_EQ(t.abs_err, 2e-12);
}

TEST(ExpectDiscrete, Examples) {
    const DiscreteDist half({0.0, 1.0}, {0.5, 0.5});
    EXPECT_EQ(expect_discrete(half, [](double) { return 3.0; }).value, 3.0);
    const DiscreteDist skew({0.0, 1.0}, {0.0, 1.0});
    EXPECT_EQ(expect_discrete(skew, [](double x) { return x == 0.0 ? kInf : 1.0; }).value, 1.0);
    const DiscreteDist q({0.0, 1.0}, {0.25, 0.75});
    const auto r = expect_discrete(q, [](double x) { return x == 0.0 ? kInf : 0.0; });
    EXPECT_EQ(r.value, kInf);
    EXPECT_EQ(r.status, QuadStatus::Diverged);
}

TEST(MonteCarlo, Examples) {
    const auto c = mc_expect(uniform01(), [](double) { return 7.0; }, 1000, 1);
    EXPECT_EQ(c.mean, 7.0);
    EXPECT_EQ(c.std_err, 0.0);
    const auto z = mc_expect(normal_loc(0.0), [](double x) { return x; }, 1000000, 2);
    EXPECT_LE(std::fabs(z.mean), 4.0 * z.std_err);
    const auto r = mc_expect(uniform01(), [](double x) { return x < 0.125 ? 1.0 / std::sqrt(2.0 * x) : 0.0; },
                             1000000, 3);
    EXPECT_NEAR(r.mean, 0.5, 4.0 * r.std_err);
}

TEST(MonteCarlo, DeterministicAndValidated) {
    auto g = [](double x) { return x * x; };
    const auto a = mc_expect(triangular01(), g, 5000, 9), b = mc_expect(triangular01(), g, 5000, 9);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_err, b.std_err);
    EXPECT_THROW(mc_expect(triangular01(), g, 1, 9), Error);
    DensityModel::Parts parts;
    parts.support = Support::interval(0.0, 1.0);
    parts.pdf = [](double) { return 1.0; };
    parts.log_pdf = [](double) { return 0.0; };
    try {
        mc_expect(DensityModel(parts), g, 10, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoSampler);
    }
}
