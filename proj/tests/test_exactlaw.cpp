#include <gaussmin/exactlaw.hpp>
#include <gaussmin/montecarlo.hpp>
#include <gaussmin/stats.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gaussmin;

namespace {

// Maclaurin series of erf; converges quickly for |x| < 2.
double erf_series(double x) {
    double term = x;
    double sum = x;
    for (int k = 1; k < 60; ++k) {
        term *= -x * x / k;
        sum += term / (2 * k + 1);
    }
    return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

// The evenly spaced plane vectors whose Gram matrix is the cosine covariance.
GramFactor plane_vectors(std::size_t n) {
    RowMatrix rows(n, 2);
    for (std::size_t j = 0; j < n; ++j) {
        const double a = static_cast<double>(j) * std::numbers::pi / static_cast<double>(n);
        rows(j, 0) = std::cos(a);
        rows(j, 1) = std::sin(a);
    }
    return GramFactor::normalized(rows);
}

}  // namespace

TEST(CosTail, AtZeroIsOne) {
    EXPECT_DOUBLE_EQ(cos_tail(4, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(cos_tail(1, 0.0), 1.0);
}

TEST(CosTail, SingleLineIsHalfNormal) {
    const double oracle = 1.0 - erf_series(1.0 / std::numbers::sqrt2);
    EXPECT_NEAR(oracle, 0.31731050786, 1e-11);
    EXPECT_NEAR(cos_tail(1, 1.0), oracle, 1e-12);
    for (double t : {0.1, 0.5, 2.0, 3.0}) EXPECT_NEAR(cos_tail(1, t), std::erfc(t / std::numbers::sqrt2), 1e-12) << t;
}

TEST(CosTail, MatchesMonteCarlo) {
    constexpr std::size_t kSamples = 10'000'000;
    const auto samples = sample_min(gram_factor(cosine_covariance(4)), kSamples, {77, 0});
    const double t = 0.3;
    const auto above = static_cast<double>(std::count_if(samples.begin(), samples.end(), [t](double m) { return m >= t; }));
    const double p = above / kSamples;
    EXPECT_NEAR(cos_tail(4, t), p, 4 * proportion_se(p, kSamples));
}

TEST(CosTail, ShapeAndDecay) {
    for (std::size_t n : {1, 2, 3, 4, 8, 16, 32}) {
        double previous = cos_tail(n, 0.0);
        EXPECT_EQ(previous, 1.0);
        for (int i = 1; i <= 100; ++i) {
            const double value = cos_tail(n, 10.0 * i / 100.0);
            // Once the tail underflows it stays at zero; before that it must strictly drop.
            if (previous > 0.0) {
                ASSERT_LT(value, previous) << "n=" << n << " i=" << i;
            } else {
                ASSERT_EQ(value, 0.0);
            }
            ASSERT_GE(value, 0.0);
            previous = value;
        }
        EXPECT_LT(cos_tail(n, 10.0), 1e-12);
    }
}

TEST(CosTail, ReportsQuadratureDiagnostics) {
    const auto r = CosineLaw(4).tail(0.5);
    EXPECT_GE(r.error_estimate, 0.0);
    EXPECT_LE(r.error_estimate, 1e-12);
    EXPECT_GE(r.evaluations, 15u);
    EXPECT_THROW(CosineLaw(4).tail(-1.0), Error);
    EXPECT_THROW(CosineLaw(0), Error);
}

TEST(CosMoment, Examples) {
    const double m = cos_moment(4, 2.0);
    EXPECT_GE(m, 0.099683);
    EXPECT_LE(m, 0.099684);
    EXPECT_NEAR(cos_moment(1, 2.0), 1.0, 1e-12);
}

TEST(CosMoment, MatchesMonteCarloAtPOne) {
    const auto est = estimate_moment(gram_factor(cosine_covariance(8)), 1.0, 10'000'000, {5, 0});
    EXPECT_NEAR(cos_moment(8, 1.0), est.mean, 4 * est.std_error);
}

TEST(CosMoment, RejectsNonPositiveExponent) {
    for (double p : {0.0, -1.0}) {
        try {
            cos_moment(4, p);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::invalid_exponent);
        }
    }
}

TEST(CosMoment, AgreesWithClosedFormForAllSmallN) {
    for (std::size_t n = 1; n <= 32; ++n) EXPECT_LT(std::abs(cos_moment(n, 2.0) - cos_moment_p2(n)), 1e-10) << n;
}

TEST(CosMoment, FractionalExponentsAreFinite) {
    for (double p : {0.25, 0.5, 1.5, 3.7}) {
        const double v = cos_moment(5, p);
        EXPECT_GT(v, 0.0);
        EXPECT_TRUE(std::isfinite(v));
    }
}

// E[M^p] = p * integral of t^{p-1} P[M >= t] dt.
TEST(CosMoment, TailIntegralIdentity) {
    for (std::size_t n : {2, 4, 8}) {
        for (double p : {1.0, 2.0}) {
            const CosineLaw law(n);
            auto integrand = [&](double t) { return p * std::pow(t, p - 1.0) * law.tail(t).value; };
            const double via_tail = integrate(integrand, 0.0, 10.0, {1e-11, 1'000'000}).value;
            EXPECT_NEAR(law.moment(p).value, via_tail, 1e-8) << "n=" << n << " p=" << p;
        }
    }
}

TEST(CosMomentP2, Examples) {
    EXPECT_NEAR(cos_moment_p2(4), 1.0 - 2.0 * std::numbers::sqrt2 / std::numbers::pi, 1e-15);
    EXPECT_NEAR(cos_moment_p2(4), 0.0996837, 1e-7);
    EXPECT_NEAR(cos_moment_p2(1), 1.0, 1e-15);
    EXPECT_NEAR(cos_moment_p2(2), 1.0 - 2.0 / std::numbers::pi, 1e-15);
    EXPECT_NEAR(cos_moment_p2(2), 0.3633802, 1e-7);
}

TEST(SampleCosMin, NonnegativeAndDeterministic) {
    const auto a = sample_cos_min(4, 10'000, 9);
    EXPECT_EQ(a, sample_cos_min(4, 10'000, 9));
    EXPECT_NE(a, sample_cos_min(4, 10'000, 10));
    for (double x : a) EXPECT_GE(x, 0.0);
}

TEST(SampleCosMin, MeanSquareMatchesClosedForm) {
    RunningMoments squares;
    for (double x : sample_cos_min(4, 1'000'000, 21)) squares.add(x * x);
    EXPECT_NEAR(squares.mean, cos_moment_p2(4), 4 * squares.standard_error());
}

TEST(SampleCosMin, KolmogorovSmirnovAgainstExactTail) {
    constexpr std::size_t kSamples = 100'000;
    const CosineLaw law(4);
    const double d = ks_one_sample(sample_cos_min(4, kSamples, 33), [&](double x) { return 1.0 - law.tail(x).value; });
    EXPECT_LT(d, 1.95 / std::sqrt(double(kSamples)));
}

TEST(SampleCosMin, SameLawAsPlaneProjections) {
    constexpr std::size_t kSamples = 100'000;
    for (std::size_t n : {2, 3, 5, 8}) {
        const auto polar = sample_cos_min(n, kSamples, 100 + n);
        const auto direct = sample_min(plane_vectors(n), kSamples, {200 + n, 0});
        EXPECT_LT(ks_two_sample(polar, direct), ks_critical_value(0.001, kSamples, kSamples)) << n;
    }
}
