#include <gaussmin/exactlaw.hpp>
#include <gaussmin/montecarlo.hpp>
#include <gaussmin/zones.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gaussmin;

namespace {

constexpr double kPi = std::numbers::pi;

double combined_se(const MeasureEstimate& a, const MeasureEstimate& b) {
    return std::hypot(a.standard_error(), b.standard_error());
}

// Random orthogonal map via QR of a Gaussian matrix.
Eigen::MatrixXd random_rotation(std::size_t d, RngStream stream) {
    StreamEngine engine(stream);
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = engine.gaussian();
    return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
}

ZoneConfig rotated(const ZoneConfig& config, const Eigen::MatrixXd& q) {
    RowMatrix centers = config.centers() * q.transpose();
    for (Eigen::Index i = 0; i < centers.rows(); ++i) centers.row(i).normalize();
    return {config.d(), config.alpha(), centers};
}

ZoneConfig config_from_angles(std::initializer_list<double> angles, double alpha) {
    RowMatrix centers(angles.size(), 2);
    Eigen::Index i = 0;
    for (double a : angles) {
        centers(i, 0) = std::cos(a);
        centers(i, 1) = std::sin(a);
        ++i;
    }
    return {2, alpha, centers};
}

}  // namespace

TEST(EvenlySpaced, Examples) {
    const auto two = evenly_spaced_config(2, 3, 0.1);
    EXPECT_NEAR(two.centers()(0, 0), 1.0, 1e-16);
    EXPECT_NEAR(two.centers()(0, 1), 0.0, 1e-16);
    EXPECT_NEAR(two.centers()(1, 0), 0.0, 1e-16);
    EXPECT_NEAR(two.centers()(1, 1), 1.0, 1e-16);
    EXPECT_EQ(two.centers()(0, 2), 0.0);
    EXPECT_EQ(two.centers()(1, 2), 0.0);

    const auto four = evenly_spaced_config(4, 2, 0.1);
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_NEAR(std::atan2(four.centers()(j, 1), four.centers()(j, 0)), j * kPi / 4, 1e-15);
    }
    const auto one = evenly_spaced_config(1, 5, 0.1);
    EXPECT_EQ(one.size(), 1u);
    EXPECT_EQ(one.centers().row(0), (Eigen::RowVectorXd::Unit(5, 0)).eval());
    EXPECT_THROW(evenly_spaced_config(0, 3, 0.1), Error);
    EXPECT_THROW(evenly_spaced_config(2, 1, 0.1), Error);
}

TEST(ZoneConfig, Validation) {
    RowMatrix bad(1, 3);
    bad << 1.0, 1.0, 0.0;
    EXPECT_THROW(ZoneConfig(3, 0.1, bad), Error);
    EXPECT_THROW(evenly_spaced_config(2, 3, -0.1), Error);
    EXPECT_THROW(evenly_spaced_config(2, 3, 2.0), Error);
    RowMatrix wrong_width(1, 2);
    wrong_width << 1.0, 0.0;
    EXPECT_THROW(ZoneConfig(3, 0.1, wrong_width), Error);
}

TEST(SingleZone, ArchimedesAndCircle) {
    for (double a : {0.1, 0.5, 1.0}) {
        EXPECT_NEAR(single_zone_measure(3, a), std::sin(a), 1e-12) << a;
        EXPECT_NEAR(single_zone_measure(2, a), 2 * a / kPi, 1e-12) << a;
    }
    EXPECT_EQ(single_zone_measure(4, 0.0), 0.0);
    EXPECT_EQ(single_zone_measure(4, kHalfPi), 1.0);
    EXPECT_THROW(single_zone_measure(1, 0.1), Error);
}

// Independent oracle for d = 4: the density of x_1 is (2/pi) sqrt(1 - x^2),
// whose integral has the closed form below.
TEST(SingleZone, FourDimensionalClosedForm) {
    for (double a : {0.2, 0.4, 1.1}) {
        const double s = std::sin(a);
        const double oracle = 2.0 / kPi * (s * std::sqrt(1 - s * s) + std::asin(s));
        EXPECT_NEAR(single_zone_measure(4, a), oracle, 1e-12) << a;
    }
}

TEST(SingleZone, FiveDimensionsMatchesMonteCarlo) {
    const auto est = union_measure_mc(evenly_spaced_config(1, 5, 0.3), 10'000'000, {1, 0});
    EXPECT_NEAR(single_zone_measure(5, 0.3), est.value, 4 * est.standard_error());
}

TEST(UnionMc, Examples) {
    const auto generic = random_config(3, 4, 0.0, {2, 0});
    EXPECT_EQ(union_measure_mc(generic, 10'000, {2, 1}).value, 0.0);
    const auto full = union_measure_mc(generic.with_alpha(kHalfPi), 10'000, {2, 1});
    EXPECT_EQ(full.value, 1.0);
    const auto single = union_measure_mc(evenly_spaced_config(1, 4, 0.4), 1'000'000, {2, 2});
    EXPECT_NEAR(single.value, single_zone_measure(4, 0.4), 4 * single.standard_error());
    EXPECT_EQ(single.method, MeasureMethod::monte_carlo);
    EXPECT_THROW(union_measure_mc(generic, 999, {2, 1}), Error);
}

TEST(UnionMc, EmptyCentersRejected) {
    EXPECT_THROW(union_measure_mc(ZoneConfig(3, 0.2, RowMatrix(0, 3)), 10'000, {1, 0}), Error);
}

TEST(UnionD2Exact, DisjointArcs) {
    for (std::size_t n : {1, 2, 3, 5, 8}) {
        const double cover = kPi / (2.0 * n);
        for (double frac : {0.1, 0.5, 0.9}) {
            const auto m = union_measure_d2_exact(evenly_spaced_config(n, 2, frac * cover));
            EXPECT_NEAR(m.value, 2.0 * n * frac * cover / kPi, 1e-12) << n << " " << frac;
            EXPECT_EQ(m.half_width, 0.0);
            EXPECT_EQ(m.method, MeasureMethod::exact);
        }
    }
}

TEST(UnionD2Exact, CoveringThreshold) {
    for (std::size_t n = 1; n <= 12; ++n) {
        const double cover = kPi / (2.0 * n);
        EXPECT_EQ(union_measure_d2_exact(evenly_spaced_config(n, 2, cover)).value, 1.0) << n;
        EXPECT_EQ(union_measure_d2_exact(evenly_spaced_config(n, 2, std::min(kHalfPi, 1.5 * cover))).value, 1.0) << n;
        EXPECT_LT(union_measure_d2_exact(evenly_spaced_config(n, 2, cover * (1 - 1e-9))).value, 1.0) << n;
        EXPECT_LT(union_measure_d2_exact(evenly_spaced_config(n, 2, 0.99 * cover)).value, 1.0) << n;
    }
}

TEST(UnionD2Exact, MatchesMonteCarloForRandomConfigs) {
    for (std::uint64_t seed : {3, 4, 5, 6}) {
        const auto config = random_config(3, 2, 0.25, {seed, 0});
        const auto exact = union_measure_d2_exact(config);
        const auto mc = union_measure_mc(config, 1'000'000, {seed, 1});
        EXPECT_NEAR(exact.value, mc.value, 4 * mc.standard_error()) << seed;
    }
}

TEST(UnionD2Exact, RequiresPlane) { EXPECT_THROW(union_measure_d2_exact(evenly_spaced_config(2, 3, 0.1)), Error); }

TEST(UnionD2Exact, PerpendicularPairMatchesEvenlySpaced) {
    const auto perpendicular = config_from_angles({0.7, 0.7 + kPi / 2}, 0.3);
    const auto even = evenly_spaced_config(2, 2, 0.3);
    EXPECT_NEAR(union_measure_d2_exact(perpendicular).value, union_measure_d2_exact(even).value, 1e-12);
}

TEST(AlphaOf, Examples) {
    EXPECT_EQ(alpha_of(1.0, 0.5), kHalfPi);
    EXPECT_EQ(alpha_of(0.0, 1.0), 0.0);
    EXPECT_NEAR(alpha_of(1.0, 2.0), kPi / 6, 1e-15);
    EXPECT_EQ(alpha_of(1.0, 1.0), kHalfPi);
    EXPECT_NEAR(alpha_of(1.0, 1.0 + 1e-12), kHalfPi, 2e-6);
    EXPECT_THROW(alpha_of(1.0, 0.0), Error);
    EXPECT_THROW(alpha_of(1.0, -1.0), Error);
    try {
        alpha_of(1.0, 0.0);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::domain);
    }
}

TEST(SlabProb, CosineMatchesExactLaw) {
    for (std::size_t n : {2, 4}) {
        for (double t : {0.2, 0.5}) {
            const auto est = slab_prob_via_zones(gram_factor(cosine_covariance(n)), t, 1'000'000, {7, n});
            const double exact = 1.0 - cos_tail(n, t);
            EXPECT_NEAR(est.value, exact, 4 * std::sqrt(exact * (1 - exact) / 1e6)) << n << " " << t;
        }
    }
}

// The radius/direction split and the direct minimum are two independent
// estimators of P[M <= t].
TEST(SlabProb, BridgeIdentityForRandomMatrices) {
    for (std::uint64_t seed : {8, 9, 10}) {
        const auto gf = gram_factor(random_correlation(5, 5, seed));
        for (double t : {0.05, 0.2, 0.6}) {
            const auto via_zones = slab_prob_via_zones(gf, t, 500'000, {seed, 1});
            const std::vector<double> grid{t};
            const auto direct = tail_curve_from_samples(sample_min(gf, 500'000, {seed, 2}), grid);
            // tail_curve counts M >= t; P[M <= t] differs only on a null set.
            const double direct_p = 1.0 - direct.estimates[0];
            const double se = std::hypot(via_zones.standard_error(), direct.standard_error(0));
            EXPECT_NEAR(via_zones.value, direct_p, 4 * se + 1e-12) << seed << " " << t;
        }
    }
}

TEST(SlabProb, LargeThresholdIsCertain) {
    EXPECT_EQ(slab_prob_via_zones(gram_factor(random_correlation(4, 4, 1)), 20.0, 10'000, {1, 0}).value, 1.0);
    EXPECT_THROW(slab_prob_via_zones(gram_factor(cosine_covariance(3)), 0.0, 10'000, {1, 0}), Error);
    EXPECT_THROW(slab_prob_via_zones(gram_factor(cosine_covariance(3)), 0.5, 999, {1, 0}), Error);
}

TEST(Properties, RotationInvariance) {
    for (std::uint64_t seed : {11, 12, 13}) {
        const auto config = random_config(4, 3, 0.3, {seed, 0});
        const auto q = random_rotation(3, {seed, 1});
        const auto a = union_measure_mc(config, 500'000, {seed, 2});
        const auto b = union_measure_mc(rotated(config, q), 500'000, {seed, 3});
        EXPECT_NEAR(a.value, b.value, 4 * combined_se(a, b)) << seed;
    }
}

TEST(Properties, MonotoneInAlphaOnSharedPoints) {
    const auto points = sphere_points(4, 100'000, {14, 0});
    const auto base = random_config(5, 4, 0.0, {14, 1});
    double previous = -1.0;
    for (int i = 0; i <= 20; ++i) {
        const double alpha = kHalfPi * i / 20.0;
        const double value = union_measure_on_points(base.with_alpha(alpha), points).value;
        EXPECT_GE(value, previous) << alpha;
        previous = value;
    }
    EXPECT_EQ(previous, 1.0);
}

TEST(Properties, SubAdditivity) {
    for (std::size_t d : {3, 4, 6}) {
        for (double alpha : {0.05, 0.2, 0.5}) {
            const auto config = random_config(4, d, alpha, {15, d});
            const auto mc = union_measure_mc(config, 200'000, {16, d});
            const double bound = std::min(1.0, 4 * single_zone_measure(d, alpha));
            EXPECT_LE(mc.value, bound + 4 * mc.standard_error()) << d << " " << alpha;
        }
    }
}

TEST(Scan, SingleZoneIsRotationInvariant) {
    const auto report = zone_conjecture_scan(1, 4, 0.3, 10, 100'000, {17, 0});
    ASSERT_EQ(report.trials.size(), 10u);
    for (const auto& trial : report.trials) {
        const double se = std::hypot(report.even.standard_error(), std::sqrt(trial.measure * (1 - trial.measure) / 1e5));
        EXPECT_NEAR(trial.measure, report.even.value, 4 * se);
    }
}

TEST(Scan, EvenlySpacedIsNotBeatenInThreeDimensions) {
    const auto report = zone_conjecture_scan(4, 3, 0.2, 50, 1'000'000, {18, 0});
    EXPECT_FALSE(report.exceedance()) << report.exceedance_z();
    EXPECT_EQ(report.trials.size(), 50u);
    EXPECT_GE(report.max_random(), 0.0);
    for (const auto& trial : report.trials) EXPECT_LE(trial.measure, report.max_random());
}

TEST(Scan, Deterministic) {
    const auto a = zone_conjecture_scan(3, 3, 0.2, 5, 20'000, {19, 0});
    const auto b = zone_conjecture_scan(3, 3, 0.2, 5, 20'000, {19, 0});
    EXPECT_EQ(a.even.value, b.even.value);
    for (std::size_t i = 0; i < a.trials.size(); ++i) EXPECT_EQ(a.trials[i].measure, b.trials[i].measure);
    EXPECT_THROW(zone_conjecture_scan(3, 3, 0.2, 0, 20'000, {19, 0}), Error);
}

TEST(SpherePoints, UnitNorm) {
    const auto pts = sphere_points(5, 1000, {20, 0});
    for (Eigen::Index i = 0; i < pts.rows(); ++i) EXPECT_NEAR(pts.row(i).norm(), 1.0, 1e-12);
}
