#pragma once

// Spherical zones Z(u, alpha) = {v on S^{d-1} : |<v, u>| <= sin(alpha)}:
// union measures, the evenly spaced configuration, and the slab/zone
// decomposition P[M <= t] = E[ sigma( union_j Z(u_j, alpha(t, |g|)) ) ].

#include <gaussmin/corrmat.hpp>
#include <gaussmin/error.hpp>
#include <gaussmin/parallel.hpp>
#include <gaussmin/quadrature.hpp>
#include <gaussmin/rng.hpp>
#include <gaussmin/stats.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gaussmin {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

class ZoneConfig {
  public:
    ZoneConfig(std::size_t d, double alpha, RowMatrix centers) : d_(d), alpha_(alpha), centers_(std::move(centers)) {
        if (d < 2) throw Error(ErrorCode::invalid_dimension, "zones need d >= 2");
        if (!(alpha >= 0.0 && alpha <= kHalfPi)) throw Error(ErrorCode::invalid_argument, "alpha must lie in [0, pi/2]");
        if (static_cast<std::size_t>(centers_.cols()) != d && centers_.rows() > 0) {
            throw Error(ErrorCode::dimension_mismatch, "centers must live in R^d");
        }
        for (Eigen::Index j = 0; j < centers_.rows(); ++j) {
            if (std::abs(centers_.row(j).norm() - 1.0) > kUnitNormTolerance) {
                throw Error(ErrorCode::invalid_argument, "center " + std::to_string(j) + " is not a unit vector");
            }
        }
    }

    std::size_t d() const { return d_; }
    double alpha() const { return alpha_; }
    std::size_t size() const { return static_cast<std::size_t>(centers_.rows()); }
    const RowMatrix& centers() const { return centers_; }

    ZoneConfig with_alpha(double alpha) const { return {d_, alpha, centers_}; }

  private:
    std::size_t d_;
    double alpha_;
    RowMatrix centers_;
};

enum class MeasureMethod { exact, monte_carlo };

struct MeasureEstimate {
    double value = 0.0;
    double half_width = 0.0;  // 99% interval; 0 for exact values
    MeasureMethod method = MeasureMethod::exact;
    std::size_t samples = 0;

    double standard_error() const { return half_width / kZ99; }
};

// v_j = (cos((j-1) pi / n), sin((j-1) pi / n), 0, ..., 0).
inline ZoneConfig evenly_spaced_config(std::size_t n, std::size_t d, double alpha) {
    if (n < 1) throw Error(ErrorCode::invalid_dimension, "need at least one zone");
    if (d < 2) throw Error(ErrorCode::invalid_dimension, "zones need d >= 2");
    RowMatrix centers = RowMatrix::Zero(n, d);
    for (std::size_t j = 0; j < n; ++j) {
        const double angle = static_cast<double>(j) * std::numbers::pi / static_cast<double>(n);
        centers(j, 0) = std::cos(angle);
        centers(j, 1) = std::sin(angle);
    }
    return {d, alpha, std::move(centers)};
}

inline ZoneConfig random_config(std::size_t n, std::size_t d, double alpha, RngStream stream) {
    return {d, alpha, random_unit_rows(n, d, stream)};
}

// sigma_{d-1}(Z(u, alpha)). With x_1 = sin(phi) the latitude density is
// proportional to cos^{d-2}(phi) on [-pi/2, pi/2].
inline double single_zone_measure(std::size_t d, double alpha) {
    if (d < 2) throw Error(ErrorCode::invalid_dimension, "zones need d >= 2");
    if (!(alpha >= 0.0 && alpha <= kHalfPi)) throw Error(ErrorCode::invalid_argument, "alpha must lie in [0, pi/2]");
    if (alpha == 0.0) return 0.0;
    if (alpha == kHalfPi) return 1.0;
    const int power = static_cast<int>(d) - 2;
    auto density = [power](double phi) { return power == 0 ? 1.0 : std::pow(std::cos(phi), power); };
    const QuadratureOptions options{1e-14, 1'000'000};
    const double band = integrate(density, 0.0, alpha, options).value;
    const double whole = integrate(density, 0.0, kHalfPi, options).value;
    return std::clamp(band / whole, 0.0, 1.0);
}

// Largest |<v, u>| that still lies in the zone; pi/2 admits everything.
inline double zone_threshold(double alpha) {
    return alpha >= kHalfPi ? std::numeric_limits<double>::infinity() : std::sin(alpha);
}

inline bool in_zone_union(const RowMatrix& centers, std::span<const double> v, double threshold) {
    const auto d = static_cast<std::size_t>(centers.cols());
    for (Eigen::Index j = 0; j < centers.rows(); ++j) {
        const double* u = centers.row(j).data();
        double dot = 0.0;
        for (std::size_t c = 0; c < d; ++c) dot += u[c] * v[c];
        if (std::abs(dot) <= threshold) return true;
    }
    return false;
}

// Uniform points on S^{d-1}, one per row, generated chunk by chunk.
inline RowMatrix sphere_points(std::size_t d, std::size_t count, RngStream stream) {
    RowMatrix points(count, d);
    for_each_chunk(count, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        StreamEngine engine(stream, chunk);
        for (std::size_t i = begin; i < end; ++i) engine.fill_sphere({points.row(i).data(), d});
    });
    return points;
}

inline MeasureEstimate measure_from_hits(std::size_t hits, std::size_t count) {
    const double p = static_cast<double>(hits) / static_cast<double>(count);
    return {p, kZ99 * proportion_se(p, count), MeasureMethod::monte_carlo, count};
}

// Union measure on a fixed point set (common random numbers across configs).
inline std::vector<char> union_indicators(const ZoneConfig& config, const RowMatrix& points) {
    if (static_cast<std::size_t>(points.cols()) != config.d()) {
        throw Error(ErrorCode::dimension_mismatch, "points must live in R^d");
    }
    std::vector<char> hits(static_cast<std::size_t>(points.rows()));
    const double threshold = zone_threshold(config.alpha());
    const std::size_t d = config.d();
    for_each_chunk(hits.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            hits[i] = in_zone_union(config.centers(), {points.row(i).data(), d}, threshold) ? 1 : 0;
        }
    });
    return hits;
}

inline MeasureEstimate union_measure_on_points(const ZoneConfig& config, const RowMatrix& points) {
    if (config.size() == 0) throw Error(ErrorCode::invalid_argument, "zone configuration has no centers");
    const auto hits = union_indicators(config, points);
    return measure_from_hits(static_cast<std::size_t>(std::count(hits.begin(), hits.end(), 1)), hits.size());
}

inline MeasureEstimate union_measure_mc(const ZoneConfig& config, std::size_t count, RngStream stream) {
    if (config.size() == 0) throw Error(ErrorCode::invalid_argument, "zone configuration has no centers");
    if (count < 1000) throw Error(ErrorCode::invalid_argument, "union measure needs at least 10^3 samples");
    const std::size_t d = config.d();
    const double threshold = zone_threshold(config.alpha());
    std::vector<std::size_t> partial(chunk_count(count), 0);
    for_each_chunk(count, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        StreamEngine engine(stream, chunk);
        std::vector<double> v(d);
        std::size_t hits = 0;
        for (std::size_t i = begin; i < end; ++i) {
            engine.fill_sphere(v);
            if (in_zone_union(config.centers(), v, threshold)) ++hits;
        }
        partial[chunk] = hits;
    });
    std::size_t hits = 0;
    for (std::size_t h : partial) hits += h;
    return measure_from_hits(hits, count);
}

// Gaps between arcs narrower than this are treated as closed; they are at
// the level of rounding in the arc endpoints.
inline constexpr double kArcMergeSlack = 64.0 * std::numeric_limits<double>::epsilon();

// Exact normalised length of the union of zones on the circle. The zone of u
// at angle phi is the pair of arcs of half-width alpha centred at phi +- pi/2.
inline MeasureEstimate union_measure_d2_exact(const ZoneConfig& config) {
    if (config.d() != 2) throw Error(ErrorCode::invalid_dimension, "exact arc union needs d = 2");
    if (config.size() == 0) throw Error(ErrorCode::invalid_argument, "zone configuration has no centers");
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    const double alpha = config.alpha();
    if (alpha >= kHalfPi) return {1.0, 0.0, MeasureMethod::exact, 0};
    if (alpha == 0.0) return {0.0, 0.0, MeasureMethod::exact, 0};

    std::vector<std::pair<double, double>> arcs;
    auto add_arc = [&](double centre) {
        double a = std::fmod(centre - alpha, kTwoPi);
        if (a < 0.0) a += kTwoPi;
        const double b = a + 2.0 * alpha;
        if (b <= kTwoPi) {
            arcs.emplace_back(a, b);
        } else {
            arcs.emplace_back(a, kTwoPi);
            arcs.emplace_back(0.0, b - kTwoPi);
        }
    };
    for (std::size_t j = 0; j < config.size(); ++j) {
        const double phi = std::atan2(config.centers()(j, 1), config.centers()(j, 0));
        add_arc(phi + kHalfPi);
        add_arc(phi - kHalfPi);
    }
    std::sort(arcs.begin(), arcs.end());

    const double slack = kArcMergeSlack * kTwoPi;
    double covered = 0.0;
    double start = arcs.front().first;
    double end = arcs.front().second;
    bool single_run = true;
    for (std::size_t i = 1; i < arcs.size(); ++i) {
        if (arcs[i].first <= end + slack) {
            end = std::max(end, arcs[i].second);
        } else {
            covered += end - start;
            start = arcs[i].first;
            end = arcs[i].second;
            single_run = false;
        }
    }
    covered += end - start;
    if (single_run && arcs.front().first <= slack && end >= kTwoPi - slack) {
        return {1.0, 0.0, MeasureMethod::exact, 0};
    }
    return {std::clamp(covered / kTwoPi, 0.0, 1.0), 0.0, MeasureMethod::exact, 0};
}

// Half-width of the zone cut out of the sphere of radius r by slabs |<x, u>| <= t.
inline double alpha_of(double t, double r) {
    if (!(r > 0.0)) throw Error(ErrorCode::domain, "radius must be positive");
    if (!(t >= 0.0)) throw Error(ErrorCode::domain, "threshold must be nonnegative");
    if (r <= t) return kHalfPi;
    return std::asin(t / r);
}

// P[M(Sigma) <= t] estimated through the radius/direction split: g = r w with
// w uniform on the sphere, and the event is w in union_j Z(u_j, alpha(t, r)).
inline MeasureEstimate slab_prob_via_zones(const GramFactor& gf, double t, std::size_t count, RngStream stream) {
    if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "threshold must be positive");
    if (count < 1000) throw Error(ErrorCode::invalid_argument, "slab probability needs at least 10^3 samples");
    const std::size_t k = gf.k();
    std::vector<std::size_t> partial(chunk_count(count), 0);
    for_each_chunk(count, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        StreamEngine engine(stream, chunk);
        std::vector<double> g(k);
        std::size_t hits = 0;
        for (std::size_t i = begin; i < end; ++i) {
            double r2 = 0.0;
            do {
                engine.fill_gaussian(g);
                r2 = 0.0;
                for (double x : g) r2 += x * x;
            } while (r2 == 0.0);
            const double r = std::sqrt(r2);
            for (double& x : g) x /= r;
            if (in_zone_union(gf.vectors(), g, zone_threshold(alpha_of(t, r)))) ++hits;
        }
        partial[chunk] = hits;
    });
    std::size_t hits = 0;
    for (std::size_t h : partial) hits += h;
    return measure_from_hits(hits, count);
}

struct ZoneTrial {
    std::size_t index = 0;
    double measure = 0.0;
    double z = 0.0;  // paired z-statistic of (random - even)
    RowMatrix centers;
};

struct ZoneScanReport {
    std::size_t n = 0;
    std::size_t d = 0;
    double alpha = 0.0;
    std::size_t samples = 0;
    MeasureEstimate even;
    std::vector<ZoneTrial> trials;
    std::size_t best_trial = 0;

    double max_random() const { return trials.empty() ? 0.0 : trials[best_trial].measure; }
    double exceedance_z() const {
        double z = -std::numeric_limits<double>::infinity();
        for (const auto& trial : trials) z = std::max(z, trial.z);
        return trials.empty() ? 0.0 : z;
    }
    bool exceedance() const { return exceedance_z() > 4.0; }
};

// Random-configuration hunt against the evenly spaced zones. All configs are
// scored on one shared set of sphere points, so differences are paired.
inline ZoneScanReport zone_conjecture_scan(std::size_t n, std::size_t d, double alpha, std::size_t trials,
                                           std::size_t count, RngStream stream) {
    if (trials < 1) throw Error(ErrorCode::invalid_argument, "need at least one trial");
    if (count < 1000) throw Error(ErrorCode::invalid_argument, "scan needs at least 10^3 samples");
    const auto points = sphere_points(d, count, stream.split(0));
    const auto even_config = evenly_spaced_config(n, d, alpha);
    const auto even_hits = union_indicators(even_config, points);
    ZoneScanReport report{n, d, alpha, count, {}, {}, 0};
    report.even = measure_from_hits(static_cast<std::size_t>(std::count(even_hits.begin(), even_hits.end(), 1)), count);
    report.trials.resize(trials);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const auto config = random_config(n, d, alpha, stream.split(1000 + trial));
        const auto hits = union_indicators(config, points);
        RunningMoments diff;
        std::size_t total = 0;
        for (std::size_t i = 0; i < count; ++i) {
            total += static_cast<std::size_t>(hits[i]);
            diff.add(static_cast<double>(hits[i]) - static_cast<double>(even_hits[i]));
        }
        ZoneTrial& out = report.trials[trial];
        out.index = trial;
        out.measure = static_cast<double>(total) / static_cast<double>(count);
        const double se = diff.standard_error();
        out.z = se > 0.0 ? diff.mean / se : (diff.mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff.mean));
        out.centers = config.centers();
        if (out.measure > report.trials[report.best_trial].measure) report.best_trial = trial;
    }
    return report;
}

}  // namespace gaussmin
