#pragma once

// Seeded Monte Carlo for M(Sigma) = min_j |<z, u_j>|, z standard Gaussian in
// R^k, where the u_j are a Gram factor of Sigma.

#include <gaussmin/corrmat.hpp>
#include <gaussmin/error.hpp>
#include <gaussmin/parallel.hpp>
#include <gaussmin/rng.hpp>
#include <gaussmin/stats.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gaussmin {

struct MomentEstimate {
    double p = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

struct TailCurve {
    std::vector<double> thresholds;
    std::vector<double> estimates;   // P[M >= t]
    std::vector<double> half_widths; // 99% normal-approximation half-widths
    std::size_t samples = 0;

    double standard_error(std::size_t i) const { return half_widths[i] / kZ99; }
};

// min_j |<z, u_j>| for one Gaussian draw z.
inline double min_abs_projection(const RowMatrix& vectors, std::span<const double> z) {
    double best = std::numeric_limits<double>::infinity();
    const auto k = static_cast<std::size_t>(vectors.cols());
    for (Eigen::Index j = 0; j < vectors.rows(); ++j) {
        const double* u = vectors.row(j).data();
        double dot = 0.0;
        for (std::size_t c = 0; c < k; ++c) dot += u[c] * z[c];
        best = std::min(best, std::abs(dot));
    }
    return best;
}

// Calls fn(i, sample) for every draw; chunk c of the stream feeds samples
// [c * kChunkSize, (c + 1) * kChunkSize).
template <class Fn>
void for_each_min_sample(const GramFactor& gf, std::size_t count, RngStream stream, Fn&& fn) {
    const std::size_t k = gf.k();
    for_each_chunk(count, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        StreamEngine engine(stream, chunk);
        std::vector<double> z(k);
        for (std::size_t i = begin; i < end; ++i) {
            engine.fill_gaussian(z);
            fn(chunk, i, min_abs_projection(gf.vectors(), z));
        }
    });
}

inline std::vector<double> sample_min(const GramFactor& gf, std::size_t count, RngStream stream) {
    if (count < 1) throw Error(ErrorCode::invalid_argument, "sample count must be positive");
    std::vector<double> out(count);
    for_each_min_sample(gf, count, stream, [&](std::size_t, std::size_t i, double m) { out[i] = m; });
    return out;
}

inline MomentEstimate estimate_moment(const GramFactor& gf, double p, std::size_t count, RngStream stream) {
    if (!(p > 0.0)) throw Error(ErrorCode::invalid_exponent, "moment exponent must be positive");
    if (count < 2) throw Error(ErrorCode::invalid_argument, "moment estimation needs at least 2 samples");
    std::vector<RunningMoments> partial(chunk_count(count));
    const bool square = p == 2.0;
    for_each_min_sample(gf, count, stream, [&](std::size_t chunk, std::size_t, double m) {
        partial[chunk].add(square ? m * m : std::pow(m, p));
    });
    RunningMoments total;
    for (const auto& part : partial) total.merge(part);
    return {p, total.mean, total.standard_error(), count};
}

inline MomentEstimate estimate_moment(const CorrelationMatrix& sigma, double p, std::size_t count, RngStream stream) {
    return estimate_moment(gram_factor(sigma), p, count, stream);
}

namespace detail {

inline void check_thresholds(std::span<const double> thresholds) {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] >= 0.0)) throw Error(ErrorCode::invalid_argument, "thresholds must be nonnegative");
        if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
            throw Error(ErrorCode::invalid_argument, "thresholds must be strictly ascending");
        }
    }
}

}  // namespace detail

// Empirical tail curve from an existing sample; every threshold reads the same draws.
inline TailCurve tail_curve_from_samples(std::vector<double> samples, std::span<const double> thresholds) {
    detail::check_thresholds(thresholds);
    std::sort(samples.begin(), samples.end());
    TailCurve curve;
    curve.samples = samples.size();
    curve.thresholds.assign(thresholds.begin(), thresholds.end());
    for (double t : thresholds) {
        const auto above = static_cast<std::size_t>(samples.end() - std::lower_bound(samples.begin(), samples.end(), t));
        const double p = static_cast<double>(above) / static_cast<double>(samples.size());
        curve.estimates.push_back(p);
        curve.half_widths.push_back(kZ99 * proportion_se(p, samples.size()));
    }
    return curve;
}

inline TailCurve estimate_tail_curve(const GramFactor& gf, std::span<const double> thresholds, std::size_t count,
                                     RngStream stream) {
    if (count < 100) throw Error(ErrorCode::invalid_argument, "tail curves need at least 100 samples");
    detail::check_thresholds(thresholds);
    return tail_curve_from_samples(sample_min(gf, count, stream), thresholds);
}

inline TailCurve estimate_tail_curve(const CorrelationMatrix& sigma, std::span<const double> thresholds,
                                     std::size_t count, RngStream stream) {
    return estimate_tail_curve(gram_factor(sigma), thresholds, count, stream);
}

inline constexpr double kDominanceGuard = 4.0;

struct DominanceRow {
    double t = 0.0;
    double candidate_tail = 0.0;
    double candidate_se = 0.0;
    double reference_tail = 0.0;
    double reference_se = 0.0;
    double z = 0.0;  // (candidate - reference) / combined SE
    bool flagged = false;
};

struct DominanceReport {
    std::vector<DominanceRow> rows;
    std::size_t samples = 0;

    std::vector<double> flagged_thresholds() const {
        std::vector<double> out;
        for (const auto& row : rows) {
            if (row.flagged) out.push_back(row.t);
        }
        return out;
    }

    double max_z() const {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& row : rows) best = std::max(best, row.z);
        return rows.empty() ? 0.0 : best;
    }
};

inline double dominance_z(double candidate, double candidate_se, double reference, double reference_se) {
    const double diff = candidate - reference;
    const double se = std::sqrt(candidate_se * candidate_se + reference_se * reference_se);
    if (se > 0.0) return diff / se;
    if (diff == 0.0) return 0.0;
    return diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

// One-sided test of H0: P[M(candidate) >= t] <= P[M(reference) >= t] at each t.
// The two matrices are sampled from independent sub-streams of `stream`.
inline DominanceReport dominance_check(const CorrelationMatrix& candidate, const CorrelationMatrix& reference,
                                       std::span<const double> thresholds, std::size_t count, RngStream stream) {
    if (candidate.n() != reference.n()) {
        throw Error(ErrorCode::dimension_mismatch, "candidate and reference must have the same n");
    }
    if (count < 10'000) throw Error(ErrorCode::invalid_argument, "dominance checks need at least 10^4 samples");
    const auto cand = estimate_tail_curve(candidate, thresholds, count, stream.split(0));
    const auto ref = estimate_tail_curve(reference, thresholds, count, stream.split(1));
    DominanceReport report;
    report.samples = count;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        DominanceRow row;
        row.t = thresholds[i];
        row.candidate_tail = cand.estimates[i];
        row.candidate_se = cand.standard_error(i);
        row.reference_tail = ref.estimates[i];
        row.reference_se = ref.standard_error(i);
        row.z = dominance_z(row.candidate_tail, row.candidate_se, row.reference_tail, row.reference_se);
        row.flagged = row.z > kDominanceGuard;
        report.rows.push_back(row);
    }
    return report;
}

// Evenly spaced grid step, 2 step, ..., max (steps points, excluding 0).
inline std::vector<double> threshold_grid(double max, std::size_t steps, bool include_zero = false) {
    std::vector<double> grid;
    if (include_zero) grid.push_back(0.0);
    for (std::size_t i = 1; i <= steps; ++i) {
        grid.push_back(max * static_cast<double>(i) / static_cast<double>(steps));
    }
    return grid;
}

}  // namespace gaussmin
