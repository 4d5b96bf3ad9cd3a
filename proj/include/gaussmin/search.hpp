#pragma once

// Black-box minimisation of f_p(Sigma) = E[M(Sigma)^p] and
// g_t(Sigma) = P[M(Sigma) >= t] over rank-constrained correlation matrices.
//
// A point of the search space is an n x k block of raw reals; row i is
// normalised to the unit vector u_i and Sigma is their Gram matrix. The
// objective is estimated on one fixed set of Gaussian draws per search
// (common random numbers), which makes it a deterministic function of the
// parameters.

#include <gaussmin/corrmat.hpp>
#include <gaussmin/error.hpp>
#include <gaussmin/exactlaw.hpp>
#include <gaussmin/interval.hpp>
#include <gaussmin/montecarlo.hpp>
#include <gaussmin/parallel.hpp>
#include <gaussmin/rng.hpp>
#include <gaussmin/stats.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gaussmin {

inline constexpr double kDegenerateRowNorm = 1e-12;
inline constexpr double kRecoveryDistance = 0.05;
inline constexpr double kFiniteDifferenceStep = 1e-3;
inline constexpr std::uint64_t kRepairStream = 0x7265706169720000ULL;

struct SearchSpace {
    std::size_t n = 0;
    std::size_t rank = 0;

    SearchSpace(std::size_t n_, std::size_t rank_) : n(n_), rank(rank_) {
        if (n < 1) throw Error(ErrorCode::invalid_dimension, "search space needs n >= 1");
        if (rank < 1 || rank > n) throw Error(ErrorCode::invalid_rank, "rank must lie in [1, n]");
    }

    std::size_t dimension() const { return n * rank; }
};

enum class ObjectiveKind { moment, tail };

struct Objective {
    ObjectiveKind kind = ObjectiveKind::moment;
    double parameter = 2.0;  // p for moments, t for tails
    std::size_t samples = 100'000;
    std::uint64_t base_seed = 0;

    static Objective moment(double p, std::size_t samples, std::uint64_t seed) {
        if (!(p > 0.0)) throw Error(ErrorCode::invalid_exponent, "moment objective needs p > 0");
        return {ObjectiveKind::moment, p, samples, seed};
    }

    static Objective tail(double t, std::size_t samples, std::uint64_t seed) {
        if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "tail objective needs t > 0");
        return {ObjectiveKind::tail, t, samples, seed};
    }

    // "moment:2" or "tail:0.5".
    static Objective parse(const std::string& spec, std::size_t samples, std::uint64_t seed) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos) throw Error(ErrorCode::invalid_argument, "objective must be kind:value");
        const std::string kind = spec.substr(0, colon);
        double value = 0.0;
        try {
            value = std::stod(spec.substr(colon + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::invalid_argument, "objective value is not a number: " + spec);
        }
        if (kind == "moment") return moment(value, samples, seed);
        if (kind == "tail") return tail(value, samples, seed);
        throw Error(ErrorCode::invalid_argument, "unknown objective kind: " + kind);
    }

    std::string describe() const {
        return (kind == ObjectiveKind::moment ? "moment:" : "tail:") + std::to_string(parameter);
    }
};

// Rows normalised to unit length. Rows that are (near) zero are redrawn from
// a stream keyed by the row index, so decoding stays a function of params.
inline RowMatrix decode_rows(const SearchSpace& space, std::span<const double> params,
                             RngStream repair = {0, kRepairStream}) {
    if (params.size() != space.dimension()) {
        throw Error(ErrorCode::invalid_argument, "expected " + std::to_string(space.dimension()) + " parameters");
    }
    RowMatrix rows(space.n, space.rank);
    for (std::size_t i = 0; i < space.n; ++i) {
        for (std::size_t c = 0; c < space.rank; ++c) {
            const double x = params[i * space.rank + c];
            if (!std::isfinite(x)) throw Error(ErrorCode::evaluation, "non-finite parameter");
            rows(i, c) = x;
        }
        double norm = rows.row(i).norm();
        if (norm < kDegenerateRowNorm) {
            StreamEngine engine(repair.split(i));
            engine.fill_sphere({rows.row(i).data(), space.rank});
            norm = rows.row(i).norm();
            if (norm < kDegenerateRowNorm) throw Error(ErrorCode::evaluation, "degenerate row after re-randomisation");
        }
        rows.row(i) /= norm;
    }
    return rows;
}

inline CorrelationMatrix decode_matrix(const SearchSpace& space, std::span<const double> params) {
    return CorrelationMatrix::from_unit_rows(decode_rows(space, params));
}

// Flattens rows into parameters, zero-padding or truncating columns to `rank`.
inline std::vector<double> params_from_rows(const RowMatrix& rows, std::size_t rank) {
    std::vector<double> params(static_cast<std::size_t>(rows.rows()) * rank, 0.0);
    const auto cols = std::min<std::size_t>(rank, static_cast<std::size_t>(rows.cols()));
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        for (std::size_t c = 0; c < cols; ++c) params[static_cast<std::size_t>(i) * rank + c] = rows(i, c);
    }
    return params;
}

// Parameters realising the cosine covariance (the evenly spaced plane vectors).
inline std::vector<double> cosine_params(std::size_t n, std::size_t rank) {
    if (rank < 2) throw Error(ErrorCode::invalid_rank, "the cosine configuration needs rank >= 2");
    RowMatrix rows(n, 2);
    for (std::size_t j = 0; j < n; ++j) {
        const double angle = static_cast<double>(j) * std::numbers::pi / static_cast<double>(n);
        rows(j, 0) = std::cos(angle);
        rows(j, 1) = std::sin(angle);
    }
    return params_from_rows(rows, rank);
}

struct ObjectiveValue {
    double value = 0.0;
    double std_error = 0.0;
};

// Objective on a frozen Gaussian sample. The draws are generated exactly as
// montecarlo's sample_min does for stream {base_seed, 0}, so the moment
// objective equals estimate_moment on the decoded Gram factor.
class ObjectiveEvaluator {
  public:
    ObjectiveEvaluator(SearchSpace space, Objective objective)
        : space_(space), objective_(objective), draws_(objective.samples, space.rank) {
        if (objective.samples < 2) throw Error(ErrorCode::invalid_argument, "objective needs at least 2 samples");
        const RngStream stream{objective.base_seed, 0};
        const std::size_t k = space.rank;
        for_each_chunk(objective.samples, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            StreamEngine engine(stream, chunk);
            for (std::size_t i = begin; i < end; ++i) engine.fill_gaussian({draws_.row(i).data(), k});
        });
    }

    const SearchSpace& space() const { return space_; }
    const Objective& objective() const { return objective_; }
    std::size_t evaluations() const { return evaluations_; }

    ObjectiveValue evaluate(std::span<const double> params) const {
        const RowMatrix rows = decode_rows(space_, params, {objective_.base_seed, kRepairStream});
        return evaluate_rows(rows);
    }

    ObjectiveValue evaluate_rows(const RowMatrix& rows) const {
        ++evaluations_;
        const std::size_t count = objective_.samples;
        const std::size_t k = space_.rank;
        std::vector<RunningMoments> partial(chunk_count(count));
        const bool tail = objective_.kind == ObjectiveKind::tail;
        const double parameter = objective_.parameter;
        for_each_chunk(count, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            RunningMoments acc;
            for (std::size_t i = begin; i < end; ++i) {
                const double m = min_abs_projection(rows, {draws_.row(i).data(), k});
                if (tail) {
                    acc.add(m >= parameter ? 1.0 : 0.0);
                } else {
                    acc.add(parameter == 2.0 ? m * m : std::pow(m, parameter));
                }
            }
            partial[chunk] = acc;
        });
        RunningMoments total;
        for (const auto& part : partial) total.merge(part);
        if (!std::isfinite(total.mean)) throw Error(ErrorCode::evaluation, "objective is not finite");
        return {total.mean, total.standard_error()};
    }

    double operator()(std::span<const double> params) const { return evaluate(params).value; }

  private:
    SearchSpace space_;
    Objective objective_;
    RowMatrix draws_;
    mutable std::size_t evaluations_ = 0;
};

inline double evaluate_objective(const SearchSpace& space, std::span<const double> params, const Objective& objective) {
    return ObjectiveEvaluator(space, objective)(params);
}

// Reference values for comparing search results.
inline double cosine_reference(std::size_t n, const Objective& objective) {
    return objective.kind == ObjectiveKind::moment ? cos_moment(n, objective.parameter)
                                                   : cos_tail(n, objective.parameter);
}

// Simplex value: the interval certificate midpoint for (n = 4, p = 2),
// otherwise a Monte Carlo estimate at the objective's sample size.
inline std::optional<double> simplex_reference(std::size_t n, const Objective& objective) {
    if (n < 2) return std::nullopt;
    if (n == 4 && objective.kind == ObjectiveKind::moment && objective.parameter == 2.0) {
        return simplex_p2_enclosure(400).mid();
    }
    const auto gf = gram_factor(simplex_covariance(n));
    const RngStream stream{objective.base_seed, 0};
    if (objective.kind == ObjectiveKind::moment) {
        return estimate_moment(gf, objective.parameter, std::max<std::size_t>(objective.samples, 2), stream).mean;
    }
    const double t = objective.parameter;
    return estimate_tail_curve(gf, std::span<const double>(&t, 1), std::max<std::size_t>(objective.samples, 100), stream)
        .estimates.front();
}

enum class Termination { iterations, stationary, line_search };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::iterations: return "iterations";
        case Termination::stationary: return "stationary";
        case Termination::line_search: return "line_search";
    }
    return "unknown";
}

struct SearchReport {
    std::string method;
    SearchSpace space{1, 1};
    Objective objective;
    std::vector<double> best_params;
    CorrelationMatrix best_matrix = identity_covariance(1);
    double best_value = 0.0;
    double best_std_error = 0.0;
    std::vector<double> history;  // best value after each iteration (entry 0 = start)
    double distance_to_cosine = 0.0;
    bool distance_certified = true;
    std::optional<double> simplex_value;
    std::optional<double> improvement_over_simplex;
    std::size_t evaluations = 0;
    Termination termination = Termination::iterations;
    double gradient_norm = std::numeric_limits<double>::quiet_NaN();

    bool recovered_cosine() const { return distance_to_cosine < kRecoveryDistance; }
};

namespace detail {

inline void finish_report(SearchReport& report, const ObjectiveEvaluator& evaluator) {
    const auto& space = evaluator.space();
    report.space = space;
    report.objective = evaluator.objective();
    report.best_matrix = CorrelationMatrix::from_unit_rows(
        decode_rows(space, report.best_params, {report.objective.base_seed, kRepairStream}));
    const auto cosine = cosine_covariance(space.n);
    if (space.n <= 8) {
        report.distance_to_cosine = canonical_distance(report.best_matrix, cosine);
        report.distance_certified = true;
    } else {
        const auto match = canonical_match_heuristic(report.best_matrix, cosine, 64, {report.objective.base_seed, 99});
        report.distance_to_cosine = match.distance;
        report.distance_certified = false;
    }
    report.simplex_value = simplex_reference(space.n, report.objective);
    if (report.simplex_value) report.improvement_over_simplex = *report.simplex_value - report.best_value;
    report.evaluations = evaluator.evaluations();
}

}  // namespace detail

struct DifferentialEvolutionSettings {
    std::size_t population = 32;
    std::size_t generations = 200;
    double mutation = 0.7;
    double crossover = 0.9;
    double init_range = 1.0;
};

// DE/rand/1/bin. Trial vectors for a generation are drawn in index order
// before any of them is evaluated; selection is synchronous.
inline SearchReport differential_evolution(const SearchSpace& space, const Objective& objective,
                                           const DifferentialEvolutionSettings& settings, RngStream stream) {
    if (settings.population < 4) throw Error(ErrorCode::invalid_argument, "population must be at least 4");
    const ObjectiveEvaluator evaluator(space, objective);
    const std::size_t dim = space.dimension();
    const std::size_t np = settings.population;
    StreamEngine engine(stream);

    std::vector<std::vector<double>> population(np, std::vector<double>(dim));
    std::vector<double> fitness(np);
    for (auto& member : population) {
        for (double& x : member) x = settings.init_range * (2.0 * engine.uniform() - 1.0);
    }
    for (std::size_t i = 0; i < np; ++i) fitness[i] = evaluator(population[i]);

    auto best_index = [&] {
        return static_cast<std::size_t>(std::min_element(fitness.begin(), fitness.end()) - fitness.begin());
    };
    SearchReport report;
    report.method = "de";
    report.history.push_back(fitness[best_index()]);

    std::vector<std::vector<double>> trials(np, std::vector<double>(dim));
    for (std::size_t gen = 0; gen < settings.generations; ++gen) {
        for (std::size_t i = 0; i < np; ++i) {
            std::size_t r1 = 0;
            std::size_t r2 = 0;
            std::size_t r3 = 0;
            do r1 = engine.below(np); while (r1 == i);
            do r2 = engine.below(np); while (r2 == i || r2 == r1);
            do r3 = engine.below(np); while (r3 == i || r3 == r1 || r3 == r2);
            const std::size_t forced = engine.below(dim);
            for (std::size_t c = 0; c < dim; ++c) {
                const bool cross = c == forced || engine.uniform() < settings.crossover;
                trials[i][c] = cross ? population[r1][c] + settings.mutation * (population[r2][c] - population[r3][c])
                                     : population[i][c];
            }
        }
        for (std::size_t i = 0; i < np; ++i) {
            const double value = evaluator(trials[i]);
            if (value <= fitness[i]) {
                population[i] = trials[i];
                fitness[i] = value;
            }
        }
        report.history.push_back(fitness[best_index()]);
    }
    const std::size_t best = best_index();
    report.best_params = population[best];
    const auto value = evaluator.evaluate(report.best_params);
    report.best_value = value.value;
    report.best_std_error = value.std_error;
    detail::finish_report(report, evaluator);
    return report;
}

inline SearchReport differential_evolution(const SearchSpace& space, const Objective& objective, std::size_t population,
                                           std::size_t generations, RngStream stream) {
    DifferentialEvolutionSettings settings;
    settings.population = population;
    settings.generations = generations;
    return differential_evolution(space, objective, settings, stream);
}

struct LocalSearchSettings {
    std::size_t iterations = 100;
    double step = kFiniteDifferenceStep;
    double gradient_tolerance = 1e-8;
    double min_step = 1e-10;
};

// Central finite-difference gradient of the CRN objective.
inline std::vector<double> finite_difference_gradient(const ObjectiveEvaluator& evaluator, std::span<const double> x,
                                                      double h) {
    std::vector<double> grad(x.size());
    std::vector<double> probe(x.begin(), x.end());
    for (std::size_t c = 0; c < x.size(); ++c) {
        probe[c] = x[c] + h;
        const double up = evaluator(probe);
        probe[c] = x[c] - h;
        const double down = evaluator(probe);
        probe[c] = x[c];
        grad[c] = (up - down) / (2.0 * h);
        if (!std::isfinite(grad[c])) throw Error(ErrorCode::evaluation, "non-finite gradient component");
    }
    return grad;
}

// BFGS with finite-difference gradients and Armijo backtracking.
inline SearchReport local_search(const SearchSpace& space, const Objective& objective, std::span<const double> start,
                                 const LocalSearchSettings& settings) {
    if (settings.iterations < 1) throw Error(ErrorCode::invalid_argument, "need at least one iteration");
    if (start.size() != space.dimension()) throw Error(ErrorCode::invalid_argument, "start has the wrong length");
    const ObjectiveEvaluator evaluator(space, objective);
    const std::size_t dim = space.dimension();
    std::vector<double> x(start.begin(), start.end());
    double fx = evaluator(x);
    if (!std::isfinite(fx)) throw Error(ErrorCode::evaluation, "objective is not finite at the start point");
    auto grad = finite_difference_gradient(evaluator, x, settings.step);

    Eigen::MatrixXd inverse_hessian = Eigen::MatrixXd::Identity(dim, dim);
    bool fresh_hessian = true;
    SearchReport report;
    report.method = "local";
    report.history.push_back(fx);
    report.termination = Termination::iterations;

    auto as_vector = [](const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); };

    for (std::size_t it = 0; it < settings.iterations; ++it) {
        const Eigen::VectorXd g = as_vector(grad);
        if (g.norm() < settings.gradient_tolerance) {
            report.termination = Termination::stationary;
            break;
        }
        Eigen::VectorXd direction = -inverse_hessian * g;
        double slope = g.dot(direction);
        if (!(slope < 0.0)) {
            inverse_hessian.setIdentity();
            fresh_hessian = true;
            direction = -g;
            slope = -g.squaredNorm();
        }
        double step = 1.0;
        std::vector<double> candidate(dim);
        double fc = fx;
        bool accepted = false;
        while (step >= settings.min_step) {
            for (std::size_t c = 0; c < dim; ++c) candidate[c] = x[c] + step * direction(c);
            fc = evaluator(candidate);
            if (!std::isfinite(fc)) throw Error(ErrorCode::evaluation, "objective is not finite during line search");
            if (fc <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (fresh_hessian) {
                report.termination = Termination::line_search;
                report.history.push_back(fx);
                break;
            }
            inverse_hessian.setIdentity();
            fresh_hessian = true;
            report.history.push_back(fx);
            continue;
        }
        auto new_grad = finite_difference_gradient(evaluator, candidate, settings.step);
        const Eigen::VectorXd s = as_vector(candidate) - as_vector(x);
        const Eigen::VectorXd y = as_vector(new_grad) - g;
        const double sy = s.dot(y);
        if (sy > 1e-12) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
            inverse_hessian = (identity - rho * s * y.transpose()) * inverse_hessian * (identity - rho * y * s.transpose()) +
                              rho * s * s.transpose();
            fresh_hessian = false;
        }
        x = std::move(candidate);
        fx = fc;
        grad = std::move(new_grad);
        report.history.push_back(fx);
    }
    report.gradient_norm = as_vector(grad).norm();
    report.best_params = x;
    const auto value = evaluator.evaluate(x);
    report.best_value = value.value;
    report.best_std_error = value.std_error;
    detail::finish_report(report, evaluator);
    return report;
}

inline SearchReport local_search(const SearchSpace& space, const Objective& objective, std::span<const double> start,
                                 std::size_t iterations) {
    LocalSearchSettings settings;
    settings.iterations = iterations;
    return local_search(space, objective, start, settings);
}

// Uniform start in [-1, 1]^{n k}.
inline std::vector<double> random_params(const SearchSpace& space, RngStream stream) {
    StreamEngine engine(stream);
    std::vector<double> params(space.dimension());
    for (double& x : params) x = 2.0 * engine.uniform() - 1.0;
    return params;
}

enum class SearchMethod { de, local };

struct CampaignCell {
    std::size_t n = 4;
    std::size_t rank = 4;
    Objective objective;
    SearchMethod method = SearchMethod::de;
    std::vector<std::uint64_t> seeds;
    std::size_t population = 32;
    std::size_t generations = 200;
    std::size_t iterations = 100;
};

struct CampaignRun {
    std::uint64_t seed = 0;
    double best_value = 0.0;
    double distance_to_cosine = 0.0;
    bool recovered = false;
    bool beats_simplex = false;
};

struct CampaignCellSummary {
    CampaignCell cell;
    std::vector<CampaignRun> runs;
    double best_value = std::numeric_limits<double>::quiet_NaN();
    double cosine_value = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> simplex_value;
    double recovery_fraction = 0.0;
    double beat_simplex_fraction = 0.0;
    std::size_t beat_simplex = 0;
};

struct CampaignSummary {
    std::vector<CampaignCellSummary> cells;
};

// Each seed drives both the search stream and the CRN draws of its run.
inline CampaignSummary run_campaign(const std::vector<CampaignCell>& cells) {
    CampaignSummary summary;
    for (const auto& cell : cells) {
        CampaignCellSummary out;
        out.cell = cell;
        if (cell.seeds.empty()) {
            summary.cells.push_back(std::move(out));
            continue;
        }
        const SearchSpace space(cell.n, cell.rank);
        out.cosine_value = cosine_reference(cell.n, cell.objective);
        out.simplex_value = simplex_reference(cell.n, cell.objective);
        std::size_t recovered = 0;
        for (std::uint64_t seed : cell.seeds) {
            Objective objective = cell.objective;
            objective.base_seed = seed;
            const RngStream stream{seed, 1};
            const SearchReport report =
                cell.method == SearchMethod::de
                    ? differential_evolution(space, objective, cell.population, cell.generations, stream)
                    : local_search(space, objective, random_params(space, stream), cell.iterations);
            CampaignRun run{seed, report.best_value, report.distance_to_cosine, report.recovered_cosine(), false};
            if (out.simplex_value) run.beats_simplex = report.best_value < *out.simplex_value;
            recovered += run.recovered ? 1 : 0;
            out.beat_simplex += run.beats_simplex ? 1 : 0;
            if (!(out.best_value <= report.best_value)) out.best_value = report.best_value;
            out.runs.push_back(run);
        }
        const double runs = static_cast<double>(out.runs.size());
        out.recovery_fraction = static_cast<double>(recovered) / runs;
        out.beat_simplex_fraction = static_cast<double>(out.beat_simplex) / runs;
        summary.cells.push_back(std::move(out));
    }
    return summary;
}

}  // namespace gaussmin
