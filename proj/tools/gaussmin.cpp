// gaussmin: command-line front end for the gaussmin library.
//
// Exit codes: 0 success (or certified verdict), 1 verdict false or flagged
// dominance violation, 2 usage error, 3 runtime error.

#include <gaussmin/corrmat.hpp>
#include <gaussmin/exactlaw.hpp>
#include <gaussmin/interval.hpp>
#include <gaussmin/io.hpp>
#include <gaussmin/montecarlo.hpp>
#include <gaussmin/search.hpp>
#include <gaussmin/zones.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef GAUSSMIN_VERSION
#define GAUSSMIN_VERSION "0.0.0"
#endif

namespace {

using gaussmin::io::format_double;
using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFlagged = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out_dir;
    std::string format = "csv";
};

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent seed for the i-th derived object of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t i) {
    return splitmix(splitmix(seed ^ splitmix(tag)) + i);
}

std::uint64_t resolve_seed(const GlobalOptions& global) {
    if (global.seed) return *global.seed;
    if (const char* env = std::getenv("GAUSSMIN_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw UsageError(std::string("GAUSSMIN_SEED is not an unsigned integer: ") + env);
        }
    }
    return 1;
}

// Collects output files and writes them, plus manifest.json, under --out-dir.
class Outputs {
  public:
    Outputs(const GlobalOptions& global, std::string command, std::uint64_t seed)
        : global_(global), command_(std::move(command)), seed_(seed), start_(std::chrono::steady_clock::now()) {}

    bool enabled() const { return !global_.out_dir.empty(); }

    void add(const std::string& name, const std::string& contents) { files_[name] = contents; }

    void finish(const CLI::App& app, const CLI::App& sub) const {
        if (!enabled()) return;
        fs::create_directories(global_.out_dir);
        for (const auto& [name, contents] : files_) write(name, contents);
        json flags = json::object();
        auto record = [&](const CLI::App& a) {
            for (const CLI::Option* opt : a.get_options()) {
                if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
                std::string value;
                if (opt->count() > 0) {
                    const auto& results = opt->results();
                    for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
                    if (results.empty()) value = "true";
                } else {
                    value = opt->get_default_str();
                }
                flags[opt->get_name()] = value;
            }
        };
        record(app);
        record(sub);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json manifest = {{"command", command_},
                         {"flags", flags},
                         {"seed", seed_},
                         {"tool_version", GAUSSMIN_VERSION},
                         {"wall_time", wall},
                         {"files", json::array()}};
        for (const auto& [name, _] : files_) manifest["files"].push_back(name);
        write("manifest.json", manifest.dump(2) + "\n");
    }

  private:
    void write(const std::string& name, const std::string& contents) const {
        const fs::path path = fs::path(global_.out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        out << contents;
        if (!out) throw std::runtime_error("cannot write " + path.string());
    }

    const GlobalOptions& global_;
    std::string command_;
    std::uint64_t seed_;
    std::chrono::steady_clock::time_point start_;
    std::map<std::string, std::string> files_;
};

gaussmin::CorrelationMatrix resolve_matrix(const std::string& name, std::size_t n, std::uint64_t seed) {
    using namespace gaussmin;
    if (name == "cos") return cosine_covariance(n);
    if (name == "simplex") return simplex_covariance(n);
    if (name == "identity") return identity_covariance(n);
    if (name == "random-full") return random_correlation(n, n, derive_seed(seed, 11, 0));
    if (name == "random-rank2") return random_correlation(n, std::min<std::size_t>(2, n), derive_seed(seed, 12, 0));
    if (fs::exists(name) || fs::path(name).extension() == ".json") {
        std::ifstream in(name);
        if (!in) throw std::runtime_error("cannot read matrix file " + name);
        const auto m = io::matrix_from_json(json::parse(in));
        if (m.n() != n) throw UsageError(name + " has n = " + std::to_string(m.n()) + " but --n is " + std::to_string(n));
        return m;
    }
    throw UsageError("unknown matrix '" + name + "' (use cos, simplex, identity, random-full, random-rank2 or a JSON file)");
}

std::string tail_curve_csv(const gaussmin::TailCurve& curve, const std::string& label, bool header) {
    std::ostringstream out;
    if (header) out << "t,tail,ci_half,label\n";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        out << format_double(curve.thresholds[i]) << ',' << format_double(curve.estimates[i]) << ','
            << format_double(curve.half_widths[i]) << ',' << label << '\n';
    }
    return out.str();
}

std::vector<double> grid_or_points(const std::vector<double>& points, double grid_max, std::size_t steps,
                                   bool include_zero) {
    if (!points.empty()) return points;
    if (steps < 1) throw UsageError("--grid-steps must be positive");
    return gaussmin::threshold_grid(grid_max, steps, include_zero);
}

// verify ---------------------------------------------------------------------

struct VerifyArgs {
    std::size_t subdivisions = 400;
};

int run_verify(const VerifyArgs& args, Outputs& outputs) {
    if (args.subdivisions < 1) throw UsageError("--subdivisions must be at least 1");
    const auto cert = gaussmin::verify_counterexample(args.subdivisions);
    const std::string doc = gaussmin::io::certificate_to_json(cert).dump(2) + "\n";
    outputs.add("certificate.json", doc);
    std::cout << doc;
    if (!cert.verdict) std::cerr << "verdict false: enclosures overlap at " << args.subdivisions << " subdivisions\n";
    return cert.verdict ? kExitOk : kExitFlagged;
}

// moments --------------------------------------------------------------------

struct MomentsArgs {
    std::size_t n = 4;
    double p = 2.0;
    bool exact = false;
    std::string cov = "cos";
    std::size_t samples = 1'000'000;
};

int run_moments(const MomentsArgs& args, const GlobalOptions& global, std::uint64_t seed, Outputs& outputs) {
    double value = 0.0;
    std::optional<double> std_error;
    if (args.exact) {
        if (args.cov != "cos") throw UsageError("--exact is only available for --cov cos");
        if (!(args.p > 0.0)) throw UsageError("--p must be positive");
        value = gaussmin::cos_moment(args.n, args.p);
    } else {
        const auto sigma = resolve_matrix(args.cov, args.n, seed);
        const auto est = gaussmin::estimate_moment(sigma, args.p, args.samples, {seed, 0});
        value = est.mean;
        std_error = est.std_error;
    }
    std::string out;
    if (global.format == "json") {
        json doc = {{"n", args.n}, {"p", args.p}, {"value", value}, {"method", args.exact ? "exact" : "monte_carlo"},
                    {"cov", args.cov}};
        if (std_error) doc["std_error"] = *std_error;
        out = doc.dump(2) + "\n";
        outputs.add("moments.json", out);
    } else {
        out = "n,p,value\n" + std::to_string(args.n) + ',' + format_double(args.p) + ',' + format_double(value) + '\n';
        outputs.add("moments.csv", out);
    }
    std::cout << out;
    return kExitOk;
}

// tails ----------------------------------------------------------------------

struct TailsArgs {
    std::size_t n = 8;
    bool exact = false;
    std::string cov = "cos";
    std::vector<double> t;
    double grid_max = 2.0;
    std::size_t grid_steps = 20;
    std::size_t samples = 1'000'000;
};

int run_tails(const TailsArgs& args, std::uint64_t seed, Outputs& outputs) {
    const auto thresholds = grid_or_points(args.t, args.grid_max, args.grid_steps, true);
    std::ostringstream out;
    if (args.exact) {
        if (args.cov != "cos") throw UsageError("--exact is only available for --cov cos");
        const gaussmin::CosineLaw law(args.n);
        out << "n,t,tail\n";
        for (double t : thresholds) {
            if (!(t >= 0.0)) throw UsageError("thresholds must be nonnegative");
            out << args.n << ',' << format_double(t) << ',' << format_double(law.tail(t).value) << '\n';
        }
    } else {
        const auto sigma = resolve_matrix(args.cov, args.n, seed);
        const auto curve = gaussmin::estimate_tail_curve(sigma, thresholds, args.samples, {seed, 0});
        out << tail_curve_csv(curve, args.cov, true);
    }
    outputs.add("tails.csv", out.str());
    std::cout << out.str();
    return kExitOk;
}

// dominance ------------------------------------------------------------------

struct DominanceArgs {
    std::size_t n = 8;
    std::string candidate = "cos";
    std::string reference = "simplex";
    std::size_t samples = 1'000'000;
    double grid_max = 2.0;
    std::size_t grid_steps = 20;
};

int run_dominance(const DominanceArgs& args, const GlobalOptions& global, std::uint64_t seed, Outputs& outputs) {
    const auto candidate = resolve_matrix(args.candidate, args.n, derive_seed(seed, 21, 0));
    const auto reference = resolve_matrix(args.reference, args.n, derive_seed(seed, 22, 0));
    const auto grid = grid_or_points({}, args.grid_max, args.grid_steps, false);
    const auto report = gaussmin::dominance_check(candidate, reference, grid, args.samples, {seed, 0});
    std::ostringstream csv;
    csv << "t,candidate_tail,candidate_se,reference_tail,reference_se,z,flagged\n";
    for (const auto& row : report.rows) {
        csv << format_double(row.t) << ',' << format_double(row.candidate_tail) << ',' << format_double(row.candidate_se)
            << ',' << format_double(row.reference_tail) << ',' << format_double(row.reference_se) << ','
            << format_double(row.z) << ',' << (row.flagged ? 1 : 0) << '\n';
    }
    const json summary = {{"flagged", report.flagged_thresholds()}, {"max_z", report.max_z()}};
    outputs.add("dominance.csv", csv.str());
    outputs.add("dominance_summary.json", summary.dump(2) + "\n");
    std::cout << (global.format == "json" ? summary.dump(2) + "\n" : csv.str());
    return report.flagged_thresholds().empty() ? kExitOk : kExitFlagged;
}

// zones ----------------------------------------------------------------------

struct ZonesArgs {
    std::size_t n = 4;
    std::size_t d = 3;
    double alpha = 0.2;
    std::size_t trials = 50;
    std::size_t samples = 1'000'000;
};

std::vector<std::vector<double>> rows_to_vectors(const gaussmin::RowMatrix& rows) {
    std::vector<std::vector<double>> out;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        out.emplace_back(rows.row(i).data(), rows.row(i).data() + rows.cols());
    }
    return out;
}

int run_zones(const ZonesArgs& args, const GlobalOptions& global, std::uint64_t seed, Outputs& outputs) {
    if (!(args.alpha >= 0.0 && args.alpha <= gaussmin::kHalfPi)) throw UsageError("--alpha must lie in [0, pi/2]");
    const auto report = gaussmin::zone_conjecture_scan(args.n, args.d, args.alpha, args.trials, args.samples, {seed, 0});
    json doc = {{"n", args.n},
                {"d", args.d},
                {"alpha", args.alpha},
                {"samples", args.samples},
                {"trials", args.trials},
                {"even_measure", report.even.value},
                {"even_half_width", report.even.half_width},
                {"max_random", report.max_random()},
                {"max_random_centers", rows_to_vectors(report.trials[report.best_trial].centers)},
                {"exceedance_z", report.exceedance_z()},
                {"exceedance", report.exceedance()}};
    if (args.d == 2) doc["even_measure_exact"] = gaussmin::union_measure_d2_exact(gaussmin::evenly_spaced_config(args.n, 2, args.alpha)).value;
    std::ostringstream csv;
    csv << "trial,measure,z\n";
    for (const auto& trial : report.trials) {
        csv << trial.index << ',' << format_double(trial.measure) << ',' << format_double(trial.z) << '\n';
    }
    outputs.add("zones_report.json", doc.dump(2) + "\n");
    outputs.add("zones_trials.csv", csv.str());
    std::cout << (global.format == "json" ? doc.dump(2) + "\n" : csv.str());
    if (report.exceedance()) {
        std::cerr << "EXCEEDANCE: a random configuration beats the evenly spaced zones by z = " << report.exceedance_z()
                  << " (trial " << report.best_trial << "); inspect zones_report.json\n";
    }
    return kExitOk;
}

// search ---------------------------------------------------------------------

struct SearchArgs {
    std::size_t n = 4;
    std::size_t rank = 2;
    std::string objective = "moment:2";
    std::string method = "de";
    std::size_t population = 32;
    std::size_t generations = 200;
    std::size_t iterations = 100;
    std::size_t samples = 20'000;
};

json report_to_json(const gaussmin::SearchReport& r) {
    json doc = {{"method", r.method},
                {"n", r.space.n},
                {"rank", r.space.rank},
                {"objective", r.objective.describe()},
                {"samples", r.objective.samples},
                {"best_value", r.best_value},
                {"best_std_error", r.best_std_error},
                {"best_matrix", gaussmin::io::matrix_to_json(r.best_matrix)},
                {"best_params", r.best_params},
                {"distance_to_cosine", r.distance_to_cosine},
                {"distance_certified", r.distance_certified},
                {"recovered_cosine", r.recovered_cosine()},
                {"history", r.history},
                {"evaluations", r.evaluations},
                {"termination", gaussmin::to_string(r.termination)}};
    doc["simplex_value"] = r.simplex_value ? json(*r.simplex_value) : json(nullptr);
    doc["improvement_over_simplex"] = r.improvement_over_simplex ? json(*r.improvement_over_simplex) : json(nullptr);
    if (r.method == "local") doc["gradient_norm"] = r.gradient_norm;
    return doc;
}

int run_search(const SearchArgs& args, const GlobalOptions& global, std::uint64_t seed, Outputs& outputs) {
    const gaussmin::SearchSpace space(args.n, args.rank);
    const auto objective = gaussmin::Objective::parse(args.objective, args.samples, derive_seed(seed, 31, 0));
    const gaussmin::RngStream stream{seed, 1};
    gaussmin::SearchReport report;
    if (args.method == "de") {
        report = gaussmin::differential_evolution(space, objective, args.population, args.generations, stream);
    } else {
        report = gaussmin::local_search(space, objective, gaussmin::random_params(space, stream), args.iterations);
    }
    const json doc = report_to_json(report);
    std::ostringstream csv;
    csv << "iter,best_value\n";
    for (std::size_t i = 0; i < report.history.size(); ++i) csv << i << ',' << format_double(report.history[i]) << '\n';
    outputs.add("search_report.json", doc.dump(2) + "\n");
    outputs.add("search_history.csv", csv.str());
    std::cout << (global.format == "json" ? doc.dump(2) + "\n" : csv.str());
    return kExitOk;
}

// figure ---------------------------------------------------------------------

struct FigureArgs {
    std::string which;
    std::optional<std::size_t> n;
    std::size_t d = 3;
    double alpha = 0.2;
    std::size_t samples = 1'000'000;
    std::size_t random_draws = 50;
    double grid_max = 2.5;
    std::size_t grid_steps = 50;
};

int run_figure(const FigureArgs& args, GlobalOptions& global, std::uint64_t seed, Outputs& outputs) {
    using namespace gaussmin;
    if (global.out_dir.empty()) global.out_dir = ".";
    if (args.which == "cov") {
        const std::size_t n = args.n.value_or(16);
        std::ostringstream cos_csv;
        std::ostringstream simplex_csv;
        io::write_matrix_csv(cos_csv, cosine_covariance(n));
        io::write_matrix_csv(simplex_csv, simplex_covariance(n));
        outputs.add("figure1_cosine.csv", cos_csv.str());
        outputs.add("figure1_simplex.csv", simplex_csv.str());
    } else if (args.which == "tails") {
        const std::size_t n = args.n.value_or(8);
        const auto grid = threshold_grid(args.grid_max, args.grid_steps, true);
        std::ostringstream csv;
        csv << "t,tail,ci_half,label\n";
        TailCurve exact;
        exact.thresholds = grid;
        exact.samples = 0;
        const CosineLaw law(n);
        for (double t : grid) {
            exact.estimates.push_back(law.tail(t).value);
            exact.half_widths.push_back(0.0);
        }
        csv << tail_curve_csv(exact, "cos", false);
        std::uint64_t stream_id = 0;
        auto mc = [&](const CorrelationMatrix& sigma, const std::string& label) {
            csv << tail_curve_csv(estimate_tail_curve(sigma, grid, args.samples, {seed, stream_id++}), label, false);
        };
        mc(simplex_covariance(n), "simplex");
        TailCurve identity = exact;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            identity.estimates[i] = std::pow(std::erfc(grid[i] / std::numbers::sqrt2), static_cast<double>(n));
        }
        csv << tail_curve_csv(identity, "identity", false);
        for (std::size_t i = 0; i < args.random_draws; ++i) {
            mc(random_correlation(n, n, derive_seed(seed, 41, i)), "random_full_" + std::to_string(i + 1));
        }
        for (std::size_t i = 0; i < args.random_draws; ++i) {
            mc(random_correlation(n, std::min<std::size_t>(2, n), derive_seed(seed, 42, i)),
               "random_rank2_" + std::to_string(i + 1));
        }
        outputs.add("figure2_tails.csv", csv.str());
    } else {
        const std::size_t n = args.n.value_or(3);
        const auto config = evenly_spaced_config(n, args.d, args.alpha);
        std::ostringstream csv;
        csv << "j";
        for (std::size_t c = 0; c < args.d; ++c) csv << ",x" << c + 1;
        csv << ",alpha\n";
        for (std::size_t j = 0; j < n; ++j) {
            csv << j + 1;
            for (std::size_t c = 0; c < args.d; ++c) csv << ',' << format_double(config.centers()(j, c));
            csv << ',' << format_double(args.alpha) << '\n';
        }
        outputs.add("figure3_zones.csv", csv.str());
    }
    std::cout << "wrote figure data (" << args.which << ") to " << global.out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Law of the minimum absolute coordinate of a correlated Gaussian vector"};
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", GAUSSMIN_VERSION);

    GlobalOptions global;
    app.add_option("--seed", global.seed, "Base seed (falls back to GAUSSMIN_SEED, then 1)");
    app.add_option("--threads", global.threads, "Worker threads (0 = all cores)");
    app.add_option("--out-dir", global.out_dir, "Directory for output files and manifest.json");
    app.add_option("--format", global.format, "Stdout format")->check(CLI::IsMember({"csv", "json"}));

    VerifyArgs verify;
    auto* verify_cmd = app.add_subcommand("verify", "Interval-arithmetic certificate for n = 4, p = 2");
    verify_cmd->add_option("--subdivisions", verify.subdivisions, "Grid size per axis")->check(CLI::PositiveNumber);

    MomentsArgs moments;
    auto* moments_cmd = app.add_subcommand("moments", "E[M^p] exactly (cosine) or by Monte Carlo");
    moments_cmd->add_option("--n", moments.n)->check(CLI::PositiveNumber);
    moments_cmd->add_option("--p", moments.p);
    moments_cmd->add_flag("--exact", moments.exact, "Quadrature of the exact cosine law");
    moments_cmd->add_option("--cov", moments.cov, "cos|simplex|identity|random-full|random-rank2|<file.json>");
    moments_cmd->add_option("--samples", moments.samples)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));

    TailsArgs tails;
    auto* tails_cmd = app.add_subcommand("tails", "P[M >= t] exactly (cosine) or by Monte Carlo");
    tails_cmd->add_option("--n", tails.n)->check(CLI::PositiveNumber);
    tails_cmd->add_flag("--exact", tails.exact);
    tails_cmd->add_option("--cov", tails.cov);
    tails_cmd->add_option("--t", tails.t, "Explicit thresholds (overrides the grid)");
    tails_cmd->add_option("--grid-max", tails.grid_max);
    tails_cmd->add_option("--grid-steps", tails.grid_steps);
    tails_cmd->add_option("--samples", tails.samples)->check(CLI::Range(std::size_t{100}, std::size_t{1} << 40));

    DominanceArgs dominance;
    auto* dominance_cmd = app.add_subcommand("dominance", "Test P[M(candidate) >= t] <= P[M(reference) >= t]");
    dominance_cmd->add_option("--n", dominance.n)->check(CLI::PositiveNumber);
    dominance_cmd->add_option("--candidate", dominance.candidate);
    dominance_cmd->add_option("--reference", dominance.reference);
    dominance_cmd->add_option("--samples", dominance.samples)->check(CLI::Range(std::size_t{10'000}, std::size_t{1} << 40));
    dominance_cmd->add_option("--grid-max", dominance.grid_max)->check(CLI::PositiveNumber);
    dominance_cmd->add_option("--grid-steps", dominance.grid_steps)->check(CLI::PositiveNumber);

    ZonesArgs zones;
    auto* zones_cmd = app.add_subcommand("zones", "Random-configuration scan against evenly spaced zones");
    zones_cmd->add_option("--n", zones.n)->check(CLI::PositiveNumber);
    zones_cmd->add_option("--d", zones.d)->check(CLI::Range(std::size_t{2}, std::size_t{64}));
    zones_cmd->add_option("--alpha", zones.alpha);
    zones_cmd->add_option("--trials", zones.trials)->check(CLI::PositiveNumber);
    zones_cmd->add_option("--samples", zones.samples)->check(CLI::Range(std::size_t{1000}, std::size_t{1} << 40));

    SearchArgs search;
    auto* search_cmd = app.add_subcommand("search", "Minimise f_p or g_t over correlation matrices");
    search_cmd->add_option("--n", search.n)->check(CLI::Range(std::size_t{1}, std::size_t{32}));
    search_cmd->add_option("--rank", search.rank)->check(CLI::PositiveNumber);
    search_cmd->add_option("--objective", search.objective, "moment:p or tail:t");
    search_cmd->add_option("--method", search.method)->check(CLI::IsMember({"de", "local"}));
    search_cmd->add_option("--population", search.population)->check(CLI::Range(std::size_t{4}, std::size_t{1} << 20));
    search_cmd->add_option("--generations", search.generations);
    search_cmd->add_option("--iterations", search.iterations)->check(CLI::PositiveNumber);
    search_cmd->add_option("--samples", search.samples)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 32));

    FigureArgs figure;
    auto* figure_cmd = app.add_subcommand("figure", "Data files for the covariance, tail and zone figures");
    figure_cmd->add_option("--which", figure.which)->required()->check(CLI::IsMember({"cov", "tails", "zones"}));
    figure_cmd->add_option("--n", figure.n)->check(CLI::PositiveNumber);
    figure_cmd->add_option("--d", figure.d)->check(CLI::Range(std::size_t{2}, std::size_t{64}));
    figure_cmd->add_option("--alpha", figure.alpha);
    figure_cmd->add_option("--samples", figure.samples)->check(CLI::Range(std::size_t{100}, std::size_t{1} << 40));
    figure_cmd->add_option("--random", figure.random_draws, "Random covariances per rank class");
    figure_cmd->add_option("--grid-max", figure.grid_max)->check(CLI::PositiveNumber);
    figure_cmd->add_option("--grid-steps", figure.grid_steps)->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        const std::uint64_t seed = resolve_seed(global);
        gaussmin::set_thread_count(global.threads);
        const CLI::App* sub = app.get_subcommands().front();
        Outputs outputs(global, sub->get_name(), seed);
        int code = kExitOk;
        if (sub == verify_cmd) code = run_verify(verify, outputs);
        else if (sub == moments_cmd) code = run_moments(moments, global, seed, outputs);
        else if (sub == tails_cmd) code = run_tails(tails, seed, outputs);
        else if (sub == dominance_cmd) code = run_dominance(dominance, global, seed, outputs);
        else if (sub == zones_cmd) code = run_zones(zones, global, seed, outputs);
        else if (sub == search_cmd) code = run_search(search, global, seed, outputs);
        else if (sub == figure_cmd) code = run_figure(figure, global, seed, outputs);
        outputs.finish(app, *sub);
        return code;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
