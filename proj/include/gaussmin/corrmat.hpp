#pragma once

// Correlation matrices: construction of the named families, validation,
// Gram factorisation and comparison up to signed permutations.

#include <gaussmin/error.hpp>
#include <gaussmin/rng.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace gaussmin {

inline constexpr double kPsdTolerance = 1e-9;
inline constexpr double kRankCutoff = 1e-9;
inline constexpr double kUnitNormTolerance = 1e-12;
inline constexpr std::size_t kExhaustiveLimit = 10;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ValidationReport {
    bool square = true;
    bool unit_diagonal = true;
    bool symmetric = true;
    bool in_range = true;
    bool psd = true;
    double min_eigenvalue = 0.0;
    std::optional<std::size_t> bad_diagonal;
    std::optional<std::pair<std::size_t, std::size_t>> bad_symmetry;
    std::optional<std::pair<std::size_t, std::size_t>> bad_range;

    bool valid() const { return square && unit_diagonal && symmetric && in_range && psd; }

    std::string describe() const {
        if (valid()) return "valid";
        std::ostringstream out;
        if (!square) out << "matrix is not square; ";
        if (bad_diagonal) out << "diagonal entry " << *bad_diagonal << " is not 1; ";
        if (bad_symmetry) out << "entries (" << bad_symmetry->first << "," << bad_symmetry->second << ") not symmetric; ";
        if (bad_range) out << "entry (" << bad_range->first << "," << bad_range->second << ") outside [-1,1]; ";
        if (!psd) out << "minimum eigenvalue " << min_eigenvalue << " below -" << kPsdTolerance << "; ";
        std::string s = out.str();
        if (s.size() >= 2) s.resize(s.size() - 2);
        return s;
    }
};

inline ValidationReport validate(const Eigen::MatrixXd& m) {
    ValidationReport report;
    if (m.rows() != m.cols() || m.rows() == 0) {
        report.square = false;
        report.psd = false;
        return report;
    }
    const auto n = static_cast<std::size_t>(m.rows());
    for (std::size_t i = 0; i < n; ++i) {
        if (m(i, i) != 1.0 && !report.bad_diagonal) {
            report.unit_diagonal = false;
            report.bad_diagonal = i;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (m(i, j) != m(j, i) && !report.bad_symmetry) {
                report.symmetric = false;
                report.bad_symmetry = {i, j};
            }
            if (!(std::abs(m(i, j)) <= 1.0 + kPsdTolerance) && !report.bad_range) {
                report.in_range = false;
                report.bad_range = {i, j};
            }
        }
    }
    if (!m.allFinite()) {
        report.psd = false;
        report.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
        return report;
    }
    // Symmetrise before the eigensolve so an asymmetric input still yields a
    // meaningful spectrum in the report.
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
    report.min_eigenvalue = solver.eigenvalues()(0);
    report.psd = report.min_eigenvalue >= -kPsdTolerance;
    return report;
}

class CorrelationMatrix {
  public:
    // Throws ErrorCode::invalid_matrix when the entries fail validation.
    static CorrelationMatrix from_entries(Eigen::MatrixXd entries) {
        const auto report = validate(entries);
        if (!report.valid()) throw Error(ErrorCode::invalid_matrix, report.describe());
        return CorrelationMatrix(std::move(entries));
    }

    // Gram matrix of unit vectors (rows), with the diagonal pinned to 1 and
    // the lower triangle mirrored from the upper one.
    static CorrelationMatrix from_unit_rows(const RowMatrix& rows) {
        const Eigen::Index n = rows.rows();
        Eigen::MatrixXd g(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            g(i, i) = 1.0;
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double v = std::clamp(rows.row(i).dot(rows.row(j)), -1.0, 1.0);
                g(i, j) = v;
                g(j, i) = v;
            }
        }
        return from_entries(std::move(g));
    }

    std::size_t n() const { return static_cast<std::size_t>(entries_.rows()); }
    double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
    const Eigen::MatrixXd& entries() const { return entries_; }

    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries_, Eigen::EigenvaluesOnly);
        return solver.eigenvalues();
    }

    friend bool operator==(const CorrelationMatrix& a, const CorrelationMatrix& b) {
        return a.entries_.rows() == b.entries_.rows() && a.entries_ == b.entries_;
    }

  private:
    explicit CorrelationMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {}

    Eigen::MatrixXd entries_;
};

inline ValidationReport validate(const CorrelationMatrix& m) { return validate(m.entries()); }

inline CorrelationMatrix cosine_covariance(std::size_t n) {
    if (n < 1) throw Error(ErrorCode::invalid_dimension, "cosine covariance needs n >= 1");
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double diff = static_cast<double>(i) - static_cast<double>(j);
            m(i, j) = i == j ? 1.0 : std::cos(std::numbers::pi * diff / static_cast<double>(n));
        }
    }
    return CorrelationMatrix::from_entries(std::move(m));
}

inline CorrelationMatrix simplex_covariance(std::size_t n) {
    if (n < 2) throw Error(ErrorCode::invalid_dimension, "simplex covariance needs n >= 2");
    const double off = -1.0 / static_cast<double>(n - 1);
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, off);
    m.diagonal().setOnes();
    return CorrelationMatrix::from_entries(std::move(m));
}

inline CorrelationMatrix identity_covariance(std::size_t n) {
    if (n < 1) throw Error(ErrorCode::invalid_dimension, "identity covariance needs n >= 1");
    return CorrelationMatrix::from_entries(Eigen::MatrixXd::Identity(n, n));
}

// n independent uniform unit vectors in R^rank.
inline RowMatrix random_unit_rows(std::size_t n, std::size_t rank, RngStream stream) {
    RowMatrix rows(n, rank);
    StreamEngine engine(stream);
    for (std::size_t i = 0; i < n; ++i) engine.fill_sphere({rows.row(i).data(), rank});
    return rows;
}

inline CorrelationMatrix random_correlation(std::size_t n, std::size_t rank, std::uint64_t seed) {
    if (n < 1) throw Error(ErrorCode::invalid_dimension, "random correlation needs n >= 1");
    if (rank < 1 || rank > n) throw Error(ErrorCode::invalid_rank, "rank must lie in [1, n]");
    return CorrelationMatrix::from_unit_rows(random_unit_rows(n, rank, {seed, 0}));
}

// n unit vectors in R^k whose Gram matrix realises a correlation matrix.
class GramFactor {
  public:
    // Rows must already be unit vectors (within kUnitNormTolerance).
    static GramFactor from_unit_rows(RowMatrix rows) {
        if (rows.rows() == 0 || rows.cols() == 0) throw Error(ErrorCode::invalid_dimension, "empty Gram factor");
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            if (std::abs(rows.row(i).norm() - 1.0) > kUnitNormTolerance) {
                throw Error(ErrorCode::invalid_argument, "row " + std::to_string(i) + " is not a unit vector");
            }
        }
        return GramFactor(std::move(rows));
    }

    // Normalises each row; zero rows are rejected.
    static GramFactor normalized(RowMatrix rows) {
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            const double norm = rows.row(i).norm();
            if (!(norm > 0.0) || !std::isfinite(norm)) {
                throw Error(ErrorCode::invalid_argument, "row " + std::to_string(i) + " cannot be normalised");
            }
            rows.row(i) /= norm;
        }
        return from_unit_rows(std::move(rows));
    }

    std::size_t n() const { return static_cast<std::size_t>(rows_.rows()); }
    std::size_t k() const { return static_cast<std::size_t>(rows_.cols()); }
    const RowMatrix& vectors() const { return rows_; }

    Eigen::MatrixXd gram() const { return rows_ * rows_.transpose(); }
    CorrelationMatrix correlation() const { return CorrelationMatrix::from_unit_rows(rows_); }

  private:
    explicit GramFactor(RowMatrix rows) : rows_(std::move(rows)) {}

    RowMatrix rows_;
};

// Eigendecomposition-based factor: rank is the number of eigenvalues above
// kRankCutoff, rows are renormalised to exact unit length afterwards.
inline GramFactor gram_factor(const CorrelationMatrix& m) {
    const auto report = validate(m);
    if (!report.valid()) throw Error(ErrorCode::invalid_matrix, report.describe());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.entries());
    const Eigen::VectorXd& values = solver.eigenvalues();
    const Eigen::MatrixXd& vectors = solver.eigenvectors();
    const auto n = static_cast<Eigen::Index>(m.n());
    std::vector<Eigen::Index> kept;
    for (Eigen::Index c = n - 1; c >= 0; --c) {
        if (values(c) > kRankCutoff) kept.push_back(c);
    }
    RowMatrix rows(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) {
        rows.col(static_cast<Eigen::Index>(c)) = vectors.col(kept[c]) * std::sqrt(values(kept[c]));
    }
    return GramFactor::normalized(std::move(rows));
}

// D P (.) P^T D with (D P m P^T D)_{ij} = s_i s_j m_{perm(i), perm(j)}.
class SignedPermutation {
  public:
    SignedPermutation(std::vector<std::size_t> perm, std::vector<int> signs)
        : perm_(std::move(perm)), signs_(std::move(signs)) {
        if (perm_.size() != signs_.size()) throw Error(ErrorCode::invalid_argument, "perm/signs length mismatch");
        std::vector<bool> seen(perm_.size(), false);
        for (std::size_t p : perm_) {
            if (p >= perm_.size() || seen[p]) throw Error(ErrorCode::invalid_argument, "perm is not a bijection");
            seen[p] = true;
        }
        for (int s : signs_) {
            if (s != 1 && s != -1) throw Error(ErrorCode::invalid_argument, "signs must be +1 or -1");
        }
    }

    static SignedPermutation identity(std::size_t n) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        return {std::move(perm), std::vector<int>(n, 1)};
    }

    static SignedPermutation random(std::size_t n, RngStream stream) {
        StreamEngine engine(stream);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[engine.below(i)]);
        std::vector<int> signs(n);
        for (int& s : signs) s = engine.below(2) == 0 ? 1 : -1;
        return {std::move(perm), std::move(signs)};
    }

    std::size_t size() const { return perm_.size(); }
    const std::vector<std::size_t>& perm() const { return perm_; }
    const std::vector<int>& signs() const { return signs_; }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const {
        const auto n = static_cast<Eigen::Index>(perm_.size());
        Eigen::MatrixXd out(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                out(i, j) = signs_[i] * signs_[j] * m(perm_[i], perm_[j]);
            }
        }
        return out;
    }

    CorrelationMatrix apply(const CorrelationMatrix& m) const {
        return CorrelationMatrix::from_entries(apply(m.entries()));
    }

    // Row i of the result is s_i times row perm(i); Gram matrices transform by apply().
    RowMatrix apply_rows(const RowMatrix& rows) const {
        RowMatrix out(rows.rows(), rows.cols());
        for (std::size_t i = 0; i < perm_.size(); ++i) {
            out.row(i) = signs_[i] * rows.row(perm_[i]);
        }
        return out;
    }

  private:
    std::vector<std::size_t> perm_;
    std::vector<int> signs_;
};

struct CanonicalMatch {
    double distance = 0.0;
    SignedPermutation transform = SignedPermutation::identity(0);
    bool certified = true;
};

namespace detail {

inline double transformed_cost(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const std::vector<std::size_t>& perm,
                               const std::vector<int>& signs) {
    double cost = 0.0;
    const auto n = perm.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = signs[i] * signs[j] * a(perm[i], perm[j]) - b(i, j);
            cost += d * d;
        }
    }
    return cost;
}

// Depth-first branch and bound over (perm(i), s_i), one position at a time.
// The partial squared Frobenius cost only grows, so any branch whose partial
// cost reaches the incumbent is cut. s_0 is fixed to +1 since D and -D act
// identically.
class SignedPermutationSearch {
  public:
    SignedPermutationSearch(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
        : a_(a), b_(b), n_(static_cast<std::size_t>(a.rows())), perm_(n_), signs_(n_, 1), used_(n_, false),
          best_perm_(n_), best_signs_(n_, 1) {
        std::iota(best_perm_.begin(), best_perm_.end(), std::size_t{0});
        best_cost_ = transformed_cost(a_, b_, best_perm_, best_signs_);
    }

    void run() { descend(0, 0.0); }

    double best_cost() const { return best_cost_; }
    SignedPermutation best() const { return {best_perm_, best_signs_}; }

  private:
    void descend(std::size_t depth, double partial) {
        if (depth == n_) {
            if (partial < best_cost_) {
                best_cost_ = partial;
                best_perm_ = perm_;
                best_signs_ = signs_;
            }
            return;
        }
        for (std::size_t p = 0; p < n_; ++p) {
            if (used_[p]) continue;
            for (int s : {1, -1}) {
                if (depth == 0 && s == -1) continue;
                const double diag = a_(p, p) - b_(depth, depth);
                double added = diag * diag;
                for (std::size_t j = 0; j < depth; ++j) {
                    const double d = s * signs_[j] * a_(p, perm_[j]) - b_(depth, j);
                    added += 2.0 * d * d;
                }
                if (partial + added >= best_cost_) continue;
                perm_[depth] = p;
                signs_[depth] = s;
                used_[p] = true;
                descend(depth + 1, partial + added);
                used_[p] = false;
            }
        }
    }

    const Eigen::MatrixXd& a_;
    const Eigen::MatrixXd& b_;
    std::size_t n_;
    std::vector<std::size_t> perm_;
    std::vector<int> signs_;
    std::vector<bool> used_;
    std::vector<std::size_t> best_perm_;
    std::vector<int> best_signs_;
    double best_cost_ = 0.0;
};

inline void check_same_size(const CorrelationMatrix& a, const CorrelationMatrix& b) {
    if (a.n() != b.n()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "matrices have sizes " + std::to_string(a.n()) + " and " + std::to_string(b.n()));
    }
}

}  // namespace detail

// Exact minimum over all signed permutations; throws search_infeasible for n > 10.
// For n in {9, 10} this can take minutes on adversarial inputs.
inline CanonicalMatch canonical_match(const CorrelationMatrix& a, const CorrelationMatrix& b) {
    detail::check_same_size(a, b);
    if (a.n() > kExhaustiveLimit) {
        throw Error(ErrorCode::search_infeasible,
                    "n = " + std::to_string(a.n()) + " exceeds the exhaustive limit of 10; use canonical_match_heuristic");
    }
    detail::SignedPermutationSearch search(a.entries(), b.entries());
    search.run();
    return {std::sqrt(std::max(0.0, search.best_cost())), search.best(), true};
}

// Random restarts followed by greedy swap/flip descent. Not certified.
inline CanonicalMatch canonical_match_heuristic(const CorrelationMatrix& a, const CorrelationMatrix& b,
                                                std::size_t restarts, RngStream stream) {
    detail::check_same_size(a, b);
    const std::size_t n = a.n();
    double best_cost = std::numeric_limits<double>::infinity();
    auto best = SignedPermutation::identity(n);
    for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
        const auto start = r == 0 ? SignedPermutation::identity(n) : SignedPermutation::random(n, stream.split(r));
        auto perm = start.perm();
        auto signs = start.signs();
        double cost = detail::transformed_cost(a.entries(), b.entries(), perm, signs);
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t i = 0; i < n; ++i) {
                signs[i] = -signs[i];
                const double c = detail::transformed_cost(a.entries(), b.entries(), perm, signs);
                if (c < cost) {
                    cost = c;
                    improved = true;
                } else {
                    signs[i] = -signs[i];
                }
                for (std::size_t j = i + 1; j < n; ++j) {
                    std::swap(perm[i], perm[j]);
                    std::swap(signs[i], signs[j]);
                    const double c2 = detail::transformed_cost(a.entries(), b.entries(), perm, signs);
                    if (c2 < cost) {
                        cost = c2;
                        improved = true;
                    } else {
                        std::swap(perm[i], perm[j]);
                        std::swap(signs[i], signs[j]);
                    }
                }
            }
        }
        if (cost < best_cost) {
            best_cost = cost;
            best = SignedPermutation(perm, signs);
        }
    }
    return {std::sqrt(std::max(0.0, best_cost)), std::move(best), false};
}

inline double canonical_distance(const CorrelationMatrix& a, const CorrelationMatrix& b) {
    return canonical_match(a, b).distance;
}

}  // namespace gaussmin
