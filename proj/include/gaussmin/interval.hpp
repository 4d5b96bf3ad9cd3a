#pragma once

// Outward-rounded interval arithmetic and the rigorous comparison of the
// second moments of the minimum under the cosine and simplex covariances
// for n = 4.
//
// Rounding: every native floating operation is computed in the default
// round-to-nearest mode and its result is then pushed one representable step
// outward. Since round-to-nearest is within half an ulp of the exact result,
// one step outward always encloses it.

#include <gaussmin/error.hpp>
#include <gaussmin/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace gaussmin {

namespace detail {
inline double step_down(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }
inline double step_up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }
}  // namespace detail

class Interval {
  public:
    constexpr Interval() = default;

    // A point interval; exact since the double itself is the value.
    constexpr Interval(double x) : lo_(x), hi_(x) {}  // NOLINT(google-explicit-constructor)

    Interval(double lo, double hi) : lo_(lo), hi_(hi) {
        if (!(lo <= hi)) throw Error(ErrorCode::invalid_argument, "interval endpoints out of order");
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double width() const { return hi_ - lo_; }
    double mid() const { return 0.5 * lo_ + 0.5 * hi_; }

    bool contains(double x) const { return lo_ <= x && x <= hi_; }
    bool contains(const Interval& other) const { return lo_ <= other.lo_ && other.hi_ <= hi_; }
    bool contains_zero() const { return lo_ <= 0.0 && 0.0 <= hi_; }
    bool intersects(const Interval& other) const { return lo_ <= other.hi_ && other.lo_ <= hi_; }

    friend bool operator==(const Interval&, const Interval&) = default;

    friend std::ostream& operator<<(std::ostream& os, const Interval& x) {
        return os << '[' << x.lo_ << ", " << x.hi_ << ']';
    }

  private:
    double lo_ = 0.0;
    double hi_ = 0.0;
};

// Widen a round-to-nearest pair outward.
inline Interval outward(double lo, double hi) { return {detail::step_down(lo), detail::step_up(hi)}; }

inline Interval operator+(const Interval& a, const Interval& b) { return outward(a.lo() + b.lo(), a.hi() + b.hi()); }

inline Interval operator-(const Interval& a) { return {-a.hi(), -a.lo()}; }

inline Interval operator-(const Interval& a, const Interval& b) { return outward(a.lo() - b.hi(), a.hi() - b.lo()); }

inline Interval operator*(const Interval& a, const Interval& b) {
    const double p1 = a.lo() * b.lo();
    const double p2 = a.lo() * b.hi();
    const double p3 = a.hi() * b.lo();
    const double p4 = a.hi() * b.hi();
    return outward(std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4}));
}

inline Interval operator/(const Interval& a, const Interval& b) {
    if (b.contains_zero()) throw Error(ErrorCode::domain, "interval division by an interval containing 0");
    const double q1 = a.lo() / b.lo();
    const double q2 = a.lo() / b.hi();
    const double q3 = a.hi() / b.lo();
    const double q4 = a.hi() / b.hi();
    return outward(std::min({q1, q2, q3, q4}), std::max({q1, q2, q3, q4}));
}

inline Interval& operator+=(Interval& a, const Interval& b) { return a = a + b; }

inline Interval sqrt(const Interval& a) {
    if (a.lo() < 0.0) throw Error(ErrorCode::domain, "interval square root of a negative lower endpoint");
    // sqrt is correctly rounded; clamp the lower end at 0 after stepping.
    return {std::max(0.0, detail::step_down(std::sqrt(a.lo()))), detail::step_up(std::sqrt(a.hi()))};
}

namespace detail {

// Bounds on x^m for x >= 0, rounding each partial product outward.
inline double pow_down(double x, int m) {
    double r = 1.0;
    for (int i = 0; i < m; ++i) r = std::max(0.0, step_down(r * x));
    return r;
}

inline double pow_up(double x, int m) {
    double r = 1.0;
    for (int i = 0; i < m; ++i) r = step_up(r * x);
    return r;
}

}  // namespace detail

// Integer power using monotonicity on each sign-definite piece.
inline Interval powi(const Interval& a, int m) {
    if (m < 0) return Interval(1.0) / powi(a, -m);
    if (m == 0) return Interval(1.0);
    const bool even = m % 2 == 0;
    const double lo = a.lo();
    const double hi = a.hi();
    if (lo >= 0.0) return {detail::pow_down(lo, m), detail::pow_up(hi, m)};
    if (hi <= 0.0) {
        if (even) return {detail::pow_down(-hi, m), detail::pow_up(-lo, m)};
        return {-detail::pow_up(-lo, m), -detail::pow_down(-hi, m)};
    }
    if (even) return {0.0, detail::pow_up(std::max(-lo, hi), m)};
    return {-detail::pow_up(-lo, m), detail::pow_up(hi, m)};
}

// pi from a 25-digit decimal; the parsed double is within half an ulp of pi,
// so one step each way encloses it.
inline Interval interval_pi() {
    const double nearest = std::stod("3.141592653589793238462643");
    return outward(nearest, nearest);
}

inline Interval interval_sqrt2() { return sqrt(Interval(2.0)); }

// 1 - 2 sqrt(2) / pi, the exact second moment for the cosine covariance at n = 4.
inline Interval cosine_p2_enclosure() {
    return Interval(1.0) - Interval(2.0) * interval_sqrt2() / interval_pi();
}

// Naive interval extension of s (1 - s - s t)^2 / (1 + s^2 + s^2 t^2)^{5/2}.
inline Interval simplex_integrand(const Interval& s, const Interval& t) {
    const Interval numerator = s * powi(Interval(1.0) - s - s * t, 2);
    const Interval s2 = powi(s, 2);
    const Interval base = Interval(1.0) + s2 + s2 * powi(t, 2);
    return numerator / (sqrt(base) * powi(base, 2));
}

// Encloses E[M^2] for the simplex covariance at n = 4, written as
// (12/pi) times the integral of simplex_integrand over the unit square, by
// summing box enclosures on a subdivisions x subdivisions grid.
inline Interval simplex_p2_enclosure(std::size_t subdivisions) {
    if (subdivisions < 1) throw Error(ErrorCode::invalid_argument, "subdivisions must be at least 1");
    const Interval count(static_cast<double>(subdivisions));
    std::vector<Interval> nodes(subdivisions + 1);
    for (std::size_t i = 0; i <= subdivisions; ++i) {
        nodes[i] = i == 0 ? Interval(0.0) : i == subdivisions ? Interval(1.0) : Interval(static_cast<double>(i)) / count;
    }
    // Box i spans [nodes[i].lo, nodes[i + 1].hi], which covers the true box.
    std::vector<Interval> row_sums(subdivisions);
    parallel_for(subdivisions, [&](std::size_t i) {
        const Interval s(nodes[i].lo(), nodes[i + 1].hi());
        Interval sum(0.0);
        for (std::size_t j = 0; j < subdivisions; ++j) {
            const Interval t(nodes[j].lo(), nodes[j + 1].hi());
            sum += simplex_integrand(s, t);
        }
        row_sums[i] = sum;
    });
    Interval total(0.0);
    for (const auto& row : row_sums) total += row;
    const Interval area = Interval(1.0) / (count * count);
    return Interval(12.0) / interval_pi() * (total * area);
}

struct CounterexampleCertificate {
    Interval cosine_bound;
    Interval simplex_bound;
    std::size_t subdivisions = 0;
    bool verdict = false;
};

inline CounterexampleCertificate verify_counterexample(std::size_t subdivisions) {
    CounterexampleCertificate cert;
    cert.cosine_bound = cosine_p2_enclosure();
    cert.simplex_bound = simplex_p2_enclosure(subdivisions);
    cert.subdivisions = subdivisions;
    cert.verdict = cert.cosine_bound.hi() < cert.simplex_bound.lo();
    return cert;
}

}  // namespace gaussmin
