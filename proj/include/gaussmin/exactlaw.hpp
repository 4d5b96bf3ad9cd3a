#pragma once

// Exact law of the minimum absolute coordinate under the cosine covariance.
//
// With theta ~ Unif[0, pi/2n] and r Rayleigh, the minimum has the law of
// r sin(theta). Both the tail and the moments reduce to one-dimensional
// integrals over theta, evaluated here after the change of variables
// theta = pi u / 2n, u in [0, 1], which absorbs the 2n/pi normalisation.

#include <gaussmin/error.hpp>
#include <gaussmin/parallel.hpp>
#include <gaussmin/quadrature.hpp>
#include <gaussmin/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

namespace gaussmin {

class CosineLaw {
  public:
    explicit CosineLaw(std::size_t n) : n_(n) {
        if (n < 1) throw Error(ErrorCode::invalid_dimension, "cosine law needs n >= 1");
    }

    std::size_t n() const { return n_; }

    // Upper end of the theta range, pi / 2n.
    double theta_max() const { return std::numbers::pi / (2.0 * static_cast<double>(n_)); }

    // P[M >= t].
    QuadratureResult tail(double t, QuadratureOptions options = {}) const {
        if (!(t >= 0.0)) throw Error(ErrorCode::invalid_argument, "threshold must be nonnegative");
        const double half_t2 = 0.5 * t * t;
        const double scale = theta_max();
        auto integrand = [half_t2, scale](double u) {
            const double s = std::sin(scale * u);
            if (s == 0.0) return half_t2 == 0.0 ? 1.0 : 0.0;
            return std::exp(-half_t2 / (s * s));
        };
        auto result = integrate(integrand, 0.0, 1.0, options);
        result.value = std::clamp(result.value, 0.0, 1.0);
        return result;
    }

    // E[M^p] = 2^{p/2} Gamma(1 + p/2) * average of sin^p(theta).
    QuadratureResult moment(double p, QuadratureOptions options = {}) const {
        if (!(p > 0.0) || !std::isfinite(p)) {
            throw Error(ErrorCode::invalid_exponent, "moment exponent must be positive, got " + std::to_string(p));
        }
        const double scale = theta_max();
        auto integrand = [p, scale](double u) { return std::pow(std::sin(scale * u), p); };
        auto result = integrate(integrand, 0.0, 1.0, options);
        const double prefactor = std::pow(2.0, 0.5 * p) * std::tgamma(1.0 + 0.5 * p);
        result.value *= prefactor;
        result.error_estimate *= prefactor;
        return result;
    }

    // Closed form of E[M^2].
    double moment_p2() const {
        const double n = static_cast<double>(n_);
        return 1.0 - n * std::sin(std::numbers::pi / n) / std::numbers::pi;
    }

    // i.i.d. draws of r sin(theta) with r = sqrt(-2 ln U).
    std::vector<double> sample(std::size_t count, RngStream stream) const {
        std::vector<double> out(count);
        const double scale = theta_max();
        for_each_chunk(count, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            StreamEngine engine(stream, chunk);
            for (std::size_t i = begin; i < end; ++i) {
                const double r = std::sqrt(-2.0 * std::log(engine.uniform()));
                const double theta = scale * engine.uniform();
                out[i] = r * std::sin(theta);
            }
        });
        return out;
    }

  private:
    std::size_t n_;
};

inline double cos_tail(std::size_t n, double t) { return CosineLaw(n).tail(t).value; }

inline double cos_moment(std::size_t n, double p) { return CosineLaw(n).moment(p).value; }

inline double cos_moment_p2(std::size_t n) { return CosineLaw(n).moment_p2(); }

inline std::vector<double> sample_cos_min(std::size_t n, std::size_t count, std::uint64_t seed) {
    return CosineLaw(n).sample(count, {seed, 0});
}

}  // namespace gaussmin
