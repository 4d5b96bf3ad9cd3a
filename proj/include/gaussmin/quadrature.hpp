#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature with an absolute error
// target. The interval with the largest error estimate is bisected until the
// summed estimate meets the target or the evaluation budget is exhausted.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace gaussmin {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
};

struct QuadratureOptions {
    double absolute_tolerance = 1e-12;
    std::size_t max_evaluations = 1'000'000;
};

namespace detail {

// Kronrod abscissae (descending, last is the centre) and weights; Gauss
// weights pair with the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780, 0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (std::size_t i = 0; i < 7; ++i) {
        const double dx = half * kKronrodNodes[i];
        const double sum = f(centre - dx) + f(centre + dx);
        kronrod += kKronrodWeights[i] * sum;
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

template <class F>
QuadratureResult integrate(F&& f, double a, double b, QuadratureOptions options = {}) {
    std::vector<detail::Panel> heap;
    heap.push_back(detail::gauss_kronrod_15(f, a, b));
    QuadratureResult result{heap.front().value, heap.front().error, 15};
    while (result.error_estimate > options.absolute_tolerance &&
           result.evaluations + 30 <= options.max_evaluations) {
        std::pop_heap(heap.begin(), heap.end());
        const auto worst = heap.back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;
        heap.pop_back();
        const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
        const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
        result.evaluations += 30;
        result.value += left.value + right.value - worst.value;
        result.error_estimate = std::max(0.0, result.error_estimate + left.error + right.error - worst.error);
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end());
    }
    // Final totals are resummed so drift in the running sums does not leak out.
    result.value = 0.0;
    result.error_estimate = 0.0;
    for (const auto& panel : heap) {
        result.value += panel.value;
        result.error_estimate += panel.error;
    }
    return result;
}

}  // namespace gaussmin
