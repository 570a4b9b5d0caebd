#include "kdvlab/grid.hpp"

#include "kdvlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kdvlab {

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = a;
        return v;
    }
    for (std::size_t i = 0; i < n; ++i)
        v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    if (n > 0) v.back() = b;
    return v;
}

std::vector<SolitonExtent> soliton_extents(const SolitonParams& params, std::size_t order, double t) {
    std::vector<SolitonExtent> out;
    out.reserve(order);
    for (std::size_t j = 0; j < order; ++j) {
        const double k = params.kappas[j];
        const double c = evolved_norming(params.norming[j], k, t);
        const double upper = (std::log(c * c / (2.0 * k))) / (2.0 * k);
        double shift = 0.0;
        for (std::size_t l = 0; l < order; ++l) {
            if (l == j) continue;
            const double kl = params.kappas[l];
            shift += 2.0 * std::log(std::abs(k - kl) / (k + kl));
        }
        out.push_back({k, upper + shift / (2.0 * k), upper});
    }
    return out;
}

Interval support_window(const SolitonParams& params, std::size_t order, double t, double decay_lengths) {
    if (order == 0) return {-1.0, 1.0};
    Interval iv{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& e : soliton_extents(params, order, t)) {
        iv.lo = std::min(iv.lo, e.lower - decay_lengths / e.kappa);
        iv.hi = std::max(iv.hi, e.upper + decay_lengths / e.kappa);
    }
    return iv;
}

double QuadratureGrid::integrate(const std::vector<double>& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f[i];
    return s;
}

namespace {

std::size_t even_intervals(std::size_t n) {
    n = std::max<std::size_t>(n, 2);
    return n + (n % 2);
}

double simpson_factor(std::size_t i, std::size_t n) {
    if (i == 0 || i == n) return 1.0;
    return (i % 2 == 1) ? 4.0 : 2.0;
}

}  // namespace

QuadratureGrid simpson_uniform(double a, double b, std::size_t intervals) {
    if (!(b > a)) throw Error(ErrorKind::InvalidArgument, "quadrature interval is empty");
    const std::size_t n = even_intervals(intervals);
    const double h = (b - a) / static_cast<double>(n);
    QuadratureGrid g;
    g.x = linspace(a, b, n + 1);
    g.w.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g.w[i] = h / 3.0 * simpson_factor(i, n);
    return g;
}

QuadratureGrid simpson_sinh(double a, double b, double center, double scale, std::size_t intervals) {
    if (!(b > a)) throw Error(ErrorKind::InvalidArgument, "quadrature interval is empty");
    if (!(scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "sinh map scale must be positive");
    const std::size_t n = even_intervals(intervals);
    const double ua = std::asinh((a - center) / scale);
    const double ub = std::asinh((b - center) / scale);
    const double h = (ub - ua) / static_cast<double>(n);
    QuadratureGrid g;
    g.x.resize(n + 1);
    g.w.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double u = ua + h * static_cast<double>(i);
        g.x[i] = center + scale * std::sinh(u);
        g.w[i] = h / 3.0 * simpson_factor(i, n) * scale * std::cosh(u);
    }
    g.x.front() = a;
    g.x.back() = b;
    return g;
}

}  // namespace kdvlab
