#pragma once

#include "kdvlab/params.hpp"

#include <cstddef>
#include <vector>

namespace kdvlab {

[[nodiscard]] std::vector<double> linspace(double a, double b, std::size_t n);

/// Bracket for the centre of soliton j at time t. The upper end is the
/// isolated-soliton position (1 / 2 kappa) log(c(t)^2 / 2 kappa); the lower
/// end adds every pairwise phase shift log(((kappa_j - kappa_l)/(kappa_j + kappa_l))^2),
/// which is where the soliton sits once all others lie to its right.
struct SolitonExtent {
    double kappa = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

[[nodiscard]] std::vector<SolitonExtent> soliton_extents(const SolitonParams& params, std::size_t order,
                                                         double t);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] double width() const noexcept { return hi - lo; }
};

/// Interval outside which |V| is below ~e^{-2 decay_lengths} of its peak:
/// every soliton bracket widened by decay_lengths / kappa_j on both sides.
[[nodiscard]] Interval support_window(const SolitonParams& params, std::size_t order, double t,
                                      double decay_lengths = 10.0);

/// Nodes and weights of a composite Simpson rule.
struct QuadratureGrid {
    std::vector<double> x;
    std::vector<double> w;

    [[nodiscard]] std::size_t size() const noexcept { return x.size(); }
    [[nodiscard]] double integrate(const std::vector<double>& f) const;
};

/// Simpson on [a, b]; intervals is rounded up to an even number.
[[nodiscard]] QuadratureGrid simpson_uniform(double a, double b, std::size_t intervals);

/// Simpson in u on the map x = center + scale sinh(u), covering [a, b].
/// Spacing is ~scale near the centre and grows like |x| far away, which
/// keeps wide, shallow solitons far from the origin resolved at modest cost.
[[nodiscard]] QuadratureGrid simpson_sinh(double a, double b, double center, double scale,
                                          std::size_t intervals);

}  // namespace kdvlab
