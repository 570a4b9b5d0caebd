#pragma once

#include "kdvlab/field.hpp"
#include "kdvlab/grid.hpp"
#include "kdvlab/params.hpp"

#include <iosfwd>
#include <vector>

namespace kdvlab {

inline constexpr int kMaxInvariantOrder = 7;

/// chi_1 .. chi_max at one point from V, V_x, ..., d_x^{max-1} V:
///   chi_1 = V, chi_2 = -V_x, chi_{n+1} = -d_x chi_n - sum_{m=1}^{n-1} chi_{n-m} chi_m.
/// Carried out in truncated Taylor arithmetic, so d_x is exact.
/// Element n-1 of the result is chi_n.
[[nodiscard]] std::vector<double> chi_values(const std::vector<double>& v_derivs, int max_order);

struct InvariantDensity {
    int order = 0;
    double t = 0.0;
    std::vector<double> x;
    std::vector<double> values;
    double integral = 0.0;  ///< quadrature over the grid
};

/// Densities chi_1 .. chi_max_order of V_N(t, .) on a quadrature grid, with
/// their integrals.
[[nodiscard]] std::vector<InvariantDensity> chi_ladder(const SolitonParams& params, std::size_t order, double t,
                                                       const QuadratureGrid& grid, int max_order,
                                                       JetRoute route = JetRoute::Determinant);

/// Integration window for an invariant of odd order p. Solitons are dropped
/// from the smallest kappa up while their share of sum kappa^p stays below
/// rel_drop; the rest are covered with 20 / kappa margins.
struct TraceWindow {
    Interval span;
    double center = 0.0;      ///< position of the tallest soliton
    double scale = 1.0;       ///< 1 / kappa_max
    std::size_t kept = 0;
    double dropped_power = 0.0;  ///< sum kappa^p over dropped solitons
};

[[nodiscard]] TraceWindow trace_window(const SolitonParams& params, std::size_t order, double t, int p,
                                       double rel_drop = 1e-10);

/// (2^{2(n+1)} / (2n+1)) sum_{j<=N} kappa_j^{2n+1} for density order 2n+1.
[[nodiscard]] double trace_rhs(const SolitonParams& params, std::size_t order, int density_order);

struct TraceRelation {
    int order = 0;
    double t = 0.0;
    double lhs = 0.0;     ///< -integral of chi_order
    double rhs = 0.0;
    double defect = 0.0;  ///< |lhs - rhs| / |rhs|, 0 when both vanish
    double tail_budget = 0.0;
};

/// Compares -integral chi_{2n+1} with the eigenvalue sum. The log|T| term
/// vanishes for the reflectionless fields built here and is not computed.
/// Throws InvalidArgument for even orders and ClassMismatch when the data
/// only satisfies the bounded (not summable) hypotheses.
[[nodiscard]] TraceRelation trace_relation(const SolitonParams& params, std::size_t order,
                                           const InvariantDensity& density, double tail_budget = 0.0);

struct TraceOptions {
    double du = 0.002;        ///< step of the sinh-mapped Simpson rule
    double rel_drop = 1e-10;
    JetRoute route = JetRoute::Determinant;
};

/// Trace relations for n = 0 .. max_n at time t, each on its own window.
[[nodiscard]] std::vector<TraceRelation> trace_relations(const SolitonParams& params, std::size_t order, double t,
                                                         int max_n, const TraceOptions& options = {});

struct BoundCheck {
    int m = 0;
    TraceRelation upper;  ///< order 4m+1: -integral <= rhs
    TraceRelation lower;  ///< order 4m+3: -integral >= rhs
    bool upper_holds = false;
    bool lower_holds = false;
    bool saturated = false;  ///< both within tol relative
};

/// Checks both bounds at level m, allowing tol relative slack, and whether
/// they hold with equality.
[[nodiscard]] BoundCheck bound_check(const SolitonParams& params, std::size_t order, double t, int m, double tol,
                                     const TraceOptions& options = {});

/// Columns order, t, lhs, rhs, defect, tail_budget.
void write_csv(const std::vector<TraceRelation>& rows, std::ostream& out);

}  // namespace kdvlab
