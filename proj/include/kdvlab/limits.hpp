#pragma once

#include "kdvlab/field.hpp"
#include "kdvlab/params.hpp"
#include "kdvlab/spectral.hpp"

#include "json.hpp"

#include <vector>

namespace kdvlab {

inline constexpr int kConvergeSchemaVersion = 1;

struct DerivativeOrder {
    int m = 0;  ///< d_t order
    int n = 0;  ///< d_x order
};

/// Differences of d_t^m d_x^n V between consecutive ladder members.
struct PairDiff {
    std::size_t from = 0;
    std::size_t to = 0;
    DerivativeOrder order;
    double sup = 0.0;     ///< max over the grid
    double l1 = 0.0;      ///< max over t of the trapezoid L^1 norm in x
    double l2 = 0.0;      ///< same for L^2
    double linf = 0.0;    ///< max over t of the max in x (equals sup on a lattice)
    double tail_bound = 0.0;  ///< tail_trace_bound(from + 1) at (t_max, x_min)
    double ratio = 0.0;       ///< sup / tail_bound
};

struct OrderSummary {
    DerivativeOrder order;
    bool sup_decreasing = false;   ///< strictly, along the whole ladder
    bool l1_decreasing = false;
    bool linf_decreasing = false;
    bool norm_ordering = false;    ///< L^1 <= width * L^inf for every pair
};

struct ConvergenceStudy {
    std::vector<std::size_t> ladder;
    std::vector<double> t_values;
    std::vector<double> x_values;
    std::vector<PairDiff> diffs;          ///< grouped by order, then by pair
    std::vector<OrderSummary> summaries;
    double empirical_constant = 0.0;      ///< max over pairs of sup / tail_bound
    double noise_floor = 1e-13;           ///< sup diffs below this count as converged
};

/// Samples every ladder member on the grid and compares consecutive pairs.
/// The ladder must be nondecreasing and within the stored prefix. Finite
/// p norms need summable wavenumbers (ClassMismatch otherwise).
[[nodiscard]] ConvergenceStudy run_study(const SolitonParams& params, const std::vector<std::size_t>& ladder,
                                         const FieldGrid& grid, const std::vector<DerivativeOrder>& orders,
                                         bool lp_norms = true, double noise_floor = 1e-13);

struct SpectralLadder {
    std::vector<std::size_t> ladder;
    std::vector<SpectrumReport> reports;
    /// per consecutive pair: max shift of the levels that are strict in both
    std::vector<double> leading_shift;
    /// targets matched strictly by a member stay matched by the next one
    bool nested = false;
};

/// One spectrum per ladder member at time t on a shared window, with the
/// window ends judged against the resolvable levels. Default window:
/// spectrum_window of the largest member without the negligible
/// unresolved solitons.
[[nodiscard]] SpectralLadder spectral_ladder(const SolitonParams& params, const std::vector<std::size_t>& ladder,
                                             double t, const SpectrumOptions& options = {});

[[nodiscard]] nlohmann::json to_json(const ConvergenceStudy& s);
[[nodiscard]] nlohmann::json to_json(const SpectralLadder& s);

}  // namespace kdvlab
