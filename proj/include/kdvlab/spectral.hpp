#pragma once

#include "kdvlab/field.hpp"
#include "kdvlab/grid.hpp"
#include "kdvlab/params.hpp"

#include "json.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace kdvlab {

using cplx = std::complex<double>;

inline constexpr int kSpectrumSchemaVersion = 1;
inline constexpr int kScatterSchemaVersion = 1;
inline constexpr int kMFunctionSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Bound states of H = -d^2/dx^2 + V(t, .)

struct EigenMatch {
    std::size_t index = 0;     ///< 0-based, ordered from the deepest level
    double target = 0.0;       ///< -kappa_j^2
    double computed = 0.0;     ///< Richardson value
    double error = 0.0;        ///< |computed - target|
    double estimate = 0.0;     ///< error estimate of the computed value
    bool strict = false;       ///< |target| above the resolution floor
};

struct AccumulationBin {
    double delta = 0.0;
    std::size_t count = 0;  ///< computed eigenvalues in (-delta, 0)
};

struct SpectrumReport {
    double t = 0.0;
    double x_min = 0.0;
    double x_max = 0.0;
    double h = 0.0;
    std::size_t nodes = 0;
    double floor = 0.0;                  ///< 10 h^2: eigenvalues closer to 0 are not matched strictly
    std::vector<double> computed;        ///< Richardson-extrapolated, ascending
    std::vector<double> fine;            ///< step h
    std::vector<double> coarse;          ///< step 2h, same ordering
    std::vector<double> estimates;       ///< per computed value
    std::vector<double> targets;         ///< -kappa^2, ascending
    std::vector<EigenMatch> matches;
    std::vector<AccumulationBin> accumulation;

    /// Largest error over strict matches; every strict target must be matched.
    [[nodiscard]] double max_strict_error() const;
    [[nodiscard]] bool all_strict_matched() const;
};

inline const std::vector<double> kAccumulationDeltas{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

/// Eigenvalues of the uniform three-point discretization with Dirichlet
/// ends, below 0, by Sturm-count bisection. Computed on the sampled grid
/// (step h) and on every second node (step 2h); the reported value is the
/// h^2 extrapolation (4 fine - coarse) / 3 with estimate |fine - coarse| / 3
/// plus the bisection and rounding floor.
///
/// Requires an odd number of uniformly spaced x nodes at time index it.
/// Throws GridTooNarrow if |V| at either end reaches min kappa^2 / 100,
/// GridTooCoarse if h kappa_max > 0.5 or a strict level moves by more than
/// 1% of its target between h and 2h.
[[nodiscard]] SpectrumReport discretize_and_eig(const FieldSample& field, std::size_t it,
                                                const std::vector<double>& kappas,
                                                bool edge_resolvable_only = false);

struct SpectrumOptions {
    double h = 0.005;
    std::optional<Interval> window;  ///< default: spectrum_window()
    /// Judge the window ends against the resolvable levels only, and by
    /// default size the window for them plus any unresolved soliton whose
    /// peak would breach that edge threshold.
    bool resolvable_only = false;
};

/// Window for the eigensolve: each soliton bracket widened by 20 / kappa
/// when its level is resolvable at step h (kappa^2 > 10 h^2) and by
/// 10 / kappa otherwise. With include_unresolved false an unresolvable
/// soliton is kept only when its peak 2 kappa^2 reaches the edge threshold
/// of the resolvable levels.
[[nodiscard]] Interval spectrum_window(const SolitonParams& params, std::size_t order, double t, double h,
                                       bool include_unresolved = true);

/// Samples V_N(t, .) on the window and runs discretize_and_eig.
[[nodiscard]] SpectrumReport compute_spectrum(const SolitonParams& params, std::size_t order, double t,
                                              const SpectrumOptions& options = {});

/// Number of eigenvalues below lambda of the tridiagonal matrix with
/// diagonal 2/h^2 + v_i and off-diagonal -1/h^2. Uses the ratio form
/// r_i = g_i + r_{i-1} / (1 + r_{i-1}), g_i = h^2 (v_i - lambda), of the
/// pivot recurrence, which avoids the cancellation of 2 + h^2 (v - lambda).
[[nodiscard]] std::size_t sturm_count(const std::vector<double>& v, std::size_t stride, double h, double lambda);

// ---------------------------------------------------------------------------
// Scattering at energy k^2

/// Potential on an ascending, possibly nonuniform grid; cubic Lagrange
/// interpolation between nodes, zero outside.
class SampledPotential {
public:
    SampledPotential(std::vector<double> x, std::vector<double> v);

    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] const std::vector<double>& nodes() const noexcept { return x_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return v_; }
    [[nodiscard]] double lo() const { return x_.front(); }
    [[nodiscard]] double hi() const { return x_.back(); }

    /// V_N(t, .) on a sinh-graded grid that resolves every soliton.
    static SampledPotential from_params(const SolitonParams& params, std::size_t order, double t,
                                        std::optional<Interval> window = std::nullopt, double du = 0.002);
    /// Time slice it of a sampled field.
    static SampledPotential from_field(const FieldSample& field, std::size_t it);

private:
    std::vector<double> x_;
    std::vector<double> v_;
};

struct JostResult {
    cplx t;  ///< transmission 1/A
    cplx r;  ///< left reflection B/A
};

/// Integrates -u'' + V u = k^2 u from the right end, where u = e^{ikx}, to
/// the left end, where u = A e^{ikx} + B e^{-ikx}. Variables are the
/// interaction-picture amplitudes of e^{+-ikx}; RK4 with steps of at most
/// step_factor / k, each sample interval split evenly.
/// Throws PhaseResolution if k times the window is below 2 pi.
[[nodiscard]] JostResult jost_scatter(const SampledPotential& v, double k, double step_factor = 0.25);

struct TransmissionProduct {
    cplx value;
    double tail_bound = 0.0;  ///< bound on |log T_inf - log T_N|, +inf if not l1
};

/// prod_{j <= N} (k + i kappa_j) / (k - i kappa_j). Throws InvalidArgument at
/// k = 0 or k = i kappa_j.
[[nodiscard]] TransmissionProduct transmission_product(const SolitonParams& params, std::size_t order, cplx k);

struct ScatterEntry {
    double k = 0.0;
    cplx t_ode;
    cplx r_ode;
    cplx t_formula;
    double tail_bound = 0.0;
    double reflection = 0.0;      ///< |R|
    double transmission_gap = 0.0;///< |T_ode - T_formula|
    double unitarity = 0.0;       ///< ||T|^2 + |R|^2 - 1|
};

struct ScatteringReport {
    double t = 0.0;
    std::size_t truncation = 0;
    double x_min = 0.0;
    double x_max = 0.0;
    std::size_t samples = 0;
    std::vector<ScatterEntry> entries;
};

[[nodiscard]] ScatteringReport scattering_report(const SolitonParams& params, std::size_t order, double t,
                                                 const std::vector<double>& k_values,
                                                 std::optional<Interval> window = std::nullopt);

// ---------------------------------------------------------------------------
// Weyl m-functions of the Dirichlet half-line problems at 0

/// Branch with Im sqrt(z) >= 0: positive reals approached from above map to
/// +sqrt|z|, from below to -sqrt|z|, negative reals to i sqrt|z|.
[[nodiscard]] cplx sqrt_upper(cplx z);

enum class HalfLine { Plus, Minus };

/// m(t, z) = +-i sqrt z -+ [1 -+ i S0]^{-1} i S1 with
///   S0 = sum_j (sqrt z +- i kappa_j)^{-1} c_j(t) psi_j(t, 0),
///   S1 = sum_j (sqrt z +- i kappa_j)^{-1} c_j(t) (psi_j'(t, 0) - kappa_j psi_j(t, 0)),
/// c_j(t) = c_j e^{4 kappa_j^3 t}. Equal to psi'(0)/psi(0) of the solution
/// that is square integrable on (0, +-inf). m_+ is Herglotz, -m_- is.
/// Throws InvalidArgument if Im z = 0.
[[nodiscard]] cplx weyl_m(const SolitonParams& params, std::size_t order, double t, cplx z, HalfLine side);

// ---------------------------------------------------------------------------

[[nodiscard]] nlohmann::json to_json(const SpectrumReport& r);
[[nodiscard]] nlohmann::json to_json(const ScatteringReport& r);

}  // namespace kdvlab
