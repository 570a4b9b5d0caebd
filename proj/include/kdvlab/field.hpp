#pragma once

#include "kdvlab/determinant.hpp"
#include "kdvlab/params.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace kdvlab {

/// V_N(t, x) = -2 d_x^2 log det(1 + C_N(t, x)).
[[nodiscard]] double potential_det(const SolitonParams& params, std::size_t order, double t, double x);

/// Psi = (1 + C)^{-1} Psi0 with Psi0_j = c_j e^{4 kappa_j^3 t - kappa_j x}, and
/// d_x Psi from differentiating (1 + C) Psi = Psi0 once:
///   (1 + C) d_x Psi = -D Psi0 - (d_x C) Psi.
struct EigenfunctionColumn {
    Eigen::VectorXd psi;
    Eigen::VectorXd dpsi_dx;
};

[[nodiscard]] EigenfunctionColumn eigenfunctions(const SolitonParams& params, std::size_t order,
                                                 double t, double x);

/// Taylor coefficients in x of every psi_j at a point, from repeatedly
/// differentiating (1 + C) Psi = Psi0:
///   (1 + C) Psi_k = Psi0_k - sum_{i=1..k} C_i Psi_{k-i}.
class EigenfunctionJet {
public:
    EigenfunctionJet() = default;
    explicit EigenfunctionJet(std::vector<Eigen::VectorXd> coefficients)
        : coefficients_(std::move(coefficients)) {}

    [[nodiscard]] int max_order() const noexcept { return static_cast<int>(coefficients_.size()) - 1; }
    /// d_x^k psi_j for all j.
    [[nodiscard]] Eigen::VectorXd derivative(int k) const;
    [[nodiscard]] const Eigen::VectorXd& coefficient(int k) const { return coefficients_.at(static_cast<std::size_t>(k)); }

private:
    std::vector<Eigen::VectorXd> coefficients_;
};

[[nodiscard]] EigenfunctionJet eigenfunction_jet(const CauchyMatrix& m, int max_order);

/// V = -4 sum_j kappa_j psi_j^2.
[[nodiscard]] double potential_sq(const SolitonParams& params, std::size_t order, double t, double x);

enum class JetRoute {
    Determinant,   ///< -2 d_x^{k+2} log det(1 + C)
    Eigenfunction  ///< -4 sum kappa_j (psi_j^2)^{(k)} via Leibniz
};

/// V and its x-derivatives up to max_order at one point.
[[nodiscard]] std::vector<double> potential_x_derivatives(const SolitonParams& params, std::size_t order,
                                                          double t, double x, int max_order,
                                                          JetRoute route);

struct KdvTerms {
    double v = 0.0;
    double vt = 0.0;
    double vx = 0.0;
    double vxxx = 0.0;
    double residual = 0.0;  ///< V_t - 6 V V_x + V_xxx
};

[[nodiscard]] KdvTerms kdv_terms(const SolitonParams& params, std::size_t order, double t, double x);

[[nodiscard]] inline double kdv_residual(const SolitonParams& params, std::size_t order, double t,
                                         double x) {
    return kdv_terms(params, order, t, x).residual;
}

struct FieldGrid {
    std::vector<double> t_values;
    std::vector<double> x_values;  ///< ascending; need not be uniform
};

struct FieldOrders {
    bool vt = false;
    bool vx = false;
    bool vxxx = false;
    bool residual = false;
};

/// V and optional derivatives on a (t, x) lattice, stored t-major.
/// eps_tail is the trace-tail certificate of the truncation at the worst
/// grid corner (latest t, leftmost x).
struct FieldSample {
    std::vector<double> t_values;
    std::vector<double> x_values;
    std::size_t truncation = 0;
    double eps_tail = 0.0;
    std::vector<double> v;
    std::vector<double> vt;
    std::vector<double> vx;
    std::vector<double> vxxx;
    std::vector<double> residual;

    [[nodiscard]] std::size_t index(std::size_t it, std::size_t ix) const noexcept {
        return it * x_values.size() + ix;
    }
    [[nodiscard]] double at(std::size_t it, std::size_t ix) const { return v[index(it, ix)]; }
    /// V along x at time index it.
    [[nodiscard]] std::vector<double> slice(std::size_t it) const;
};

/// Per-node evaluation, distributed over threads.
[[nodiscard]] FieldSample sample_field(const SolitonParams& params, std::size_t order, const FieldGrid& grid,
                                       const FieldOrders& orders = {});

/// Columns t, x, V then whichever of Vt, Vx, Vxxx, kdv_residual were sampled.
/// Rows in lexicographic (t, x) order; numbers in shortest round-trip form.
void write_csv(const FieldSample& field, std::ostream& out);

}  // namespace kdvlab
