#pragma once

#include "kdvlab/params.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace kdvlab {

/// The matrix C(t,x) with C_jl = c_j c_l / (kappa_j + kappa_l) e^{4(kappa_j^3 + kappa_l^3) t - (kappa_j + kappa_l) x}
/// together with a Cholesky factorization of 1 + C.
///
/// Entries overflow for large |t| or very negative x, so everything is held
/// in scaled form. With E_j = c_j e^{4 kappa_j^3 t - kappa_j x} and
/// s_j = max(1, E_j):
///
///     1 + C = S M S,   M = S^{-2} + F G F,   F = E / S,   G_jl = 1 / (kappa_j + kappa_l)
///
/// Every entry of M is bounded by 1 + G_jj, and det(1 + C) = det(S)^2 det(M).
/// Immutable after build.
class CauchyMatrix {
public:
    static CauchyMatrix build(const SolitonParams& params, std::size_t order, double t, double x);

    [[nodiscard]] std::size_t order() const noexcept { return static_cast<std::size_t>(kappas_.size()); }
    [[nodiscard]] double t() const noexcept { return t_; }
    [[nodiscard]] double x() const noexcept { return x_; }

    [[nodiscard]] const Eigen::VectorXd& kappas() const noexcept { return kappas_; }
    /// log E_j = log c_j + 4 kappa_j^3 t - kappa_j x
    [[nodiscard]] const Eigen::VectorXd& log_source() const noexcept { return log_source_; }
    /// log s_j = max(0, log E_j)
    [[nodiscard]] const Eigen::VectorXd& log_scale() const noexcept { return log_scale_; }
    /// F_j = E_j / s_j, always in (0, 1]
    [[nodiscard]] const Eigen::VectorXd& scaled_source() const noexcept { return scaled_source_; }
    /// K = S^{-1} C S^{-1}
    [[nodiscard]] const Eigen::MatrixXd& scaled_entries() const noexcept { return scaled_entries_; }
    /// M = S^{-2} + K, the matrix actually factorized
    [[nodiscard]] const Eigen::MatrixXd& scaled_system() const noexcept { return scaled_system_; }
    [[nodiscard]] const Eigen::LLT<Eigen::MatrixXd>& factor() const noexcept { return factor_; }

    /// Unscaled C. Entries may be +inf outside the range of double.
    [[nodiscard]] Eigen::MatrixXd entries() const;

private:
    CauchyMatrix() = default;

    double t_ = 0.0;
    double x_ = 0.0;
    Eigen::VectorXd kappas_;
    Eigen::VectorXd log_source_;
    Eigen::VectorXd log_scale_;
    Eigen::VectorXd scaled_source_;
    Eigen::MatrixXd scaled_entries_;
    Eigen::MatrixXd scaled_system_;
    Eigen::LLT<Eigen::MatrixXd> factor_;
};

/// log det(1 + C); zero for the empty matrix, never negative.
[[nodiscard]] double logdet(const CauchyMatrix& m);

struct DerivativeTensors {
    Eigen::MatrixXd cx;  ///< d/dx C = -(D C + C D)
    Eigen::MatrixXd ct;  ///< d/dt C = 4 (D^3 C + C D^3)
};

/// Exact first derivatives of C, D = diag(kappa).
[[nodiscard]] DerivativeTensors derivative_tensors(const CauchyMatrix& m);

/// Partial derivatives d_t^m d_x^n log det(1 + C) for m <= max_t, n <= max_x.
class LogDetJet {
public:
    LogDetJet(int max_t, int max_x);

    [[nodiscard]] int max_t() const noexcept { return max_t_; }
    [[nodiscard]] int max_x() const noexcept { return max_x_; }
    [[nodiscard]] double value() const { return partial(0, 0); }
    [[nodiscard]] double partial(int m, int n) const;
    void set_partial(int m, int n, double v);

private:
    int max_t_;
    int max_x_;
    std::vector<double> partials_;
};

inline constexpr int kMaxJetOrderT = 3;
inline constexpr int kMaxJetOrderX = 9;

/// Taylor-mode evaluation of the recursion
///   d log det(1 + C) = tr(B dC),   dB = -B (dC) B,   B = (1 + C)^{-1},
/// where every derivative of C is the exact Hadamard scaling
///   d_t^a d_x^b C_jl = (4 (kappa_j^3 + kappa_l^3))^a (-(kappa_j + kappa_l))^b C_jl.
/// Works on the scaled system with a scaling that moves with (t, x), so the
/// large block of the system has vanishing derivatives and far-left points
/// keep their accuracy.
[[nodiscard]] LogDetJet logdet_jet(const CauchyMatrix& m, int max_t, int max_x);

/// One term a_I e^{-2 sum_{j in I} kappa_j x} of det(1 + C(0, x)).
struct MinorTerm {
    std::vector<std::size_t> subset;  ///< 0-based indices, ascending
    double coefficient = 0.0;         ///< a_I = det C_I(0, 0)
    double rate = 0.0;                ///< 2 sum_{j in I} kappa_j
};

struct MinorExpansion {
    std::vector<MinorTerm> terms;

    [[nodiscard]] double determinant(double x) const;
    [[nodiscard]] double log_determinant(double x) const;
};

inline constexpr std::size_t kMaxMinorExpansionOrder = 12;

/// det(1 + C(0, x)) = 1 + sum_I det C_I(0, 0) e^{-2 sum_I kappa x} over all
/// nonempty subsets, each minor from its own Cholesky factorization.
[[nodiscard]] MinorExpansion principal_minor_expansion(const SolitonParams& params, std::size_t order);

}  // namespace kdvlab
