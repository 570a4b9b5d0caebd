#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace kdvlab {

/// Summability class of the wavenumbers: bounded or summable, or a finite list.
/// Finite: a plain N-soliton list. LinfSummable: bounded wavenumbers with
/// sum c^2/kappa finite. L1Summable: additionally sum kappa finite.
enum class Summability { Finite, LinfSummable, L1Summable };

[[nodiscard]] const char* to_string(Summability s) noexcept;

/// How the sequence continues beyond the stored prefix.
struct TailRule {
    enum class Kind { Explicit, Geometric, Reciprocal };

    Kind kind = Kind::Explicit;
    double ratio = 0.0;  // Geometric: kappa_j = base * ratio^(j-1)
    double base = 0.0;
    double power = 0.0;  // Reciprocal: kappa_j = scale / j^power
    double scale = 0.0;

    static TailRule explicit_list() { return {}; }
    static TailRule geometric(double ratio, double base);
    static TailRule reciprocal(double power, double scale);

    /// Wavenumber at 1-based index j. Undefined for Explicit.
    [[nodiscard]] double kappa(std::size_t j) const;

    /// Upper bound on sum_{j >= from} kappa_j^p for the infinite rule
    /// (exact for Geometric, integral bound for Reciprocal). Zero for Explicit.
    [[nodiscard]] double power_sum_from(std::size_t from, double p) const;

    [[nodiscard]] bool infinite() const noexcept { return kind != Kind::Explicit; }

    /// Throws InvalidArgument unless the rule parameters are legal.
    void check() const;
};

/// Soliton data: wavenumbers kappa_j > 0 and norming constants c_j > 0,
/// stored as a finite prefix plus a tail rule. Indices beyond the prefix
/// follow the rule with c_j = kappa_j.
struct SolitonParams {
    std::vector<double> kappas;
    std::vector<double> norming;
    Summability summability = Summability::Finite;
    TailRule tail;

    [[nodiscard]] std::size_t size() const noexcept { return kappas.size(); }

    /// Convenience constructor for an explicit N-soliton list.
    static SolitonParams finite(std::vector<double> kappas, std::vector<double> norming);
};

struct ValidationReport {
    bool valid = true;
    std::vector<std::string> failures;
    Summability summability = Summability::Finite;  // class the data actually supports
    bool linf_hypotheses = false;
    bool l1_hypotheses = false;
    double sup_kappa = 0.0;
    double sum_kappa = 0.0;             // including the rule tail
    double sum_c2_over_kappa = 0.0;     // including the rule tail
};

/// Checks positivity, distinctness, and the summability hypotheses of the
/// declared class. Never throws; failures are listed in the report.
[[nodiscard]] ValidationReport validate(const SolitonParams& params);

/// Deterministic sequence from a rule, with c_j = kappa_j. Class is
/// L1Summable for every legal infinite rule.
[[nodiscard]] SolitonParams generate(const TailRule& rule, std::size_t count);

/// sum_{j >= from_index} kappa_j^p over prefix and rule tail (1-based index).
[[nodiscard]] double kappa_power_tail(const SolitonParams& params, std::size_t from_index, double p);

/// Upper bound on the trace norm of the part of C(t,x) with indices
/// j >= from_index (1-based): sum (c_j^2 / 2 kappa_j) e^{8 kappa_j^3 t - 2 kappa_j x}.
/// C is positive semidefinite, so its trace bounds its trace norm.
[[nodiscard]] double tail_trace_bound(const SolitonParams& params, std::size_t from_index,
                                      double t, double x);

/// Rectangle of (t, x) values; x_max may be +infinity.
struct Window {
    double t_min = 0.0;
    double t_max = 0.0;
    double x_min = 0.0;
    double x_max = std::numeric_limits<double>::infinity();
};

/// Smallest N such that the trace tail from N+1 is <= eps at the window
/// corner where the bound is largest (t_max, x_min). A relative slack of
/// 1e-12 absorbs rounding in the geometric sums.
[[nodiscard]] std::size_t choose_N(const SolitonParams& params, double eps, const Window& window);

/// c_j e^{4 kappa_j^3 t}: the norming constant carried to time t.
[[nodiscard]] double evolved_norming(double c, double kappa, double t);

}  // namespace kdvlab
