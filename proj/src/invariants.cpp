#include "kdvlab/invariants.hpp"

#include "kdvlab/error.hpp"
#include "kdvlab/format.hpp"
#include "kdvlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace kdvlab {

namespace {

using Series = std::vector<double>;  // Taylor coefficients, truncated

Series derivative(const Series& s) {
    if (s.size() <= 1) return {};
    Series d(s.size() - 1);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) d[i] = static_cast<double>(i + 1) * s[i + 1];
    return d;
}

Series product(const Series& a, const Series& b, std::size_t len) {
    Series p(len, 0.0);
    for (std::size_t i = 0; i < len && i < a.size(); ++i)
        for (std::size_t j = 0; i + j < len && j < b.size(); ++j) p[i + j] += a[i] * b[j];
    return p;
}

}  // namespace

std::vector<double> chi_values(const std::vector<double>& v_derivs, int max_order) {
    if (max_order < 1 || max_order > kMaxInvariantOrder)
        throw Error(ErrorKind::Unsupported, "invariant order out of range");
    if (static_cast<int>(v_derivs.size()) < max_order)
        throw Error(ErrorKind::InvalidArgument, "insufficient jet order for the invariant ladder");

    // chi_n is needed to Taylor order max_order - n
    std::vector<Series> chi;
    chi.reserve(static_cast<std::size_t>(max_order));
    Series v(static_cast<std::size_t>(max_order));
    double fact = 1.0;
    for (int d = 0; d < max_order; ++d) {
        if (d > 0) fact *= d;
        v[static_cast<std::size_t>(d)] = v_derivs[static_cast<std::size_t>(d)] / fact;
    }
    chi.push_back(v);
    for (int n = 1; n < max_order; ++n) {
        Series next = derivative(chi[static_cast<std::size_t>(n - 1)]);
        for (double& c : next) c = -c;
        for (int m = 1; m <= n - 1; ++m) {
            const Series p = product(chi[static_cast<std::size_t>(n - m - 1)], chi[static_cast<std::size_t>(m - 1)],
                                     next.size());
            for (std::size_t i = 0; i < next.size(); ++i) next[i] -= p[i];
        }
        chi.push_back(std::move(next));
    }
    std::vector<double> out;
    out.reserve(chi.size());
    for (const auto& s : chi) out.push_back(s.front());
    return out;
}

std::vector<InvariantDensity> chi_ladder(const SolitonParams& params, std::size_t order, double t,
                                         const QuadratureGrid& grid, int max_order, JetRoute route) {
    if (max_order < 1 || max_order > kMaxInvariantOrder)
        throw Error(ErrorKind::Unsupported, "invariant order out of range");
    const std::size_t n = grid.size();
    std::vector<InvariantDensity> out(static_cast<std::size_t>(max_order));
    for (int k = 0; k < max_order; ++k) {
        out[static_cast<std::size_t>(k)].order = k + 1;
        out[static_cast<std::size_t>(k)].t = t;
        out[static_cast<std::size_t>(k)].x = grid.x;
        out[static_cast<std::size_t>(k)].values.assign(n, 0.0);
    }
    parallel_for(n, [&](std::size_t i) {
        const auto vd = potential_x_derivatives(params, order, t, grid.x[i], max_order - 1, route);
        const auto chi = chi_values(vd, max_order);
        for (int k = 0; k < max_order; ++k) out[static_cast<std::size_t>(k)].values[i] = chi[static_cast<std::size_t>(k)];
    });
    for (auto& d : out) d.integral = grid.integrate(d.values);
    return out;
}

TraceWindow trace_window(const SolitonParams& params, std::size_t order, double t, int p, double rel_drop) {
    TraceWindow w;
    if (order == 0) {
        w.span = {-1.0, 1.0};
        return w;
    }
    const auto ext = soliton_extents(params, order, t);
    std::vector<std::size_t> idx(order);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return ext[a].kappa > ext[b].kappa; });

    double total = 0.0;
    for (const auto& e : ext) total += std::pow(e.kappa, p);
    // drop from the smallest kappa while the dropped share stays small
    std::size_t kept = order;
    double dropped = 0.0;
    while (kept > 1) {
        const double next = std::pow(ext[idx[kept - 1]].kappa, p);
        if (dropped + next > rel_drop * total) break;
        dropped += next;
        --kept;
    }
    w.kept = kept;
    w.dropped_power = dropped;
    w.span = {INFINITY, -INFINITY};
    for (std::size_t r = 0; r < kept; ++r) {
        const auto& e = ext[idx[r]];
        w.span.lo = std::min(w.span.lo, e.lower - 20.0 / e.kappa);
        w.span.hi = std::max(w.span.hi, e.upper + 20.0 / e.kappa);
    }
    const auto& top = ext[idx[0]];
    w.center = 0.5 * (top.lower + top.upper);
    w.scale = 1.0 / top.kappa;
    return w;
}

double trace_rhs(const SolitonParams& params, std::size_t order, int density_order) {
    if (density_order < 1 || density_order % 2 == 0)
        throw Error(ErrorKind::InvalidArgument, "trace relations exist for odd orders only");
    double s = 0.0;
    for (std::size_t j = order; j-- > 0;) s += std::pow(params.kappas[j], density_order);
    return std::ldexp(1.0, density_order + 1) / density_order * s;
}

namespace {

void require_summable(const SolitonParams& params) {
    if (params.tail.infinite() && params.summability == Summability::LinfSummable)
        throw Error(ErrorKind::ClassMismatch, "trace relations need summable wavenumbers");
}

TraceRelation make_relation(const SolitonParams& params, std::size_t order, int density_order, double t,
                            double integral, double tail_budget) {
    TraceRelation r;
    r.order = density_order;
    r.t = t;
    r.lhs = -integral;
    r.rhs = trace_rhs(params, order, density_order);
    r.tail_budget = tail_budget;
    const double scale = std::abs(r.rhs);
    r.defect = scale > 0.0 ? std::abs(r.lhs - r.rhs) / scale : std::abs(r.lhs);
    return r;
}

}  // namespace

TraceRelation trace_relation(const SolitonParams& params, std::size_t order, const InvariantDensity& density,
                             double tail_budget) {
    if (density.order % 2 == 0) throw Error(ErrorKind::InvalidArgument, "trace relations exist for odd orders only");
    require_summable(params);
    return make_relation(params, order, density.order, density.t, density.integral, tail_budget);
}

std::vector<TraceRelation> trace_relations(const SolitonParams& params, std::size_t order, double t, int max_n,
                                           const TraceOptions& options) {
    require_summable(params);
    if (max_n < 0 || 2 * max_n + 1 > kMaxInvariantOrder)
        throw Error(ErrorKind::Unsupported, "trace relation order out of range");
    std::vector<TraceRelation> out;
    for (int n = 0; n <= max_n; ++n) {
        const int p = 2 * n + 1;
        if (order == 0) {
            out.push_back(make_relation(params, 0, p, t, 0.0, 0.0));
            continue;
        }
        const auto w = trace_window(params, order, t, p, options.rel_drop);
        const double u0 = std::asinh((w.span.lo - w.center) / w.scale);
        const double u1 = std::asinh((w.span.hi - w.center) / w.scale);
        const auto intervals = static_cast<std::size_t>(std::ceil((u1 - u0) / options.du));
        const auto grid = simpson_sinh(w.span.lo, w.span.hi, w.center, w.scale, intervals);
        const auto ladder = chi_ladder(params, order, t, grid, p, options.route);
        // dropped solitons plus e^{-40} tails of the kept ones
        const double weight = std::ldexp(1.0, p + 1) / p;
        double kept_power = 0.0;
        for (std::size_t j = 0; j < order; ++j) kept_power += std::pow(params.kappas[j], p);
        kept_power -= w.dropped_power;
        const double tail = weight * (w.dropped_power + 2.0 * std::exp(-40.0) * kept_power);
        out.push_back(make_relation(params, order, p, t, ladder.back().integral, tail));
    }
    return out;
}

BoundCheck bound_check(const SolitonParams& params, std::size_t order, double t, int m, double tol,
                       const TraceOptions& options) {
    if (m < 0 || 4 * m + 3 > kMaxInvariantOrder) throw Error(ErrorKind::Unsupported, "bound level out of range");
    const auto rel = trace_relations(params, order, t, 2 * m + 1, options);
    BoundCheck b;
    b.m = m;
    b.upper = rel[static_cast<std::size_t>(2 * m)];
    b.lower = rel[static_cast<std::size_t>(2 * m + 1)];
    auto slack = [tol](const TraceRelation& r) { return tol * std::abs(r.rhs) + r.tail_budget; };
    b.upper_holds = b.upper.lhs <= b.upper.rhs + slack(b.upper);
    b.lower_holds = b.lower.lhs >= b.lower.rhs - slack(b.lower);
    b.saturated = std::abs(b.upper.lhs - b.upper.rhs) <= slack(b.upper) &&
                  std::abs(b.lower.lhs - b.lower.rhs) <= slack(b.lower);
    return b;
}

void write_csv(const std::vector<TraceRelation>& rows, std::ostream& out) {
    out << "order,t,lhs,rhs,defect,tail_budget\n";
    for (const auto& r : rows)
        out << r.order << ',' << format_double(r.t) << ',' << format_double(r.lhs) << ',' << format_double(r.rhs)
            << ',' << format_double(r.defect) << ',' << format_double(r.tail_budget) << '\n';
}

}  // namespace kdvlab
