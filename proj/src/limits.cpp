#include "kdvlab/limits.hpp"

#include "kdvlab/error.hpp"
#include "kdvlab/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace kdvlab {

namespace {

// d_t^m d_x^n V at every node, one array per requested order
std::vector<std::vector<double>> sample_orders(const SolitonParams& params, std::size_t order, const FieldGrid& grid,
                                               const std::vector<DerivativeOrder>& orders) {
    int max_t = 0, max_x = 0;
    for (const auto& o : orders) {
        max_t = std::max(max_t, o.m);
        max_x = std::max(max_x, o.n + 2);
    }
    const std::size_t nx = grid.x_values.size();
    const std::size_t nodes = grid.t_values.size() * nx;
    std::vector<std::vector<double>> out(orders.size(), std::vector<double>(nodes, 0.0));
    if (order == 0) return out;
    parallel_for(nodes, [&](std::size_t node) {
        const auto m = CauchyMatrix::build(params, order, grid.t_values[node / nx], grid.x_values[node % nx]);
        const auto jet = logdet_jet(m, max_t, max_x);
        for (std::size_t k = 0; k < orders.size(); ++k)
            out[k][node] = -2.0 * jet.partial(orders[k].m, orders[k].n + 2);
    });
    return out;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
    return s;
}

}  // namespace

ConvergenceStudy run_study(const SolitonParams& params, const std::vector<std::size_t>& ladder, const FieldGrid& grid,
                           const std::vector<DerivativeOrder>& orders, bool lp_norms, double noise_floor) {
    if (ladder.empty()) throw Error(ErrorKind::InvalidArgument, "ladder is empty");
    if (!std::is_sorted(ladder.begin(), ladder.end()))
        throw Error(ErrorKind::InvalidArgument, "ladder must be nondecreasing");
    if (ladder.back() > params.size()) throw Error(ErrorKind::InvalidArgument, "ladder exceeds stored prefix");
    if (grid.t_values.empty() || grid.x_values.size() < 2)
        throw Error(ErrorKind::InvalidArgument, "study grid needs times and at least two x values");
    if (!std::is_sorted(grid.x_values.begin(), grid.x_values.end()))
        throw Error(ErrorKind::InvalidArgument, "x grid must be ascending");
    if (orders.empty()) throw Error(ErrorKind::InvalidArgument, "no derivative orders requested");
    for (const auto& o : orders)
        if (o.m < 0 || o.n < 0 || o.m > kMaxJetOrderT || o.n + 2 > kMaxJetOrderX)
            throw Error(ErrorKind::Unsupported, "derivative order outside the jet");
    if (lp_norms && params.tail.infinite() && params.summability == Summability::LinfSummable)
        throw Error(ErrorKind::ClassMismatch, "L^p convergence study needs summable wavenumbers");

    ConvergenceStudy st;
    st.ladder = ladder;
    st.t_values = grid.t_values;
    st.x_values = grid.x_values;
    st.noise_floor = noise_floor;

    std::vector<std::vector<std::vector<double>>> samples;  // [member][order][node]
    samples.reserve(ladder.size());
    for (std::size_t n : ladder) samples.push_back(sample_orders(params, n, grid, orders));

    const double t_max = *std::max_element(grid.t_values.begin(), grid.t_values.end());
    const double x_min = grid.x_values.front();
    const double width = grid.x_values.back() - grid.x_values.front();
    const std::size_t nx = grid.x_values.size();

    for (std::size_t k = 0; k < orders.size(); ++k) {
        OrderSummary sum;
        sum.order = orders[k];
        sum.sup_decreasing = sum.l1_decreasing = sum.linf_decreasing = sum.norm_ordering = true;
        const PairDiff* prev = nullptr;
        for (std::size_t p = 0; p + 1 < ladder.size(); ++p) {
            PairDiff d;
            d.from = ladder[p];
            d.to = ladder[p + 1];
            d.order = orders[k];
            const auto& a = samples[p][k];
            const auto& b = samples[p + 1][k];
            std::vector<double> row(nx), row2(nx);
            for (std::size_t it = 0; it < grid.t_values.size(); ++it) {
                double mx = 0.0;
                for (std::size_t ix = 0; ix < nx; ++ix) {
                    const double e = std::abs(b[it * nx + ix] - a[it * nx + ix]);
                    row[ix] = e;
                    row2[ix] = e * e;
                    mx = std::max(mx, e);
                }
                d.linf = std::max(d.linf, mx);
                if (lp_norms) {
                    d.l1 = std::max(d.l1, trapezoid(grid.x_values, row));
                    d.l2 = std::max(d.l2, std::sqrt(trapezoid(grid.x_values, row2)));
                }
            }
            d.sup = d.linf;
            d.tail_bound = tail_trace_bound(params, d.from + 1, t_max, x_min);
            d.ratio = d.tail_bound > 0.0 ? d.sup / d.tail_bound : (d.sup > 0.0 ? INFINITY : 0.0);
            if (std::isfinite(d.ratio)) st.empirical_constant = std::max(st.empirical_constant, d.ratio);
            if (lp_norms && d.l1 > width * d.linf * (1.0 + 1e-12)) sum.norm_ordering = false;
            if (prev) {
                // once both sit at the noise floor the sequence has converged
                const bool floor = prev->sup <= noise_floor && d.sup <= noise_floor;
                if (!(d.sup < prev->sup) && !floor) sum.sup_decreasing = false;
                if (!(d.linf < prev->linf) && !floor) sum.linf_decreasing = false;
                if (lp_norms && !(d.l1 < prev->l1) && !floor) sum.l1_decreasing = false;
            }
            st.diffs.push_back(d);
            prev = &st.diffs.back();
        }
        st.summaries.push_back(sum);
    }
    return st;
}

SpectralLadder spectral_ladder(const SolitonParams& params, const std::vector<std::size_t>& ladder, double t,
                               const SpectrumOptions& options) {
    if (ladder.empty()) throw Error(ErrorKind::InvalidArgument, "ladder is empty");
    if (!std::is_sorted(ladder.begin(), ladder.end()))
        throw Error(ErrorKind::InvalidArgument, "ladder must be nondecreasing");
    if (ladder.back() > params.size()) throw Error(ErrorKind::InvalidArgument, "ladder exceeds stored prefix");
    SpectrumOptions opt = options;
    opt.resolvable_only = true;
    if (!opt.window) opt.window = spectrum_window(params, ladder.back(), t, opt.h, false);

    SpectralLadder out;
    out.ladder = ladder;
    for (std::size_t n : ladder) out.reports.push_back(compute_spectrum(params, n, t, opt));
    out.nested = true;
    for (std::size_t p = 0; p + 1 < ladder.size(); ++p) {
        const auto& a = out.reports[p];
        const auto& b = out.reports[p + 1];
        double shift = 0.0;
        for (const auto& m : a.matches) {
            if (!m.strict) continue;
            if (m.index >= b.matches.size() || !b.matches[m.index].strict) {
                out.nested = false;
                continue;
            }
            shift = std::max(shift, std::abs(b.matches[m.index].computed - m.computed));
        }
        out.leading_shift.push_back(shift);
    }
    return out;
}

nlohmann::json to_json(const ConvergenceStudy& s) {
    nlohmann::json j;
    j["schema"] = "kdvlab.converge";
    j["schema_version"] = kConvergeSchemaVersion;
    j["ladder"] = s.ladder;
    j["t_values"] = s.t_values;
    j["x_min"] = s.x_values.front();
    j["x_max"] = s.x_values.back();
    j["nx"] = s.x_values.size();
    j["noise_floor"] = s.noise_floor;
    j["empirical_constant"] = s.empirical_constant;
    auto& d = j["diffs"] = nlohmann::json::array();
    for (const auto& p : s.diffs)
        d.push_back({{"from", p.from}, {"to", p.to}, {"m", p.order.m}, {"n", p.order.n}, {"sup", p.sup},
                     {"L1", p.l1}, {"L2", p.l2}, {"Linf", p.linf}, {"tail_bound", p.tail_bound}, {"ratio", p.ratio}});
    auto& o = j["orders"] = nlohmann::json::array();
    for (const auto& x : s.summaries)
        o.push_back({{"m", x.order.m}, {"n", x.order.n}, {"sup_decreasing", x.sup_decreasing},
                     {"L1_decreasing", x.l1_decreasing}, {"Linf_decreasing", x.linf_decreasing},
                     {"norm_ordering", x.norm_ordering}});
    return j;
}

nlohmann::json to_json(const SpectralLadder& s) {
    nlohmann::json j;
    j["schema"] = "kdvlab.spectral_ladder";
    j["schema_version"] = kSpectrumSchemaVersion;
    j["ladder"] = s.ladder;
    j["leading_shift"] = s.leading_shift;
    j["nested"] = s.nested;
    auto& r = j["reports"] = nlohmann::json::array();
    for (const auto& x : s.reports) r.push_back(to_json(x));
    return j;
}

}  // namespace kdvlab
