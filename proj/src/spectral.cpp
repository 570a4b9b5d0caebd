#include "kdvlab/spectral.hpp"

#include "kdvlab/error.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <sstream>

namespace kdvlab {

// ---------------------------------------------------------------------------
// Bound states

std::size_t sturm_count(const std::vector<double>& v, std::size_t stride, double h, double lambda) {
    // interior nodes only: Dirichlet at the first and last sample
    const std::size_t n = v.size();
    if (n < 3) return 0;
    const double h2 = h * h;
    std::size_t count = 0;
    double r = 1.0;  // pivot before the first row is 1/h^2 * (1 + r) ... start with q_0 = 2 + g
    bool first = true;
    for (std::size_t i = stride; i + stride < n; i += stride) {
        const double g = h2 * (v[i] - lambda);
        if (first) {
            r = 1.0 + g;  // q = 2 + g = 1 + r
            first = false;
        } else {
            r = g + r / (1.0 + r);
        }
        double q = 1.0 + r;
        if (q == 0.0) {
            q = -DBL_EPSILON * h2;
            r = q - 1.0;
        }
        if (q < 0.0) ++count;
    }
    return count;
}

namespace {

// k-th smallest eigenvalue (0-based) below hi, given count(lo) == 0.
double bisect_level(const std::vector<double>& v, std::size_t stride, double h, std::size_t k, double lo,
                    double hi) {
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(v, stride, h, mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> negative_levels(const std::vector<double>& v, std::size_t stride, double h) {
    const std::size_t m = sturm_count(v, stride, h, 0.0);
    std::vector<double> out;
    out.reserve(m);
    double vmin = 0.0;
    for (std::size_t i = 0; i < v.size(); i += stride) vmin = std::min(vmin, v[i]);
    const double lo = vmin - 1.0;  // Gershgorin: nothing below min V
    for (std::size_t k = 0; k < m; ++k) out.push_back(bisect_level(v, stride, h, k, lo, 0.0));
    return out;
}

}  // namespace

double SpectrumReport::max_strict_error() const {
    double e = 0.0;
    for (const auto& m : matches)
        if (m.strict) e = std::max(e, m.error);
    return e;
}

bool SpectrumReport::all_strict_matched() const {
    std::size_t strict_targets = 0;
    for (double tg : targets)
        if (std::abs(tg) > floor) ++strict_targets;
    return computed.size() >= strict_targets;
}

SpectrumReport discretize_and_eig(const FieldSample& field, std::size_t it, const std::vector<double>& kappas,
                                  bool edge_resolvable_only) {
    const auto& x = field.x_values;
    if (it >= field.t_values.size()) throw Error(ErrorKind::InvalidArgument, "time index out of range");
    if (x.size() < 5 || x.size() % 2 == 0)
        throw Error(ErrorKind::InvalidArgument, "eigensolve needs an odd number (>= 5) of x nodes");
    const double h = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i)
        if (std::abs(x[i] - x[i - 1] - h) > 1e-9 * h)
            throw Error(ErrorKind::InvalidArgument, "eigensolve needs a uniform x grid");

    const std::vector<double> v = field.slice(it);

    SpectrumReport rep;
    rep.t = field.t_values[it];
    rep.x_min = x.front();
    rep.x_max = x.back();
    rep.h = h;
    rep.nodes = x.size();
    rep.floor = 10.0 * h * h;

    if (!kappas.empty()) {
        double kmin = *std::min_element(kappas.begin(), kappas.end());
        const double kmax = *std::max_element(kappas.begin(), kappas.end());
        if (edge_resolvable_only) {
            double k = INFINITY;
            for (double kj : kappas)
                if (kj * kj > rep.floor) k = std::min(k, kj);
            if (std::isfinite(k)) kmin = k;
        }
        const double edge = kmin * kmin / 100.0;
        if (std::abs(v.front()) >= edge || std::abs(v.back()) >= edge) {
            std::ostringstream os;
            os << "|V| at the window ends (" << std::abs(v.front()) << ", " << std::abs(v.back())
               << ") is not below min kappa^2 / 100 = " << edge;
            throw Error(ErrorKind::GridTooNarrow, os.str());
        }
        if (h * kmax > 0.5) throw Error(ErrorKind::GridTooCoarse, "step exceeds half the narrowest soliton width");
    }

    rep.fine = negative_levels(v, 1, h);
    rep.coarse = negative_levels(v, 2, 2.0 * h);

    double vmax = 0.0;
    for (double vi : v) vmax = std::max(vmax, std::abs(vi));
    for (std::size_t i = 0; i < rep.fine.size(); ++i) {
        const double f = rep.fine[i];
        // bisection width plus rounding in g = h^2 (v - lambda)
        const double round = 8.0 * DBL_EPSILON * (vmax + std::abs(f));
        if (i < rep.coarse.size()) {
            const double c = rep.coarse[i];
            rep.computed.push_back((4.0 * f - c) / 3.0);
            rep.estimates.push_back(std::abs(f - c) / 3.0 + round);
        } else {
            rep.computed.push_back(f);
            rep.estimates.push_back(std::abs(f));
        }
    }

    rep.targets.reserve(kappas.size());
    for (double k : kappas) rep.targets.push_back(-k * k);
    std::sort(rep.targets.begin(), rep.targets.end());

    const std::size_t paired = std::min(rep.computed.size(), rep.targets.size());
    for (std::size_t i = 0; i < paired; ++i) {
        EigenMatch m;
        m.index = i;
        m.target = rep.targets[i];
        m.computed = rep.computed[i];
        m.error = std::abs(m.computed - m.target);
        m.estimate = rep.estimates[i];
        m.strict = std::abs(m.target) > rep.floor;
        if (m.strict && i < rep.coarse.size() && std::abs(rep.fine[i] - rep.coarse[i]) > 0.01 * std::abs(m.target))
            throw Error(ErrorKind::GridTooCoarse, "h^2 extrapolation disagreement exceeds 1% of a level");
        rep.matches.push_back(m);
    }

    for (double d : kAccumulationDeltas) {
        AccumulationBin b{d, 0};
        for (double l : rep.computed)
            if (l > -d && l < 0.0) ++b.count;
        rep.accumulation.push_back(b);
    }
    return rep;
}

Interval spectrum_window(const SolitonParams& params, std::size_t order, double t, double h,
                         bool include_unresolved) {
    const double floor = 10.0 * h * h;
    const auto extents = soliton_extents(params, order, t);
    double edge = 0.0;
    if (!include_unresolved) {
        double k = INFINITY;
        for (const auto& e : extents)
            if (e.kappa * e.kappa > floor) k = std::min(k, e.kappa);
        edge = std::isfinite(k) ? k * k / 100.0 : INFINITY;
    }
    Interval iv{INFINITY, -INFINITY};
    for (const auto& e : extents) {
        const bool resolved = e.kappa * e.kappa > floor;
        if (!resolved && !include_unresolved && 2.0 * e.kappa * e.kappa < edge) continue;
        const double margin = (resolved ? 20.0 : 10.0) / e.kappa;
        iv.lo = std::min(iv.lo, e.lower - margin);
        iv.hi = std::max(iv.hi, e.upper + margin);
    }
    if (!(iv.hi > iv.lo)) return {-20.0, 20.0};
    return iv;
}

SpectrumReport compute_spectrum(const SolitonParams& params, std::size_t order, double t,
                                const SpectrumOptions& options) {
    if (!(options.h > 0.0)) throw Error(ErrorKind::InvalidArgument, "spectrum step must be positive");
    const Interval w = options.window ? *options.window
                                      : spectrum_window(params, order, t, options.h, !options.resolvable_only);
    if (!(w.hi > w.lo)) throw Error(ErrorKind::InvalidArgument, "spectrum window is empty");
    auto intervals = static_cast<std::size_t>(std::ceil(w.width() / options.h));
    intervals += intervals % 2;
    intervals = std::max<std::size_t>(intervals, 4);
    std::vector<double> xs(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) xs[i] = w.lo + options.h * static_cast<double>(i);
    const auto field = sample_field(params, order, {{t}, std::move(xs)});
    return discretize_and_eig(field, 0, std::vector<double>(params.kappas.begin(),
                                                             params.kappas.begin() + static_cast<std::ptrdiff_t>(order)),
                              options.resolvable_only);
}

// ---------------------------------------------------------------------------
// Scattering

SampledPotential::SampledPotential(std::vector<double> x, std::vector<double> v) : x_(std::move(x)), v_(std::move(v)) {
    if (x_.size() != v_.size() || x_.size() < 4)
        throw Error(ErrorKind::InvalidArgument, "sampled potential needs >= 4 matching nodes");
    for (std::size_t i = 1; i < x_.size(); ++i)
        if (!(x_[i] > x_[i - 1])) throw Error(ErrorKind::InvalidArgument, "sample nodes must increase");
}

namespace {

// cubic Lagrange through the four nodes around interval [x_i, x_{i+1}]
double interpolate(const std::vector<double>& xs, const std::vector<double>& vs, std::size_t i, double x) {
    const std::size_t n = xs.size();
    std::size_t s = (i == 0) ? 0 : i - 1;
    if (s + 3 >= n) s = n - 4;
    double sum = 0.0;
    for (std::size_t a = s; a < s + 4; ++a) {
        double w = 1.0;
        for (std::size_t b = s; b < s + 4; ++b)
            if (b != a) w *= (x - xs[b]) / (xs[a] - xs[b]);
        sum += w * vs[a];
    }
    return sum;
}

}  // namespace

double SampledPotential::operator()(double x) const {
    if (x < x_.front() || x > x_.back()) return 0.0;
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    i = (i == 0) ? 0 : i - 1;
    if (i + 1 >= x_.size()) i = x_.size() - 2;
    return interpolate(x_, v_, i, x);
}

SampledPotential SampledPotential::from_params(const SolitonParams& params, std::size_t order, double t,
                                               std::optional<Interval> window, double du) {
    const Interval w = window ? *window : support_window(params, order, t, 20.0);
    if (!(w.hi > w.lo)) throw Error(ErrorKind::InvalidArgument, "scatter window is empty");
    double center = 0.5 * (w.lo + w.hi);
    double scale = 1.0;
    if (order > 0) {
        const auto ext = soliton_extents(params, order, t);
        const auto top = std::max_element(ext.begin(), ext.end(),
                                          [](const auto& a, const auto& b) { return a.kappa < b.kappa; });
        center = std::clamp(0.5 * (top->lower + top->upper), w.lo, w.hi);
        scale = 1.0 / top->kappa;
    }
    const double u0 = std::asinh((w.lo - center) / scale);
    const double u1 = std::asinh((w.hi - center) / scale);
    auto n = static_cast<std::size_t>(std::ceil((u1 - u0) / du));
    n = std::max<std::size_t>(n, 8);
    std::vector<double> xs(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        xs[i] = center + scale * std::sinh(u0 + (u1 - u0) * static_cast<double>(i) / static_cast<double>(n));
    xs.front() = w.lo;
    xs.back() = w.hi;
    auto field = sample_field(params, order, {{t}, xs});
    return SampledPotential(std::move(xs), std::move(field.v));
}

SampledPotential SampledPotential::from_field(const FieldSample& field, std::size_t it) {
    return SampledPotential(field.x_values, field.slice(it));
}

JostResult jost_scatter(const SampledPotential& pot, double k, double step_factor) {
    if (!(k > 0.0) || !std::isfinite(k)) throw Error(ErrorKind::InvalidArgument, "k must be positive");
    const auto& xs = pot.nodes();
    const auto& vs = pot.values();
    if (k * (pot.hi() - pot.lo()) < 2.0 * std::numbers::pi)
        throw Error(ErrorKind::PhaseResolution, "k times the window is below 2 pi; phase not resolved");

    const cplx inv2ik = 1.0 / cplx(0.0, 2.0 * k);
    cplx a(1.0, 0.0), b(0.0, 0.0);
    const double hmax = step_factor / k;
    for (std::size_t i = xs.size() - 1; i >= 1; --i) {
        // cubic of interval [x_{i-1}, x_i] in powers of (x - x_i)
        const std::size_t lo = i - 1;
        std::size_t s0 = (lo == 0) ? 0 : lo - 1;
        if (s0 + 3 >= xs.size()) s0 = xs.size() - 4;
        double d[4], p[4] = {0.0, 0.0, 0.0, 0.0};
        for (int q = 0; q < 4; ++q) d[q] = xs[s0 + static_cast<std::size_t>(q)] - xs[i];
        for (int q = 0; q < 4; ++q) {
            // Lagrange basis q expanded as a cubic in y = x - x_i
            double poly[4] = {1.0, 0.0, 0.0, 0.0};
            double denom = 1.0;
            for (int r = 0; r < 4; ++r) {
                if (r == q) continue;
                for (int e = 3; e >= 1; --e) poly[e] = poly[e - 1] - d[r] * poly[e];
                poly[0] = -d[r] * poly[0];
                denom *= d[q] - d[r];
            }
            const double vq = vs[s0 + static_cast<std::size_t>(q)] / denom;
            for (int e = 0; e < 4; ++e) p[e] += vq * poly[e];
        }
        auto vat = [&](double y) { return ((p[3] * y + p[2]) * y + p[1]) * y + p[0]; };

        const double span = xs[i] - xs[i - 1];
        const auto steps = static_cast<std::size_t>(std::ceil(span / hmax));
        const double h = -span / static_cast<double>(steps);
        const cplx half_rot = std::polar(1.0, k * h);  // e^{2ik h/2}
        cplx e = std::polar(1.0, 2.0 * k * xs[i]);     // e^{2ikx} at the step start
        for (std::size_t st = 0; st < steps; ++st) {
            const double y = h * static_cast<double>(st);
            const cplx em = e * half_rot;
            const cplx e1 = em * half_rot;
            const cplx f0 = vat(y) * inv2ik;
            const cplx fm = vat(y + 0.5 * h) * inv2ik;
            const cplx f1 = vat(y + h) * inv2ik;
            auto da = [](cplx f, cplx ee, cplx aa, cplx bb) { return f * (aa + bb * std::conj(ee)); };
            auto db = [](cplx f, cplx ee, cplx aa, cplx bb) { return -f * (aa * ee + bb); };
            const cplx k1a = da(f0, e, a, b), k1b = db(f0, e, a, b);
            const cplx a2 = a + 0.5 * h * k1a, b2 = b + 0.5 * h * k1b;
            const cplx k2a = da(fm, em, a2, b2), k2b = db(fm, em, a2, b2);
            const cplx a3 = a + 0.5 * h * k2a, b3 = b + 0.5 * h * k2b;
            const cplx k3a = da(fm, em, a3, b3), k3b = db(fm, em, a3, b3);
            const cplx a4 = a + h * k3a, b4 = b + h * k3b;
            const cplx k4a = da(f1, e1, a4, b4), k4b = db(f1, e1, a4, b4);
            a += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
            b += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
            e = e1;
        }
    }
    return {1.0 / a, b / a};
}

TransmissionProduct transmission_product(const SolitonParams& params, std::size_t order, cplx k) {
    if (order > params.size()) throw Error(ErrorKind::InvalidArgument, "truncation exceeds stored prefix");
    if (k == cplx(0.0, 0.0)) throw Error(ErrorKind::InvalidArgument, "k = 0 is a pole of the product");
    TransmissionProduct out{cplx(1.0, 0.0), 0.0};
    for (std::size_t j = 0; j < order; ++j) {
        const cplx ik(0.0, params.kappas[j]);
        if (k == ik) throw Error(ErrorKind::InvalidArgument, "k = i kappa_j is a pole of the product");
        out.value *= (k + ik) / (k - ik);
    }
    const bool l1 = params.summability != Summability::LinfSummable || !params.tail.infinite();
    out.tail_bound = l1 ? 2.0 * kappa_power_tail(params, order + 1, 1.0) / std::abs(k) : INFINITY;
    return out;
}

ScatteringReport scattering_report(const SolitonParams& params, std::size_t order, double t,
                                   const std::vector<double>& k_values, std::optional<Interval> window) {
    const auto pot = SampledPotential::from_params(params, order, t, window);
    ScatteringReport rep;
    rep.t = t;
    rep.truncation = order;
    rep.x_min = pot.lo();
    rep.x_max = pot.hi();
    rep.samples = pot.nodes().size();
    for (double k : k_values) {
        const auto j = jost_scatter(pot, k);
        const auto prod = transmission_product(params, order, cplx(k, 0.0));
        ScatterEntry e;
        e.k = k;
        e.t_ode = j.t;
        e.r_ode = j.r;
        e.t_formula = prod.value;
        e.tail_bound = prod.tail_bound;
        e.reflection = std::abs(j.r);
        e.transmission_gap = std::abs(j.t - prod.value);
        e.unitarity = std::abs(std::norm(j.t) + std::norm(j.r) - 1.0);
        rep.entries.push_back(e);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Weyl m-functions

cplx sqrt_upper(cplx z) { return cplx(0.0, 1.0) * std::sqrt(-z); }

cplx weyl_m(const SolitonParams& params, std::size_t order, double t, cplx z, HalfLine side) {
    if (z.imag() == 0.0) throw Error(ErrorKind::InvalidArgument, "m-function needs z off the real axis");
    const cplx i(0.0, 1.0);
    const cplx s = sqrt_upper(z);
    const double pm = side == HalfLine::Plus ? 1.0 : -1.0;
    if (order == 0) return pm * i * s;
    const auto e = eigenfunctions(params, order, t, 0.0);
    cplx s0(0.0, 0.0), s1(0.0, 0.0);
    for (std::size_t j = 0; j < order; ++j) {
        const double k = params.kappas[j];
        const double c = evolved_norming(params.norming[j], k, t);
        const auto ji = static_cast<Eigen::Index>(j);
        const cplx w = c / (s + pm * i * k);
        s0 += w * e.psi[ji];
        s1 += w * (e.dpsi_dx[ji] - k * e.psi[ji]);
    }
    return pm * i * s - pm * (i * s1) / (1.0 - pm * i * s0);
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json cjson(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

}  // namespace

nlohmann::json to_json(const SpectrumReport& r) {
    nlohmann::json j;
    j["schema"] = "kdvlab.spectrum";
    j["schema_version"] = kSpectrumSchemaVersion;
    j["t"] = r.t;
    j["x_min"] = r.x_min;
    j["x_max"] = r.x_max;
    j["h"] = r.h;
    j["nodes"] = r.nodes;
    j["floor"] = r.floor;
    j["computed"] = r.computed;
    j["fine"] = r.fine;
    j["coarse"] = r.coarse;
    j["estimates"] = r.estimates;
    j["targets"] = r.targets;
    auto& m = j["matches"] = nlohmann::json::array();
    for (const auto& e : r.matches)
        m.push_back({{"index", e.index}, {"target", e.target}, {"computed", e.computed},
                     {"error", e.error}, {"estimate", e.estimate}, {"strict", e.strict}});
    auto& a = j["accumulation"] = nlohmann::json::array();
    for (const auto& b : r.accumulation) a.push_back({{"delta", b.delta}, {"count", b.count}});
    return j;
}

nlohmann::json to_json(const ScatteringReport& r) {
    nlohmann::json j;
    j["schema"] = "kdvlab.scatter";
    j["schema_version"] = kScatterSchemaVersion;
    j["t"] = r.t;
    j["truncation"] = r.truncation;
    j["x_min"] = r.x_min;
    j["x_max"] = r.x_max;
    j["samples"] = r.samples;
    auto& e = j["entries"] = nlohmann::json::array();
    for (const auto& s : r.entries)
        e.push_back({{"k", s.k}, {"T_ode", cjson(s.t_ode)}, {"R_ode", cjson(s.r_ode)},
                     {"T_formula", cjson(s.t_formula)}, {"tail_bound", s.tail_bound},
                     {"abs_R", s.reflection}, {"T_gap", s.transmission_gap}, {"unitarity_defect", s.unitarity}});
    return j;
}

}  // namespace kdvlab
