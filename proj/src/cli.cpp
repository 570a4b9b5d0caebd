#include "kdvlab/cli.hpp"

#include "kdvlab/error.hpp"
#include "kdvlab/field.hpp"
#include "kdvlab/invariants.hpp"
#include "kdvlab/limits.hpp"
#include "kdvlab/parallel.hpp"
#include "kdvlab/spectral.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <sstream>

namespace kdvlab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct SuiteInfo {
    const char* name;
    const char* checks;     // the identity, stated by content
    const char* tolerance;  // how the tolerance is applied
};

const SuiteInfo kSuiteInfo[] = {
    {"field", "V = -2 d_x^2 log det(1 + C(t,x)) agrees with V = -4 sum_j kappa_j psi_j(t,x)^2",
     "max over the grid of |V_det - V_sq| / max(|V_det|, |V_sq|) <= tol (default 1e-9)"},
    {"kdv", "V_t - 6 V V_x + V_xxx = 0 for the determinant field",
     "max |V_t - 6 V V_x + V_xxx| <= tol * (1 + max |V_xxx|) over the grid (default 1e-6)"},
    {"spectrum",
     "the bound states of -d_x^2 + V(t, .) sit at -kappa_j^2 and do not move with t",
     "every level resolvable at step h (kappa^2 > 10 h^2) matched within tol after h^2 extrapolation (default "
     "1e-4); levels at different t agree within 2x the larger extrapolation estimate"},
    {"scatter", "R(k) = 0 and T(k) = prod_j (k + i kappa_j) / (k - i kappa_j) for the reflectionless field",
     "|R| <= tol and ||T|^2 + |R|^2 - 1| <= tol (default 1e-6); |T_ode - T_product| <= 10 tol"},
    {"invariants",
     "-integral chi_{2n+1} dx = 2^{2n+2} / (2n+1) sum_j kappa_j^{2n+1} for n = 0, 1, 2, and the m = 0 "
     "sandwich of orders 1 and 3 holds with equality",
     "|lhs - rhs| <= tol |rhs| + tail budget (default 1e-6)"},
    {"converge",
     "V_N and its derivatives of order <= 2 form a Cauchy sequence in N, uniformly and in L^1 / L^2 on the grid",
     "consecutive sup, L^1 and L^inf differences decrease strictly along the ladder (differences below tol, "
     "default 0, count as converged) and L^1 <= width * L^inf"},
    {"mfunction",
     "the half-line Weyl functions satisfy Im m_+ > 0 and Im(-m_-) > 0 off the real axis, with m(conj z) = "
     "conj m(z); with no solitons m_+- = +-i sqrt z",
     "sign conditions exact at 100 sample points per t; symmetry and free-case errors <= tol relative "
     "(default 1e-12)"},
};

const SuiteInfo& info(const std::string& suite) {
    for (const auto& s : kSuiteInfo)
        if (suite == s.name) return s;
    throw Error(ErrorKind::InvalidArgument, "unknown suite '" + suite + "'");
}

bool is_guard(ErrorKind k) {
    return k == ErrorKind::WindowExceeded || k == ErrorKind::GridTooNarrow || k == ErrorKind::GridTooCoarse ||
           k == ErrorKind::PhaseResolution;
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Schema, "cannot write " + path.string());
    f << text;
    if (!f) throw Error(ErrorKind::Schema, "cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

struct Context {
    const RunConfig& config;
    const RunOptions& options;
    fs::path dir;
    FieldGrid grid;
    std::size_t n;
    double tol;
};

// ---------------------------------------------------------------------------
// Suites

void field_suite(const Context& c, SuiteOutcome& out) {
    const auto field = sample_field(c.config.params, c.n, c.grid);
    const std::size_t nx = c.grid.x_values.size();
    std::vector<double> rel(field.v.size(), 0.0);
    parallel_for(field.v.size(), [&](std::size_t i) {
        const double a = field.v[i];
        const double b = potential_sq(c.config.params, c.n, c.grid.t_values[i / nx], c.grid.x_values[i % nx]);
        const double scale = std::max(std::abs(a), std::abs(b));
        rel[i] = scale > 0.0 ? std::abs(a - b) / scale : 0.0;
    });
    const double worst = rel.empty() ? 0.0 : *std::max_element(rel.begin(), rel.end());
    std::ostringstream csv;
    write_csv(field, csv);
    write_text(c.dir / "field.csv", csv.str());
    out.artifacts.push_back("field.csv");
    out.metrics = {{"max_relative_disagreement", worst}, {"eps_tail", field.eps_tail}, {"nodes", field.v.size()}};
    if (!(worst <= c.tol)) {
        out.exit_code = ExitSuiteFailure;
        out.message = "determinant and eigenfunction fields disagree";
    }
}

void kdv_suite(const Context& c, SuiteOutcome& out) {
    const auto field = sample_field(c.config.params, c.n, c.grid, {true, true, true, true});
    double res = 0.0, vxxx = 0.0;
    for (std::size_t i = 0; i < field.v.size(); ++i) {
        res = std::max(res, std::abs(field.residual[i]));
        vxxx = std::max(vxxx, std::abs(field.vxxx[i]));
    }
    std::ostringstream csv;
    write_csv(field, csv);
    write_text(c.dir / "kdv.csv", csv.str());
    out.artifacts.push_back("kdv.csv");
    const double limit = c.tol * (1.0 + vxxx);
    out.metrics = {{"max_residual", res}, {"max_abs_vxxx", vxxx}, {"limit", limit}, {"eps_tail", field.eps_tail}};
    if (!(res <= limit)) {
        out.exit_code = ExitSuiteFailure;
        out.message = "KdV residual above tolerance";
    }
}

void spectrum_suite(const Context& c, SuiteOutcome& out) {
    SpectrumOptions opt;
    opt.h = c.options.spectrum_h;
    opt.window = c.options.spectrum_window;
    std::vector<SpectrumReport> reports;
    for (double t : c.grid.t_values) reports.push_back(compute_spectrum(c.config.params, c.n, t, opt));

    double worst = 0.0;
    bool matched = true;
    for (const auto& r : reports) {
        worst = std::max(worst, r.max_strict_error());
        matched = matched && r.all_strict_matched();
    }
    // levels at later times against the first
    double iso_ratio = 0.0;
    json iso = json::array();
    for (std::size_t k = 1; k < reports.size(); ++k) {
        const auto& a = reports[0];
        const auto& b = reports[k];
        for (std::size_t i = 0; i < a.matches.size() && i < b.matches.size(); ++i) {
            if (!a.matches[i].strict || !b.matches[i].strict) continue;
            const double diff = std::abs(a.matches[i].computed - b.matches[i].computed);
            const double allowed = 2.0 * std::max(a.matches[i].estimate, b.matches[i].estimate);
            iso_ratio = std::max(iso_ratio, allowed > 0.0 ? diff / allowed : (diff > 0.0 ? INFINITY : 0.0));
            iso.push_back({{"index", i}, {"t0", a.t}, {"t", b.t}, {"difference", diff}, {"allowed", allowed}});
        }
    }
    json j;
    j["schema"] = "kdvlab.spectrum";
    j["schema_version"] = kSpectrumSchemaVersion;
    j["truncation"] = c.n;
    j["tolerance"] = c.tol;
    j["reports"] = json::array();
    for (const auto& r : reports) j["reports"].push_back(to_json(r));
    j["isospectral"] = iso;
    write_json(c.dir / "spectrum.json", j);
    out.artifacts.push_back("spectrum.json");
    out.metrics = {{"max_strict_error", worst}, {"all_strict_matched", matched}, {"isospectral_ratio", iso_ratio}};
    if (!matched || !(worst <= c.tol) || !(iso_ratio <= 1.0)) {
        out.exit_code = ExitSuiteFailure;
        out.message = !matched ? "a resolvable level was not matched"
                      : !(worst <= c.tol) ? "eigenvalue error above tolerance"
                                          : "levels moved between times";
    }
}

void scatter_suite(const Context& c, SuiteOutcome& out) {
    double refl = 0.0, gap = 0.0, unit = 0.0;
    json j;
    j["schema"] = "kdvlab.scatter";
    j["schema_version"] = kScatterSchemaVersion;
    j["tolerance"] = c.tol;
    j["reports"] = json::array();
    for (double t : c.grid.t_values) {
        const auto rep = scattering_report(c.config.params, c.n, t, c.options.k_values);
        for (const auto& e : rep.entries) {
            refl = std::max(refl, e.reflection);
            gap = std::max(gap, e.transmission_gap);
            unit = std::max(unit, e.unitarity);
        }
        j["reports"].push_back(to_json(rep));
    }
    write_json(c.dir / "scatter.json", j);
    out.artifacts.push_back("scatter.json");
    out.metrics = {{"max_reflection", refl}, {"max_transmission_gap", gap}, {"max_unitarity_defect", unit}};
    if (!(refl <= c.tol) || !(unit <= c.tol) || !(gap <= 10.0 * c.tol)) {
        out.exit_code = ExitSuiteFailure;
        out.message = !(refl <= c.tol) ? "reflection above tolerance"
                      : !(unit <= c.tol) ? "unitarity defect above tolerance"
                                         : "transmission differs from the product formula";
    }
}

void invariants_suite(const Context& c, SuiteOutcome& out) {
    std::vector<TraceRelation> rows;
    bool ok = true, bounds = true;
    double worst = 0.0;
    for (double t : c.grid.t_values) {
        const auto rel = trace_relations(c.config.params, c.n, t, 2);
        for (const auto& r : rel) {
            if (!(std::abs(r.lhs - r.rhs) <= c.tol * std::abs(r.rhs) + r.tail_budget)) ok = false;
            worst = std::max(worst, r.defect);
        }
        rows.insert(rows.end(), rel.begin(), rel.end());
        const auto b = bound_check(c.config.params, c.n, t, 0, c.tol);
        bounds = bounds && b.upper_holds && b.lower_holds && b.saturated;
    }
    std::ostringstream csv;
    write_csv(rows, csv);
    write_text(c.dir / "invariants.csv", csv.str());
    out.artifacts.push_back("invariants.csv");
    out.metrics = {{"max_relative_defect", worst}, {"bounds_saturated", bounds}};
    if (!ok || !bounds) {
        out.exit_code = ExitSuiteFailure;
        out.message = !ok ? "trace relation defect above tolerance" : "m = 0 bounds not saturated";
    }
}

std::vector<std::size_t> default_ladder(std::size_t n) {
    std::vector<std::size_t> l;
    for (std::size_t k = 4; k <= 64 && k <= n; k *= 2) l.push_back(k);
    if (l.empty()) l.push_back(n);
    return l;
}

void converge_suite(const Context& c, SuiteOutcome& out) {
    const auto ladder = c.options.ladder.empty() ? default_ladder(c.n) : c.options.ladder;
    const std::vector<DerivativeOrder> orders{{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}};
    const auto study = run_study(c.config.params, ladder, c.grid, orders, true, c.tol);
    json j = to_json(study);
    bool ok = true;
    for (const auto& s : study.summaries)
        ok = ok && s.sup_decreasing && s.l1_decreasing && s.linf_decreasing && s.norm_ordering;
    if (c.options.spectral_ladder) {
        const auto sl = spectral_ladder(c.config.params, ladder, c.grid.t_values.front(), {c.options.spectrum_h,
                                                                                             c.options.spectrum_window});
        j["spectral_ladder"] = to_json(sl);
        ok = ok && sl.nested;
    }
    write_json(c.dir / "converge.json", j);
    out.artifacts.push_back("converge.json");
    out.metrics = {{"ladder", ladder}, {"empirical_constant", study.empirical_constant}, {"monotone", ok}};
    if (!ok) {
        out.exit_code = ExitSuiteFailure;
        out.message = "differences along the ladder are not monotone";
    }
}

void mfunction_suite(const Context& c, SuiteOutcome& out) {
    const auto& p = c.config.params;
    double kmax = 0.0;
    for (std::size_t j = 0; j < c.n; ++j) kmax = std::max(kmax, p.kappas[j]);
    // 10 x 10 points: real parts across the bound states and into the continuum
    std::vector<cplx> zs;
    const double lo = -2.0 * kmax * kmax - 1.0, hi = 4.0;
    for (int a = 0; a < 10; ++a)
        for (int b = 0; b < 10; ++b) zs.emplace_back(lo + (hi - lo) * a / 9.0, std::pow(10.0, -3.0 + 5.0 * b / 9.0));

    bool herglotz = true;
    double sym = 0.0, free_err = 0.0;
    json samples = json::array();
    for (double t : c.grid.t_values)
        for (cplx z : zs) {
            const cplx mp = weyl_m(p, c.n, t, z, HalfLine::Plus);
            const cplx mm = weyl_m(p, c.n, t, z, HalfLine::Minus);
            herglotz = herglotz && mp.imag() > 0.0 && (-mm).imag() > 0.0;
            sym = std::max(sym, std::abs(weyl_m(p, c.n, t, std::conj(z), HalfLine::Plus) - std::conj(mp)) /
                                    std::abs(mp));
            sym = std::max(sym, std::abs(weyl_m(p, c.n, t, std::conj(z), HalfLine::Minus) - std::conj(mm)) /
                                    std::abs(mm));
            const cplx s = cplx(0.0, 1.0) * sqrt_upper(z);
            free_err = std::max(free_err, std::abs(weyl_m(p, 0, t, z, HalfLine::Plus) - s) / std::abs(s));
            free_err = std::max(free_err, std::abs(weyl_m(p, 0, t, z, HalfLine::Minus) + s) / std::abs(s));
            samples.push_back({{"t", t}, {"z", cplx_json(z)}, {"m_plus", cplx_json(mp)}, {"m_minus", cplx_json(mm)}});
        }
    json j;
    j["schema"] = "kdvlab.mfunction";
    j["schema_version"] = kMFunctionSchemaVersion;
    j["truncation"] = c.n;
    j["herglotz"] = herglotz;
    j["max_symmetry_error"] = sym;
    j["max_free_error"] = free_err;
    j["samples"] = samples;
    write_json(c.dir / "mfunction.json", j);
    out.artifacts.push_back("mfunction.json");
    out.metrics = {{"herglotz", herglotz}, {"max_symmetry_error", sym}, {"max_free_error", free_err}};
    if (!herglotz || !(sym <= c.tol) || !(free_err <= c.tol)) {
        out.exit_code = ExitSuiteFailure;
        out.message = !herglotz ? "sign condition violated" : "symmetry or free-case error above tolerance";
    }
}

using SuiteFn = void (*)(const Context&, SuiteOutcome&);

SuiteFn suite_fn(const std::string& name) {
    if (name == "field") return field_suite;
    if (name == "kdv") return kdv_suite;
    if (name == "spectrum") return spectrum_suite;
    if (name == "scatter") return scatter_suite;
    if (name == "invariants") return invariants_suite;
    if (name == "converge") return converge_suite;
    return mfunction_suite;
}

SuiteOutcome run_suite(const RunConfig& config, const RunOptions& options, const fs::path& dir,
                       const std::string& name) {
    SuiteOutcome out;
    out.suite = name;
    const Context ctx{config, options, dir, {config.grid.t_values, config.grid.x_values()}, config.truncation,
                      config.tolerance(name)};
    try {
        suite_fn(name)(ctx, out);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Schema) throw;
        out.exit_code = is_guard(e.kind()) ? ExitGuard : ExitSuiteFailure;
        out.message = e.what();
    } catch (const std::exception& e) {
        out.exit_code = ExitSuiteFailure;
        out.message = e.what();
    }
    return out;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw Error(ErrorKind::Schema, "bad number '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

RunResult run(const RunConfig& config, const RunOptions& options) {
    const fs::path dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Schema, "cannot create " + dir.string() + ": " + ec.message());

    RunResult result;
    if (options.parallel) {
        std::vector<std::future<SuiteOutcome>> jobs;
        for (const auto& s : config.suites)
            jobs.push_back(std::async(std::launch::async, run_suite, std::cref(config), std::cref(options),
                                      std::cref(dir), s));
        for (auto& j : jobs) result.suites.push_back(j.get());
    } else {
        for (const auto& s : config.suites) result.suites.push_back(run_suite(config, options, dir, s));
    }

    // a guard (3) outranks an ordinary failure (1)
    for (const auto& s : result.suites) result.exit_code = std::max(result.exit_code, s.exit_code);

    json summary;
    summary["schema"] = "kdvlab.summary";
    summary["schema_version"] = kSummarySchemaVersion;
    summary["exit_code"] = result.exit_code;
    summary["truncation"] = config.truncation;
    summary["suites"] = json::array();
    for (const auto& s : result.suites) {
        const auto& i = info(s.suite);
        summary["suites"].push_back({{"suite", s.suite},
                                     {"checks", i.checks},
                                     {"tolerance", config.tolerance(s.suite)},
                                     {"status", s.exit_code == ExitPass ? "pass"
                                                : s.exit_code == ExitGuard ? "guard"
                                                                           : "fail"},
                                     {"artifacts", s.artifacts},
                                     {"metrics", s.metrics},
                                     {"message", s.message}});
    }
    write_json(dir / "summary.json", summary);
    return result;
}

std::string explain(const std::string& suite) {
    const auto& i = info(suite);
    std::ostringstream os;
    os << suite << "\n  checks: " << i.checks << "\n  tolerance: " << i.tolerance << "\n";
    return os.str();
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"KdV multi-soliton verification laboratory", "kdvlab"};
    app.require_subcommand(1);

    std::string config_path;
    bool parallel = false;
    std::string k_values, window, ladder;
    double spectrum_h = 0.005;
    bool with_spectral_ladder = false;
    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "run configuration (JSON)")->required();
        sub->add_flag("--parallel", parallel, "run suites concurrently");
        sub->add_option("--k-values", k_values, "comma separated wavenumbers for the scatter suite");
        sub->add_option("--spectrum-h", spectrum_h, "grid step for the spectrum suite");
        sub->add_option("--spectrum-window", window, "lo,hi interval for the spectrum suite");
        sub->add_option("--ladder", ladder, "comma separated truncations for the converge suite");
        sub->add_flag("--spectral-ladder", with_spectral_ladder, "add eigenvalue stability to converge.json");
    };
    auto* run_cmd = app.add_subcommand("run", "run the suites selected in a configuration");
    add_run_flags(run_cmd);
    auto* conv_cmd = app.add_subcommand("converge", "run only the convergence study of a configuration");
    add_run_flags(conv_cmd);
    std::string suite;
    auto* explain_cmd = app.add_subcommand("explain", "describe what a suite checks");
    explain_cmd->add_option("suite", suite, "suite name")->required();
    app.add_subcommand("schema", "print the configuration JSON schema");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ExitPass;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return ExitPass;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return ExitSchema;
    }

    try {
        if (app.got_subcommand("schema")) {
            out << run_config_schema().dump(2) << "\n";
            return ExitPass;
        }
        if (app.got_subcommand("explain")) {
            out << explain(suite);
            return ExitPass;
        }

        std::ifstream f(config_path);
        if (!f) throw Error(ErrorKind::Schema, "cannot read " + config_path);
        json j;
        try {
            j = json::parse(f);
        } catch (const json::parse_error& e) {
            throw Error(ErrorKind::Schema, std::string("config is not JSON: ") + e.what());
        }
        auto config = parse_run_config(j);
        if (app.got_subcommand("converge")) config.suites = {"converge"};

        RunOptions opt;
        opt.parallel = parallel;
        opt.spectrum_h = spectrum_h;
        opt.spectral_ladder = with_spectral_ladder;
        if (!(spectrum_h > 0.0)) throw Error(ErrorKind::Schema, "--spectrum-h must be positive");
        if (!k_values.empty()) {
            opt.k_values = parse_list(k_values);
            for (double k : opt.k_values)
                if (!(k > 0.0)) throw Error(ErrorKind::Schema, "--k-values must be positive");
        }
        if (!window.empty()) {
            const auto w = parse_list(window);
            if (w.size() != 2 || !(w[0] < w[1])) throw Error(ErrorKind::Schema, "--spectrum-window needs lo,hi");
            opt.spectrum_window = Interval{w[0], w[1]};
        }
        if (!ladder.empty()) {
            for (double v : parse_list(ladder)) {
                if (!(v >= 0.0) || v != std::floor(v) || v > static_cast<double>(config.truncation))
                    throw Error(ErrorKind::Schema, "--ladder entries must be integers within the truncation");
                opt.ladder.push_back(static_cast<std::size_t>(v));
            }
            if (!std::is_sorted(opt.ladder.begin(), opt.ladder.end()))
                throw Error(ErrorKind::Schema, "--ladder must be nondecreasing");
        }

        const auto result = run(config, opt);
        for (const auto& s : result.suites)
            out << (s.passed() ? "PASS " : s.exit_code == ExitGuard ? "GUARD " : "FAIL ") << s.suite
                << (s.message.empty() ? "" : ": " + s.message) << "\n";
        return result.exit_code;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return e.kind() == ErrorKind::Schema || e.kind() == ErrorKind::InvalidArgument ? ExitSchema
               : is_guard(e.kind())                                                  ? ExitGuard
                                                                                     : ExitSuiteFailure;
    }
}

}  // namespace kdvlab
