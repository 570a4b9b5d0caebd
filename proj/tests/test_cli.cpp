#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kdvlab/cli.hpp"
#include "kdvlab/error.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace kdvlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("kdvlab_test_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    return p;
}

json one_soliton_config(const fs::path& out) {
    return {{"params", {{"kappas", {{"explicit", {1.0}}}}, {"norming", {{"explicit", {std::sqrt(2.0)}}}}}},
            {"grid", {{"t_values", {0.0}}, {"x_min", -8.0}, {"x_max", 8.0}, {"nx", 161}}},
            {"suites", {"field"}},
            {"output_dir", out.string()}};
}

json geometric_config(std::size_t n, const fs::path& out) {
    return {{"params",
             {{"kappas", {{"geometric", {{"base", 0.5}, {"ratio", 0.5}, {"count", n}}}}},
              {"norming", {{"rule", "c=kappa"}}}}},
            {"grid", {{"t_values", {0.0, 0.5}}, {"x_min", -5.0}, {"x_max", 5.0}, {"nx", 41}}},
            {"suites", {"field", "kdv", "invariants", "converge", "mfunction"}},
            {"output_dir", out.string()}};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path write_config(const fs::path& dir, const json& j) {
    fs::create_directories(dir);
    const auto p = dir / "config.json";
    std::ofstream(p) << j.dump();
    return p;
}

int cli(std::initializer_list<std::string> args, std::string* out_text = nullptr) {
    std::vector<std::string> store{"kdvlab"};
    store.insert(store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : store) argv.push_back(s.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str() + err.str();
    return code;
}

int schema_error(const json& j) {
    try {
        (void)parse_run_config(j);
    } catch (const Error& e) {
        return e.kind() == ErrorKind::Schema ? 1 : 0;
    }
    return 0;
}

}  // namespace

TEST_CASE("params json: three kappa forms") {
    const auto a = params_from_json({{"kappas", {{"explicit", {1.0, 0.5}}}}, {"norming", {{"explicit", {2.0, 3.0}}}}});
    CHECK(a.size() == 2);
    CHECK(a.norming[1] == 3.0);
    CHECK(a.summability == Summability::Finite);
    CHECK_FALSE(a.tail.infinite());

    const auto g = params_from_json(
        {{"kappas", {{"geometric", {{"base", 0.5}, {"ratio", 0.5}, {"count", 6}}}}}, {"norming", {{"rule", "c=kappa"}}}});
    CHECK(g.size() == 6);
    CHECK(g.kappas[5] == 0.5 * std::pow(0.5, 5));
    CHECK(g.norming == g.kappas);
    CHECK(g.summability == Summability::L1Summable);
    CHECK(g.tail.infinite());

    const auto r = params_from_json({{"kappas", {{"reciprocal", {{"scale", 2.0}, {"power", 2.0}, {"count", 3}}}}},
                                     {"norming", {{"rule", "c=kappa"}}}});
    CHECK(r.kappas[2] == doctest::Approx(2.0 / 9.0));
}

TEST_CASE("params json: strict schema") {
    auto bad = [](const json& j) {
        try {
            (void)params_from_json(j);
        } catch (const Error& e) {
            return e.kind() == ErrorKind::Schema;
        }
        return false;
    };
    const json norm = {{"rule", "c=kappa"}};
    CHECK(bad({{"kappas", {{"explicit", {1.0}}}}}));
    CHECK(bad({{"kappas", {{"explicit", {1.0}}}}, {"norming", norm}, {"extra", 1}}));
    CHECK(bad({{"kappas", {{"explicit", {1.0}}, {"geometric", json::object()}}}, {"norming", norm}}));
    CHECK(bad({{"kappas", {{"explicit", {1.0, -0.5}}}}, {"norming", norm}}));
    CHECK(bad({{"kappas", {{"explicit", {1.0, 1.0}}}}, {"norming", norm}}));
    CHECK(bad({{"kappas", {{"explicit", {"1"}}}}, {"norming", norm}}));
    CHECK(bad({{"kappas", {{"explicit", {1.0}}}}, {"norming", {{"explicit", {1.0, 2.0}}}}}));
    CHECK(bad({{"kappas", {{"explicit", {1.0}}}}, {"norming", {{"rule", "c=1"}}}}));
    CHECK(bad({{"kappas", {{"geometric", {{"base", 0.5}, {"ratio", 1.5}, {"count", 3}}}}}, {"norming", norm}}));
    CHECK(bad({{"kappas", {{"geometric", {{"base", 0.5}, {"ratio", 0.5}}}}}, {"norming", norm}}));
    CHECK(bad({{"kappas", {{"geometric", {{"base", 0.5}, {"ratio", 0.5}, {"count", -1}}}}}, {"norming", norm}}));
    CHECK(bad({{"kappas", {{"reciprocal", {{"scale", 1.0}, {"power", 1.0}, {"count", 3}}}}}, {"norming", norm}}));
}

TEST_CASE("run config: parsing and defaults") {
    auto j = geometric_config(8, "out");
    j["suites"] = {"mfunction", "field", "field"};
    j["tolerances"] = {{"kdv", 1e-3}};
    j["truncation"] = 5;
    const auto c = parse_run_config(j);
    CHECK(c.suites == std::vector<std::string>{"field", "mfunction"});
    CHECK(c.tolerance("kdv") == 1e-3);
    CHECK(c.tolerance("field") == 1e-9);
    CHECK(c.tolerance("spectrum") == 1e-4);
    CHECK(c.tolerance("scatter") == 1e-6);
    CHECK(c.tolerance("invariants") == 1e-6);
    CHECK(c.tolerance("mfunction") == 1e-12);
    CHECK(c.truncation == 5);
    const auto xs = c.grid.x_values();
    REQUIRE(xs.size() == 41);
    CHECK(xs.front() == -5.0);
    CHECK(xs.back() == 5.0);
    CHECK(xs[20] == doctest::Approx(0.0));
    CHECK(parse_run_config(geometric_config(8, "out")).truncation == 8);
}

TEST_CASE("run config: violations") {
    const auto base = geometric_config(4, "out");
    auto with = [&](const std::string& key, const json& v) {
        auto j = base;
        j[key] = v;
        return j;
    };
    auto grid = [&](const std::string& key, const json& v) {
        auto j = base;
        j["grid"][key] = v;
        return j;
    };
    CHECK(schema_error(with("suites", json::array())));
    CHECK(schema_error(with("suites", {"bogus"})));
    CHECK(schema_error(with("suites", "field")));
    CHECK(schema_error(with("extra", 1)));
    CHECK(schema_error(with("tolerances", {{"bogus", 1.0}})));
    CHECK(schema_error(with("tolerances", {{"kdv", -1.0}})));
    CHECK(schema_error(with("truncation", 5)));
    CHECK(schema_error(with("output_dir", "")));
    CHECK(schema_error(grid("nx", 1)));
    CHECK(schema_error(grid("nx", 2.5)));
    CHECK(schema_error(grid("x_min", 5.0)));
    CHECK(schema_error(grid("t_values", json::array())));
    CHECK(schema_error(grid("step", 0.1)));
    auto j = base;
    j.erase("grid");
    CHECK(schema_error(j));
}

TEST_CASE("explain names the identity of each suite") {
    CHECK(explain("kdv").find("V_t - 6 V V_x + V_xxx = 0") != std::string::npos);
    CHECK(explain("invariants").find("chi_{2n+1}") != std::string::npos);
    for (const auto& s : kSuiteNames) CHECK(explain(s).find("tolerance") != std::string::npos);
    CHECK_THROWS_AS((void)explain("bogus"), Error);
    std::string text;
    CHECK(cli({"explain", "kdv"}, &text) == ExitPass);
    CHECK(text.find("V_xxx") != std::string::npos);
    CHECK(cli({"explain", "bogus"}) == ExitSchema);
}

TEST_CASE("schema subcommand prints the configuration schema") {
    std::string text;
    REQUIRE(cli({"schema"}, &text) == ExitPass);
    const auto j = json::parse(text);
    CHECK(j["additionalProperties"] == false);
    CHECK(j["properties"]["suites"]["minItems"] == 1);
    CHECK(j["properties"]["grid"]["properties"]["nx"]["minimum"] == 2);
    CHECK(j["properties"]["suites"]["items"]["enum"].size() == kSuiteNames.size());
}

TEST_CASE("run: one-soliton field") {
    const auto dir = scratch("one");
    const auto cfg = write_config(dir, one_soliton_config(dir / "out"));
    REQUIRE(cli({"run", cfg.string()}) == ExitPass);
    std::ifstream csv(dir / "out" / "field.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "t,x,V");
    bool seen = false;
    while (std::getline(csv, line)) {
        std::stringstream ss(line);
        std::string t, x, v;
        std::getline(ss, t, ',');
        std::getline(ss, x, ',');
        std::getline(ss, v, ',');
        const double xv = std::stod(x), vv = std::stod(v);
        CHECK(std::abs(vv + 2.0 / std::pow(std::cosh(xv), 2)) <= 1e-10);
        if (x == "0") {
            seen = true;
            CHECK(std::abs(vv + 2.0) <= 1e-10);
        }
    }
    CHECK(seen);
    const auto summary = json::parse(slurp(dir / "out" / "summary.json"));
    fs::remove_all(dir);
    CHECK(summary["exit_code"] == 0);
    CHECK(summary["suites"][0]["artifacts"][0] == "field.csv");
    CHECK(summary["suites"][0]["checks"].get<std::string>().find("log det") != std::string::npos);
}

TEST_CASE("run: exit codes") {
    const auto dir = scratch("codes");
    auto j = one_soliton_config(dir / "a");
    j["suites"] = json::array();
    CHECK(cli({"run", write_config(dir / "empty", j).string()}) == ExitSchema);
    CHECK(cli({"run", (dir / "missing.json").string()}) == ExitSchema);
    fs::create_directories(dir);
    std::ofstream(dir / "garbage.json") << "{not json";
    CHECK(cli({"run", (dir / "garbage.json").string()}) == ExitSchema);
    CHECK(cli({"bogus"}) == ExitSchema);

    // a zero tolerance the cross-check cannot meet
    auto f = geometric_config(8, dir / "fail");
    f["suites"] = {"field"};
    f["tolerances"] = {{"field", 0.0}};
    CHECK(cli({"run", write_config(dir / "f", f).string()}) == ExitSuiteFailure);
    CHECK(json::parse(slurp(dir / "fail" / "summary.json"))["suites"][0]["status"] == "fail");

    // a window that cuts the soliton trips the narrow-grid guard
    auto g = one_soliton_config(dir / "guard");
    g["suites"] = {"spectrum", "field"};
    std::string text;
    CHECK(cli({"run", write_config(dir / "g", g).string(), "--spectrum-window", "-1,1"}, &text) == ExitGuard);
    const auto s = json::parse(slurp(dir / "guard" / "summary.json"));
    CHECK(s["exit_code"] == ExitGuard);
    CHECK(s["suites"][0]["suite"] == "field");
    CHECK(s["suites"][0]["status"] == "pass");
    CHECK(s["suites"][1]["status"] == "guard");
    CHECK(s["suites"][1]["message"].get<std::string>().find("GridTooNarrow") != std::string::npos);

    CHECK(cli({"run", write_config(dir / "h", g).string(), "--spectrum-h", "-1"}) == ExitSchema);
    CHECK(cli({"run", write_config(dir / "k", g).string(), "--k-values", "1,x"}) == ExitSchema);
    CHECK(cli({"run", write_config(dir / "l", g).string(), "--ladder", "2"}) == ExitSchema);
}

TEST_CASE("run: artifacts are byte-identical across runs and parallel mode") {
    const auto dir = scratch("det");
    const auto a = write_config(dir / "a", geometric_config(8, dir / "out_a"));
    const auto b = write_config(dir / "b", geometric_config(8, dir / "out_b"));
    REQUIRE(cli({"run", a.string()}) == ExitPass);
    REQUIRE(cli({"run", b.string(), "--parallel"}) == ExitPass);
    for (const char* f : {"field.csv", "kdv.csv", "invariants.csv", "converge.json", "mfunction.json", "summary.json"}) {
        CAPTURE(f);
        const auto x = slurp(dir / "out_a" / f);
        CHECK_FALSE(x.empty());
        CHECK(x == slurp(dir / "out_b" / f));
    }
    const auto kdv = slurp(dir / "out_a" / "kdv.csv");
    CHECK(kdv.rfind("t,x,V,Vt,Vx,Vxxx,kdv_residual\n", 0) == 0);
    const auto conv = json::parse(slurp(dir / "out_a" / "converge.json"));
    CHECK(conv["ladder"] == json({4, 8}));
}

TEST_CASE("run: scatter and spectrum suites on a small field") {
    const auto dir = scratch("levels");
    auto j = geometric_config(4, dir / "out");
    j["suites"] = {"spectrum", "scatter"};
    REQUIRE(cli({"run", write_config(dir, j).string(), "--spectrum-h", "0.02", "--k-values", "1,2"}) == ExitPass);
    const auto sp = json::parse(slurp(dir / "out" / "spectrum.json"));
    CHECK(sp["schema"] == "kdvlab.spectrum");
    CHECK(sp["reports"].size() == 2);
    CHECK_FALSE(sp["isospectral"].empty());
    const auto sc = json::parse(slurp(dir / "out" / "scatter.json"));
    CHECK(sc["reports"][0]["entries"].size() == 2);
}

TEST_CASE("converge subcommand runs only the study") {
    const auto dir = scratch("conv");
    const auto cfg = write_config(dir, geometric_config(16, dir / "out"));
    std::string text;
    REQUIRE(cli({"converge", cfg.string(), "--ladder", "2,4,8,16"}, &text) == ExitPass);
    CHECK(text == "PASS converge\n");
    CHECK(fs::exists(dir / "out" / "converge.json"));
    CHECK_FALSE(fs::exists(dir / "out" / "field.csv"));
    const auto s = json::parse(slurp(dir / "out" / "converge.json"));
    CHECK(s["ladder"] == json({2, 4, 8, 16}));
    CHECK(s["diffs"].size() == 3 * 6);
    fs::remove_all(dir.parent_path());
}
