#include "kdvlab/config.hpp"

#include "kdvlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace kdvlab {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::Schema, what); }

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            fail("unknown key '" + key + "' in " + where);
    }
}

const json& require(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) fail(where + " is missing '" + key + "'");
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(where + " must be finite");
    return v;
}

std::size_t count(const json& j, const std::string& where) {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(where + " must be a nonnegative integer");
    return j.get<std::size_t>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where + " must be an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

// exactly one of the listed keys
std::string pick_one(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    only_keys(j, where, keys);
    if (j.size() != 1) fail(where + " needs exactly one entry");
    return j.begin().key();
}

}  // namespace

SolitonParams params_from_json(const json& j) {
    only_keys(j, "params", {"kappas", "norming"});
    const json& kj = require(j, "params", "kappas");
    const json& nj = require(j, "params", "norming");

    SolitonParams p;
    const std::string kind = pick_one(kj, "params.kappas", {"explicit", "geometric", "reciprocal"});
    try {
        if (kind == "explicit") {
            p.kappas = numbers(kj.at("explicit"), "params.kappas.explicit");
            p.summability = Summability::Finite;
        } else if (kind == "geometric") {
            const json& g = kj.at("geometric");
            only_keys(g, "params.kappas.geometric", {"base", "ratio", "count"});
            const auto rule = TailRule::geometric(number(require(g, "geometric", "ratio"), "geometric.ratio"),
                                                  number(require(g, "geometric", "base"), "geometric.base"));
            p = generate(rule, count(require(g, "geometric", "count"), "geometric.count"));
        } else {
            const json& r = kj.at("reciprocal");
            only_keys(r, "params.kappas.reciprocal", {"scale", "power", "count"});
            const auto rule = TailRule::reciprocal(number(require(r, "reciprocal", "power"), "reciprocal.power"),
                                                   number(require(r, "reciprocal", "scale"), "reciprocal.scale"));
            p = generate(rule, count(require(r, "reciprocal", "count"), "reciprocal.count"));
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Schema) throw;
        fail(std::string("params.kappas: ") + e.what());
    }

    const std::string norming = pick_one(nj, "params.norming", {"explicit", "rule"});
    if (norming == "explicit") {
        p.norming = numbers(nj.at("explicit"), "params.norming.explicit");
        if (p.norming.size() != p.kappas.size()) fail("params.norming.explicit must match the kappas in length");
    } else {
        if (!nj.at("rule").is_string() || nj.at("rule").get<std::string>() != "c=kappa")
            fail("params.norming.rule must be \"c=kappa\"");
        p.norming = p.kappas;
    }

    const auto report = validate(p);
    if (!report.valid) {
        std::string msg = "params invalid:";
        for (const auto& f : report.failures) msg += " " + f + ";";
        fail(msg);
    }
    return p;
}

std::vector<double> GridConfig::x_values() const {
    std::vector<double> xs(nx);
    for (std::size_t i = 0; i < nx; ++i)
        xs[i] = i + 1 == nx ? x_max : x_min + (x_max - x_min) * static_cast<double>(i) / static_cast<double>(nx - 1);
    return xs;
}

double default_tolerance(const std::string& suite) {
    if (suite == "field") return 1e-9;
    if (suite == "kdv") return 1e-6;
    if (suite == "spectrum") return 1e-4;
    if (suite == "scatter") return 1e-6;
    if (suite == "invariants") return 1e-6;
    if (suite == "converge") return 0.0;
    if (suite == "mfunction") return 1e-12;
    throw Error(ErrorKind::InvalidArgument, "unknown suite '" + suite + "'");
}

RunConfig parse_run_config(const json& j) {
    only_keys(j, "config", {"params", "truncation", "grid", "suites", "tolerances", "output_dir"});
    RunConfig c;
    c.params = params_from_json(require(j, "config", "params"));
    c.truncation = c.params.size();
    if (j.contains("truncation")) {
        c.truncation = count(j.at("truncation"), "truncation");
        if (c.truncation > c.params.size()) fail("truncation exceeds the stored solitons");
    }

    const json& g = require(j, "config", "grid");
    only_keys(g, "grid", {"t_values", "x_min", "x_max", "nx"});
    c.grid.t_values = numbers(require(g, "grid", "t_values"), "grid.t_values");
    if (c.grid.t_values.empty()) fail("grid.t_values must be nonempty");
    c.grid.x_min = number(require(g, "grid", "x_min"), "grid.x_min");
    c.grid.x_max = number(require(g, "grid", "x_max"), "grid.x_max");
    c.grid.nx = count(require(g, "grid", "nx"), "grid.nx");
    if (c.grid.nx < 2) fail("grid.nx must be at least 2");
    if (!(c.grid.x_min < c.grid.x_max)) fail("grid.x_min must be below grid.x_max");

    const json& s = require(j, "config", "suites");
    if (!s.is_array() || s.empty()) fail("suites must be a nonempty array");
    std::set<std::string> chosen;
    for (const auto& e : s) {
        if (!e.is_string()) fail("suites entries must be strings");
        const auto name = e.get<std::string>();
        if (std::find(kSuiteNames.begin(), kSuiteNames.end(), name) == kSuiteNames.end())
            fail("unknown suite '" + name + "'");
        chosen.insert(name);
    }
    for (const auto& name : kSuiteNames)
        if (chosen.count(name)) c.suites.push_back(name);

    for (const auto& name : kSuiteNames) c.tolerances[name] = default_tolerance(name);
    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        if (!t.is_object()) fail("tolerances must be an object");
        for (const auto& [key, value] : t.items()) {
            if (!c.tolerances.count(key)) fail("unknown key '" + key + "' in tolerances");
            const double v = number(value, "tolerances." + key);
            if (v < 0.0) fail("tolerances." + key + " must be nonnegative");
            c.tolerances[key] = v;
        }
    }

    const json& o = require(j, "config", "output_dir");
    if (!o.is_string() || o.get<std::string>().empty()) fail("output_dir must be a nonempty string");
    c.output_dir = o.get<std::string>();
    return c;
}

json run_config_schema() {
    const json positive_list = {{"type", "array"}, {"items", {{"type", "number"}, {"exclusiveMinimum", 0}}}};
    const json rule_count = {{"type", "integer"}, {"minimum", 0}};
    json kappas = {
        {"type", "object"},
        {"minProperties", 1},
        {"maxProperties", 1},
        {"additionalProperties", false},
        {"properties",
         {{"explicit", positive_list},
          {"geometric",
           {{"type", "object"},
            {"additionalProperties", false},
            {"required", {"base", "ratio", "count"}},
            {"properties",
             {{"base", {{"type", "number"}, {"exclusiveMinimum", 0}}},
              {"ratio", {{"type", "number"}, {"exclusiveMinimum", 0}, {"exclusiveMaximum", 1}}},
              {"count", rule_count}}}}},
          {"reciprocal",
           {{"type", "object"},
            {"additionalProperties", false},
            {"required", {"scale", "power", "count"}},
            {"properties",
             {{"scale", {{"type", "number"}, {"exclusiveMinimum", 0}}},
              {"power", {{"type", "number"}, {"exclusiveMinimum", 1}}},
              {"count", rule_count}}}}}}}};
    json norming = {{"type", "object"},
                    {"minProperties", 1},
                    {"maxProperties", 1},
                    {"additionalProperties", false},
                    {"properties", {{"explicit", positive_list}, {"rule", {{"const", "c=kappa"}}}}}};
    json tol_props = json::object();
    for (const auto& s : kSuiteNames) tol_props[s] = {{"type", "number"}, {"minimum", 0}};
    return {
        {"$schema", "https://json-schema.org/draft/2020-12/schema"},
        {"title", "kdvlab run configuration"},
        {"description",
         "Numbers in every artifact use the shortest decimal string that reads back to the same double."},
        {"type", "object"},
        {"additionalProperties", false},
        {"required", {"params", "grid", "suites", "output_dir"}},
        {"properties",
         {{"params",
           {{"type", "object"},
            {"additionalProperties", false},
            {"required", {"kappas", "norming"}},
            {"properties", {{"kappas", kappas}, {"norming", norming}}}}},
          {"truncation",
           {{"type", "integer"}, {"minimum", 0}, {"description", "solitons used; default all stored"}}},
          {"grid",
           {{"type", "object"},
            {"additionalProperties", false},
            {"required", {"t_values", "x_min", "x_max", "nx"}},
            {"properties",
             {{"t_values", {{"type", "array"}, {"minItems", 1}, {"items", {{"type", "number"}}}}},
              {"x_min", {{"type", "number"}}},
              {"x_max", {{"type", "number"}, {"description", "must exceed x_min"}}},
              {"nx", {{"type", "integer"}, {"minimum", 2}}}}}}},
          {"suites",
           {{"type", "array"}, {"minItems", 1}, {"items", {{"enum", kSuiteNames}}}}},
          {"tolerances", {{"type", "object"}, {"additionalProperties", false}, {"properties", tol_props}}},
          {"output_dir", {{"type", "string"}, {"minLength", 1}}}}}};
}

}  // namespace kdvlab
