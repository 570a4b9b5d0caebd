#pragma once

#include "kdvlab/params.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kdvlab {

inline const std::vector<std::string> kSuiteNames{"field",      "kdv",      "spectrum", "scatter",
                                                  "invariants", "converge", "mfunction"};

/// Soliton data from {"kappas": {...}, "norming": {...}}. Explicit lists are
/// Finite; rule-generated lists are L1Summable with the rule as their tail.
/// Unknown keys, wrong types and invalid data raise Schema.
[[nodiscard]] SolitonParams params_from_json(const nlohmann::json& j);

struct GridConfig {
    std::vector<double> t_values;
    double x_min = 0.0;
    double x_max = 0.0;
    std::size_t nx = 0;

    /// nx points from x_min to x_max inclusive.
    [[nodiscard]] std::vector<double> x_values() const;
};

struct RunConfig {
    SolitonParams params;
    std::size_t truncation = 0;  ///< defaults to every stored soliton
    GridConfig grid;
    std::vector<std::string> suites;  ///< deduplicated, in canonical order
    std::map<std::string, double> tolerances;  ///< every suite filled in
    std::string output_dir;

    [[nodiscard]] double tolerance(const std::string& suite) const { return tolerances.at(suite); }
};

[[nodiscard]] double default_tolerance(const std::string& suite);

/// Strict parse: missing required keys, unknown keys, bad types, nx < 2,
/// x_min >= x_max, empty or unknown suites all raise Schema.
[[nodiscard]] RunConfig parse_run_config(const nlohmann::json& j);

/// JSON Schema (draft 2020-12) for the run configuration.
[[nodiscard]] nlohmann::json run_config_schema();

}  // namespace kdvlab
