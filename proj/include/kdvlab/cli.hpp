#pragma once

#include "kdvlab/config.hpp"
#include "kdvlab/grid.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kdvlab {

inline constexpr int kSummarySchemaVersion = 1;

enum ExitCode : int { ExitPass = 0, ExitSuiteFailure = 1, ExitSchema = 2, ExitGuard = 3 };

/// Knobs that live on the command line rather than in the config file.
struct RunOptions {
    bool parallel = false;                        ///< run suites concurrently
    std::vector<double> k_values{0.5, 1.0, 2.0, 4.0};
    double spectrum_h = 0.005;
    std::optional<Interval> spectrum_window;      ///< default: spectrum_window()
    std::vector<std::size_t> ladder;              ///< empty: powers of two 4..64 up to the truncation
    bool spectral_ladder = false;                 ///< add the eigenvalue ladder to converge.json
};

struct SuiteOutcome {
    std::string suite;
    int exit_code = ExitPass;  ///< ExitPass, ExitSuiteFailure or ExitGuard
    std::vector<std::string> artifacts;
    nlohmann::json metrics = nlohmann::json::object();
    std::string message;

    [[nodiscard]] bool passed() const noexcept { return exit_code == ExitPass; }
};

struct RunResult {
    int exit_code = ExitPass;  ///< ExitGuard if any guard tripped, else ExitSuiteFailure if any suite failed
    std::vector<SuiteOutcome> suites;  ///< in canonical suite order
};

/// Runs the selected suites, writes their artifacts and summary.json into
/// output_dir (created if needed). Throws Error(Schema) only if the output
/// directory cannot be written.
[[nodiscard]] RunResult run(const RunConfig& config, const RunOptions& options = {});

/// The identity a suite checks and how its tolerance is applied. Throws
/// InvalidArgument for unknown names.
[[nodiscard]] std::string explain(const std::string& suite);

/// Entry point shared by the executable and the tests. Returns the exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kdvlab
