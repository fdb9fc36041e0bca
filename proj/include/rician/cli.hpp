#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rician/optimizer.hpp"
#include "rician/quadrature.hpp"

namespace rician::cli {

enum ExitCode : int {
    kSuccess = 0,
    kInvalidInput = 2,
    kNotConverged = 3,
};

/// Everything a command can be configured with: flags, or the same keys in a
/// --config JSON file (flags given on the command line take precedence).
struct RunConfig {
    std::string model = "rician";
    std::string constraint = "moment4";
    double rician_k = 0.0;
    std::optional<double> snr;
    std::vector<double> snr_grid;
    std::vector<double> kappa;
    std::uint64_t seed = 1;
    std::string out;
    std::string format;  // empty: json for solve/kt-check/mc-check, csv for sweep
    double kt_tol = 1e-3;
    bool warm_start = true;
    bool bits = false;
    std::string dist;
    std::int64_t samples = 1000000;
    QuadratureConfig quadrature;
    SolverConfig solver;

    /// Checks the settings a command needs; throws DomainError.
    void validate(const std::string& command) const;
};

/// Applies the keys of a JSON object onto cfg. Unknown keys and wrongly
/// typed values throw DomainError.
void apply_json(RunConfig& cfg, const nlohmann::json& j);

/// Parses "0.01,0.05", "log:1e-3:1e-1:10" or "lin:0.01:0.1:10".
std::vector<double> parse_grid(const std::string& text);

/// Runs `rician-capacity <args...>` (args excludes the program name).
/// Machine-readable output goes to --out or `out`; summaries and errors to
/// `err` (or to `out` when --out names a file).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rician::cli
