#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "relaywait/model.hpp"

namespace relaywait::cli {

enum class Mode { Solve, Simulate, Sweep, Verify };

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 2,
    kSolverFailure = 3,
    kVerificationFailure = 4,
};

/// Thrown for malformed configuration; maps to kUsageError.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    Mode mode = Mode::Solve;
    SystemParams params;
    std::vector<double> sweep = default_sweep();
    bool sweep_given = false;  // rho_g list set explicitly (file or flag)
    std::uint64_t cycles = 1'000'000;
    std::uint64_t seed = 1;
    double tol = 0.0;  // <= 0: solver default (1e-9 * coherence)
    std::string output_path;

    static std::vector<double> default_sweep();

    /// Second-hop mean SNRs that solve/simulate/verify act on.
    std::vector<double> single_mode_rho_g() const;

    void validate() const;
};

/// "20us", "0.8ms", "1e-3s"; a bare number is microseconds. Returns seconds.
double parse_duration(std::string_view text);

/// Comma-separated list of reals, e.g. "2,5,10" or "2:20" for the integer
/// range 2..20 inclusive.
std::vector<double> parse_rho_list(std::string_view text);

/// Applies `key = value` lines ('#' starts a comment) on top of `config`.
void apply_config_text(RunConfig& config, std::string_view text);
void apply_config_file(RunConfig& config, const std::string& path);

/// Executes a parsed configuration, writing human-readable output to `out`
/// and diagnostics to `err`. Returns an ExitCode.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command-line entry point: parses argv, then calls run().
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Sweep table writer (header plus one row per rho_g), exposed for tests.
void write_sweep_csv(const RunConfig& config, std::ostream& csv);

}  // namespace relaywait::cli
