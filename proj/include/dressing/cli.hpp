#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "dressing/elliptic.hpp"
#include "dressing/error.hpp"

namespace dressing::cli {

enum class OutputFormat { Csv, Json };

/// Flat key=value configuration. Defaults are the sample problem.
struct RunConfig {
    std::vector<double> mu{0.0, 1.0, 2.0};
    std::vector<double> sigma{0.3, -0.1, 0.5};
    /// tau: defaults to mu when empty.
    std::vector<double> beta;
    double x_end = 1.0;
    double step = 1e-3;
    OutputFormat format = OutputFormat::Csv;
    double pole_mask_halfwidth = 1e-3;
    double blowup_threshold = 1e8;
    /// verify: largest allowed |closed form - RK4|.
    double tolerance = 1e-6;
    /// solve: bounds on the scaled per-point residuals (see README).
    double quartic_tolerance = 1e-8;
    double ode_tolerance = 1e-6;
    double initial_tolerance = 1e-8;
    /// tau: drift bound asserted for N = 3 with beta = mu.
    double conservation_tolerance = 1e-9;
    /// lame: spectral point; NaN means alpha = -2 nu of the solved problem.
    complex lame_alpha{std::numeric_limits<double>::quiet_NaN(), 0.0};
    int lame_samples = 50;
    /// Test hook: added to the fitted phase x0 before the trajectory is emitted.
    double perturb_x0 = 0.0;
};

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitDegenerate = 2,
    kExitNoConvergence = 3,
    kExitResidualFailure = 4,
    kExitEvenPeriod = 5,
    kExitEvaluation = 6,
};

int exit_code_for(ErrorCode code) noexcept;

/// Applies one "key = value" assignment. Throws InvalidArgument for unknown keys or bad values.
void apply_setting(RunConfig& config, const std::string& assignment);

/// Reads a config file: one assignment per line, '#' starts a comment.
RunConfig load_config(std::istream& in);
RunConfig load_config_file(const std::string& path);

/// Throws InvalidArgument unless step > 0, x_end > 0 and every tolerance is positive.
void validate(const RunConfig& config);

/// Each command writes its data to `data` and a JSON summary to `summary`, and returns an exit code.
/// Library errors propagate; run_command maps them to exit codes.
int cmd_invariants(const RunConfig& config, std::ostream& data, std::ostream& summary);
int cmd_solve(const RunConfig& config, std::ostream& data, std::ostream& summary);
int cmd_verify(const RunConfig& config, std::ostream& data, std::ostream& summary);
int cmd_tau(const RunConfig& config, std::ostream& data, std::ostream& summary);
int cmd_lame(const RunConfig& config, std::ostream& data, std::ostream& summary);

/// Dispatches on the command name, catching library errors. Messages go to `err`.
int run_command(const std::string& name, const RunConfig& config, std::ostream& data, std::ostream& summary,
                std::ostream& err);

/// %.17g, "nan" for NaN.
std::string format_double(double v);

}  // namespace dressing::cli
