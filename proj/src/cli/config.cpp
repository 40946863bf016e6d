#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "dressing/cli.hpp"

namespace dressing::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || trim(text.substr(used)) != "") {
        throw Error(ErrorCode::InvalidArgument, "bad number for " + key + ": '" + text + "'");
    }
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_double(key, trim(item)));
    }
    if (out.empty()) {
        throw Error(ErrorCode::InvalidArgument, "empty list for " + key);
    }
    return out;
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::DegenerateLattice:
        return kExitDegenerate;
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::OffCurveInitialData:
        return kExitNoConvergence;
    case ErrorCode::NonRealValue:
        return kExitResidualFailure;
    case ErrorCode::EvenPeriod:
        return kExitEvenPeriod;
    case ErrorCode::InvalidArgument:
        return kExitUsage;
    case ErrorCode::PoleProximity:
    case ErrorCode::RangeOverflow:
    case ErrorCode::ImmediateBlowup:
    case ErrorCode::SingularReconstruction:
        return kExitEvaluation;
    }
    return kExitEvaluation;
}

void apply_setting(RunConfig& config, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "expected key=value, got '" + assignment + "'");
    }
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));

    if (key == "mu") {
        config.mu = parse_list(key, value);
    } else if (key == "sigma") {
        config.sigma = parse_list(key, value);
    } else if (key == "beta") {
        config.beta = parse_list(key, value);
    } else if (key == "x_end") {
        config.x_end = parse_double(key, value);
    } else if (key == "step") {
        config.step = parse_double(key, value);
    } else if (key == "format") {
        if (value == "csv") {
            config.format = OutputFormat::Csv;
        } else if (value == "json") {
            config.format = OutputFormat::Json;
        } else {
            throw Error(ErrorCode::InvalidArgument, "format must be csv or json");
        }
    } else if (key == "pole_mask_halfwidth") {
        config.pole_mask_halfwidth = parse_double(key, value);
    } else if (key == "blowup_threshold") {
        config.blowup_threshold = parse_double(key, value);
    } else if (key == "tolerance") {
        config.tolerance = parse_double(key, value);
    } else if (key == "quartic_tolerance") {
        config.quartic_tolerance = parse_double(key, value);
    } else if (key == "ode_tolerance") {
        config.ode_tolerance = parse_double(key, value);
    } else if (key == "initial_tolerance") {
        config.initial_tolerance = parse_double(key, value);
    } else if (key == "conservation_tolerance") {
        config.conservation_tolerance = parse_double(key, value);
    } else if (key == "lame_alpha") {
        const auto parts = parse_list(key, value);
        if (parts.size() > 2) {
            throw Error(ErrorCode::InvalidArgument, "lame_alpha takes re or re,im");
        }
        config.lame_alpha = complex(parts[0], parts.size() == 2 ? parts[1] : 0.0);
    } else if (key == "lame_samples") {
        const double n = parse_double(key, value);
        if (n < 2 || n != std::floor(n)) {
            throw Error(ErrorCode::InvalidArgument, "lame_samples must be an integer >= 2");
        }
        config.lame_samples = static_cast<int>(n);
    } else if (key == "perturb_x0") {
        config.perturb_x0 = parse_double(key, value);
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
}

RunConfig load_config(std::istream& in)
{
    RunConfig config;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        if (trim(line).empty()) {
            continue;
        }
        try {
            apply_setting(config, line);
        } catch (const Error& e) {
            throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(number) + ": " + e.what());
        }
    }
    return config;
}

RunConfig load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::InvalidArgument, "cannot read config file " + path);
    }
    return load_config(in);
}

void validate(const RunConfig& config)
{
    auto positive = [](const char* name, double v) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be positive");
        }
    };
    positive("step", config.step);
    positive("x_end", config.x_end);
    positive("pole_mask_halfwidth", config.pole_mask_halfwidth);
    positive("blowup_threshold", config.blowup_threshold);
    positive("tolerance", config.tolerance);
    positive("quartic_tolerance", config.quartic_tolerance);
    positive("ode_tolerance", config.ode_tolerance);
    positive("initial_tolerance", config.initial_tolerance);
    positive("conservation_tolerance", config.conservation_tolerance);
    if (config.mu.size() != config.sigma.size()) {
        throw Error(ErrorCode::InvalidArgument, "mu and sigma need the same length");
    }
    if (!config.beta.empty() && config.beta.size() != config.mu.size()) {
        throw Error(ErrorCode::InvalidArgument, "beta needs the same length as mu");
    }
}

std::string format_double(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace dressing::cli
