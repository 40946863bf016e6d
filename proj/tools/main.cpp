#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dressing/cli.hpp"

namespace cli = dressing::cli;

int main(int argc, char** argv)
{
    CLI::App app{"Closed-form and numerical solutions of the periodic dressing chain"};
    app.require_subcommand(1);

    std::string config_path, out_path, format;
    std::vector<std::string> settings;
    double tolerance = 0.0;

    const std::vector<std::pair<const char*, const char*>> commands{
        {"invariants", "Print the conserved integrals, curve invariants and nu"},
        {"solve", "Evaluate the closed-form solution on a grid"},
        {"verify", "Compare the closed form with RK4"},
        {"tau", "Expand the tau generating polynomial and check conservation"},
        {"lame", "Sample the Lame eigenfunction and fit the potential"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "key=value config file");
        sub->add_option("--out", out_path, "data file; the summary then goes to stdout");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--tolerance", tolerance, "override the comparison tolerance")
            ->check(CLI::PositiveNumber);
        sub->add_option("--set", settings, "extra key=value setting (repeatable)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::kExitOk : cli::kExitUsage;
    }
    const std::string name = app.get_subcommands().front()->get_name();

    cli::RunConfig config;
    try {
        if (!config_path.empty()) {
            config = cli::load_config_file(config_path);
        }
        for (const auto& s : settings) {
            cli::apply_setting(config, s);
        }
        if (!format.empty()) {
            cli::apply_setting(config, "format=" + format);
        }
        if (tolerance > 0.0) {
            config.tolerance = tolerance;
        }
    } catch (const dressing::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kExitUsage;
    }

    if (out_path.empty()) {
        return cli::run_command(name, config, std::cout, std::cerr, std::cerr);
    }
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "error: cannot write " << out_path << '\n';
        return cli::kExitUsage;
    }
    return cli::run_command(name, config, out, std::cout, std::cerr);
}
