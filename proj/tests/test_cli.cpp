#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "dressing/cli.hpp"
#include "dressing/hamiltonian.hpp"
#include "test_support.hpp"

using namespace dressing;
using namespace dressing::cli;
using json = nlohmann::json;

namespace {

struct Run {
    int code = 0;
    std::string data, summary, err;
};

Run run(const std::string& command, const RunConfig& config)
{
    std::ostringstream data, summary, err;
    Run r;
    r.code = run_command(command, config, data, summary, err);
    r.data = data.str();
    r.summary = summary.str();
    r.err = err.str();
    return r;
}

RunConfig with(std::initializer_list<const char*> settings)
{
    RunConfig c;
    for (const char* s : settings) {
        apply_setting(c, s);
    }
    return c;
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) {
        out.push_back(l);
    }
    return out;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) {
        out.push_back(f);
    }
    return out;
}

struct Process {
    int code = -1;
    std::string out;
};

Process shell(const std::string& args)
{
    Process p;
    const std::string cmd = std::string(DRESSING_TOOL) + " " + args;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) {
        p.out.append(buf, n);
    }
    const int status = pclose(pipe);
    p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return p;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing")
{
    std::istringstream in("# sample\nmu = 0, 1, 2\nsigma=0.3,-0.1,0.5  # initial data\n\nstep = 5e-4\nformat = json\n"
                          "lame_alpha = 0.5, 0.25\nlame_samples = 12\n");
    const RunConfig c = load_config(in);
    CHECK(c.mu == std::vector<double>{0.0, 1.0, 2.0});
    CHECK(c.sigma == std::vector<double>{0.3, -0.1, 0.5});
    CHECK(c.step == 5e-4);
    CHECK(c.format == OutputFormat::Json);
    CHECK(c.lame_alpha == complex(0.5, 0.25));
    CHECK(c.lame_samples == 12);

    std::istringstream bad("mu = 0,1,2\nstep = fast\n");
    try {
        (void)load_config(bad);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    RunConfig r;
    CHECK_THROWS_AS(apply_setting(r, "nonsense=1"), Error);
    CHECK_THROWS_AS(apply_setting(r, "no equals sign"), Error);
    CHECK_THROWS_AS(apply_setting(r, "format=xml"), Error);
    CHECK_THROWS_AS(apply_setting(r, "lame_samples=2.5"), Error);
    CHECK_THROWS_AS(apply_setting(r, "mu=1,,2"), Error);

    CHECK(run("solve", with({"step=0"})).code == kExitUsage);
    CHECK(run("solve", with({"x_end=-1"})).code == kExitUsage);
    CHECK(run("solve", with({"mu=0,1"})).code == kExitUsage);
    CHECK(run("solve", with({"beta=1,2"})).code == kExitUsage);
    CHECK(run("nope", RunConfig{}).code == kExitUsage);
}

TEST_CASE("exit code mapping")
{
    CHECK(exit_code_for(ErrorCode::DegenerateLattice) == 2);
    CHECK(exit_code_for(ErrorCode::ConvergenceFailure) == 3);
    CHECK(exit_code_for(ErrorCode::OffCurveInitialData) == 3);
    CHECK(exit_code_for(ErrorCode::NonRealValue) == 4);
    CHECK(exit_code_for(ErrorCode::EvenPeriod) == 5);
    CHECK(exit_code_for(ErrorCode::InvalidArgument) == 1);
    CHECK(exit_code_for(ErrorCode::PoleProximity) == 6);
    CHECK(exit_code_for(ErrorCode::SingularReconstruction) == 6);
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("invariants agree with the library")
{
    const auto p = testing::sample_problem();
    const double c = integral_C(p.initial), a = integral_A(p.initial, p.params);
    const auto q = quartic_coefficients(c, a, p.params);
    const auto inv = curve_invariants(q);
    const auto nu = uniformization_parameter(q);

    auto cfg = with({"format=json"});
    const Run r = run("invariants", cfg);
    REQUIRE(r.code == kExitOk);
    const json s = json::parse(r.summary);
    CHECK(s["C"].get<double>() == c);
    CHECK(s["A"].get<double>() == a);
    CHECK(s["b"].get<double>() == q.b);
    CHECK(s["d"].get<double>() == q.d);
    CHECK(s["G2"].get<double>() == inv.g2.real());
    CHECK(s["G3"].get<double>() == inv.g3.real());
    CHECK(s["nu_re"].get<double>() == nu.real());
    CHECK(s["curve_check"] == "PASS");
    CHECK(s["level_check"] == "PASS");
    CHECK(json::parse(r.data) == s);

    // CSV: key,value with %.17g numbers.
    const auto csv = lines(run("invariants", RunConfig{}).data);
    CHECK(csv.front() == "key,value");
    CHECK(std::find(csv.begin(), csv.end(), "C," + format_double(c)) != csv.end());

    // Equal mu and C = 0: a = 0 and the curve is degenerate.
    const Run d = run("invariants", with({"mu=1,1,1", "sigma=0.2,-0.2,0", "format=json"}));
    const json ds = json::parse(d.summary);
    CHECK(ds["a"].get<double>() == 0.0);
    CHECK(ds["status"] == "degenerate");
    CHECK(d.code == kExitDegenerate);
    const Run z = run("invariants", with({"mu=1,1,1", "sigma=0,0,0"}));
    CHECK(z.code == kExitDegenerate);
    CHECK(json::parse(z.summary)["nu_re"].is_null());
}

TEST_CASE("solve on the sample problem")
{
    const Run r = run("solve", RunConfig{});
    REQUIRE(r.code == kExitOk);
    const auto rows = lines(r.data);
    CHECK(rows.front() == "x,sigma1,sigma2,sigma3,sigma1_prime,quartic_residual,ode_residual,masked");
    CHECK(rows.size() == 1002);
    CHECK(split(rows[1])[0] == "0");
    CHECK(split(rows.back())[0] == "1");
    const json s = json::parse(r.summary);
    CHECK(s["max_residuals"]["ode"].get<double>() < 1e-6);
    CHECK(s["max_residuals"]["quartic"].get<double>() < 1e-8);
    CHECK(s["max_residuals"]["initial"].get<double>() < 1e-8);
    CHECK(s["equilibrium"] == false);

    // x = 0 row reproduces the initial data.
    const auto first = split(rows[1]);
    CHECK(std::abs(std::stod(first[1]) - 0.3) < 1e-12);
    CHECK(std::abs(std::stod(first[2]) + 0.1) < 1e-12);
    CHECK(std::abs(std::stod(first[3]) - 0.5) < 1e-12);
}

TEST_CASE("solve masks rows near the pole")
{
    const Run r = run("solve", with({"x_end=1.5", "step=1e-3", "pole_mask_halfwidth=1e-2"}));
    CHECK(r.code == kExitOk);
    const json s = json::parse(r.summary);
    CHECK(s["masked_rows"].get<int>() > 0);
    int masked = 0;
    for (const auto& row : lines(r.data)) {
        const auto f = split(row);
        if (f.back() == "1") {
            CHECK(f[1] == "nan");
            ++masked;
        }
    }
    CHECK(masked == s["masked_rows"].get<int>());
}

TEST_CASE("solve at an equilibrium")
{
    const Run r = run("solve", with({"mu=1,1,1", "sigma=0,0,0", "x_end=0.01"}));
    CHECK(r.code == kExitOk);
    for (const auto& row : lines(r.data)) {
        if (row[0] == 'x') {
            continue;
        }
        const auto f = split(row);
        CHECK(f[1] == "0");
        CHECK(f[5] == "0");
    }
    const json s = json::parse(r.summary);
    CHECK(s["equilibrium"] == true);
    CHECK(s["x0_re"].is_null());
}

TEST_CASE("solve rejects a corrupted phase")
{
    const Run r = run("solve", with({"perturb_x0=1e-3"}));
    CHECK(r.code == kExitResidualFailure);
    CHECK(json::parse(r.summary)["status"] == "fail");
}

TEST_CASE("degenerate lattice off equilibrium")
{
    // Equal mu with C = 0 gives g2 = g3 = 0 while the state still moves.
    const Run r = run("solve", with({"mu=1,1,1", "sigma=0.2,-0.2,0"}));
    CHECK(r.code == kExitDegenerate);
    CHECK(r.err.find("DegenerateLattice") != std::string::npos);
}

TEST_CASE("verify against RK4")
{
    Run r = run("verify", RunConfig{});
    REQUIRE(r.code == kExitOk);
    json s = json::parse(r.summary);
    CHECK(s["max_deviation"].get<double>() < 1e-6);
    CHECK(s["truncated"] == false);
    CHECK(lines(r.data).front() ==
          "x,sigma1_closed,sigma2_closed,sigma3_closed,sigma1_rk4,sigma2_rk4,sigma3_rk4,dsigma1,dsigma2,dsigma3,masked");

    // Past the pole near x = 1.258 the RK4 run blows up and the comparison stops.
    r = run("verify", with({"x_end=3", "pole_mask_halfwidth=5e-2"}));
    s = json::parse(r.summary);
    CHECK(s["truncated"] == true);
    CHECK(s["compared_until"].get<double>() < 1.3);
    CHECK(s["compared_until"].get<double>() > 1.2);

    // An impossible tolerance fails.
    r = run("verify", with({"tolerance=1e-300"}));
    CHECK(r.code == kExitResidualFailure);
}

TEST_CASE("tau expansions")
{
    Run r = run("tau", RunConfig{});
    REQUIRE(r.code == kExitOk);
    const auto rows = lines(r.data);
    const std::vector<std::string> expected{"monomial,lambda0,lambda1", "g1,2,-1", "g2,0,-1", "g3,1,-1",
                                            "g1*g2*g3,1,0"};
    CHECK(rows == expected);
    json s = json::parse(r.summary);
    CHECK(s["h"][0].get<double>() == doctest::Approx(1.4).epsilon(1e-14));
    CHECK(s["h"][1].get<double>() == doctest::Approx(-1.264).epsilon(1e-14));
    for (const auto& d : s["drift"]) {
        CHECK(d.get<double>() < 1e-9);
    }

    r = run("tau", with({"mu=0,1,2,3,4", "sigma=0.1,0.2,0.3,0.1,0", "format=json"}));
    CHECK(r.code == kExitOk);
    s = json::parse(r.summary);
    CHECK(s["lambda_degree"] == 2);
    CHECK(s["terms"] == 11);
    CHECK(s["conservation_asserted"] == false);
    CHECK(json::parse(r.data)["terms"].size() == 11);

    r = run("tau", with({"mu=0,1,2,3", "sigma=0,0,0,0"}));
    CHECK(r.code == kExitEvenPeriod);
}

TEST_CASE("lame on the sample problem")
{
    const Run r = run("lame", with({"format=json"}));
    REQUIRE(r.code == kExitOk);
    const json doc = json::parse(r.data);
    CHECK(doc["schema_version"] == 1);
    CHECK(doc["rows"].size() == 50);
    const json& s = doc["summary"];
    CHECK(s["max_eigen_residual"].get<double>() < 1e-5);
    CHECK(s["fit_scatter"].get<double>() < 1e-7);
    CHECK(s["sigma1_identification_error"].get<double>() < 1e-10);
    CHECK(s["eigenvalue_re"].get<double>() == doctest::Approx(s["a"].get<double>()).epsilon(1e-12));
    int usable = 0;
    for (const auto& row : doc["rows"]) {
        if (row["masked"] == 0) {
            ++usable;
        }
    }
    CHECK(usable >= 20);

    // Explicit alpha.
    const Run e = run("lame", with({"lame_alpha=0.4,0.3", "lame_samples=30"}));
    CHECK(e.code == kExitOk);
    CHECK(json::parse(e.summary)["alpha_im"].get<double>() == 0.3);
}

TEST_CASE("JSON layout")
{
    const Run r = run("solve", with({"format=json", "x_end=0.01"}));
    const json doc = json::parse(r.data);
    CHECK(doc["schema_version"] == 1);
    CHECK(doc["rows"].size() == 11);
    std::vector<std::string> keys;
    for (const auto& [k, v] : doc["rows"][0].items()) {
        keys.push_back(k);
    }
    std::sort(keys.begin(), keys.end());
    CHECK(keys == std::vector<std::string>{"masked", "ode_residual", "quartic_residual", "sigma1", "sigma1_prime",
                                           "sigma2", "sigma3", "x"});
    for (const char* k : {"C", "A", "a", "b", "d", "G2", "G3", "nu_re", "nu_im", "x0_re", "x0_im", "max_residuals",
                          "masked_rows", "status"}) {
        CHECK_MESSAGE(doc["summary"].contains(k), k);
    }
}

TEST_CASE("command-line tool")
{
    // Data on stdout without --out.
    Process p = shell("solve --set x_end=0.1 2>/dev/null");
    CHECK(p.code == 0);
    CHECK(p.out.rfind("x,sigma1", 0) == 0);

    // With --out the summary goes to stdout and the data to the file.
    const std::string path = "cli_test_out.csv";
    p = shell("solve --set x_end=0.1 --out " + path);
    CHECK(p.code == 0);
    CHECK(json::parse(p.out)["status"] == "pass");
    CHECK(slurp(path).rfind("x,sigma1", 0) == 0);
    std::remove(path.c_str());

    const std::string cfg = "cli_test.cfg";
    std::ofstream(cfg) << "mu = 0, 1, 2\nsigma = 0.3, -0.1, 0.5\nx_end = 0.2\n";
    p = shell("verify --config " + cfg + " --format json --tolerance 1e-7 2>/dev/null");
    CHECK(p.code == 0);
    CHECK(json::parse(p.out)["summary"]["tolerance"].get<double>() == 1e-7);
    std::remove(cfg.c_str());

    CHECK(shell("solve --config does-not-exist.cfg 2>/dev/null").code == kExitUsage);
    CHECK(shell("frobnicate 2>/dev/null >/dev/null").code == kExitUsage);
    CHECK(shell("tau --set mu=0,1,2,3 --set sigma=0,0,0,0 2>/dev/null").code == kExitEvenPeriod);
    CHECK(shell("solve --set perturb_x0=0.01 2>/dev/null >/dev/null").code == kExitResidualFailure);

    // Byte-identical output on repeated runs.
    for (const char* cmd : {"invariants", "solve", "verify", "tau", "lame"}) {
        const Process a = shell(std::string(cmd) + " --format json 2>/dev/null");
        const Process b = shell(std::string(cmd) + " --format json 2>/dev/null");
        CHECK(a.code == 0);
        CHECK(a.out == b.out);
    }
}
