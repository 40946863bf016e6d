#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "dressing/chain.hpp"
#include "dressing/cli.hpp"
#include "dressing/closed_form.hpp"
#include "dressing/hamiltonian.hpp"
#include "dressing/integrator.hpp"
#include "dressing/spectral.hpp"

namespace dressing::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Rows of doubles under fixed column names, written as CSV or as a JSON array of objects.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_csv(const Table& t, std::ostream& out)
{
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        out << (c ? "," : "") << t.columns[c];
    }
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            // Flags are stored as 0/1 doubles; print them as integers.
            const bool flag = t.columns[c] == "masked";
            out << (c ? "," : "") << (flag ? std::to_string(int(row[c])) : format_double(row[c]));
        }
        out << '\n';
    }
}

json table_json(const Table& t)
{
    json rows = json::array();
    for (const auto& row : t.rows) {
        json obj = json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (t.columns[c] == "masked") {
                obj[t.columns[c]] = int(row[c]);
            } else {
                obj[t.columns[c]] = number(row[c]);
            }
        }
        rows.push_back(obj);
    }
    return rows;
}

// Data goes to `data` (CSV table or a JSON document with rows and summary);
// the summary always goes to `summary_out` as JSON.
void emit(const RunConfig& config, const Table& table, const json& summary, std::ostream& data,
          std::ostream& summary_out)
{
    if (config.format == OutputFormat::Csv) {
        write_csv(table, data);
    } else {
        json doc = json::object();
        doc["schema_version"] = kSchemaVersion;
        doc["rows"] = table_json(table);
        doc["summary"] = summary;
        data << doc.dump(2) << '\n';
    }
    summary_out << summary.dump(2) << '\n';
}

json header(const char* command)
{
    json s = json::object();
    s["schema_version"] = kSchemaVersion;
    s["command"] = command;
    return s;
}

ChainParams params_of(const RunConfig& c) { return ChainParams(c.mu); }
ChainState initial_of(const RunConfig& c) { return ChainState{c.sigma}; }

// C, A, the quartic and (G2, G3) of an N = 3 problem.
struct Reduction {
    double c = 0.0;
    double a_int = 0.0;
    QuarticCurve quartic;
    EllipticInvariants inv;
};

Reduction reduce_problem(const RunConfig& config)
{
    const ChainParams params = params_of(config);
    require_period_three(params);
    const ChainState initial = initial_of(config);
    Reduction r;
    r.c = integral_C(initial);
    r.a_int = integral_A(initial, params);
    r.quartic = quartic_coefficients(r.c, r.a_int, params);
    r.inv = curve_invariants(r.quartic);
    return r;
}

void add_reduction(json& s, const Reduction& r)
{
    s["C"] = r.c;
    s["A"] = r.a_int;
    s["a"] = r.quartic.a;
    s["b"] = r.quartic.b;
    s["d"] = r.quartic.d;
    s["G2"] = r.inv.g2.real();
    s["G3"] = r.inv.g3.real();
}

// Equilibria (chain_rhs = 0) have a degenerate curve; they are emitted as constants.
bool is_equilibrium(const RunConfig& config)
{
    const ChainState initial = initial_of(config);
    const auto rhs = chain_rhs(initial, params_of(config));
    double scale = 1.0;
    for (std::size_t i = 0; i < initial.size(); ++i) {
        scale = std::max(scale, initial[i] * initial[i] + std::abs(config.mu[i]));
    }
    return std::all_of(rhs.begin(), rhs.end(), [&](double v) { return std::abs(v) <= 4e-16 * scale; });
}

ClosedFormSolution solve_with_hook(const RunConfig& config)
{
    const ClosedFormSolution sol = solve_closed_form(params_of(config), initial_of(config));
    if (config.perturb_x0 == 0.0) {
        return sol;
    }
    return ClosedFormSolution(sol.nu(), sol.x0() + config.perturb_x0, sol.invariants(), sol.c(), sol.mu());
}

void add_phase(json& s, const ClosedFormSolution* sol)
{
    s["nu_re"] = sol ? number(sol->nu().real()) : json(nullptr);
    s["nu_im"] = sol ? number(sol->nu().imag()) : json(nullptr);
    s["x0_re"] = sol ? number(sol->x0().real()) : json(nullptr);
    s["x0_im"] = sol ? number(sol->x0().imag()) : json(nullptr);
}

}  // namespace

int cmd_invariants(const RunConfig& config, std::ostream& data, std::ostream& summary_out)
{
    const Reduction r = reduce_problem(config);
    json s = header("invariants");
    add_reduction(s, r);
    s["discriminant"] = r.inv.discriminant().real();
    int code = kExitOk;
    if (r.inv.degenerate()) {
        s["nu_re"] = nullptr;
        s["nu_im"] = nullptr;
        s["status"] = "degenerate";
        code = kExitDegenerate;
    } else {
        const complex nu = uniformization_parameter(r.quartic);
        const Weierstrass w(r.inv);
        const complex pa = w.p(2.0 * nu), pb = w.p_prime(2.0 * nu);
        const double curve = std::abs(pb * pb - (4.0 * pa * pa * pa - r.inv.g2 * pa - r.inv.g3));
        const double expected_a = (config.mu[2] + config.mu[1] - 2.0 * config.mu[0] + r.c * r.c) / 3.0;
        const double level = std::abs(pa - expected_a);
        const bool curve_ok = curve < 1e-10 * (1.0 + std::pow(std::abs(pa), 3));
        const bool level_ok = level < 1e-9 * std::max(1.0, std::abs(expected_a));
        s["nu_re"] = nu.real();
        s["nu_im"] = nu.imag();
        s["curve_residual"] = curve;
        s["curve_check"] = curve_ok ? "PASS" : "FAIL";
        s["level_residual"] = level;
        s["level_check"] = level_ok ? "PASS" : "FAIL";
        s["status"] = (curve_ok && level_ok) ? "pass" : "fail";
        code = (curve_ok && level_ok) ? kExitOk : kExitResidualFailure;
    }

    if (config.format == OutputFormat::Csv) {
        data << "key,value\n";
        for (const auto& [key, value] : s.items()) {
            data << key << ',';
            if (value.is_number_float()) {
                data << format_double(value.get<double>());
            } else if (value.is_null()) {
                data << "nan";
            } else if (value.is_string()) {
                data << value.get<std::string>();
            } else {
                data << value.dump();
            }
            data << '\n';
        }
    } else {
        data << s.dump(2) << '\n';
    }
    summary_out << s.dump(2) << '\n';
    return code;
}

int cmd_solve(const RunConfig& config, std::ostream& data, std::ostream& summary_out)
{
    const Reduction r = reduce_problem(config);
    const ChainParams params = params_of(config);
    const ChainState initial = initial_of(config);
    const std::vector<double> grid = integration_grid(config.x_end, config.step);
    json s = header("solve");
    add_reduction(s, r);

    Table t{{"x", "sigma1", "sigma2", "sigma3", "sigma1_prime", "quartic_residual", "ode_residual", "masked"}, {}};
    double max_quartic = 0.0, max_ode = 0.0, initial_mismatch = 0.0;
    std::size_t masked_rows = 0;

    const bool equilibrium = r.inv.degenerate() && is_equilibrium(config);
    if (equilibrium) {
        add_phase(s, nullptr);
        const double quartic = std::abs(r.quartic(initial[0]));
        for (double x : grid) {
            t.rows.push_back({x, initial[0], initial[1], initial[2], 0.0, quartic, 0.0, 0.0});
            max_quartic = std::max(max_quartic, quartic);
        }
    } else {
        const ClosedFormSolution sol = solve_with_hook(config);
        add_phase(s, &sol);
        const auto st0 = reconstruct_full_state(0.0, sol);
        for (std::size_t i = 0; i < 3; ++i) {
            initial_mismatch =
                std::max(initial_mismatch, std::abs(st0[i] - initial[i]) / (1.0 + std::abs(initial[i])));
        }
        for (double x : grid) {
            if (sol.singular_distance(x) < config.pole_mask_halfwidth) {
                t.rows.push_back({x, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, 1.0});
                ++masked_rows;
                continue;
            }
            const auto st = reconstruct_full_state(x, sol);
            const double ds1 = sigma1_prime_at(x, sol);
            // Residuals are scaled so that they stay meaningful next to the poles.
            const double quartic =
                std::abs(ds1 * ds1 - r.quartic(st[0])) / (1.0 + std::pow(st[0], 4) + ds1 * ds1);
            const auto der = reconstruct_derivative(x, sol);
            const auto rhs = chain_rhs(st, params);
            double ode = 0.0, scale = 1.0;
            for (std::size_t i = 0; i < 3; ++i) {
                ode = std::max(ode, std::abs(der[i] - rhs[i]));
                scale = std::max(scale, std::abs(rhs[i]));
            }
            ode /= scale;
            max_quartic = std::max(max_quartic, quartic);
            max_ode = std::max(max_ode, ode);
            t.rows.push_back({x, st[0], st[1], st[2], ds1, quartic, ode, 0.0});
        }
    }

    const bool pass = max_quartic <= config.quartic_tolerance && max_ode <= config.ode_tolerance &&
                      initial_mismatch <= config.initial_tolerance;
    s["equilibrium"] = equilibrium;
    s["rows"] = grid.size();
    s["masked_rows"] = masked_rows;
    s["max_residuals"] = {{"quartic", max_quartic}, {"ode", max_ode}, {"initial", initial_mismatch}};
    s["tolerances"] = {
        {"quartic", config.quartic_tolerance}, {"ode", config.ode_tolerance}, {"initial", config.initial_tolerance}};
    s["status"] = pass ? "pass" : "fail";
    emit(config, t, s, data, summary_out);
    return pass ? kExitOk : kExitResidualFailure;
}

int cmd_verify(const RunConfig& config, std::ostream& data, std::ostream& summary_out)
{
    const Reduction r = reduce_problem(config);
    const ChainParams params = params_of(config);
    const ChainState initial = initial_of(config);
    const Trajectory traj =
        integrate_chain(params, initial, config.x_end, config.step, IntegratorConfig{config.blowup_threshold});
    json s = header("verify");
    add_reduction(s, r);

    const bool equilibrium = r.inv.degenerate() && is_equilibrium(config);
    std::optional<ClosedFormSolution> sol;
    if (!equilibrium) {
        sol = solve_with_hook(config);
    }
    add_phase(s, sol ? &*sol : nullptr);

    Table t{{"x", "sigma1_closed", "sigma2_closed", "sigma3_closed", "sigma1_rk4", "sigma2_rk4", "sigma3_rk4", "dsigma1",
             "dsigma2", "dsigma3", "masked"},
            {}};
    double max_dev = 0.0;
    std::size_t masked_rows = 0, compared = 0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double x = traj.grid[k];
        const ChainState& rk = traj.states[k];
        if (sol && sol->singular_distance(x) < config.pole_mask_halfwidth) {
            t.rows.push_back({x, kNaN, kNaN, kNaN, rk[0], rk[1], rk[2], kNaN, kNaN, kNaN, 1.0});
            ++masked_rows;
            continue;
        }
        const ChainState cf = sol ? reconstruct_full_state(x, *sol) : initial;
        std::vector<double> row{x, cf[0], cf[1], cf[2], rk[0], rk[1], rk[2]};
        for (std::size_t i = 0; i < 3; ++i) {
            const double dev = std::abs(cf[i] - rk[i]);
            row.push_back(dev);
            max_dev = std::max(max_dev, dev);
        }
        row.push_back(0.0);
        t.rows.push_back(row);
        ++compared;
    }

    const bool pass = max_dev < config.tolerance;
    s["equilibrium"] = equilibrium;
    s["rows"] = traj.size();
    s["compared_rows"] = compared;
    s["masked_rows"] = masked_rows;
    s["truncated"] = traj.blew_up;
    s["compared_until"] = traj.grid.back();
    s["max_deviation"] = max_dev;
    s["tolerance"] = config.tolerance;
    s["status"] = pass ? "pass" : "fail";
    emit(config, t, s, data, summary_out);
    return pass ? kExitOk : kExitResidualFailure;
}

int cmd_tau(const RunConfig& config, std::ostream& data, std::ostream& summary_out)
{
    const std::size_t n = config.mu.size();
    const std::vector<double>& beta = config.beta.empty() ? config.mu : config.beta;
    const TauPolynomial tau = tau_generating(n, beta);
    const std::size_t degree = (n - 1) / 2;

    Table t{{"monomial"}, {}};
    for (std::size_t k = 0; k <= degree; ++k) {
        t.columns.push_back("lambda" + std::to_string(k));
    }
    // Map order: ascending bitmask, which is deterministic.
    json terms = json::array();
    std::vector<std::string> names;
    for (const auto& [mono, coeff] : tau.terms()) {
        std::string name;
        for (std::size_t i = 0; i < n; ++i) {
            if (mono & (1u << i)) {
                name += (name.empty() ? "g" : "*g") + std::to_string(i + 1);
            }
        }
        if (name.empty()) {
            name = "1";
        }
        std::vector<double> padded(degree + 1, 0.0);
        std::copy(coeff.begin(), coeff.end(), padded.begin());
        names.push_back(name);
        t.rows.push_back(padded);
        terms.push_back({{"monomial", name}, {"coefficients", padded}});
    }

    const ChainParams params(config.mu);
    const Trajectory traj = integrate_chain(params, initial_of(config), config.x_end, config.step,
                                            IntegratorConfig{config.blowup_threshold});
    const auto h0 = extract_h(tau, g_coordinates(initial_of(config)));
    const auto drift = conservation_check(traj, beta);
    const bool asserted = n == 3 && beta == config.mu;
    const bool pass =
        !asserted || std::all_of(drift.begin(), drift.end(), [&](double d) { return d < config.conservation_tolerance; });

    json s = header("tau");
    s["N"] = n;
    s["beta"] = beta;
    s["lambda_degree"] = tau.lambda_degree();
    s["terms"] = tau.terms().size();
    s["h"] = h0;
    s["drift"] = drift;
    s["truncated"] = traj.blew_up;
    s["conservation_asserted"] = asserted;
    s["conservation_tolerance"] = config.conservation_tolerance;
    s["status"] = pass ? "pass" : "fail";

    if (config.format == OutputFormat::Csv) {
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            data << (c ? "," : "") << t.columns[c];
        }
        data << '\n';
        for (std::size_t k = 0; k < t.rows.size(); ++k) {
            data << names[k];
            for (double v : t.rows[k]) {
                data << ',' << format_double(v);
            }
            data << '\n';
        }
    } else {
        json doc = json::object();
        doc["schema_version"] = kSchemaVersion;
        doc["terms"] = terms;
        doc["summary"] = s;
        data << doc.dump(2) << '\n';
    }
    summary_out << s.dump(2) << '\n';
    return pass ? kExitOk : kExitResidualFailure;
}

int cmd_lame(const RunConfig& config, std::ostream& data, std::ostream& summary_out)
{
    const Reduction r = reduce_problem(config);
    const ClosedFormSolution sol = solve_with_hook(config);
    const Weierstrass& w = sol.weierstrass();
    const bool shifted = std::isnan(config.lame_alpha.real());
    const complex alpha = shifted ? -2.0 * sol.nu() : config.lame_alpha;
    const LameProblem prob(alpha, sol.invariants());
    const double period = 2.0 * w.lattice().omega1.real();
    const double margin = 0.05 * std::min(1.0, period);

    Table t{{"x", "psi_re", "psi_im", "eigen_residual", "q1", "q1_fit_residual", "masked"}, {}};
    std::vector<double> fit_x, fit_q;
    double max_residual = 0.0, identification = 0.0;
    const int n = config.lame_samples;
    for (int k = 0; k < n; ++k) {
        const double x = period * (k + 0.5) / n;
        const bool psi_ok = w.lattice_distance(x) > margin && w.lattice_distance(alpha - x) > margin;
        const bool q_ok = sol.singular_distance(x) > margin;
        double psi_re = kNaN, psi_im = kNaN, res = kNaN, q1 = kNaN;
        if (psi_ok) {
            const complex psi = lame_psi(x, prob);
            psi_re = psi.real();
            psi_im = psi.imag();
            res = std::abs(lame_residual(x, prob)) / std::max(1.0, std::abs(psi));
            max_residual = std::max(max_residual, res);
        }
        if (q_ok) {
            q1 = potential_from_sigma(sol, 1, x);
            fit_x.push_back(x);
            fit_q.push_back(q1);
            identification = std::max(identification, std::abs(sigma1_from_lame(x, sol) - sol.sigma1(x)));
        }
        t.rows.push_back({x, psi_re, psi_im, res, q1, kNaN, (psi_ok && q_ok) ? 0.0 : 1.0});
    }

    json s = header("lame");
    add_reduction(s, r);
    add_phase(s, &sol);
    s["alpha_re"] = alpha.real();
    s["alpha_im"] = alpha.imag();
    s["eigenvalue_re"] = prob.eigenvalue().real();
    s["eigenvalue_im"] = prob.eigenvalue().imag();
    const complex bloch = bloch_multiplier(prob);
    s["bloch_re"] = bloch.real();
    s["bloch_im"] = bloch.imag();
    s["max_eigen_residual"] = max_residual;
    s["sigma1_identification_error"] = identification;

    bool pass = max_residual < 1e-5;
    if (fit_x.size() >= 3) {
        const LameFit fit =
            fit_lame_potential(fit_x, fit_q, w, sol.nu() - sol.x0(), complex(sol.quartic().a + sol.mu()[0], 0.0));
        std::size_t j = 0;
        for (auto& row : t.rows) {
            if (std::isfinite(row[4])) {
                row[5] = std::abs(fit_q[j] - 2.0 * w.p(fit_x[j] - fit.shift) - fit.offset);
                ++j;
            }
        }
        s["fit_shift_re"] = fit.shift.real();
        s["fit_shift_im"] = fit.shift.imag();
        s["fit_offset"] = fit.offset.real();
        s["fit_scatter"] = fit.offset_scatter;
        s["fit_max_residual"] = fit.max_residual;
        pass = pass && fit.offset_scatter < 1e-7;
    }
    s["status"] = pass ? "pass" : "fail";
    emit(config, t, s, data, summary_out);
    return pass ? kExitOk : kExitResidualFailure;
}

int run_command(const std::string& name, const RunConfig& config, std::ostream& data, std::ostream& summary,
                std::ostream& err)
{
    try {
        validate(config);
        if (name == "invariants") {
            return cmd_invariants(config, data, summary);
        }
        if (name == "solve") {
            return cmd_solve(config, data, summary);
        }
        if (name == "verify") {
            return cmd_verify(config, data, summary);
        }
        if (name == "tau") {
            return cmd_tau(config, data, summary);
        }
        if (name == "lame") {
            return cmd_lame(config, data, summary);
        }
        err << "unknown command '" << name << "'\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitEvaluation;
    }
}

}  // namespace dressing::cli
