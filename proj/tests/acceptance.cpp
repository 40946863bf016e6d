// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "dressing/hamiltonian.hpp"
#include "dressing/spectral.hpp"
#include "test_support.hpp"

using namespace dressing;
using namespace dressing::testing;

namespace {

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail)
{
    std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c, d);
    return buf;
}

bool degenerate(const ChainProblem& p)
{
    const auto q = quartic_coefficients(integral_C(p.initial), integral_A(p.initial, p.params), p.params);
    return curve_invariants(q).degenerate();
}

// The sample problem first, then non-degenerate random problems.
std::vector<ChainProblem> problems(std::uint64_t seed, std::size_t count)
{
    auto rng = make_rng(seed);
    std::vector<ChainProblem> out{sample_problem()};
    while (out.size() < count) {
        const auto p = random_problem(rng);
        if (!degenerate(p)) {
            out.push_back(p);
        }
    }
    return out;
}

double rel(complex a, complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

void closed_form_vs_rk4()
{
    constexpr double window = 5e-2, step = 1e-4;
    int full = 0, sets = 0;
    bool sample_full = false;
    double worst = 0.0;
    for (const auto& p : problems(61, 12)) {
        const auto sol = solve_closed_form(p.params, p.initial);
        const double period = real_period(sol);
        const auto cmp = compare_with_rk4(p, sol, period, step, window);
        worst = std::max(worst, cmp.sigma1_error);
        ++sets;
        // Full coverage: the compared range spans a real period up to the windows.
        const int poles = real_singular_count(sol);
        const double needed = period - 2.0 * window * poles - 2.0 * step;
        if (poles <= 1 && cmp.hi - cmp.lo >= needed && cmp.sigma1_error < 1e-6) {
            ++full;
            sample_full = sample_full || sets == 1;
        }
    }
    report(1, "closed-form sigma_1 matches RK4 over a real period", worst < 1e-6 && full >= 5 && sample_full,
           fmt("max |dsigma_1| = %.3g over %g sets, %g with full-period coverage (need >= 5, sample included)", worst,
               sets, full));
}

void quartic_reduction()
{
    double along_rk4 = 0.0, along_closed = 0.0;
    for (const auto& p : problems(19, 12)) {
        const auto q = quartic_coefficients(integral_C(p.initial), integral_A(p.initial, p.params), p.params);
        along_rk4 = std::max(along_rk4, quartic_residual_report(integrate_chain(p.params, p.initial, 1.0, 1e-3), q,
                                                                p.params));
        const auto sol = solve_closed_form(p.params, p.initial);
        const double period = real_period(sol);
        for (int k = 0; k < 200; ++k) {
            const double x = period * (k + 0.5) / 200.0;
            if (sol.singular_distance(x) < 5e-2) {
                continue;
            }
            const double s = sigma1_at(x, sol), ds = sigma1_prime_at(x, sol);
            along_closed = std::max(along_closed, std::abs(ds * ds - q(s)));
        }
    }
    report(2, "quartic reduction", along_rk4 < 1e-7 && along_closed < 1e-8,
           fmt("residual %.3g along RK4 (< 1e-7), %.3g along the closed form (< 1e-8)", along_rk4, along_closed));
}

void conservation()
{
    // Fixed-step RK4 loses accuracy next to a pole, so trajectories entering the
    // criterion-1 pole windows are reported separately.
    double c_drift = 0.0, a_drift = 0.0, h_drift = 0.0, near_pole = 0.0;
    int used = 0, skipped = 0;
    for (const auto& p : problems(29, 8)) {
        const auto traj = integrate_chain(p.params, p.initial, 1.0, 1e-3);
        const auto sol = solve_closed_form(p.params, p.initial);
        double closest = std::numeric_limits<double>::infinity();
        for (double x : traj.grid) {
            closest = std::min(closest, sol.singular_distance(x));
        }
        const auto r = conservation_report(traj, p.params);
        if (traj.blew_up || closest < 5e-2) {
            near_pole = std::max(near_pole, r.a_drift);
            ++skipped;
            continue;
        }
        c_drift = std::max(c_drift, r.c_drift);
        a_drift = std::max(a_drift, r.a_drift);
        for (double d : conservation_check(traj, p.params.mu())) {
            h_drift = std::max(h_drift, d);
        }
        ++used;
    }
    // Symbolic expansion frozen ahead of the build; beta = (0.5, 2, -3).
    const auto tau = tau_generating(3, std::vector<double>{0.5, 2.0, -3.0});
    const bool oracle = tau.terms().size() == 4 && tau.coefficient(0b111) == LambdaPoly{1.0} &&
                        tau.coefficient(0b100) == LambdaPoly{2.0, -1.0} &&
                        tau.coefficient(0b001) == LambdaPoly{-3.0, -1.0} &&
                        tau.coefficient(0b010) == LambdaPoly{0.5, -1.0};
    report(3, "conservation and tau_3", c_drift < 1e-9 && a_drift < 1e-9 && h_drift < 1e-9 && oracle && used >= 5,
           fmt("drift C %.3g, A %.3g, h0/h1 %.3g (< 1e-9) over %g sets", c_drift, a_drift, h_drift, used) +
               fmt("; %g set(s) inside a pole window excluded (A drift %.3g)", skipped, near_pole) +
               "; expansion oracle " + (oracle ? "exact" : "MISMATCH"));
}

void elliptic_kernel()
{
    auto rng = make_rng(101);
    double ode = 0.0, dzeta = 0.0, dsigma = 0.0, quasi = 0.0, legendre = 0.0, dup = 0.0, inv_err = 0.0;
    constexpr double h = 1e-5;
    for (int i = 0; i < 12; ++i) {
        const auto inv = random_invariants(rng, i);
        const Weierstrass w(inv);
        const auto& lat = w.lattice();
        legendre = std::max(legendre, std::abs(lat.eta1 * lat.omega3 - lat.eta3 * lat.omega1 -
                                               complex(0.0, std::numbers::pi / 2.0)));
        for (int k = 0; k < 40; ++k) {
            const complex z = random_cell_point(rng, w, 0.2);
            const complex p = w.p(z), dp = w.p_prime(z);
            ode = std::max(ode, std::abs(dp * dp - 4.0 * p * p * p + inv.g2 * p + inv.g3) /
                                    (1.0 + std::pow(std::abs(p), 3)));
            dzeta = std::max(dzeta, rel((w.zeta(z + h) - w.zeta(z - h)) / (2.0 * h), -p));
            dsigma = std::max(dsigma,
                              rel((std::log(w.sigma(z + h)) - std::log(w.sigma(z - h))) / (2.0 * h), w.zeta(z)));
            for (auto [om, eta] : {std::pair{lat.omega1, lat.eta1}, std::pair{lat.omega3, lat.eta3}}) {
                quasi = std::max(quasi, std::abs(w.zeta(z + 2.0 * om) - w.zeta(z) - 2.0 * eta) /
                                            std::max(1.0, std::abs(w.zeta(z))));
                quasi = std::max(quasi, rel(w.p(z + 2.0 * om), p));
                quasi = std::max(quasi, rel(w.sigma(z + 2.0 * om) / w.sigma(z), -std::exp(2.0 * eta * (z + om))));
            }
            if (w.lattice_distance(2.0 * z) > 0.1 * std::abs(lat.omega1) && std::abs(dp) > 1e-3) {
                const complex ratio = w.p_second(z) / dp;
                dup = std::max(dup, rel(w.p(2.0 * z), -2.0 * p + 0.25 * ratio * ratio));
            }
            const complex back = w.invert_p(p);
            inv_err = std::max(inv_err, rel(w.p(back), p));
        }
    }
    const bool pass = ode < 1e-10 && dzeta < 1e-7 && dsigma < 1e-7 && quasi < 1e-9 && legendre < 1e-10 &&
                      dup < 1e-9 && inv_err < 1e-10;
    report(4, "elliptic kernel identities on 12 invariant pairs", pass,
           fmt("p'^2 %.2g, zeta' %.2g, sigma'/sigma %.2g, quasi-periodicity %.2g", ode, dzeta, dsigma, quasi) +
               fmt(", Legendre %.2g, duplication %.2g, invert_p %.2g", legendre, dup, inv_err));
}

void curve_membership()
{
    double curve = 0.0, level = 0.0;
    int sets = 0;
    for (const auto& p : problems(37, 25)) {
        const double c = integral_C(p.initial);
        const auto q = quartic_coefficients(c, integral_A(p.initial, p.params), p.params);
        const auto inv = curve_invariants(q);
        const Weierstrass w(inv);
        const complex nu = uniformization_parameter(q);
        const complex a = w.p(2.0 * nu), b = w.p_prime(2.0 * nu);
        curve = std::max(curve, std::abs(b * b - (4.0 * a * a * a - inv.g2 * a - inv.g3)) /
                                    (1.0 + std::pow(std::abs(a), 3)));
        const auto mu = p.params.mu();
        const double expected = (mu[2] + mu[1] - 2.0 * mu[0] + c * c) / 3.0;
        level = std::max(level, std::abs(a - expected) / std::max(1.0, std::abs(expected)));
        ++sets;
    }
    report(5, "curve membership of (p'(2 nu), p(2 nu))", curve < 1e-10 && level < 1e-9,
           fmt("curve residual %.3g (< 1e-10), p(2 nu) level %.3g (< 1e-9) over %g sets", curve, level, sets));
}

void lame()
{
    double residual = 0.0, scatter = 0.0;
    int samples = 0, fits = 0;
    for (const auto& p : problems(43, 6)) {
        const auto sol = solve_closed_form(p.params, p.initial);
        const Weierstrass& w = sol.weierstrass();
        const double period = real_period(sol);
        // alpha = -2 nu (the chain's spectral point) and a generic complex alpha.
        for (const complex alpha : {-2.0 * sol.nu(), 0.37 * w.lattice().omega1 + 0.61 * w.lattice().omega3}) {
            const LameProblem prob(alpha, sol.invariants());
            for (int k = 0; k < 10; ++k) {
                const double x = period * (k + 0.5) / 10.0;
                if (w.lattice_distance(x) < 0.1 * period || w.lattice_distance(alpha - x) < 0.1 * period) {
                    continue;
                }
                residual = std::max(residual,
                                    std::abs(lame_residual(x, prob)) / std::max(1.0, std::abs(lame_psi(x, prob))));
                ++samples;
            }
        }
        std::vector<double> xs, qs;
        for (int k = 0; k < 60; ++k) {
            const double x = period * (k + 0.5) / 60.0;
            if (sol.singular_distance(x) > 5e-2) {
                xs.push_back(x);
                qs.push_back(potential_from_sigma(sol, 1, x));
            }
        }
        const auto fit = fit_lame_potential(xs, qs, w, sol.nu() - sol.x0() + complex(0.03, -0.02),
                                            sol.quartic().a + sol.mu()[0] + 0.1);
        scatter = std::max(scatter, fit.offset_scatter);
        ++fits;
    }
    report(6, "Lame eigen-relation and potential fit", residual < 1e-5 && samples >= 20 && scatter < 1e-7,
           fmt("residual %.3g (< 1e-5) on %g samples, fit scatter %.3g (< 1e-7) over %g fits", residual, samples,
               scatter, fits));
}

void quartic_oracle()
{
    double worst = 0.0;
    int checked = 0;
    auto rng = make_rng(19);
    std::vector<ChainProblem> ps{sample_problem()};
    while (ps.size() < 16) {
        ps.push_back(random_problem(rng));
    }
    for (const auto& p : ps) {
        const auto traj = integrate_chain(p.params, p.initial, 1.0, 1e-3);
        std::vector<double> s1, rhs;
        for (const auto& st : traj.states) {
            const double ds = chain_rhs(st, p.params)[0];
            s1.push_back(st[0]);
            rhs.push_back(ds * ds - std::pow(st[0], 4));
        }
        if (*std::max_element(s1.begin(), s1.end()) - *std::min_element(s1.begin(), s1.end()) < 0.1) {
            continue;
        }
        const auto coef =
            least_squares(s1, rhs, 3, [](double s) { return std::vector<double>{-6.0 * s * s, 4.0 * s, 1.0}; });
        const auto q = quartic_coefficients(integral_C(p.initial), integral_A(p.initial, p.params), p.params);
        worst = std::max({worst, std::abs(coef[0] - q.a), std::abs(coef[1] - q.b), std::abs(coef[2] - q.d)});
        ++checked;
    }
    report(7, "b, d formulas against the trajectory-fit oracle", worst < 1e-7 && checked >= 10,
           fmt("max |coefficient - oracle| %.3g (< 1e-7) over %g sets", worst, checked));
}

double max_diff(const ChainState& a, const ChainState& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

void convergence()
{
    const auto p = sample_problem();
    auto endpoint = [&](double h) { return integrate_chain(p.params, p.initial, 0.8, h).states.back(); };
    const double ratio = max_diff(endpoint(0.04), endpoint(0.02)) / max_diff(endpoint(0.02), endpoint(0.01));

    // Deviation from the closed form at x = 0.8 while the step shrinks.
    const auto sol = solve_closed_form(p.params, p.initial);
    const auto exact = reconstruct_full_state(0.8, sol);
    std::vector<double> dev;
    for (double h = 0.04; h > 1e-4; h /= 2.0) {
        dev.push_back(max_diff(endpoint(h), exact));
    }
    // Fourth-order decay until the error reaches 1e-9, then a floor no higher than 1e-9.
    bool decays = true;
    for (std::size_t k = 1; k < dev.size(); ++k) {
        if (dev[k - 1] > 1e-8) {
            decays = decays && dev[k - 1] / dev[k] > 12.0;
        }
    }
    const double floor = dev.back();
    report(8, "RK4 order and closed-form floor", ratio >= 12.0 && ratio <= 20.0 && decays && floor < 1e-9,
           fmt("Richardson ratio %.3f (in [12, 20]); deviation %.3g at h = 0.04, floor %.3g (<= 1e-9) at h = %.3g",
               ratio, dev.front(), floor, 0.04 / std::pow(2.0, double(dev.size() - 1))));
}

int shell(const std::string& args)
{
    const int status = std::system((std::string(DRESSING_TOOL) + " " + args).c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void determinism()
{
    const std::string cfg = "acceptance_determinism.cfg";
    std::ofstream(cfg) << "mu = 0, 1, 2\nsigma = 0.3, -0.1, 0.5\nx_end = 1.5\nstep = 1e-3\n";
    int compared = 0, identical = 0;
    for (const char* cmd : {"invariants", "solve", "verify", "tau", "lame"}) {
        for (const char* format : {"csv", "json"}) {
            std::string outputs[2];
            for (int run = 0; run < 2; ++run) {
                const std::string stem = std::string("acceptance_") + cmd + "_" + format + std::to_string(run);
                shell(std::string(cmd) + " --config " + cfg + " --format " + format + " --out " + stem + ".data > " +
                      stem + ".summary 2>&1");
                outputs[run] = slurp(stem + ".data") + "\x1f" + slurp(stem + ".summary");
                std::remove((stem + ".data").c_str());
                std::remove((stem + ".summary").c_str());
            }
            ++compared;
            identical += (!outputs[0].empty() && outputs[0] == outputs[1]) ? 1 : 0;
        }
    }
    std::remove(cfg.c_str());
    report(9, "CLI determinism", identical == compared,
           fmt("%g of %g command/format pairs byte-identical across two runs", identical, compared));
}

}  // namespace

int main()
{
    const std::vector<void (*)()> criteria{closed_form_vs_rk4, quartic_reduction, conservation,
                                           elliptic_kernel,    curve_membership,  lame,
                                           quartic_oracle,     convergence,       determinism};
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        try {
            criteria[i]();
        } catch (const std::exception& e) {
            report(int(i) + 1, "criterion", false, std::string("threw: ") + e.what());
        }
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
