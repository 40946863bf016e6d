#include "dressing/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace dressing {

namespace {

bool exceeds(const ChainState& s, double bound)
{
    return std::any_of(s.sigma.begin(), s.sigma.end(), [bound](double v) { return !(std::abs(v) <= bound); });
}

ChainState axpy(const ChainState& s, double h, const std::vector<double>& k)
{
    ChainState out = s;
    for (std::size_t i = 0; i < out.sigma.size(); ++i) {
        out.sigma[i] += h * k[i];
    }
    return out;
}

// Index of the first unmasked point, or size() when there is none.
std::size_t first_unmasked(const Trajectory& traj)
{
    std::size_t i = 0;
    while (i < traj.size() && traj.masked[i]) {
        ++i;
    }
    return i;
}

}  // namespace

ChainState rk4_step(const ChainState& state, const ChainParams& params, double h)
{
    const auto k1 = chain_rhs(state, params);
    const auto k2 = chain_rhs(axpy(state, 0.5 * h, k1), params);
    const auto k3 = chain_rhs(axpy(state, 0.5 * h, k2), params);
    const auto k4 = chain_rhs(axpy(state, h, k3), params);
    ChainState out = state;
    for (std::size_t i = 0; i < out.sigma.size(); ++i) {
        out.sigma[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
}

std::vector<double> integration_grid(double x_end, double step)
{
    if (!(step > 0.0) || !(x_end >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "integration needs step > 0 and x_end >= 0");
    }
    // Tolerate x_end that is a multiple of step up to rounding.
    const auto steps = static_cast<std::size_t>(std::ceil(x_end / step - 1e-9));
    std::vector<double> grid(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        grid[k] = (k == steps) ? x_end : double(k) * step;
    }
    grid[0] = 0.0;
    return grid;
}

Trajectory integrate_chain(const ChainParams& params, const ChainState& initial, double x_end, double step,
                           const IntegratorConfig& config)
{
    if (!(step > 0.0) || !(x_end >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "integration needs step > 0 and x_end >= 0");
    }
    if (params.n() % 2 == 0) {
        throw Error(ErrorCode::EvenPeriod, "the cyclic system is singular for even N");
    }
    if (initial.size() != params.n()) {
        throw Error(ErrorCode::InvalidArgument, "state length differs from the chain period");
    }
    if (exceeds(initial, config.blowup_threshold)) {
        throw Error(ErrorCode::ImmediateBlowup, "initial state exceeds the blow-up bound");
    }

    const std::vector<double> grid = integration_grid(x_end, step);
    Trajectory traj;
    traj.grid.reserve(grid.size());
    traj.states.reserve(grid.size());
    traj.grid.push_back(0.0);
    traj.states.push_back(initial);

    ChainState state = initial;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double x = grid[k];
        state = rk4_step(state, params, x - traj.grid.back());
        if (exceeds(state, config.blowup_threshold)) {
            traj.blew_up = true;
            break;
        }
        traj.grid.push_back(x);
        traj.states.push_back(state);
    }
    traj.masked.assign(traj.grid.size(), 0);
    return traj;
}

ConservationReport conservation_report(const Trajectory& traj, const ChainParams& params)
{
    require_period_three(params);
    ConservationReport report;
    const std::size_t first = first_unmasked(traj);
    if (first == traj.size()) {
        return report;
    }
    const double c0 = integral_C(traj.states[first]);
    const double a0 = integral_A(traj.states[first], params);
    for (std::size_t i = first; i < traj.size(); ++i) {
        if (traj.masked[i]) {
            continue;
        }
        report.c_drift = std::max(report.c_drift, std::abs(integral_C(traj.states[i]) - c0));
        report.a_drift = std::max(report.a_drift, std::abs(integral_A(traj.states[i], params) - a0));
    }
    return report;
}

double quartic_residual_report(const Trajectory& traj, const QuarticCurve& q, const ChainParams& params)
{
    require_period_three(params);
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.masked[i]) {
            continue;
        }
        const double s1 = traj.states[i][0];
        const double ds1 = chain_rhs(traj.states[i], params)[0];
        worst = std::max(worst, std::abs(ds1 * ds1 - q(s1)));
    }
    return worst;
}

}  // namespace dressing
