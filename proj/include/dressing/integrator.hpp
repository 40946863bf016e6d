#pragma once

#include <cstdint>
#include <vector>

#include "dressing/chain.hpp"

namespace dressing {

struct IntegratorConfig {
    /// Integration stops once any |sigma_i| exceeds this bound.
    double blowup_threshold = 1e8;
};

/// RK4 samples of the chain on a uniform grid.
struct Trajectory {
    std::vector<double> grid;
    std::vector<ChainState> states;
    /// 1 where the point falls in a pole window and is excluded from reports.
    std::vector<std::uint8_t> masked;
    /// Set when integration stopped early at the blow-up bound.
    bool blew_up = false;

    std::size_t size() const noexcept { return grid.size(); }
};

/// One classical Runge-Kutta step of size h (h may be negative).
ChainState rk4_step(const ChainState& state, const ChainParams& params, double h);

/// Points k * step for k = 0, 1, ... below x_end, then x_end itself.
std::vector<double> integration_grid(double x_end, double step);

/// Fixed-step RK4 from x = 0 to x_end. Grid points are k * step; a final
/// shorter step lands exactly on x_end. Throws InvalidArgument for step <= 0
/// or x_end < 0, EvenPeriod for even N and ImmediateBlowup when the initial
/// state already exceeds the blow-up bound.
Trajectory integrate_chain(const ChainParams& params, const ChainState& initial, double x_end, double step,
                           const IntegratorConfig& config = {});

struct ConservationReport {
    double c_drift = 0.0;
    double a_drift = 0.0;
};

/// Largest |C(x) - C(0)| and |A(x) - A(0)| over unmasked points.
ConservationReport conservation_report(const Trajectory& traj, const ChainParams& params);

/// Largest |(sigma_1')^2 - q(sigma_1)| over unmasked points, sigma_1' from chain_rhs.
double quartic_residual_report(const Trajectory& traj, const QuarticCurve& q, const ChainParams& params);

}  // namespace dressing
