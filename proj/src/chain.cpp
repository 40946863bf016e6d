#include "dressing/chain.hpp"

#include <cmath>
#include <sstream>

namespace dressing {

ChainParams::ChainParams(std::vector<double> mu) : mu_(std::move(mu))
{
    if (mu_.empty()) {
        throw Error(ErrorCode::InvalidArgument, "chain period must be positive");
    }
    for (double m : mu_) {
        if (!std::isfinite(m)) {
            throw Error(ErrorCode::InvalidArgument, "mu must be finite");
        }
    }
}

bool QuarticCurve::degenerate() const noexcept { return curve_invariants(*this).degenerate(); }

void require_period_three(const ChainParams& params)
{
    if (params.n() != 3) {
        throw Error(ErrorCode::InvalidArgument, "operation is defined for period N = 3 only");
    }
}

std::vector<double> chain_rhs(const ChainState& state, const ChainParams& params)
{
    const std::size_t n = params.n();
    if (state.size() != n) {
        throw Error(ErrorCode::InvalidArgument, "state length differs from the chain period");
    }
    if (n % 2 == 0) {
        throw Error(ErrorCode::EvenPeriod, "the cyclic system is singular for even N = " + std::to_string(n));
    }

    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = state[i] * state[i] + params.mu(i);
    }
    std::vector<double> out(n);
    if (n == 3) {
        out[0] = p[2] - p[1];
        out[1] = p[0] - p[2];
        out[2] = p[1] - p[0];
        return out;
    }
    // r_i = p_i - p_{i+1};  sigma_i' = (r_i - r_{i+1} + ... + r_{i+N-1}) / 2.
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = p[i] - p[(i + 1) % n];
    }
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            acc += (k % 2 == 0 ? 1.0 : -1.0) * r[(i + k) % n];
        }
        out[i] = 0.5 * acc;
    }
    return out;
}

double integral_C(const ChainState& state)
{
    if (state.size() != 3) {
        throw Error(ErrorCode::InvalidArgument, "integral C is defined for N = 3");
    }
    return state[0] + state[1] + state[2];
}

double integral_A(const ChainState& state, const ChainParams& params)
{
    require_period_three(params);
    if (state.size() != 3) {
        throw Error(ErrorCode::InvalidArgument, "integral A is defined for N = 3");
    }
    const double g1 = state[0] + state[1];
    const double g2 = state[1] + state[2];
    const double g3 = state[2] + state[0];
    return g1 * g2 * g3 + params.mu(1) * g3 + params.mu(0) * g2 + params.mu(2) * g1;
}

std::vector<double> g_coordinates(const ChainState& state)
{
    const std::size_t n = state.size();
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = state[i] + state[(i + 1) % n];
    }
    return g;
}

QuarticCurve quartic_coefficients(double c, double a_int, const ChainParams& params)
{
    require_period_three(params);
    const double m1 = params.mu(0), m2 = params.mu(1), m3 = params.mu(2);
    const double c2 = c * c;
    QuarticCurve q;
    q.a = (c2 + m2 + m3 - 2.0 * m1) / 3.0;
    q.b = a_int - 2.0 * m1 * c;
    q.d = c2 * c2 + 2.0 * (2.0 * m1 + m2 + m3) * c2 - 4.0 * a_int * c + (m3 - m2) * (m3 - m2);
    return q;
}

EllipticInvariants curve_invariants(const QuarticCurve& q)
{
    return {q.d + 3.0 * q.a * q.a, q.a * q.a * q.a - q.b * q.b - q.a * q.d};
}

complex uniformization_parameter(const QuarticCurve& q)
{
    const Weierstrass w(curve_invariants(q));
    complex two_nu = w.invert_p(q.a);
    const complex dp = w.p_prime(two_nu);
    if (std::abs(dp - q.b) > std::abs(dp + q.b)) {
        two_nu = -two_nu;
    }

    const double tol_a = 1e-9 * std::max(1.0, std::abs(q.a));
    const double tol_b = 1e-9 * std::max(1.0, std::abs(q.b));
    const complex pa = w.p(two_nu), pb = w.p_prime(two_nu);
    if (std::abs(pa - q.a) > tol_a || std::abs(pb - q.b) > 1e3 * tol_b) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "p(2nu)=" << pa << ", p'(2nu)=" << pb << " do not reproduce (a, b)=(" << q.a << ", " << q.b << ")";
        throw Error(ErrorCode::ConvergenceFailure, msg.str());
    }
    return two_nu / 2.0;
}

complex uniformization_parameter(const ChainParams& params, double c, double a_int)
{
    return uniformization_parameter(quartic_coefficients(c, a_int, params));
}

}  // namespace dressing
