#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dressing/elliptic.hpp"

namespace dressing {

/// Spectral offsets mu_1 .. mu_N of the periodically closed chain.
///
/// The per-step parameters alpha_i = mu_i - mu_{i+1} are derived on demand;
/// their cyclic sum vanishes identically.
class ChainParams {
public:
    ChainParams() = default;
    /// Throws InvalidArgument for an empty or non-finite mu.
    explicit ChainParams(std::vector<double> mu);

    std::size_t n() const noexcept { return mu_.size(); }
    std::span<const double> mu() const noexcept { return mu_; }
    double mu(std::size_t i) const { return mu_[i % mu_.size()]; }
    double alpha(std::size_t i) const { return mu(i) - mu(i + 1); }

private:
    std::vector<double> mu_;
};

/// sigma_1 .. sigma_N.
struct ChainState {
    std::vector<double> sigma;

    std::size_t size() const noexcept { return sigma.size(); }
    double operator[](std::size_t i) const { return sigma[i]; }
};

/// (sigma_1')^2 = sigma_1^4 - 6a sigma_1^2 + 4b sigma_1 + d.
struct QuarticCurve {
    double a = 0.0;
    double b = 0.0;
    double d = 0.0;

    double operator()(double s) const noexcept { return ((s * s - 6.0 * a) * s + 4.0 * b) * s + d; }
    /// Repeated root, i.e. the Weierstrass discriminant of the curve vanishes.
    bool degenerate() const noexcept;
};

/// Derivatives sigma_i' of the closed chain. For N = 3 these are
/// sigma_1' = p_3 - p_2 (and cyclic) with p_i = sigma_i^2 + mu_i; larger odd N
/// invert the cyclic system (sigma_i + sigma_{i+1})' = r_i by alternating sums.
/// Throws EvenPeriod for even N and InvalidArgument on a size mismatch.
std::vector<double> chain_rhs(const ChainState& state, const ChainParams& params);

/// C = sigma_1 + sigma_2 + sigma_3.
double integral_C(const ChainState& state);
/// A = g1 g2 g3 + mu_2 g3 + mu_1 g2 + mu_3 g1 with g_i = sigma_i + sigma_{i+1}.
double integral_A(const ChainState& state, const ChainParams& params);

/// g_i = sigma_i + sigma_{i+1}, cyclically.
std::vector<double> g_coordinates(const ChainState& state);

/// Quartic satisfied by sigma_1 on the level set (C, A):
///   a = (C^2 + mu_2 + mu_3 - 2 mu_1) / 3
///   b = A - 2 mu_1 C
///   d = C^4 + 2 (2 mu_1 + mu_2 + mu_3) C^2 - 4 A C + (mu_3 - mu_2)^2
QuarticCurve quartic_coefficients(double c, double a_int, const ChainParams& params);

/// Weierstrass invariants of the quartic: g2 = d + 3a^2, g3 = a^3 - b^2 - a d.
EllipticInvariants curve_invariants(const QuarticCurve& q);

/// nu with p(2 nu) = a and p'(2 nu) = b on the lattice of curve_invariants(q).
/// 2 nu is the invert_p branch, negated when that is needed to match the sign of b.
complex uniformization_parameter(const QuarticCurve& q);
complex uniformization_parameter(const ChainParams& params, double c, double a_int);

void require_period_three(const ChainParams& params);

}  // namespace dressing
