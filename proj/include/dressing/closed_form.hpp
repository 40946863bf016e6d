#pragma once

#include <array>
#include <memory>
#include <vector>

#include "dressing/chain.hpp"
#include "dressing/elliptic.hpp"

namespace dressing {

/// sigma_1(x) = zeta(x + nu + x0) - zeta(x - nu + x0) - zeta(2 nu) on the lattice
/// (g2, g3), together with the data needed to rebuild sigma_2 and sigma_3.
///
/// Immutable after construction; copies share the lattice evaluator.
class ClosedFormSolution {
public:
    /// Realness tolerance for values returned on the real axis.
    static constexpr double kImagTolerance = 1e-8;
    /// |C - sigma_1| below this makes sigma_2, sigma_3 unrecoverable.
    static constexpr double kSingularThreshold = 1e-10;

    /// Throws ConvergenceFailure when p(2 nu) differs from (mu_3 + mu_2 - 2 mu_1 + C^2) / 3
    /// by more than 1e-9.
    ClosedFormSolution(complex nu, complex x0, const EllipticInvariants& inv, double c, std::array<double, 3> mu);

    complex nu() const noexcept { return nu_; }
    complex x0() const noexcept { return x0_; }
    const EllipticInvariants& invariants() const noexcept { return weierstrass_->invariants(); }
    const Weierstrass& weierstrass() const noexcept { return *weierstrass_; }
    double c() const noexcept { return c_; }
    const std::array<double, 3>& mu() const noexcept { return mu_; }
    ChainParams params() const { return ChainParams({mu_[0], mu_[1], mu_[2]}); }

    /// Quartic of sigma_1 read off the lattice: a = p(2 nu), b = p'(2 nu), d = g2 - 3a^2.
    QuarticCurve quartic() const noexcept { return quartic_; }

    /// Complex-valued sigma_1 and its first two derivatives at any complex x.
    complex sigma1(complex x) const;
    complex sigma1_prime(complex x) const;
    complex sigma1_second(complex x) const;

    /// Real points x_p (mod the lattice) where some sigma_i is singular:
    /// the poles -nu - x0 (residue +1) and nu - x0 (residue -1) of sigma_1, and the
    /// crossing sigma_1 = C with sigma_1' = mu_2 - mu_3 (the other crossing is removable).
    /// Entries are complex; only those on the real axis matter for real x.
    const std::vector<complex>& singular_points() const noexcept { return singular_; }

    /// Distance from real x to the nearest singular point modulo the lattice.
    double singular_distance(double x) const;

private:
    std::shared_ptr<const Weierstrass> weierstrass_;
    complex nu_{};
    complex x0_{};
    double c_ = 0.0;
    std::array<double, 3> mu_{};
    complex zeta_2nu_{};
    QuarticCurve quartic_{};
    std::vector<complex> singular_;
};

/// Real sigma_1(x). Throws PoleProximity near a pole and NonRealValue when the
/// imaginary part exceeds kImagTolerance (relative to max(1, |sigma_1|)).
double sigma1_at(double x, const ClosedFormSolution& sol);

/// -p(x + nu + x0) + p(x - nu + x0).
double sigma1_prime_at(double x, const ClosedFormSolution& sol);

/// (sigma_1, sigma_2, sigma_3) at x from sigma_2 + sigma_3 = C - sigma_1 and
/// sigma_3 - sigma_2 = (sigma_1' - mu_3 + mu_2) / (C - sigma_1). Near C - sigma_1 = 0
/// the difference comes from the integral A instead, so the removable crossing is finite.
/// Throws SingularReconstruction at a genuine pole (|C - sigma_1| < kSingularThreshold).
ChainState reconstruct_full_state(double x, const ClosedFormSolution& sol);

/// Derivative of reconstruct_full_state: analytic, or a centred difference near sigma_1 = C.
std::vector<double> reconstruct_derivative(double x, const ClosedFormSolution& sol);

/// Phase x0 with sigma_1(0) = sigma1_initial and sigma_1'(0) = sigma1_prime_initial.
///
/// Solves p(x0) = p(nu) - p'(nu) / (s - 2 zeta(nu) + zeta(2 nu)) through invert_p,
/// picks the sign of x0 that matches the derivative and polishes with Newton.
/// Throws OffCurveInitialData when (s, s') is not on the quartic within 1e-8 and
/// ConvergenceFailure when the polished phase misses either condition.
complex fit_shift(double sigma1_initial, double sigma1_prime_initial, complex nu, const EllipticInvariants& inv);

/// Full pipeline for N = 3: C, A -> quartic -> (g2, g3) -> nu -> x0.
ClosedFormSolution solve_closed_form(const ChainParams& params, const ChainState& initial);

}  // namespace dressing
