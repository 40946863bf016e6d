#pragma once

#include <memory>
#include <vector>

#include "dressing/closed_form.hpp"
#include "dressing/elliptic.hpp"

namespace dressing {

/// One-gap Lame operator -d^2/dx^2 + 2 p(x) at spectral point alpha, eigenvalue lambda = p(alpha).
class LameProblem {
public:
    /// Throws PoleProximity when alpha is on the lattice.
    LameProblem(complex alpha, const EllipticInvariants& inv);

    complex alpha() const noexcept { return alpha_; }
    const EllipticInvariants& invariants() const noexcept { return weierstrass_->invariants(); }
    const Weierstrass& weierstrass() const noexcept { return *weierstrass_; }
    complex eigenvalue() const noexcept { return lambda_; }

private:
    std::shared_ptr<const Weierstrass> weierstrass_;
    complex alpha_{};
    complex lambda_{};
};

/// Psi(x) = sigma(alpha - x) / (sigma(alpha) sigma(x)) * exp(zeta(alpha) x).
complex lame_psi(complex x, const LameProblem& prob);

/// Psi'/Psi = zeta(alpha) - zeta(x) - zeta(alpha - x), from differentiating Psi.
complex lame_log_derivative(complex x, const LameProblem& prob);

/// The displayed form zeta(alpha - x) - zeta(alpha) - zeta(x). It differs from
/// lame_log_derivative by 2 (zeta(alpha - x) - zeta(alpha)) and is kept for comparison only.
complex lame_log_derivative_printed(complex x, const LameProblem& prob);

/// Psi'' - 2 p(x) Psi - p(alpha) Psi with Psi'' from the five-point stencil at h = 1e-4.
complex lame_residual(double x, const LameProblem& prob);

/// Psi(x + 2 omega1) / Psi(x) = exp(2 zeta(alpha) omega1 - 2 eta1 alpha).
complex bloch_multiplier(const LameProblem& prob);

/// sigma_1 as a shifted Lame log-derivative: alpha = -2 nu and argument x + x0 - nu,
/// eigenvalue p(2 nu) = a.
complex sigma1_from_lame(double x, const ClosedFormSolution& sol);

/// q_i = sigma_i' + sigma_i^2 + mu_i (index 1..3), sigma_i' from chain_rhs on the
/// reconstructed state. Throws PoleProximity within 1e-8 of a singular point and
/// InvalidArgument for a bad index.
double potential_from_sigma(const ClosedFormSolution& sol, int index, double x);

/// Least-squares fit of q(x) ~ 2 p(x - shift) + offset.
struct LameFit {
    complex shift{};
    complex offset{};
    /// Largest |q(x_k) - 2 p(x_k - shift) - offset| over the samples.
    double max_residual = 0.0;
    /// Spread of the per-sample offsets q(x_k) - 2 p(x_k - shift): standard deviation.
    double offset_scatter = 0.0;
    int iterations = 0;
};

/// Gauss-Newton over (shift, offset) from the given seed. Throws ConvergenceFailure
/// when the iteration stalls with a residual above 1e-6.
LameFit fit_lame_potential(const std::vector<double>& xs, const std::vector<double>& q, const Weierstrass& w,
                           complex shift_seed, complex offset_seed);

}  // namespace dressing
