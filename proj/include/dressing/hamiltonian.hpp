#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "dressing/integrator.hpp"

namespace dressing {

/// Dense polynomial in lambda, ascending degree.
using LambdaPoly = std::vector<double>;

/// Multilinear polynomial in g_1..g_N with lambda-polynomial coefficients.
/// A monomial is the bitmask of the g indices it contains (bit i <-> g_{i+1}).
class TauPolynomial {
public:
    static constexpr std::size_t kMaxPeriod = 31;

    explicit TauPolynomial(std::size_t n_period);

    /// prod_k g_k with unit coefficient.
    static TauPolynomial full_monomial(std::size_t n_period);

    std::size_t n_period() const noexcept { return n_; }
    const std::map<std::uint32_t, LambdaPoly>& terms() const noexcept { return terms_; }

    /// Adds c * monomial; zero coefficients are dropped.
    void add(std::uint32_t monomial, const LambdaPoly& c);

    /// Coefficient of a monomial (empty when absent).
    LambdaPoly coefficient(std::uint32_t monomial) const;

    /// Highest lambda power with a nonzero coefficient, -1 for the zero polynomial.
    int lambda_degree() const;

    /// Substitutes g and collects the lambda polynomial.
    LambdaPoly evaluate(const std::vector<double>& g) const;

    /// this + zeta * d^2/dg_i dg_j (this), zeta a lambda polynomial. Indices are 0-based.
    TauPolynomial apply_factor(std::size_t i, std::size_t j, const LambdaPoly& zeta) const;

    friend bool operator==(const TauPolynomial& a, const TauPolynomial& b) { return a.n_ == b.n_ && a.terms_ == b.terms_; }

private:
    std::size_t n_;
    std::map<std::uint32_t, LambdaPoly> terms_;
};

/// tau_N = prod_j (1 + zeta_{j+1} d^2/dg_j dg_{j+1}) prod_k g_k with zeta_i = beta_i - lambda,
/// cyclic indices, factors applied right to left (j = N first).
/// Throws EvenPeriod for even N and InvalidArgument for N < 3, N > 31 or a wrong beta size.
TauPolynomial tau_generating(std::size_t n_period, std::span<const double> beta);

/// Same product with the factors applied in the given order (0-based j values, each once).
TauPolynomial tau_generating_ordered(std::size_t n_period, std::span<const double> beta,
                                     const std::vector<std::size_t>& order);

/// h_0..h_n with tau(g) = (-1)^N (h_0 lambda^n + h_1 lambda^{n-1} + ... + h_n), n = (N-1)/2.
/// For N = 3 and beta = mu this gives h_0 = 2C and h_1 = -A.
std::vector<double> extract_h(const TauPolynomial& tau, const std::vector<double>& g);

/// Largest |h_i(x) - h_i(0)| over the unmasked points of a trajectory, per i.
std::vector<double> conservation_check(const Trajectory& traj, std::span<const double> beta);

}  // namespace dressing
