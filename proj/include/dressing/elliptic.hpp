#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "dressing/error.hpp"

namespace dressing {

using complex = std::complex<double>;

/// Weierstrass invariants (g2, g3) of the cubic 4t^3 - g2 t - g3.
struct EllipticInvariants {
    complex g2{};
    complex g3{};

    /// g2^3 - 27 g3^2.
    complex discriminant() const noexcept { return g2 * g2 * g2 - 27.0 * g3 * g3; }

    /// True when |discriminant| < 1e-14 * max(|g2|^3, |g3|^2).
    bool degenerate() const noexcept;

    bool real() const noexcept { return g2.imag() == 0.0 && g3.imag() == 0.0; }
};

/// Roots of the Weierstrass cubic and a basis of the period lattice.
///
/// Roots are ordered by descending real part, ties broken by descending
/// imaginary part. The lattice is generated by 2*omega1 and 2*omega3 with
/// Im(omega3 / omega1) > 0. For real invariants omega1 is the positive real
/// half-period, so 2*omega1 is the primitive real period.
struct LatticeData {
    std::array<complex, 3> roots{};
    complex omega1{};
    complex omega3{};
    /// zeta(omega1), zeta(omega3).
    complex eta1{};
    complex eta3{};
};

/// Build the lattice for `inv`. Throws Error(DegenerateLattice) when the
/// discriminant vanishes.
LatticeData lattice_from_invariants(const EllipticInvariants& inv);

/// Position of z relative to the period lattice: z = reduced + 2*(m*omega1 + n*omega3),
/// with `reduced` the representative closest to the origin.
struct LatticeReduction {
    complex reduced{};
    long m = 0;
    long n = 0;
};

/// Weierstrass p, p', zeta and sigma for one fixed lattice.
///
/// Values come from the truncated Laurent expansion at the origin, applied to
/// z / 2^k and brought back with the duplication formulas; arguments are
/// reduced modulo the lattice first. Construction is O(1); every member is
/// const and safe to call concurrently.
class Weierstrass {
public:
    /// Number of Laurent coefficients c_2 .. c_25 in p(z) = 1/z^2 + sum c_k z^(2k-2).
    static constexpr std::size_t kLaurentTerms = 24;
    /// Calls closer than this to a lattice point (after reduction) throw PoleProximity.
    static constexpr double kPoleRadius = 1e-8;

    explicit Weierstrass(const EllipticInvariants& inv);

    const EllipticInvariants& invariants() const noexcept { return inv_; }
    const LatticeData& lattice() const noexcept { return lattice_; }

    complex p(complex z) const;
    complex p_prime(complex z) const;
    /// p'' = 6 p^2 - g2 / 2.
    complex p_second(complex z) const;
    complex zeta(complex z) const;
    complex sigma(complex z) const;

    /// z with p(z) = w, reduced to the lattice cell around the origin and
    /// normalised to Re(z) >= 0 (Im(z) >= 0 when Re(z) = 0).
    complex invert_p(complex w) const;

    LatticeReduction reduce(complex z) const;

    /// Distance from z to the nearest lattice point.
    double lattice_distance(complex z) const { return std::abs(reduce(z).reduced); }

    /// Laurent coefficients c_2 .. c_25 (index 0 is c_2).
    const std::array<complex, kLaurentTerms>& laurent_coefficients() const noexcept { return coeff_; }

private:
    struct Values {
        complex p;
        complex dp;
        complex zeta;
        complex log_sigma;
    };

    Values evaluate_reduced(complex r, bool want_sigma) const;
    void check_pole(complex r) const;

    EllipticInvariants inv_;
    LatticeData lattice_;
    std::array<complex, kLaurentTerms> coeff_{};
    // Gauss-reduced basis q1, q2 of the period lattice, as integer combinations
    // of 2*omega1 and 2*omega3.
    complex q1_{}, q2_{};
    std::array<long, 4> q_coords_{};
    double series_radius_ = 0.0;
};

complex weierstrass_p(complex z, const EllipticInvariants& inv);
complex weierstrass_p_prime(complex z, const EllipticInvariants& inv);
complex weierstrass_zeta(complex z, const EllipticInvariants& inv);
complex weierstrass_sigma(complex z, const EllipticInvariants& inv);
complex invert_p(complex w, const EllipticInvariants& inv);

/// Carlson's symmetric integral R_F(x, y, z) for complex arguments off the
/// negative real axis.
complex carlson_rf(complex x, complex y, complex z);

}  // namespace dressing
