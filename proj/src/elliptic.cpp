#include "dressing/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <utility>

namespace dressing {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr complex kI{0.0, 1.0};

// Roots of 4t^3 - g2 t - g3 via Cardano, polished with Newton on the cubic.
std::array<complex, 3> cubic_roots(complex g2, complex g3)
{
    const complex p = -g2 / 4.0;
    const complex q = -g3 / 4.0;
    const complex disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    complex s = -q / 2.0 + disc;
    if (std::abs(-q / 2.0 - disc) > std::abs(s)) {
        s = -q / 2.0 - disc;
    }
    const complex u = std::pow(s, 1.0 / 3.0);
    const complex w{-0.5, std::sqrt(3.0) / 2.0};
    std::array<complex, 3> roots;
    complex uk = u;
    for (auto& root : roots) {
        root = (std::abs(uk) == 0.0) ? complex{} : uk - p / (3.0 * uk);
        uk *= w;
    }
    for (auto& t : roots) {
        for (int it = 0; it < 3; ++it) {
            const complex f = 4.0 * t * t * t - g2 * t - g3;
            const complex df = 12.0 * t * t - g2;
            if (std::abs(df) == 0.0) {
                break;
            }
            t -= f / df;
        }
    }
    return roots;
}

void order_roots(std::array<complex, 3>& roots, const EllipticInvariants& inv)
{
    double scale = 0.0;
    for (const auto& r : roots) {
        scale = std::max(scale, std::abs(r));
    }
    const double tie = 1e-12 * std::max(scale, 1e-300);

    if (inv.real()) {
        if (inv.discriminant().real() > 0.0) {
            for (auto& r : roots) {
                r = complex(r.real(), 0.0);
            }
        } else {
            // One real root and a conjugate pair.
            auto real_it = std::min_element(roots.begin(), roots.end(), [](complex a, complex b) {
                return std::abs(a.imag()) < std::abs(b.imag());
            });
            *real_it = complex(real_it->real(), 0.0);
            std::array<complex*, 2> pair{};
            std::size_t k = 0;
            for (auto& r : roots) {
                if (&r != &*real_it) {
                    pair[k++] = &r;
                }
            }
            const double re = 0.5 * (pair[0]->real() + pair[1]->real());
            const double im = 0.5 * (std::abs(pair[0]->imag()) + std::abs(pair[1]->imag()));
            *pair[0] = complex(re, im);
            *pair[1] = complex(re, -im);
        }
    }

    auto before = [tie](complex a, complex b) {
        if (std::abs(a.real() - b.real()) > tie) {
            return a.real() > b.real();
        }
        return a.imag() > b.imag();
    };
    // Insertion sort on three elements keeps the tolerant comparison well defined.
    for (std::size_t i = 1; i < roots.size(); ++i) {
        for (std::size_t j = i; j > 0 && before(roots[j], roots[j - 1]); --j) {
            std::swap(roots[j], roots[j - 1]);
        }
    }
}

complex agm(complex a, complex b)
{
    for (int it = 0; it < 64; ++it) {
        if (std::abs(a - b) <= 4.0 * kEps * std::abs(a)) {
            return a;
        }
        const complex mean = 0.5 * (a + b);
        complex geo = std::sqrt(a * b);
        if (std::abs(mean - geo) > std::abs(mean + geo)) {
            geo = -geo;
        }
        a = mean;
        b = geo;
    }
    throw Error(ErrorCode::ConvergenceFailure, "arithmetic-geometric mean did not converge");
}

// Half-period omega with p(omega) = e_i, from the AGM of sqrt(e_i - e_j), sqrt(e_i - e_k).
complex half_period_for_root(complex ei, complex ej, complex ek)
{
    const complex alpha = std::sqrt(ei - ek);
    complex beta = std::sqrt(ei - ej);
    if ((beta / alpha).real() < 0.0) {
        beta = -beta;
    }
    return std::numbers::pi / (2.0 * agm(alpha, beta));
}

struct RealCoords {
    double s;
    double t;
};

RealCoords solve_coords(complex z, complex b1, complex b2)
{
    const double det = b1.real() * b2.imag() - b1.imag() * b2.real();
    return {(z.real() * b2.imag() - z.imag() * b2.real()) / det,
            (b1.real() * z.imag() - b1.imag() * z.real()) / det};
}

long round_to_long(double v)
{
    if (!std::isfinite(v) || std::abs(v) > 1e15) {
        throw Error(ErrorCode::RangeOverflow, "argument too far from the origin for lattice reduction");
    }
    return std::lround(v);
}

// Lagrange-Gauss reduction: q1 shortest, |Re(q2 / q1)| <= 1/2.
std::pair<complex, complex> gauss_reduce(complex a, complex b)
{
    if (std::abs(a) > std::abs(b)) {
        std::swap(a, b);
    }
    for (int it = 0; it < 200; ++it) {
        const double mu = std::round((b * std::conj(a)).real() / std::norm(a));
        b -= mu * a;
        if (std::abs(b) < std::abs(a)) {
            std::swap(a, b);
        } else {
            return {a, b};
        }
    }
    throw Error(ErrorCode::ConvergenceFailure, "lattice basis reduction did not terminate");
}

}  // namespace

bool EllipticInvariants::degenerate() const noexcept
{
    const double scale = std::max(std::pow(std::abs(g2), 3), std::norm(g3));
    return std::abs(discriminant()) < 1e-14 * scale || scale == 0.0;
}

Weierstrass::Weierstrass(const EllipticInvariants& inv) : inv_(inv)
{
    if (inv_.degenerate()) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "discriminant " << inv_.discriminant() << " vanishes for g2=" << inv_.g2 << ", g3=" << inv_.g3;
        throw Error(ErrorCode::DegenerateLattice, msg.str());
    }

    coeff_[0] = inv_.g2 / 20.0;
    coeff_[1] = inv_.g3 / 28.0;
    for (std::size_t k = 4; k < kLaurentTerms + 2; ++k) {
        complex acc{};
        for (std::size_t m = 2; m + 2 <= k; ++m) {
            acc += coeff_[m - 2] * coeff_[k - m - 2];
        }
        coeff_[k - 2] = 3.0 / (double(2 * k + 1) * double(k - 3)) * acc;
    }

    auto& roots = lattice_.roots;
    roots = cubic_roots(inv_.g2, inv_.g3);
    order_roots(roots, inv_);

    const complex wa = half_period_for_root(roots[0], roots[1], roots[2]);
    const complex wb = half_period_for_root(roots[2], roots[1], roots[0]);
    std::tie(q1_, q2_) = gauss_reduce(2.0 * wa, 2.0 * wb);
    if (solve_coords(q2_, q1_, q1_ * kI).t < 0.0) {
        q2_ = -q2_;
    }
    series_radius_ = 0.4 * std::abs(q1_);

    if (inv_.real()) {
        // Primitive real period first, then the shortest complementary generator
        // in the upper half plane.
        const double tol = 1e-10 * std::abs(q1_);
        complex period{};
        std::array<long, 2> pk{};
        bool found = false;
        for (long k1 = -2; k1 <= 2; ++k1) {
            for (long k2 = -2; k2 <= 2; ++k2) {
                if (std::gcd(k1, k2) != 1) {
                    continue;
                }
                const complex v = double(k1) * q1_ + double(k2) * q2_;
                if (std::abs(v.imag()) <= tol && v.real() > 0.0 && (!found || v.real() < period.real())) {
                    period = complex(v.real(), 0.0);
                    pk = {k1, k2};
                    found = true;
                }
            }
        }
        if (!found) {
            throw Error(ErrorCode::ConvergenceFailure, "no real period found for real invariants");
        }
        complex second{};
        bool have_second = false;
        for (long k1 = -2; k1 <= 2; ++k1) {
            for (long k2 = -2; k2 <= 2; ++k2) {
                if (std::abs(pk[0] * k2 - pk[1] * k1) != 1) {
                    continue;
                }
                const complex v = double(k1) * q1_ + double(k2) * q2_;
                if (v.imag() <= tol) {
                    continue;
                }
                const double len = std::abs(v);
                const double best = std::abs(second);
                if (!have_second || len < best * (1.0 - 1e-12) ||
                    (len <= best * (1.0 + 1e-12) && v.real() > second.real())) {
                    second = v;
                    have_second = true;
                }
            }
        }
        if (std::abs(second.real()) <= tol) {
            second = complex(0.0, second.imag());
        }
        lattice_.omega1 = period / 2.0;
        lattice_.omega3 = second / 2.0;
    } else {
        lattice_.omega1 = q1_ / 2.0;
        lattice_.omega3 = q2_ / 2.0;
    }

    const complex w1 = 2.0 * lattice_.omega1;
    const complex w3 = 2.0 * lattice_.omega3;
    const auto c1 = solve_coords(q1_, w1, w3);
    const auto c2 = solve_coords(q2_, w1, w3);
    q_coords_ = {round_to_long(c1.s), round_to_long(c1.t), round_to_long(c2.s), round_to_long(c2.t)};
    const long det = q_coords_[0] * q_coords_[3] - q_coords_[1] * q_coords_[2];
    if (std::abs(det) != 1) {
        throw Error(ErrorCode::ConvergenceFailure, "reduced basis is not unimodular in the half-period basis");
    }

    // zeta(z + q) - zeta(z) = 2 zeta(q / 2) for a period q.
    const complex half_inc1 = evaluate_reduced(q1_ / 2.0, false).zeta;
    const complex half_inc2 = evaluate_reduced(q2_ / 2.0, false).zeta;
    const double a = double(q_coords_[0]), b = double(q_coords_[1]);
    const double c = double(q_coords_[2]), d = double(q_coords_[3]);
    lattice_.eta1 = (d * half_inc1 - b * half_inc2) / double(det);
    lattice_.eta3 = (-c * half_inc1 + a * half_inc2) / double(det);

    const complex legendre = lattice_.eta1 * lattice_.omega3 - lattice_.eta3 * lattice_.omega1;
    if (std::abs(legendre - complex(0.0, std::numbers::pi / 2.0)) > 1e-6) {
        throw Error(ErrorCode::ConvergenceFailure, "half-periods fail the Legendre relation");
    }
}

Weierstrass::Values Weierstrass::evaluate_reduced(complex r, bool want_sigma) const
{
    int halvings = 0;
    complex u = r;
    while (std::abs(u) > series_radius_) {
        u *= 0.5;
        ++halvings;
    }

    const complex u2 = u * u;
    complex pw = u2;  // u^(2k-2), starting at k = 2
    complex p_sum{}, dp_sum{}, z_sum{}, ls_sum{};
    for (std::size_t i = 0; i < kLaurentTerms; ++i) {
        const double k = double(i + 2);
        const complex term = coeff_[i] * pw;
        p_sum += term;
        dp_sum += (2.0 * k - 2.0) * term;
        z_sum += term / (2.0 * k - 1.0);
        ls_sum += term / ((2.0 * k - 1.0) * 2.0 * k);
        pw *= u2;
    }
    Values v;
    v.p = 1.0 / u2 + p_sum;
    v.dp = (-2.0 / u2 + dp_sum) / u;
    v.zeta = 1.0 / u - z_sum * u;
    v.log_sigma = want_sigma ? std::log(u) - ls_sum * u2 : complex{};

    const complex g2_half = inv_.g2 / 2.0;
    for (int i = 0; i < halvings; ++i) {
        const complex p = v.p, dp = v.dp;
        const complex ddp = 6.0 * p * p - g2_half;
        const complex ratio = ddp / dp;
        v.zeta = 2.0 * v.zeta + 0.5 * ratio;
        v.p = -2.0 * p + 0.25 * ratio * ratio;
        v.dp = -dp + 3.0 * p * ratio - 0.25 * ratio * ratio * ratio;
        if (want_sigma) {
            v.log_sigma = std::log(-dp) + 4.0 * v.log_sigma;
        }
    }
    return v;
}

void Weierstrass::check_pole(complex r) const
{
    if (std::abs(r) < kPoleRadius) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "argument within " << std::abs(r) << " of a lattice point";
        throw Error(ErrorCode::PoleProximity, msg.str());
    }
}

LatticeReduction Weierstrass::reduce(complex z) const
{
    const auto c = solve_coords(z, q1_, q2_);
    const long k1 = round_to_long(c.s);
    const long k2 = round_to_long(c.t);
    // The parallelogram cell is not the Voronoi cell; look at the neighbours too.
    long best1 = k1, best2 = k2;
    complex best = z - double(k1) * q1_ - double(k2) * q2_;
    for (long d1 = -1; d1 <= 1; ++d1) {
        for (long d2 = -1; d2 <= 1; ++d2) {
            const complex r = z - double(k1 + d1) * q1_ - double(k2 + d2) * q2_;
            if (std::abs(r) < std::abs(best)) {
                best = r;
                best1 = k1 + d1;
                best2 = k2 + d2;
            }
        }
    }
    LatticeReduction out;
    out.reduced = best;
    out.m = best1 * q_coords_[0] + best2 * q_coords_[2];
    out.n = best1 * q_coords_[1] + best2 * q_coords_[3];
    return out;
}

complex Weierstrass::p(complex z) const
{
    const auto red = reduce(z);
    check_pole(red.reduced);
    return evaluate_reduced(red.reduced, false).p;
}

complex Weierstrass::p_prime(complex z) const
{
    const auto red = reduce(z);
    check_pole(red.reduced);
    return evaluate_reduced(red.reduced, false).dp;
}

complex Weierstrass::p_second(complex z) const
{
    const complex v = p(z);
    return 6.0 * v * v - inv_.g2 / 2.0;
}

complex Weierstrass::zeta(complex z) const
{
    const auto red = reduce(z);
    check_pole(red.reduced);
    return evaluate_reduced(red.reduced, false).zeta +
           2.0 * (double(red.m) * lattice_.eta1 + double(red.n) * lattice_.eta3);
}

complex Weierstrass::sigma(complex z) const
{
    const auto red = reduce(z);
    const complex r = red.reduced;
    if (r == complex{}) {
        return {};
    }
    const complex shift = double(red.m) * lattice_.omega1 + double(red.n) * lattice_.omega3;
    const complex eta = double(red.m) * lattice_.eta1 + double(red.n) * lattice_.eta3;
    const complex log_factor = 2.0 * eta * (r + shift);
    const long parity = red.m + red.n + red.m * red.n;
    const double sign = (parity % 2 == 0) ? 1.0 : -1.0;

    complex log_mag;
    complex lead = 1.0;
    if (std::abs(r) <= series_radius_) {
        // Keep the explicit factor r so that sigma stays accurate near its zero.
        const complex log_sig = evaluate_reduced(r, true).log_sigma;
        log_mag = log_sig - std::log(r) + log_factor;
        lead = r;
    } else {
        log_mag = evaluate_reduced(r, true).log_sigma + log_factor;
    }
    if (!std::isfinite(log_mag.real()) || log_mag.real() > 700.0) {
        throw Error(ErrorCode::RangeOverflow, "sigma overflows double precision");
    }
    return sign * lead * std::exp(log_mag);
}

complex Weierstrass::invert_p(complex w) const
{
    const auto& e = lattice_.roots;
    const double scale = std::max({1.0, std::abs(e[0]), std::abs(e[1]), std::abs(e[2])});
    const double tol = 1e-10 * std::max(1.0, std::abs(w));

    auto residual = [&](complex z) {
        try {
            return std::abs(p(z) - w);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    auto polish = [&](complex z) {
        double res = residual(z);
        for (int it = 0; it < 60 && std::isfinite(res); ++it) {
            complex dp;
            try {
                dp = p_prime(z);
            } catch (const Error&) {
                break;
            }
            if (std::abs(dp) == 0.0) {
                break;
            }
            const complex step = (p(z) - w) / dp;
            const complex next = z - step;
            const double next_res = residual(next);
            if (!(next_res < res)) {
                break;
            }
            z = next;
            res = next_res;
            if (std::abs(step) <= 4.0 * kEps * std::max(1.0, std::abs(z))) {
                break;
            }
        }
        return std::pair{z, res};
    };

    // The seed is the elliptic integral from w to infinity itself.
    complex shifted = w;
    auto on_cut = [&](complex v) { return v.real() < 0.0 && std::abs(v.imag()) <= 1e-14 * scale; };
    if (on_cut(w - e[0]) || on_cut(w - e[1]) || on_cut(w - e[2])) {
        shifted += complex(0.0, 1e-12 * scale);
    }
    auto [z, res] = polish(carlson_rf(shifted - e[0], shifted - e[1], shifted - e[2]));

    if (!(res <= tol)) {
        for (int i = 0; i < 4 && !(res <= tol); ++i) {
            for (int j = 0; j < 4 && !(res <= tol); ++j) {
                const complex seed = (-0.375 + 0.25 * i) * q1_ + (-0.375 + 0.25 * j) * q2_;
                std::tie(z, res) = polish(seed);
            }
        }
    }
    if (!(res <= tol)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "inversion of p at w=" << w << " stalled with residual " << res;
        throw Error(ErrorCode::ConvergenceFailure, msg.str());
    }

    z = reduce(z).reduced;
    const double zero_re = 1e-13 * std::max(1.0, std::abs(z));
    if (z.real() < -zero_re || (std::abs(z.real()) <= zero_re && z.imag() < 0.0)) {
        z = -z;
    }
    return z;
}

complex weierstrass_p(complex z, const EllipticInvariants& inv) { return Weierstrass(inv).p(z); }
complex weierstrass_p_prime(complex z, const EllipticInvariants& inv) { return Weierstrass(inv).p_prime(z); }
complex weierstrass_zeta(complex z, const EllipticInvariants& inv) { return Weierstrass(inv).zeta(z); }
complex weierstrass_sigma(complex z, const EllipticInvariants& inv) { return Weierstrass(inv).sigma(z); }
complex invert_p(complex w, const EllipticInvariants& inv) { return Weierstrass(inv).invert_p(w); }

LatticeData lattice_from_invariants(const EllipticInvariants& inv) { return Weierstrass(inv).lattice(); }

complex carlson_rf(complex x, complex y, complex z)
{
    constexpr double kErrTol = 0.0008;
    for (int it = 0; it < 200; ++it) {
        const complex sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
        const complex lambda = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        const complex mean = (x + y + z) / 3.0;
        const complex dx = (mean - x) / mean, dy = (mean - y) / mean, dz = (mean - z) / mean;
        if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) <= kErrTol) {
            const complex e2 = dx * dy - dz * dz;
            const complex e3 = dx * dy * dz;
            return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / std::sqrt(mean);
        }
    }
    throw Error(ErrorCode::ConvergenceFailure, "Carlson R_F did not converge");
}

}  // namespace dressing
