#include "dressing/closed_form.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dressing {

namespace {

double real_part(complex v, const char* what)
{
    if (std::abs(v.imag()) > ClosedFormSolution::kImagTolerance * std::max(1.0, std::abs(v.real()))) {
        std::ostringstream msg;
        msg.precision(17);
        msg << what << " has imaginary part " << v.imag();
        throw Error(ErrorCode::NonRealValue, msg.str());
    }
    return v.real();
}

// p(u) at which sigma_1 = zeta(u + nu) - zeta(u - nu) - zeta(2 nu) takes the value s:
//   sigma_1(u) = 2 zeta(nu) - zeta(2 nu) - p'(nu) / (p(u) - p(nu)).
// Returns false when the level is attained at the lattice itself (p(u) infinite).
bool level_preimage(const Weierstrass& w, complex nu, complex s, complex& p_value)
{
    const complex denom = s - 2.0 * w.zeta(nu) + w.zeta(2.0 * nu);
    if (std::abs(denom) < 1e-14 * std::max(1.0, std::abs(s))) {
        return false;
    }
    p_value = w.p(nu) - w.p_prime(nu) / denom;
    return true;
}

}  // namespace

ClosedFormSolution::ClosedFormSolution(complex nu, complex x0, const EllipticInvariants& inv, double c,
                                       std::array<double, 3> mu)
    : weierstrass_(std::make_shared<const Weierstrass>(inv)), nu_(nu), x0_(x0), c_(c), mu_(mu)
{
    const Weierstrass& w = *weierstrass_;
    const complex a = w.p(2.0 * nu_);
    const double expected = (mu_[2] + mu_[1] - 2.0 * mu_[0] + c_ * c_) / 3.0;
    if (std::abs(a - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "p(2nu) = " << a << " but (mu3 + mu2 - 2 mu1 + C^2)/3 = " << expected;
        throw Error(ErrorCode::ConvergenceFailure, msg.str());
    }
    const complex b = w.p_prime(2.0 * nu_);
    quartic_.a = a.real();
    quartic_.b = b.real();
    quartic_.d = (inv.g2 - 3.0 * a * a).real();
    zeta_2nu_ = w.zeta(2.0 * nu_);

    singular_ = {-nu_ - x0_, nu_ - x0_};
    complex p_c;
    if (level_preimage(w, nu_, c_, p_c)) {
        // Of the two crossings sigma_1 = C, the one with sigma_1' = mu_3 - mu_2 is removable.
        const complex u = w.invert_p(p_c);
        const double removable_slope = mu_[2] - mu_[1];
        for (const complex v : {u, -u}) {
            const complex slope = -w.p(v + nu_) + w.p(v - nu_);
            if (std::abs(slope + removable_slope) <= std::abs(slope - removable_slope)) {
                singular_.push_back(v - x0_);
            }
        }
    } else {
        singular_.push_back(-x0_);
    }
}

complex ClosedFormSolution::sigma1(complex x) const
{
    const Weierstrass& w = *weierstrass_;
    return w.zeta(x + nu_ + x0_) - w.zeta(x - nu_ + x0_) - zeta_2nu_;
}

complex ClosedFormSolution::sigma1_prime(complex x) const
{
    const Weierstrass& w = *weierstrass_;
    return -w.p(x + nu_ + x0_) + w.p(x - nu_ + x0_);
}

complex ClosedFormSolution::sigma1_second(complex x) const
{
    const Weierstrass& w = *weierstrass_;
    return -w.p_prime(x + nu_ + x0_) + w.p_prime(x - nu_ + x0_);
}

double ClosedFormSolution::singular_distance(double x) const
{
    double best = std::numeric_limits<double>::infinity();
    for (const complex& s : singular_) {
        best = std::min(best, weierstrass_->lattice_distance(complex(x) - s));
    }
    return best;
}

double sigma1_at(double x, const ClosedFormSolution& sol) { return real_part(sol.sigma1(x), "sigma_1"); }

double sigma1_prime_at(double x, const ClosedFormSolution& sol)
{
    return real_part(sol.sigma1_prime(x), "sigma_1'");
}

namespace {

// sigma_3 - sigma_2 at a point where sigma_1 = s1, sigma_1' = ds1.
//
// Away from sigma_1 = C this is (ds1 - mu_3 + mu_2) / (C - s1). Close to it the
// quotient is 0/0 at one of the two crossings (there sigma_1' = mu_3 - mu_2 and
// the state stays finite), so D is taken instead from the integral A, which is
// quadratic in D:
//   -(R/4) D^2 + (mu_2 - mu_3)/2 D + K = 0,   R = C - s1,
//   K = R (2 s1 + R)^2 / 4 + (mu_2 + mu_3)(2 s1 + R) / 2 + mu_1 R - A,
// picking the root consistent with D R = ds1 - mu_3 + mu_2.
double sigma_difference(double s1, double ds1, const ClosedFormSolution& sol)
{
    const auto& mu = sol.mu();
    const double rest = sol.c() - s1;
    const double num = ds1 - mu[2] + mu[1];
    const double scale = 1.0 + std::abs(s1) + std::abs(sol.c());
    if (std::abs(rest) > 1e-4 * scale) {
        return num / rest;
    }

    const double a_int = sol.quartic().b + 2.0 * mu[0] * sol.c();
    const double qa = -0.25 * rest;
    const double qb = 0.5 * (mu[1] - mu[2]);
    const double t = 2.0 * s1 + rest;
    const double qc = 0.25 * rest * t * t + 0.5 * (mu[1] + mu[2]) * t + mu[0] * rest - a_int;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0 && qb != 0.0) {
        // Stable pair: the root that stays finite as R -> 0, and its partner.
        const double denom = -qb - std::copysign(std::sqrt(disc), qb);
        const double finite_root = 2.0 * qc / denom;
        const double other_root = (qa != 0.0) ? qc / (qa * finite_root) : std::numeric_limits<double>::infinity();
        const double miss_finite = std::abs(finite_root * rest - num);
        const double miss_other = std::isfinite(other_root) ? std::abs(other_root * rest - num)
                                                            : std::numeric_limits<double>::infinity();
        if (miss_finite <= miss_other) {
            return finite_root;
        }
    }
    if (std::abs(rest) < ClosedFormSolution::kSingularThreshold) {
        throw Error(ErrorCode::SingularReconstruction, "sigma_2, sigma_3 are singular where C - sigma_1 = " +
                                                           std::to_string(rest));
    }
    return num / rest;
}

}  // namespace

ChainState reconstruct_full_state(double x, const ClosedFormSolution& sol)
{
    const double s1 = sigma1_at(x, sol);
    const double ds1 = sigma1_prime_at(x, sol);
    const double rest = sol.c() - s1;
    const double diff = sigma_difference(s1, ds1, sol);
    return ChainState{{s1, 0.5 * (rest - diff), 0.5 * (rest + diff)}};
}

std::vector<double> reconstruct_derivative(double x, const ClosedFormSolution& sol)
{
    const auto& mu = sol.mu();
    const double s1 = sigma1_at(x, sol);
    const double ds1 = sigma1_prime_at(x, sol);
    const double rest = sol.c() - s1;
    if (std::abs(rest) > 1e-3 * (1.0 + std::abs(s1) + std::abs(sol.c()))) {
        const double dds1 = real_part(sol.sigma1_second(x), "sigma_1''");
        const double num = ds1 - mu[2] + mu[1];
        const double ddiff = (dds1 * rest + num * ds1) / (rest * rest);
        return {ds1, 0.5 * (-ds1 - ddiff), 0.5 * (-ds1 + ddiff)};
    }
    // Near sigma_1 = C the quotient rule cancels badly; difference the robust state instead.
    constexpr double h = 1e-5;
    const auto plus = reconstruct_full_state(x + h, sol);
    const auto minus = reconstruct_full_state(x - h, sol);
    return {ds1, (plus[1] - minus[1]) / (2.0 * h), (plus[2] - minus[2]) / (2.0 * h)};
}

complex fit_shift(double sigma1_initial, double sigma1_prime_initial, complex nu, const EllipticInvariants& inv)
{
    const Weierstrass w(inv);
    const complex a = w.p(2.0 * nu);
    const complex b = w.p_prime(2.0 * nu);
    const complex d = inv.g2 - 3.0 * a * a;
    const double s = sigma1_initial, ds = sigma1_prime_initial;
    const complex on_curve = ds * ds - (((s * s - 6.0 * a) * s + 4.0 * b) * s + d);
    if (std::abs(on_curve) > 1e-8 * (1.0 + ds * ds + s * s * s * s)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "(sigma_1, sigma_1') = (" << s << ", " << ds << ") misses the quartic by " << std::abs(on_curve);
        throw Error(ErrorCode::OffCurveInitialData, msg.str());
    }

    const complex zeta_2nu = w.zeta(2.0 * nu);
    auto f = [&](complex u) { return w.zeta(u + nu) - w.zeta(u - nu) - zeta_2nu; };
    auto df = [&](complex u) { return -w.p(u + nu) + w.p(u - nu); };

    complex u{};
    complex target;
    if (level_preimage(w, nu, s, target)) {
        u = w.invert_p(target);
        if (std::abs(df(-u) - ds) < std::abs(df(u) - ds)) {
            u = -u;
        }
    }

    double res = std::abs(f(u) - s);
    for (int it = 0; it < 20; ++it) {
        const complex slope = df(u);
        if (std::abs(slope) == 0.0) {
            break;
        }
        const complex next = u - (f(u) - s) / slope;
        const double next_res = std::abs(f(next) - s);
        if (!(next_res < res)) {
            break;
        }
        u = next;
        res = next_res;
    }

    const double deriv_res = std::abs(df(u) - ds);
    if (res > 1e-8 * std::max(1.0, std::abs(s)) || deriv_res > 1e-6 * std::max(1.0, std::abs(ds))) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "phase fit residuals " << res << " (value), " << deriv_res << " (derivative)";
        throw Error(ErrorCode::ConvergenceFailure, msg.str());
    }
    return w.reduce(u).reduced;
}

ClosedFormSolution solve_closed_form(const ChainParams& params, const ChainState& initial)
{
    require_period_three(params);
    const double c = integral_C(initial);
    const double a_int = integral_A(initial, params);
    const QuarticCurve q = quartic_coefficients(c, a_int, params);
    const EllipticInvariants inv = curve_invariants(q);
    const complex nu = uniformization_parameter(q);
    const double ds1 = chain_rhs(initial, params)[0];
    const complex x0 = fit_shift(initial[0], ds1, nu, inv);
    return ClosedFormSolution(nu, x0, inv, c, {params.mu(0), params.mu(1), params.mu(2)});
}

}  // namespace dressing
