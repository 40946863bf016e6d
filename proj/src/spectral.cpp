#include "dressing/spectral.hpp"

#include <cmath>
#include <sstream>

#include "dressing/chain.hpp"

namespace dressing {

LameProblem::LameProblem(complex alpha, const EllipticInvariants& inv)
    : weierstrass_(std::make_shared<const Weierstrass>(inv)), alpha_(alpha)
{
    // p throws PoleProximity on the lattice.
    lambda_ = weierstrass_->p(alpha_);
}

complex lame_psi(complex x, const LameProblem& prob)
{
    const Weierstrass& w = prob.weierstrass();
    const complex a = prob.alpha();
    return w.sigma(a - x) / (w.sigma(a) * w.sigma(x)) * std::exp(w.zeta(a) * x);
}

complex lame_log_derivative(complex x, const LameProblem& prob)
{
    const Weierstrass& w = prob.weierstrass();
    const complex a = prob.alpha();
    return w.zeta(a) - w.zeta(x) - w.zeta(a - x);
}

complex lame_log_derivative_printed(complex x, const LameProblem& prob)
{
    const Weierstrass& w = prob.weierstrass();
    const complex a = prob.alpha();
    return w.zeta(a - x) - w.zeta(a) - w.zeta(x);
}

complex lame_residual(double x, const LameProblem& prob)
{
    constexpr double h = 1e-4;
    const complex f0 = lame_psi(x, prob);
    const complex d2 = (-lame_psi(x + 2 * h, prob) + 16.0 * lame_psi(x + h, prob) - 30.0 * f0 +
                        16.0 * lame_psi(x - h, prob) - lame_psi(x - 2 * h, prob)) /
                       (12.0 * h * h);
    return d2 - 2.0 * prob.weierstrass().p(x) * f0 - prob.eigenvalue() * f0;
}

complex bloch_multiplier(const LameProblem& prob)
{
    const auto& lat = prob.weierstrass().lattice();
    const complex a = prob.alpha();
    return std::exp(2.0 * prob.weierstrass().zeta(a) * lat.omega1 - 2.0 * lat.eta1 * a);
}

complex sigma1_from_lame(double x, const ClosedFormSolution& sol)
{
    const LameProblem prob(-2.0 * sol.nu(), sol.invariants());
    return lame_log_derivative(x + sol.x0() - sol.nu(), prob);
}

double potential_from_sigma(const ClosedFormSolution& sol, int index, double x)
{
    if (index < 1 || index > 3) {
        throw Error(ErrorCode::InvalidArgument, "potential index must be 1, 2 or 3");
    }
    if (sol.singular_distance(x) < Weierstrass::kPoleRadius) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "x = " << x << " is at a singular point of the chain state";
        throw Error(ErrorCode::PoleProximity, msg.str());
    }
    const ChainState st = reconstruct_full_state(x, sol);
    const auto rhs = chain_rhs(st, sol.params());
    const std::size_t i = static_cast<std::size_t>(index - 1);
    return rhs[i] + st[i] * st[i] + sol.mu()[i];
}

LameFit fit_lame_potential(const std::vector<double>& xs, const std::vector<double>& q, const Weierstrass& w,
                           complex shift_seed, complex offset_seed)
{
    if (xs.size() != q.size() || xs.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "need at least two matching samples");
    }
    LameFit fit{shift_seed, offset_seed};
    auto residuals = [&](complex shift, complex offset) {
        std::vector<complex> r(xs.size());
        for (std::size_t k = 0; k < xs.size(); ++k) {
            r[k] = q[k] - 2.0 * w.p(xs[k] - shift) - offset;
        }
        return r;
    };
    auto norm2 = [](const std::vector<complex>& r) {
        double s = 0.0;
        for (const complex& v : r) {
            s += std::norm(v);
        }
        return s;
    };

    std::vector<complex> r = residuals(fit.shift, fit.offset);
    double cost = norm2(r);
    for (int it = 0; it < 100; ++it) {
        // Columns of the complex Jacobian: d r / d shift = 2 p'(x - shift), d r / d offset = -1.
        complex j11 = 0.0, j12 = 0.0, j22 = 0.0, b1 = 0.0, b2 = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            const complex js = 2.0 * w.p_prime(xs[k] - fit.shift);
            const complex jo = -1.0;
            j11 += std::conj(js) * js;
            j12 += std::conj(js) * jo;
            j22 += std::conj(jo) * jo;
            b1 -= std::conj(js) * r[k];
            b2 -= std::conj(jo) * r[k];
        }
        const complex det = j11 * j22 - j12 * std::conj(j12);
        if (std::abs(det) == 0.0) {
            break;
        }
        const complex ds = (j22 * b1 - j12 * b2) / det;
        const complex doff = (j11 * b2 - std::conj(j12) * b1) / det;

        // Halve the step until the cost drops.
        double scale = 1.0;
        bool improved = false;
        for (int k = 0; k < 30; ++k) {
            const auto trial = residuals(fit.shift + scale * ds, fit.offset + scale * doff);
            const double trial_cost = norm2(trial);
            if (trial_cost < cost) {
                fit.shift += scale * ds;
                fit.offset += scale * doff;
                r = trial;
                cost = trial_cost;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        fit.iterations = it + 1;
        if (!improved || std::abs(ds) < 1e-15 * (1.0 + std::abs(fit.shift))) {
            break;
        }
    }

    std::vector<complex> offsets(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
        offsets[k] = q[k] - 2.0 * w.p(xs[k] - fit.shift);
        fit.max_residual = std::max(fit.max_residual, std::abs(r[k]));
    }
    complex mean = 0.0;
    for (const complex& o : offsets) {
        mean += o / double(xs.size());
    }
    double var = 0.0;
    for (const complex& o : offsets) {
        var += std::norm(o - mean) / double(xs.size());
    }
    fit.offset_scatter = std::sqrt(var);
    if (fit.max_residual > 1e-6) {
        std::ostringstream msg;
        msg << "potential fit stalled with residual " << fit.max_residual;
        throw Error(ErrorCode::ConvergenceFailure, msg.str());
    }
    return fit;
}

}  // namespace dressing
