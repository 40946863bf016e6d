#include "dressing/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dressing/error.hpp"

namespace dressing {

namespace {

void trim(LambdaPoly& p)
{
    while (!p.empty() && p.back() == 0.0) {
        p.pop_back();
    }
}

LambdaPoly multiply(const LambdaPoly& a, const LambdaPoly& b)
{
    if (a.empty() || b.empty()) {
        return {};
    }
    LambdaPoly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    trim(out);
    return out;
}

void check_period(std::size_t n)
{
    if (n < 3 || n > TauPolynomial::kMaxPeriod) {
        throw Error(ErrorCode::InvalidArgument, "period " + std::to_string(n) + " outside [3, 31]");
    }
    if (n % 2 == 0) {
        throw Error(ErrorCode::EvenPeriod, "tau_N needs odd N, got " + std::to_string(n));
    }
}

}  // namespace

TauPolynomial::TauPolynomial(std::size_t n_period) : n_(n_period)
{
    if (n_ == 0 || n_ > kMaxPeriod) {
        throw Error(ErrorCode::InvalidArgument, "period " + std::to_string(n_) + " outside [1, 31]");
    }
}

TauPolynomial TauPolynomial::full_monomial(std::size_t n_period)
{
    TauPolynomial t(n_period);
    t.add((1u << n_period) - 1u, {1.0});
    return t;
}

void TauPolynomial::add(std::uint32_t monomial, const LambdaPoly& c)
{
    LambdaPoly& slot = terms_[monomial];
    if (slot.size() < c.size()) {
        slot.resize(c.size(), 0.0);
    }
    for (std::size_t k = 0; k < c.size(); ++k) {
        slot[k] += c[k];
    }
    trim(slot);
    if (slot.empty()) {
        terms_.erase(monomial);
    }
}

LambdaPoly TauPolynomial::coefficient(std::uint32_t monomial) const
{
    const auto it = terms_.find(monomial);
    return it == terms_.end() ? LambdaPoly{} : it->second;
}

int TauPolynomial::lambda_degree() const
{
    int deg = -1;
    for (const auto& [mono, c] : terms_) {
        deg = std::max(deg, static_cast<int>(c.size()) - 1);
    }
    return deg;
}

LambdaPoly TauPolynomial::evaluate(const std::vector<double>& g) const
{
    if (g.size() != n_) {
        throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(n_) + " g values");
    }
    LambdaPoly out;
    for (const auto& [mono, c] : terms_) {
        double value = 1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (mono & (1u << i)) {
                value *= g[i];
            }
        }
        if (out.size() < c.size()) {
            out.resize(c.size(), 0.0);
        }
        for (std::size_t k = 0; k < c.size(); ++k) {
            out[k] += value * c[k];
        }
    }
    return out;
}

TauPolynomial TauPolynomial::apply_factor(std::size_t i, std::size_t j, const LambdaPoly& zeta) const
{
    if (i >= n_ || j >= n_ || i == j) {
        throw Error(ErrorCode::InvalidArgument, "bad index pair for the second-derivative factor");
    }
    TauPolynomial out = *this;
    const std::uint32_t pair = (1u << i) | (1u << j);
    for (const auto& [mono, c] : terms_) {
        // Multilinear: d^2/dg_i dg_j removes both indices, or kills the monomial.
        if ((mono & pair) == pair) {
            out.add(mono & ~pair, multiply(zeta, c));
        }
    }
    return out;
}

TauPolynomial tau_generating_ordered(std::size_t n_period, std::span<const double> beta,
                                     const std::vector<std::size_t>& order)
{
    check_period(n_period);
    if (beta.size() != n_period) {
        throw Error(ErrorCode::InvalidArgument, "beta must have N entries");
    }
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        if (sorted.size() != n_period || sorted[k] != k) {
            throw Error(ErrorCode::InvalidArgument, "order must be a permutation of 0..N-1");
        }
    }
    TauPolynomial tau = TauPolynomial::full_monomial(n_period);
    for (const std::size_t j : order) {
        const std::size_t next = (j + 1) % n_period;
        tau = tau.apply_factor(j, next, {beta[next], -1.0});
    }
    return tau;
}

TauPolynomial tau_generating(std::size_t n_period, std::span<const double> beta)
{
    check_period(n_period);
    std::vector<std::size_t> order(n_period);
    for (std::size_t k = 0; k < n_period; ++k) {
        order[k] = n_period - 1 - k;
    }
    return tau_generating_ordered(n_period, beta, order);
}

std::vector<double> extract_h(const TauPolynomial& tau, const std::vector<double>& g)
{
    const std::size_t n = (tau.n_period() - 1) / 2;
    LambdaPoly poly = tau.evaluate(g);
    poly.resize(std::max(poly.size(), n + 1), 0.0);
    const double sign = (tau.n_period() % 2 == 0) ? 1.0 : -1.0;
    std::vector<double> h(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        h[k] = sign * poly[n - k];
    }
    return h;
}

std::vector<double> conservation_check(const Trajectory& traj, std::span<const double> beta)
{
    if (traj.size() == 0) {
        return {};
    }
    const std::size_t n = traj.states.front().size();
    const TauPolynomial tau = tau_generating(n, beta);
    const auto h0 = extract_h(tau, g_coordinates(traj.states.front()));
    std::vector<double> drift(h0.size(), 0.0);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (!traj.masked.empty() && traj.masked[k]) {
            continue;
        }
        const auto h = extract_h(tau, g_coordinates(traj.states[k]));
        for (std::size_t i = 0; i < h.size(); ++i) {
            drift[i] = std::max(drift[i], std::abs(h[i] - h0[i]));
        }
    }
    return drift;
}

}  // namespace dressing
