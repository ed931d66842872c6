#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

namespace titl {

template <std::floating_point Real>
Real sigmoid(Real x) {
    if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
    const Real e = std::exp(x);
    return e / (Real(1) + e);
}

// log(sigmoid(x)) without overflow for large |x|.
template <std::floating_point Real>
Real log_sigmoid(Real x) {
    if (x >= 0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

// Loss L = -log s(u_c.h) - sum_i log s(-u_i.h) and its gradients. The
// gradient w.r.t. an output vector u is coeff * h, so only the coefficients
// are returned for the output side.
template <std::floating_point Real>
struct SkipgramGradient {
    Real loss = 0;
    std::vector<Real> d_hidden;          // dL/dh
    Real context_coeff = 0;              // dL/du_c = context_coeff * h
    std::vector<Real> negative_coeffs;   // dL/du_i = negative_coeffs[i] * h
};

template <std::floating_point Real>
Real dot(std::span<const Real> a, std::span<const Real> b) {
    Real s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

template <std::floating_point Real>
SkipgramGradient<Real> skipgram_gradient(std::span<const Real> hidden,
                                         std::span<const Real> context_out,
                                         std::span<const std::span<Real>> negative_outs) {
    SkipgramGradient<Real> g;
    g.d_hidden.assign(hidden.size(), Real(0));
    g.negative_coeffs.reserve(negative_outs.size());

    const Real sc = dot(context_out, hidden);
    g.loss = -log_sigmoid(sc);
    g.context_coeff = sigmoid(sc) - Real(1);
    for (std::size_t d = 0; d < hidden.size(); ++d) g.d_hidden[d] += g.context_coeff * context_out[d];

    for (const auto& neg : negative_outs) {
        const std::span<const Real> u(neg);
        const Real sn = dot(u, hidden);
        g.loss -= log_sigmoid(-sn);
        const Real coeff = sigmoid(sn);
        g.negative_coeffs.push_back(coeff);
        for (std::size_t d = 0; d < hidden.size(); ++d) g.d_hidden[d] += coeff * u[d];
    }
    return g;
}

// One SGD step. The hidden representation h is the mean of the contributor
// rows; each contributor receives dL/dh divided by the contributor count.
// All gradients are taken at the pre-step parameters. Returns the loss.
template <std::floating_point Real>
Real skipgram_step(std::span<const std::span<Real>> contributors, std::span<Real> context_out,
                   std::span<const std::span<Real>> negative_outs, Real lr) {
    if (contributors.empty()) return Real(0);
    const std::size_t dim = context_out.size();
    std::vector<Real> hidden(dim, Real(0));
    for (const auto& c : contributors)
        for (std::size_t d = 0; d < dim; ++d) hidden[d] += c[d];
    const Real inv = Real(1) / static_cast<Real>(contributors.size());
    for (auto& h : hidden) h *= inv;

    const auto g = skipgram_gradient<Real>(hidden, context_out, negative_outs);

    for (std::size_t d = 0; d < dim; ++d) context_out[d] -= lr * g.context_coeff * hidden[d];
    for (std::size_t i = 0; i < negative_outs.size(); ++i) {
        const Real step = lr * g.negative_coeffs[i];
        for (std::size_t d = 0; d < dim; ++d) negative_outs[i][d] -= step * hidden[d];
    }
    for (const auto& c : contributors)
        for (std::size_t d = 0; d < dim; ++d) c[d] -= lr * inv * g.d_hidden[d];
    return g.loss;
}

}  // namespace titl
