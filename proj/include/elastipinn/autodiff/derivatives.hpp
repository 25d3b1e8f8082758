#pragma once

// Drivers that differentiate scalar programs written against a generic
// scalar type. A program is any callable taking `const std::vector<S>&` and
// returning `S`, instantiated with S = Var (reverse mode) or nested Duals over
// Var (forward-over-reverse).

#include <string>
#include <vector>

#include <Eigen/Core>

#include "elastipinn/autodiff/dual.hpp"
#include "elastipinn/autodiff/tape.hpp"

namespace elastipinn::ad {

struct GradientResult {
    double value = 0.0;
    Eigen::VectorXd gradient;
    bool poisoned = false;
    std::string poison_term;
};

// Value and gradient of f at x by one reverse sweep.
template <typename F>
GradientResult value_and_grad(F&& f, const Eigen::VectorXd& x) {
    Tape tape;
    ActiveTape guard(tape);
    std::vector<Var> xs;
    xs.reserve(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) xs.push_back(Var::independent(x[i]));
    const Var y = f(xs);
    GradientResult out;
    out.value = y.value();
    out.gradient = Eigen::VectorXd::Zero(x.size());
    if (!y.is_constant()) {
        const std::vector<double> adj = tape.backward(y.index());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            out.gradient[i] = adj[static_cast<std::size_t>(xs[static_cast<std::size_t>(i)].index())];
    }
    out.poisoned = tape.poisoned() || !std::isfinite(out.value);
    if (out.poisoned) out.poison_term = tape.poisoned() ? tape.poison_term() : std::string("<output>");
    tape.clear();
    return out;
}

// Exact gradient. Non-finite intermediates propagate into the result.
template <typename F>
Eigen::VectorXd grad(F&& f, const Eigen::VectorXd& x) {
    return value_and_grad(std::forward<F>(f), x).gradient;
}

// Full Hessian by forward-over-reverse: one tangent sweep per input direction,
// each followed by a reverse sweep over the recorded tangent.
template <typename F>
Eigen::MatrixXd hessian(F&& f, const Eigen::VectorXd& x) {
    using D = Dual<Var, 1>;
    const Eigen::Index n = x.size();
    Eigen::MatrixXd h(n, n);
    for (Eigen::Index dir = 0; dir < n; ++dir) {
        Tape tape;
        ActiveTape guard(tape);
        std::vector<D> xs;
        std::vector<Var> leaves;
        for (Eigen::Index i = 0; i < n; ++i) {
            leaves.push_back(Var::independent(x[i]));
            xs.emplace_back(leaves.back());
            if (i == dir) xs.back().d[0] = Var(1.0);
        }
        const D y = f(xs);
        const Var& dy = y.d[0];
        if (dy.is_constant()) {
            h.col(dir).setZero();
            continue;
        }
        const std::vector<double> adj = tape.backward(dy.index());
        for (Eigen::Index i = 0; i < n; ++i)
            h(i, dir) = adj[static_cast<std::size_t>(leaves[static_cast<std::size_t>(i)].index())];
    }
    return h;
}

// Gradient with respect to weights of a loss that may itself contain spatial
// derivatives (nested Duals over Var). Throws PoisonedError naming the
// offending term when any intermediate is non-finite.
template <typename F>
Eigen::VectorXd grad_of_derived_loss(F&& loss, const Eigen::VectorXd& w) {
    GradientResult r = value_and_grad(std::forward<F>(loss), w);
    if (r.poisoned) throw PoisonedError(r.poison_term, "value " + std::to_string(r.value));
    return r.gradient;
}

}  // namespace elastipinn::ad
