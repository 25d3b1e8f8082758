#pragma once

// Quasi-Newton minimization with a strong Wolfe line search. The inverse
// Hessian is kept dense up to `dense_limit` unknowns and as a limited-memory
// pair history above that.

#include <deque>
#include <functional>
#include <string>

#include <Eigen/Core>

namespace elastipinn::optim {

// Value at x with the gradient written to grad. A non-finite value marks a
// poisoned point; the line search treats it as a failed trial.
using Oracle = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct BfgsConfig {
    double c1 = 1e-4;
    double c2 = 0.9;
    double tol_grad = 1e-8;  // converged when |grad|_inf < tol_grad
    double tol_f = 0.0;      // or relative decrease below tol_f (0 disables)
    int max_linesearch = 40;
    Eigen::Index dense_limit = 2000;
    int history = 20;
    // Try the cubic-interpolated minimizer along the accepted step once and
    // keep it when it is better.
    bool refine = true;
    double refine_tol = 1e-6;

    void validate() const;
};

struct BfgsState {
    BfgsConfig cfg;
    bool started = false;
    long iter = 0;
    long evaluations = 0;
    long skipped_updates = 0;
    double f = 0.0;
    Eigen::VectorXd g;
    bool dense = true;
    bool scaled = false;
    Eigen::MatrixXd H;
    std::deque<Eigen::VectorXd> S, Y;

    explicit BfgsState(BfgsConfig c = {}) : cfg(c) {}
    void reset_curvature();
};

struct BfgsStep {
    bool converged = false;
    bool failed = false;
    std::string diagnostic;
    double f = 0.0;
    double step = 0.0;
    int evaluations = 0;
};

// One iteration from x (updated in place). The first call evaluates the
// oracle at x; it must be finite there.
BfgsStep bfgs_step(BfgsState& state, Eigen::VectorXd& x, const Oracle& oracle);

}  // namespace elastipinn::optim
