#pragma once

#include <Eigen/Core>

namespace elastipinn::optim {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

struct AdamState {
    AdamConfig cfg;
    long t = 0;
    Eigen::VectorXd m, v;

    explicit AdamState(Eigen::Index n = 0, AdamConfig c = {});
};

// One bias-corrected update of x. Throws std::domain_error on a non-finite
// gradient, leaving state and x untouched.
void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> x, const Eigen::VectorXd& grad);

}  // namespace elastipinn::optim
