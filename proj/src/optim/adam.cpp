#include "elastipinn/optim/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace elastipinn::optim {

void AdamConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("adam: lr must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw std::invalid_argument("adam: betas must lie in [0, 1)");
    if (!(eps > 0.0)) throw std::invalid_argument("adam: eps must be > 0");
}

AdamState::AdamState(Eigen::Index n, AdamConfig c)
    : cfg(c), m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

void adam_step(AdamState& s, Eigen::Ref<Eigen::VectorXd> x, const Eigen::VectorXd& g) {
    if (g.size() != x.size() || s.m.size() != x.size())
        throw std::invalid_argument("adam: gradient, state and parameters differ in length");
    if (!g.allFinite()) throw std::domain_error("adam: non-finite gradient");
    const AdamConfig& c = s.cfg;
    ++s.t;
    s.m = c.beta1 * s.m + (1.0 - c.beta1) * g;
    s.v = c.beta2 * s.v + (1.0 - c.beta2) * g.cwiseAbs2();
    const double b1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.t));
    const double b2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.t));
    x.array() -= c.lr * (s.m.array() / b1) / ((s.v.array() / b2).sqrt() + c.eps);
}

}  // namespace elastipinn::optim
