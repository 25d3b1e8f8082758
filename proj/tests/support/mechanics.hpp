#pragma once

// Random deformations and reference stresses shared by the unit and acceptance tests.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "elastipinn/mechanics/material.hpp"

namespace elastipinn::testing {

// I + random perturbation with det F >= 0.5.
inline mech::Mat3d random_F(std::mt19937_64& rng, double amp = 0.25) {
    std::uniform_real_distribution<double> u(-amp, amp);
    mech::Mat3d F;
    do {
        for (int k = 0; k < 9; ++k) F(k % 3, k / 3) = u(rng);
        F += mech::Mat3d::Identity();
    } while (F.determinant() < 0.5);
    return F;
}

inline mech::Mat3d random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    q.normalize();
    return q.toRotationMatrix();
}

// Neo-Hookean, Guccione and Holzapfel-Ogden with the turning fibre field.
inline std::vector<mech::MaterialModel> all_laws() {
    mech::MaterialModel nh;
    mech::MaterialModel gu;
    gu.law = mech::Guccione{};
    gu.fiber = mech::FiberFrame::linear_in_z();
    mech::MaterialModel ho;
    ho.law = mech::HolzapfelOgden1F{};
    ho.fiber = mech::FiberFrame::linear_in_z();
    return {nh, gu, ho};
}

// P = mu J^(-2/3) (F - I1/3 F^-T) + kappa J (J - 1) F^-T
inline mech::Mat3d neo_hookean_P(double mu, double kappa, const mech::Mat3d& F) {
    const double J = F.determinant();
    const mech::Mat3d Finv_t = F.inverse().transpose();
    const double I1 = (F.transpose() * F).trace();
    return mu * std::pow(J, -2.0 / 3.0) * (F - I1 / 3.0 * Finv_t) + kappa * J * (J - 1.0) * Finv_t;
}

}  // namespace elastipinn::testing
