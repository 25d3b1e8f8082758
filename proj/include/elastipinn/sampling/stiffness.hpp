#pragma once

// Ground-truth and estimated stiffness fields mu(x) in kPa.

#include <array>
#include <memory>
#include <string>
#include <variant>

#include <Eigen/Core>

#include "elastipinn/network/mlp.hpp"

namespace elastipinn::sampling {

struct ConstantField {
    double mu = 10.0;
};

// mu_l for x < split, mu_r for x > split; the interface takes the stiffer value.
struct TwoRegionField {
    double mu_l = 7.5;
    double mu_r = 15.0;
    double split = 5.0;
};

// Concentric closed balls; radii ascending, values[i] inside radii[i].
struct ScarSpheresField {
    double background = 7.5;
    Eigen::Vector3d center{3.0, 3.0, 1.0};
    std::array<double, 3> radii{1.0, 1.5, 2.0};
    std::array<double, 3> values{15.0, 12.5, 10.0};
};

// mu(x) = mu_ref (1 + NN(x)), or mu_ref softplus(NN(x)) / log 2 when softplus
// is set. Both give mu_ref for a zero network output.
struct NetworkField {
    net::MlpSpec spec;
    Eigen::VectorXd weights;
    double mu_ref = 10.0;
    bool softplus = false;
};

using StiffnessField = std::variant<ConstantField, TwoRegionField, ScarSpheresField, NetworkField>;

double stiffness_at(const StiffnessField& f, const Eigen::Vector3d& x);

// Network output o -> mu and dmu/do.
double network_output_to_mu(const NetworkField& f, double o, double* dmu_do = nullptr);

// 0 left, 1 right.
int region_of(const TwoRegionField& f, const Eigen::Vector3d& x);

std::string field_kind(const StiffnessField& f);

}  // namespace elastipinn::sampling
