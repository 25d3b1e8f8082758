#pragma once

// Manufactured twins of the slab benchmarks. A closed-form displacement u_MS
// is made an exact solution of the boundary value problem by adding the body
// force f = -div P(u_MS) and matching boundary sources on every face.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "elastipinn/data/observations.hpp"
#include "elastipinn/mechanics/kernels.hpp"
#include "elastipinn/mechanics/material.hpp"
#include "elastipinn/sampling/geometry.hpp"
#include "elastipinn/sampling/stiffness.hpp"

namespace elastipinn::data {

// u_k(x) = (A x)_k + 1/2 x^T Q_k x with symmetric Q_k.
struct QuadraticDisplacement {
    mech::Mat3d A = mech::Mat3d::Zero();
    std::array<mech::Mat3d, 3> Q{mech::Mat3d::Zero(), mech::Mat3d::Zero(), mech::Mat3d::Zero()};

    // "slab-quadratic", "affine" or "zero".
    static QuadraticDisplacement preset(const std::string& name);
    static std::vector<std::string> preset_names();

    mech::Vec3d value(const mech::Vec3d& x) const;
    mech::Mat3d gradient(const mech::Vec3d& x) const;
    // G_j = d(grad u)/dx_j, constant for a quadratic field.
    std::array<mech::Mat3d, 3> second() const;
};

struct ManufacturedProblem {
    sampling::SlabGeometry geometry;
    mech::MaterialModel material;
    // Overrides the first material parameter pointwise when set.
    std::optional<sampling::StiffnessField> field;
    QuadraticDisplacement u;
    double pressure = -8.0;  // kPa
    double robin_k = 10.0;   // kPa/mm

    mech::ParamVec parameters_at(const mech::Vec3d& x) const;
    mech::PointState state_at(const mech::Vec3d& x) const;

    mech::Vec3d displacement(const mech::Vec3d& x) const { return u.value(x); }
    mech::Mat3d strain(const mech::Vec3d& x) const;
    mech::Mat3d first_pk(const mech::Vec3d& x) const;
    mech::Mat3d cauchy(const mech::Vec3d& x) const;
    double stiffness(const mech::Vec3d& x) const { return parameters_at(x)[0]; }

    mech::Vec3d body_force(const mech::Vec3d& x) const;
    // Sources making P n + p cof(F) n - g = 0 on lateral faces and
    // P n + k u - g = 0 on top and bottom.
    mech::Vec3d neumann_source(const mech::Vec3d& x, const mech::Vec3d& n) const;
    mech::Vec3d robin_source(const mech::Vec3d& x, const mech::Vec3d& n) const;

    // Throws std::domain_error naming the first probe point with J below the
    // admissible threshold.
    void check_admissible(int per_axis = 11) const;

    ObservationSet sample_observations(int n, std::uint64_t seed, bool with_strain) const;
    ObservationSet lattice_observations(double spacing, bool with_strain) const;
    ObservationSet observe(const Eigen::Matrix3Xd& x, bool with_strain) const;
};

}  // namespace elastipinn::data
