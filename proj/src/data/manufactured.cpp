#include "elastipinn/data/manufactured.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "elastipinn/mechanics/kinematics.hpp"
#include "elastipinn/mechanics/stress.hpp"
#include "elastipinn/sampling/points.hpp"

namespace elastipinn::data {

using mech::Mat3d;
using mech::Vec3d;

QuadraticDisplacement QuadraticDisplacement::preset(const std::string& name) {
    QuadraticDisplacement q;
    if (name == "zero") return q;
    // Isochoric stretch along x composed with a shear map
    // (x, y + c x^2, z + d x y) whose Jacobian is unit lower triangular, so
    // det F = 1 everywhere.
    const double lam = 1.08;
    const double s = 1.0 / std::sqrt(lam);
    q.A.diagonal() << lam - 1.0, s - 1.0, s - 1.0;
    if (name == "affine") return q;
    if (name != "slab-quadratic") throw std::invalid_argument("unknown displacement preset '" + name + "'");
    const double c = 0.01, d = 0.002;
    q.Q[1](0, 0) = 2.0 * s * c;
    q.Q[2](0, 1) = q.Q[2](1, 0) = s * d;
    return q;
}

std::vector<std::string> QuadraticDisplacement::preset_names() { return {"slab-quadratic", "affine", "zero"}; }

Vec3d QuadraticDisplacement::value(const Vec3d& x) const {
    Vec3d u = A * x;
    for (int k = 0; k < 3; ++k) u[k] += 0.5 * x.dot(Q[static_cast<std::size_t>(k)] * x);
    return u;
}

Mat3d QuadraticDisplacement::gradient(const Vec3d& x) const {
    Mat3d g = A;
    for (int k = 0; k < 3; ++k) g.row(k) += (Q[static_cast<std::size_t>(k)] * x).transpose();
    return g;
}

std::array<Mat3d, 3> QuadraticDisplacement::second() const {
    std::array<Mat3d, 3> G;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) G[static_cast<std::size_t>(j)](k, l) = Q[static_cast<std::size_t>(k)](l, j);
    return G;
}

mech::ParamVec ManufacturedProblem::parameters_at(const Vec3d& x) const {
    mech::ParamVec p = mech::ParamVec::Zero();
    const Eigen::VectorXd base = mech::parameters(material);
    p.head(base.size()) = base;
    if (field) p[0] = sampling::stiffness_at(*field, x);
    return p;
}

mech::PointState ManufacturedProblem::state_at(const Vec3d& x) const {
    mech::PointState s;
    s.x = x;
    s.F = Mat3d::Identity() + u.gradient(x);
    s.G = u.second();
    s.p = parameters_at(x);
    return s;
}

Mat3d ManufacturedProblem::strain(const Vec3d& x) const { return mech::green_lagrange(Mat3d::Identity() + u.gradient(x)); }

Mat3d ManufacturedProblem::first_pk(const Vec3d& x) const {
    const mech::PointState s = state_at(x);
    return mech::first_pk_stress(material.kind(), s.p.data(), s.F, mech::frame_at<double>(material.fiber, x));
}

Mat3d ManufacturedProblem::cauchy(const Vec3d& x) const {
    const mech::DeformationState ds = mech::kinematics(u.gradient(x), Vec3d::UnitX(), x);
    return mech::cauchy_stress(first_pk(x), ds);
}

Vec3d ManufacturedProblem::body_force(const Vec3d& x) const {
    return -mech::stress_divergence(material.kind(), material.fiber, state_at(x)).div;
}

Vec3d ManufacturedProblem::neumann_source(const Vec3d& x, const Vec3d& n) const {
    const Mat3d F = Mat3d::Identity() + u.gradient(x);
    return first_pk(x) * n + pressure * (mech::cofactor3(F) * n);
}

Vec3d ManufacturedProblem::robin_source(const Vec3d& x, const Vec3d& n) const {
    return first_pk(x) * n + robin_k * u.value(x);
}

void ManufacturedProblem::check_admissible(int per_axis) const {
    const Eigen::Vector3d e = geometry.extent();
    for (int i = 0; i < per_axis; ++i)
        for (int j = 0; j < per_axis; ++j)
            for (int k = 0; k < per_axis; ++k) {
                const Vec3d x(e[0] * i / (per_axis - 1), e[1] * j / (per_axis - 1), e[2] * k / (per_axis - 1));
                const double J = mech::det3<double>(Mat3d::Identity() + u.gradient(x));
                if (!(J >= mech::kMinJacobian)) {
                    std::ostringstream os;
                    os << "manufactured displacement is inadmissible: J = " << J << " at (" << x[0] << ", " << x[1]
                       << ", " << x[2] << ")";
                    throw std::domain_error(os.str());
                }
            }
}

ObservationSet ManufacturedProblem::observe(const Eigen::Matrix3Xd& x, bool with_strain) const {
    ObservationSet obs;
    obs.provenance = "manufactured";
    obs.x = x;
    obs.u.resize(3, x.cols());
    if (with_strain) obs.E = StrainBlock(6, x.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        obs.u.col(i) = u.value(x.col(i));
        if (with_strain) obs.E->col(i) = pack_strain(strain(x.col(i)));
    }
    obs.u_clean = obs.u;
    return obs;
}

ObservationSet ManufacturedProblem::sample_observations(int n, std::uint64_t seed, bool with_strain) const {
    return observe(sampling::sample_interior(geometry, n, seed), with_strain);
}

ObservationSet ManufacturedProblem::lattice_observations(double spacing, bool with_strain) const {
    return observe(sampling::lattice(geometry, spacing), with_strain);
}

}  // namespace elastipinn::data
