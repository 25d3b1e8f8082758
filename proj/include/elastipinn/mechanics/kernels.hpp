#pragma once

// Per-point stress kernels used by the physics losses.
//
// A point is described by F, the spatial derivatives G_j = dF/dx_j, the
// material parameters p and their spatial derivatives dp_j. The kernels
// return div P and the gradients of scalar contractions of P and div P with
// respect to all of these inputs, by nesting dual numbers over W.

#include <array>

#include <Eigen/Core>

#include "elastipinn/mechanics/material.hpp"

namespace elastipinn::mech {

using ParamVec = Eigen::Matrix<double, kMaxParameters, 1>;

struct PointState {
    Mat3d F = Mat3d::Identity();
    std::array<Mat3d, 3> G{Mat3d::Zero(), Mat3d::Zero(), Mat3d::Zero()};
    ParamVec p = ParamVec::Zero();
    std::array<ParamVec, 3> dp{ParamVec::Zero(), ParamVec::Zero(), ParamVec::Zero()};
    Vec3d x = Vec3d::Zero();
};

struct StressDivergence {
    double W = 0.0;
    Mat3d P = Mat3d::Zero();
    Vec3d div = Vec3d::Zero();
};

StressDivergence stress_divergence(Law law, const FiberFrame& fiber, const PointState& s);

// Gradient of v . div P with respect to every input of the point.
struct DivergenceAdjoint {
    Mat3d dF = Mat3d::Zero();
    std::array<Mat3d, 3> dG{Mat3d::Zero(), Mat3d::Zero(), Mat3d::Zero()};
    ParamVec dp = ParamVec::Zero();
    std::array<ParamVec, 3> ddp{ParamVec::Zero(), ParamVec::Zero(), ParamVec::Zero()};
};

DivergenceAdjoint divergence_adjoint(Law law, const FiberFrame& fiber, const PointState& s, const Vec3d& v);

// P and the gradient of M : P with respect to F and p (M held fixed).
struct ContractionGrad {
    Mat3d P = Mat3d::Zero();
    Mat3d dF = Mat3d::Zero();
    ParamVec dp = ParamVec::Zero();
};

ContractionGrad contraction_grad(Law law, const FiberFrame& fiber, const PointState& s, const Mat3d& M);

}  // namespace elastipinn::mech
