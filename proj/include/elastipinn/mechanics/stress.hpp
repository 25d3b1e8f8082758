#pragma once

// Strain energy and stresses of a MaterialModel at a material point. The
// first Piola-Kirchhoff stress is the gradient of W with respect to F,
// obtained by forward differentiation in the nine components of F.

#include "elastipinn/mechanics/kinematics.hpp"
#include "elastipinn/mechanics/material.hpp"

namespace elastipinn::mech {

double strain_energy(const MaterialModel& m, const DeformationState& s, const Vec3d& x = Vec3d::Zero());

// P = dW/dF at deformation F for a flat parameter array.
Mat3d first_pk_stress(Law law, const double* params, const Mat3d& F, const Frame<double>& frame);
Mat3d first_pk_stress(const MaterialModel& m, const DeformationState& s, const Vec3d& x = Vec3d::Zero());

// sigma = J^{-1} P F^T
Mat3d cauchy_stress(const Mat3d& P, const DeformationState& s);

}  // namespace elastipinn::mech
