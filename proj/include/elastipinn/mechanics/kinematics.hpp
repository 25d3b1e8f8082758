#pragma once

#include <stdexcept>
#include <string>

#include "elastipinn/mechanics/tensor.hpp"

namespace elastipinn::mech {

// Smallest admissible det F. Below it a state counts as inverted.
inline constexpr double kMinJacobian = 1e-6;

class InvertedElement : public std::runtime_error {
public:
    InvertedElement(double J, const Vec3d& x);
    double jacobian() const { return J_; }
    const Vec3d& point() const { return x_; }

private:
    double J_;
    Vec3d x_;
};

struct DeformationState {
    Mat3d F;
    double J = 1.0;
    Mat3d C;
    Mat3d E;
    Mat3d Cbar;
    Mat3d Ebar;
    double I1 = 3.0;
    double I4f = 1.0;
};

// F = I + grad_u and the derived strain measures. `f0` is the fibre direction
// used for I4f. Throws InvertedElement when J < kMinJacobian; `x` only labels
// the error.
DeformationState kinematics(const Mat3d& grad_u, const Vec3d& f0 = Vec3d::UnitX(),
                            const Vec3d& x = Vec3d::Zero());

inline Mat3d green_lagrange(const Mat3d& F) { return 0.5 * (F.transpose() * F - Mat3d::Identity()); }

}  // namespace elastipinn::mech
