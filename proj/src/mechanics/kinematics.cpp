#include "elastipinn/mechanics/kinematics.hpp"

#include <cmath>
#include <sstream>

namespace elastipinn::mech {

namespace {
std::string inverted_message(double J, const Vec3d& x) {
    std::ostringstream os;
    os << "inverted element: J = " << J << " at (" << x[0] << ", " << x[1] << ", " << x[2] << ")";
    return os.str();
}
}  // namespace

InvertedElement::InvertedElement(double J, const Vec3d& x)
    : std::runtime_error(inverted_message(J, x)), J_(J), x_(x) {}

DeformationState kinematics(const Mat3d& grad_u, const Vec3d& f0, const Vec3d& x) {
    DeformationState s;
    s.F = Mat3d::Identity() + grad_u;
    s.J = det3(s.F);
    if (!(s.J >= kMinJacobian)) throw InvertedElement(s.J, x);
    s.C = s.F.transpose() * s.F;
    s.E = 0.5 * (s.C - Mat3d::Identity());
    s.Cbar = std::pow(s.J, -2.0 / 3.0) * s.C;
    s.Ebar = 0.5 * (s.Cbar - Mat3d::Identity());
    s.I1 = s.C.trace();
    s.I4f = f0.dot(s.C * f0);
    return s;
}

}  // namespace elastipinn::mech
