#include "elastipinn/mechanics/stress.hpp"

#include "elastipinn/autodiff/dual.hpp"

namespace elastipinn::mech {

using ad::Dual;

double strain_energy(const MaterialModel& m, const DeformationState& s, const Vec3d& x) {
    const Eigen::VectorXd p = parameters(m);
    return energy<double>(m.kind(), p.data(), s.F, frame_at<double>(m.fiber, x));
}

Mat3d first_pk_stress(Law law, const double* params, const Mat3d& F, const Frame<double>& frame) {
    using D = Dual<double, 9>;
    Mat3<D> Fd;
    for (int k = 0; k < 9; ++k) Fd(k % 3, k / 3) = D(F(k % 3, k / 3), k);
    std::array<D, kMaxParameters> p{};
    const int np = parameter_count(law);
    for (int i = 0; i < np; ++i) p[static_cast<std::size_t>(i)] = D(params[i]);
    Frame<D> fr;
    fr.f0 = frame.f0.cast<D>();
    fr.s0 = frame.s0.cast<D>();
    fr.n0 = frame.n0.cast<D>();
    const D w = energy<D>(law, p.data(), Fd, fr);
    Mat3d P;
    for (int k = 0; k < 9; ++k) P(k % 3, k / 3) = w.d[static_cast<std::size_t>(k)];
    return P;
}

Mat3d first_pk_stress(const MaterialModel& m, const DeformationState& s, const Vec3d& x) {
    const Eigen::VectorXd p = parameters(m);
    return first_pk_stress(m.kind(), p.data(), s.F, frame_at<double>(m.fiber, x));
}

Mat3d cauchy_stress(const Mat3d& P, const DeformationState& s) { return P * s.F.transpose() / s.J; }

}  // namespace elastipinn::mech
