#pragma once

// Hyperelastic strain-energy densities (kPa) of the three supported laws.
//
// Every law is evaluated through one generic entry point, `energy<T>`, which
// takes its parameters as a flat array in the order given by
// `parameter_names`. Writing the energy against a generic scalar lets the
// same code produce stresses, tangents and their weight sensitivities by
// nesting dual numbers.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "elastipinn/mechanics/tensor.hpp"

namespace elastipinn::mech {

enum class Law { NeoHookean, Guccione, HolzapfelOgden1F };

inline constexpr int kMaxParameters = 6;

/// mu/2 (J^{-2/3} I1 - 3) + kappa/2 (J - 1)^2
struct NeoHookean {
    double mu = 10.0;
    double kappa = 1000.0;
};

/// alpha/2 (exp(Q) - 1) + kappa/2 (log J)^2 with Q built from the isochoric
/// Green-Lagrange strain in the fibre frame. `beta` scales b_f, b_t and b_fs
/// jointly; it is 1 unless the joint alpha-beta estimation is requested.
struct Guccione {
    double alpha = 0.876;
    double b_f = 18.48;
    double b_t = 3.58;
    double b_fs = 1.627;
    double kappa = 1000.0;
    double beta = 1.0;
};

/// One-fibre Holzapfel-Ogden law:
/// kappa/2 (log J)^2 + a/(2b)(exp(b(J^{-2/3} tr C - 3)) - 1)
///   + a_f/(2 b_f)(exp(b_f (I4f - 1)^2) - 1)
struct HolzapfelOgden1F {
    double a = 0.809;
    double b = 7.474;
    double a_f = 1.911;
    double b_f = 22.063;
    double kappa = 1000.0;
};

/// Orthonormal fibre, sheet and sheet-normal directions as a function of the
/// reference position (mm).
struct FiberFrame {
    enum class Kind { Constant, LinearInZ };
    Kind kind = Kind::Constant;
    // LinearInZ: the fibre turns in the x-y plane from angle_bottom at z=0
    // to angle_top at z=height (degrees from the x-axis).
    double angle_bottom_deg = 0.0;
    double angle_top_deg = 24.0;
    double height = 2.0;

    static FiberFrame constant() { return {}; }
    static FiberFrame linear_in_z(double top_deg = 24.0, double height_mm = 2.0) {
        FiberFrame f;
        f.kind = Kind::LinearInZ;
        f.angle_top_deg = top_deg;
        f.height = height_mm;
        return f;
    }
};

template <typename T>
struct Frame {
    Vec3<T> f0, s0, n0;
};

template <typename T>
Frame<T> frame_at(const FiberFrame& ff, const Vec3<T>& x) {
    Frame<T> fr;
    if (ff.kind == FiberFrame::Kind::Constant) {
        fr.f0 << T(1.0), T(0.0), T(0.0);
        fr.s0 << T(0.0), T(1.0), T(0.0);
    } else {
        constexpr double deg = std::numbers::pi / 180.0;
        const double slope = (ff.angle_top_deg - ff.angle_bottom_deg) * deg / ff.height;
        const T theta = x[2] * slope + ff.angle_bottom_deg * deg;
        const T c = cos(theta);
        const T s = sin(theta);
        fr.f0 << c, s, T(0.0);
        fr.s0 << -s, c, T(0.0);
    }
    fr.n0 << T(0.0), T(0.0), T(1.0);
    return fr;
}

struct MaterialModel {
    std::variant<NeoHookean, Guccione, HolzapfelOgden1F> law = NeoHookean{};
    FiberFrame fiber;

    Law kind() const { return static_cast<Law>(law.index()); }
};

const std::vector<std::string>& parameter_names(Law law);
inline int parameter_count(Law law) { return static_cast<int>(parameter_names(law).size()); }
// Index of a named parameter, or -1.
int parameter_index(Law law, const std::string& name);

Eigen::VectorXd parameters(const MaterialModel& m);
MaterialModel with_parameters(const MaterialModel& m, const Eigen::VectorXd& p);

// Throws std::invalid_argument when a stiffness-like parameter is not > 0.
void validate(const MaterialModel& m);

std::string law_name(Law law);
Law law_from_name(const std::string& name);

namespace detail {

template <typename T>
T neo_hookean(const T* p, const Mat3<T>& F, const T& J) {
    const T& mu = p[0];
    const T& kappa = p[1];
    const T i1 = F.squaredNorm();
    const T jm23 = pow(J, -2.0 / 3.0);
    const T jm1 = J - 1.0;
    return 0.5 * mu * (jm23 * i1 - 3.0) + 0.5 * kappa * jm1 * jm1;
}

template <typename T>
T guccione(const T* p, const Mat3<T>& F, const T& J, const Frame<T>& fr) {
    const T& alpha = p[0];
    const T& kappa = p[4];
    const T& beta = p[5];
    const T bf = beta * p[1];
    const T bt = beta * p[2];
    const T bfs = beta * p[3];
    const Mat3<T> C = F.transpose() * F;
    const T jm23 = pow(J, -2.0 / 3.0);
    Mat3<T> Ebar = 0.5 * (jm23 * C);
    for (int i = 0; i < 3; ++i) Ebar(i, i) -= 0.5;
    const T eff = quad(fr.f0, Ebar, fr.f0);
    const T ess = quad(fr.s0, Ebar, fr.s0);
    const T enn = quad(fr.n0, Ebar, fr.n0);
    const T esn = quad(fr.s0, Ebar, fr.n0);
    const T efs = quad(fr.f0, Ebar, fr.s0);
    const T efn = quad(fr.f0, Ebar, fr.n0);
    const T q = bf * eff * eff + bt * (ess * ess + enn * enn + 2.0 * esn * esn) +
                2.0 * bfs * (efs * efs + efn * efn);
    const T lj = log(J);
    return 0.5 * alpha * (exp(q) - 1.0) + 0.5 * kappa * lj * lj;
}

template <typename T>
T holzapfel_ogden_1f(const T* p, const Mat3<T>& F, const T& J, const Frame<T>& fr) {
    const T& a = p[0];
    const T& b = p[1];
    const T& af = p[2];
    const T& bf = p[3];
    const T& kappa = p[4];
    const T i1bar = pow(J, -2.0 / 3.0) * F.squaredNorm();
    const Vec3<T> Ff = F * fr.f0;
    const T i4m1 = Ff.squaredNorm() - 1.0;
    const T lj = log(J);
    return 0.5 * kappa * lj * lj + a / (2.0 * b) * (exp(b * (i1bar - 3.0)) - 1.0) +
           af / (2.0 * bf) * (exp(bf * i4m1 * i4m1) - 1.0);
}

}  // namespace detail

// Strain energy per reference volume. `params` holds parameter_count(law)
// entries. J = det F must already be known to be positive.
template <typename T>
T energy(Law law, const T* params, const Mat3<T>& F, const Frame<T>& frame) {
    const T J = det3(F);
    switch (law) {
        case Law::NeoHookean:
            return detail::neo_hookean(params, F, J);
        case Law::Guccione:
            return detail::guccione(params, F, J, frame);
        case Law::HolzapfelOgden1F:
            return detail::holzapfel_ogden_1f(params, F, J, frame);
    }
    return T(0.0);
}

}  // namespace elastipinn::mech
