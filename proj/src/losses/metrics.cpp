#include "elastipinn/losses/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "elastipinn/mechanics/kinematics.hpp"
#include "elastipinn/mechanics/stress.hpp"
#include "elastipinn/network/jet.hpp"

namespace elastipinn::loss {

FieldPrediction predict_fields(const Objective& obj, const Eigen::VectorXd& theta, const Eigen::Matrix3Xd& x) {
    const Model& m = obj.model();
    const Eigen::Index n = x.cols();
    const net::JetTrace t = net::jet_forward(m.u_spec, theta.head(obj.u_size()), x, 1);
    FieldPrediction out;
    out.x = x;
    out.u = t.channel(0);
    out.E.resize(9, n);
    out.sigma.resize(9, n);
    out.mu.resize(n);
    out.J.resize(n);
    out.valid.assign(static_cast<std::size_t>(n), true);
    const double nan = std::nan("");
    for (Eigen::Index i = 0; i < n; ++i) {
        mech::Mat3d F = mech::Mat3d::Identity();
        for (int l = 0; l < 3; ++l) F.col(l) += t.channel(net::d1_channel(l)).col(i);
        const mech::ParamVec p = obj.parameters_at(theta, x.col(i));
        out.mu[i] = p[0];
        const double J = mech::det3(F);
        out.J[i] = J;
        if (!(J >= mech::kMinJacobian)) {
            out.valid[static_cast<std::size_t>(i)] = false;
            out.E.col(i).setConstant(nan);
            out.sigma.col(i).setConstant(nan);
            continue;
        }
        const mech::Mat3d E = mech::green_lagrange(F);
        out.E.col(i) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(E.data());
        const mech::Vec3d xi = x.col(i);
        const mech::Mat3d P =
            mech::first_pk_stress(m.material.kind(), p.data(), F, mech::frame_at<double>(m.material.fiber, xi));
        const mech::Mat3d s = P * F.transpose() / J;
        out.sigma.col(i) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(s.data());
    }
    return out;
}

double relative_l2(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
    const double nt = truth.norm();
    if (!(nt > 0.0)) throw std::domain_error("ground truth has zero norm");
    return (pred - truth).norm() / nt;
}

MetricRecord parameter_metrics(const Objective& obj, const Eigen::VectorXd& theta, const TestTruth& truth) {
    MetricRecord r;
    const Model& m = obj.model();
    const ParameterSnapshot snap = obj.snapshot(theta);
    for (const auto& s : m.param.scalars) {
        const int idx = mech::parameter_index(m.material.kind(), s.name);
        const double est = snap.global[idx];
        const double tru = truth.parameters.size() > idx ? truth.parameters[idx] : std::nan("");
        r.estimates.emplace_back(s.name, est);
        r.parameters.emplace_back(s.name, std::abs(est - tru) / tru);
    }
    if (m.param.mode == StiffnessMode::TwoRegion) {
        static const char* names[2] = {"mu_l", "mu_r"};
        for (int k = 0; k < 2; ++k) {
            const double est = snap.region[static_cast<std::size_t>(k)];
            const double tru = truth.region[static_cast<std::size_t>(k)];
            r.estimates.emplace_back(names[k], est);
            r.parameters.emplace_back(names[k], std::abs(est - tru) / tru);
        }
    }
    if (m.param.mode == StiffnessMode::Global) {
        if (!r.parameters.empty()) r.e_mu = r.parameters.front().second;
    } else if (truth.x_pde.cols() > 0 && truth.mu.size() == truth.x_pde.cols()) {
        if (!(truth.mu_max > 0.0)) throw std::domain_error("maximum ground-truth stiffness must be > 0");
        double s = 0.0;
        for (Eigen::Index i = 0; i < truth.x_pde.cols(); ++i) {
            const double d = obj.parameters_at(theta, truth.x_pde.col(i))[0] - truth.mu[i];
            s += d * d;
        }
        r.e_mu = std::sqrt(s / static_cast<double>(truth.x_pde.cols())) / truth.mu_max;
    }
    return r;
}

MetricRecord error_metrics(const Objective& obj, const Eigen::VectorXd& theta, const TestTruth& truth) {
    if (truth.x_obs.cols() == 0) throw std::invalid_argument("test observation set is empty");
    MetricRecord r = parameter_metrics(obj, theta, truth);
    const FieldPrediction f = predict_fields(obj, theta, truth.x_obs);
    r.e_u = relative_l2(f.u, truth.u);
    if (truth.E) r.e_E = relative_l2(f.E, *truth.E);
    if (truth.sigma) r.e_sigma = relative_l2(f.sigma, *truth.sigma);
    return r;
}

}  // namespace elastipinn::loss
