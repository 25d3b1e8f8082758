#include "elastipinn/network/jet.hpp"

#include <stdexcept>

namespace elastipinn::net {

namespace {

using Eigen::ArrayXXd;
using Eigen::Index;
using Eigen::MatrixXd;

auto block(MatrixXd& m, Index n, int c) { return m.middleCols(c * n, n).array(); }
auto block(const MatrixXd& m, Index n, int c) { return m.middleCols(c * n, n).array(); }

void tanh_jet(const MatrixXd& A, MatrixXd& H, int order, Index n) {
    H.resize(A.rows(), A.cols());
    block(H, n, 0) = block(A, n, 0).tanh();
    if (order == 0) return;
    const ArrayXXd h = block(H, n, 0);
    const ArrayXXd t1 = 1.0 - h * h;
    for (int j = 0; j < 3; ++j) block(H, n, d1_channel(j)) = t1 * block(A, n, d1_channel(j));
    if (order == 1) return;
    const ArrayXXd t2 = -2.0 * h * t1;
    for (int p = 0; p < 6; ++p) {
        const int j = kPairs[static_cast<std::size_t>(p)][0], k = kPairs[static_cast<std::size_t>(p)][1];
        block(H, n, d2_channel(p)) =
            t1 * block(A, n, d2_channel(p)) + t2 * block(A, n, d1_channel(j)) * block(A, n, d1_channel(k));
    }
}

// Adjoint of the pre-activation jet from the adjoint of the activation jet.
void tanh_jet_adjoint(const MatrixXd& A, const MatrixXd& H, const MatrixXd& adjH, MatrixXd& adjA, int order,
                      Index n) {
    adjA.resize(A.rows(), A.cols());
    const ArrayXXd h = block(H, n, 0);
    const ArrayXXd t1 = 1.0 - h * h;
    block(adjA, n, 0) = t1 * block(adjH, n, 0);
    if (order == 0) return;
    const ArrayXXd t2 = -2.0 * h * t1;
    for (int j = 0; j < 3; ++j) {
        block(adjA, n, d1_channel(j)) = t1 * block(adjH, n, d1_channel(j));
        block(adjA, n, 0) += t2 * block(adjH, n, d1_channel(j)) * block(A, n, d1_channel(j));
    }
    if (order == 1) return;
    const ArrayXXd t3 = -2.0 * (t1 * t1 + h * t2);
    for (int p = 0; p < 6; ++p) {
        const int j = kPairs[static_cast<std::size_t>(p)][0], k = kPairs[static_cast<std::size_t>(p)][1];
        const ArrayXXd g = block(adjH, n, d2_channel(p));
        const auto aj = block(A, n, d1_channel(j));
        const auto ak = block(A, n, d1_channel(k));
        block(adjA, n, d2_channel(p)) = t1 * g;
        block(adjA, n, 0) += g * (t2 * block(A, n, d2_channel(p)) + t3 * aj * ak);
        block(adjA, n, d1_channel(j)) += t2 * g * ak;
        block(adjA, n, d1_channel(k)) += t2 * g * aj;
    }
}

}  // namespace

MatrixXd feature_jet(const MlpSpec& spec, const Eigen::Matrix3Xd& x, int order) {
    const Index n = x.cols();
    const int nch = channel_count(order);
    const int d = spec.feature_dim();
    MatrixXd Z = MatrixXd::Zero(d, nch * n);
    if (!spec.fourier) {
        if (spec.input_dim != 3) throw std::invalid_argument("feature_jet: input_dim must be 3");
        for (int j = 0; j < 3; ++j) {
            Z.block(j, 0, 1, n) = spec.input_scale[j] * x.row(j);
            if (order >= 1) Z.block(j, d1_channel(j) * n, 1, n).setConstant(spec.input_scale[j]);
        }
        return Z;
    }
    const auto& fs = *spec.fourier;
    const int m = fs.m;
    const ArrayXXd arg = fs.B * x;
    const ArrayXXd c = arg.cos();
    const ArrayXXd s = arg.sin();
    Z.block(0, 0, m, n) = c.matrix();
    Z.block(m, 0, m, n) = s.matrix();
    if (order >= 1) {
        for (int j = 0; j < 3; ++j) {
            const Eigen::ArrayXd bj = fs.B.col(j).array();
            Z.block(0, d1_channel(j) * n, m, n) = (-s).colwise() * bj;
            Z.block(m, d1_channel(j) * n, m, n) = c.colwise() * bj;
        }
    }
    if (order >= 2) {
        for (int p = 0; p < 6; ++p) {
            const int j = kPairs[static_cast<std::size_t>(p)][0], k = kPairs[static_cast<std::size_t>(p)][1];
            const Eigen::ArrayXd bjk = fs.B.col(j).array() * fs.B.col(k).array();
            Z.block(0, d2_channel(p) * n, m, n) = (-c).colwise() * bjk;
            Z.block(m, d2_channel(p) * n, m, n) = (-s).colwise() * bjk;
        }
    }
    return Z;
}

JetTrace jet_forward(const MlpSpec& spec, const Eigen::VectorXd& w, const Eigen::Matrix3Xd& x, int order) {
    if (order < 0 || order > 2) throw std::invalid_argument("jet_forward: order must be 0, 1 or 2");
    if (w.size() != spec.parameter_count()) throw std::invalid_argument("jet_forward: weight vector has wrong length");
    const auto layers = layer_offsets(spec);
    JetTrace t;
    t.order = order;
    t.n = x.cols();
    t.inputs.reserve(layers.size());
    t.pre.reserve(layers.size() - 1);
    t.inputs.push_back(feature_jet(spec, x, order));
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const LayerOffset& L = layers[l];
        const Eigen::Map<const MatrixXd> W(w.data() + L.weight, L.fan_out, L.fan_in);
        const Eigen::Map<const Eigen::VectorXd> b(w.data() + L.bias, L.fan_out);
        MatrixXd A = W * t.inputs[l];
        A.leftCols(t.n).colwise() += b;
        if (l + 1 == layers.size()) {
            t.output = std::move(A);
        } else {
            MatrixXd H;
            tanh_jet(A, H, order, t.n);
            t.pre.push_back(std::move(A));
            t.inputs.push_back(std::move(H));
        }
    }
    return t;
}

void jet_backward(const MlpSpec& spec, const Eigen::VectorXd& w, const JetTrace& t, const MatrixXd& adj_output,
                  Eigen::Ref<Eigen::VectorXd> grad) {
    const auto layers = layer_offsets(spec);
    if (adj_output.rows() != t.output.rows() || adj_output.cols() != t.output.cols())
        throw std::invalid_argument("jet_backward: adjoint shape mismatch");
    MatrixXd adjA = adj_output;
    for (std::size_t l = layers.size(); l-- > 0;) {
        const LayerOffset& L = layers[l];
        Eigen::Map<MatrixXd> gW(grad.data() + L.weight, L.fan_out, L.fan_in);
        gW.noalias() += adjA * t.inputs[l].transpose();
        grad.segment(L.bias, L.fan_out) += adjA.leftCols(t.n).rowwise().sum();
        if (l == 0) break;
        const Eigen::Map<const MatrixXd> W(w.data() + L.weight, L.fan_out, L.fan_in);
        const MatrixXd adjH = W.transpose() * adjA;
        tanh_jet_adjoint(t.pre[l - 1], t.inputs[l], adjH, adjA, t.order, t.n);
    }
}

}  // namespace elastipinn::net
