#pragma once

// Batched evaluation of a network together with its spatial derivatives.
//
// A jet of order 0, 1 or 2 carries 1, 4 or 10 channels per point: the value,
// the three first derivatives and the six unique second derivatives
// (xx, xy, xz, yy, yz, zz) with respect to the raw coordinates. Channels are
// stacked side by side, so a layer of width d over n points is a
// d x (channels * n) matrix and each affine map is a single matrix product.

#include <array>

#include <Eigen/Core>

#include "elastipinn/network/mlp.hpp"

namespace elastipinn::net {

inline constexpr std::array<std::array<int, 2>, 6> kPairs{{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};

inline int pair_index(int j, int k) {
    static constexpr int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return table[j][k];
}

inline int channel_count(int order) { return order == 0 ? 1 : (order == 1 ? 4 : 10); }
// Column block of the first derivative d/dx_j and of the second derivative pair p.
inline int d1_channel(int j) { return 1 + j; }
inline int d2_channel(int p) { return 4 + p; }

struct JetTrace {
    int order = 0;
    Eigen::Index n = 0;
    std::vector<Eigen::MatrixXd> inputs;  // input jet of every layer
    std::vector<Eigen::MatrixXd> pre;     // pre-activation jet of every hidden layer
    Eigen::MatrixXd output;               // output_dim x (channels * n)

    auto channel(int c) const { return output.middleCols(c * n, n); }
};

// Feature jets (input of the first layer) for raw points.
Eigen::MatrixXd feature_jet(const MlpSpec& spec, const Eigen::Matrix3Xd& x, int order);

JetTrace jet_forward(const MlpSpec& spec, const Eigen::VectorXd& w, const Eigen::Matrix3Xd& x, int order);

// Adds to `grad` the gradient with respect to w of sum(adj .* trace.output).
void jet_backward(const MlpSpec& spec, const Eigen::VectorXd& w, const JetTrace& trace,
                  const Eigen::MatrixXd& adj_output, Eigen::Ref<Eigen::VectorXd> grad);

}  // namespace elastipinn::net
