#pragma once

// Fully connected tanh networks with a linear output layer.
//
// Weights live in one flat vector. Layer l contributes its weight matrix
// (fan_out x fan_in, column-major) followed by its bias vector.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "elastipinn/autodiff/dual.hpp"

namespace elastipinn::net {

// Random Fourier features gamma(x) = [cos(Bx); sin(Bx)] with B frozen after
// construction. B acts on raw coordinates (mm).
struct FourierSpec {
    int m = 16;
    double sigma = 1.0;
    std::uint64_t seed = 0;
    Eigen::MatrixXd B;  // m x 3

    static FourierSpec draw(int m, double sigma, std::uint64_t seed);
    int dim() const { return 2 * m; }
};

Eigen::VectorXd fourier_embed(const FourierSpec& fs, const Eigen::Vector3d& x);

struct MlpSpec {
    int input_dim = 3;
    std::vector<int> hidden{32, 16, 8};
    int output_dim = 3;
    // Raw coordinates are multiplied by input_scale before the first layer
    // (ignored when Fourier features are active).
    Eigen::Vector3d input_scale = Eigen::Vector3d::Ones();
    std::optional<FourierSpec> fourier;

    int feature_dim() const { return fourier ? fourier->dim() : input_dim; }
    // feature_dim, hidden..., output_dim
    std::vector<int> widths() const;
    Eigen::Index parameter_count() const;
    void validate() const;
};

struct LayerOffset {
    Eigen::Index weight;  // start of the fan_out x fan_in block
    Eigen::Index bias;
    int fan_in;
    int fan_out;
};

std::vector<LayerOffset> layer_offsets(const MlpSpec& spec);

// Uniform in +-sqrt(6/(fan_in+fan_out)), zero biases.
Eigen::VectorXd xavier_init(const MlpSpec& spec, std::uint64_t seed);

// Input features for a raw point (generic scalar for derivative oracles).
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> features(const MlpSpec& spec, const Eigen::Matrix<T, 3, 1>& x) {
    using ad::cos;
    using ad::sin;
    if (spec.input_dim != 3) throw std::invalid_argument("features: input_dim must be 3");
    Eigen::Matrix<T, Eigen::Dynamic, 1> z;
    if (spec.fourier) {
        const auto& B = spec.fourier->B;
        const int m = spec.fourier->m;
        z.resize(2 * m);
        for (int r = 0; r < m; ++r) {
            T arg = x[0] * B(r, 0) + x[1] * B(r, 1) + x[2] * B(r, 2);
            z[r] = cos(arg);
            z[m + r] = sin(arg);
        }
    } else {
        z.resize(3);
        for (int j = 0; j < 3; ++j) z[j] = x[j] * spec.input_scale[j];
    }
    return z;
}

// Network output for a feature vector. `w` holds parameter_count() entries.
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> forward_features(const MlpSpec& spec, const T* w,
                                                     const Eigen::Matrix<T, Eigen::Dynamic, 1>& z0) {
    using ad::tanh;
    const auto layers = layer_offsets(spec);
    if (z0.size() != layers.front().fan_in) throw std::invalid_argument("forward: input dimension mismatch");
    Eigen::Matrix<T, Eigen::Dynamic, 1> z = z0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const LayerOffset& L = layers[l];
        Eigen::Matrix<T, Eigen::Dynamic, 1> a(L.fan_out);
        for (int o = 0; o < L.fan_out; ++o) {
            T s = w[L.bias + o];
            for (int i = 0; i < L.fan_in; ++i) s += w[L.weight + static_cast<Eigen::Index>(i) * L.fan_out + o] * z[i];
            a[o] = (l + 1 < layers.size()) ? T(tanh(s)) : s;
        }
        z = std::move(a);
    }
    return z;
}

template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> forward(const MlpSpec& spec, const T* w, const Eigen::Matrix<T, 3, 1>& x) {
    return forward_features<T>(spec, w, features<T>(spec, x));
}

inline Eigen::VectorXd forward(const MlpSpec& spec, const Eigen::VectorXd& w, const Eigen::Vector3d& x) {
    if (w.size() != spec.parameter_count()) throw std::invalid_argument("forward: weight vector has wrong length");
    return forward<double>(spec, w.data(), x);
}

}  // namespace elastipinn::net
