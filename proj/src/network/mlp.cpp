#include "elastipinn/network/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

namespace elastipinn::net {

FourierSpec FourierSpec::draw(int m, double sigma, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("fourier: m must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("fourier: sigma must be > 0");
    FourierSpec fs;
    fs.m = m;
    fs.sigma = sigma;
    fs.seed = seed;
    fs.B.resize(m, 3);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, sigma);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < 3; ++c) fs.B(r, c) = n(rng);
    return fs;
}

Eigen::VectorXd fourier_embed(const FourierSpec& fs, const Eigen::Vector3d& x) {
    const Eigen::VectorXd arg = fs.B * x;
    Eigen::VectorXd g(2 * fs.m);
    g.head(fs.m) = arg.array().cos();
    g.tail(fs.m) = arg.array().sin();
    return g;
}

std::vector<int> MlpSpec::widths() const {
    std::vector<int> w;
    w.push_back(feature_dim());
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(output_dim);
    return w;
}

Eigen::Index MlpSpec::parameter_count() const {
    const auto w = widths();
    Eigen::Index n = 0;
    for (std::size_t l = 0; l + 1 < w.size(); ++l) n += static_cast<Eigen::Index>(w[l] + 1) * w[l + 1];
    return n;
}

void MlpSpec::validate() const {
    if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("mlp: input and output dims must be >= 1");
    if (hidden.empty()) throw std::invalid_argument("mlp: at least one hidden layer is required");
    for (int h : hidden)
        if (h < 1) throw std::invalid_argument("mlp: hidden layer width " + std::to_string(h) + " < 1");
    if (fourier) {
        if (input_dim != 3) throw std::invalid_argument("mlp: fourier features need input_dim 3");
        if (fourier->B.rows() != fourier->m || fourier->B.cols() != 3)
            throw std::invalid_argument("mlp: fourier B must be m x 3");
    }
}

std::vector<LayerOffset> layer_offsets(const MlpSpec& spec) {
    const auto w = spec.widths();
    std::vector<LayerOffset> out;
    Eigen::Index pos = 0;
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
        LayerOffset L;
        L.fan_in = w[l];
        L.fan_out = w[l + 1];
        L.weight = pos;
        pos += static_cast<Eigen::Index>(L.fan_in) * L.fan_out;
        L.bias = pos;
        pos += L.fan_out;
        out.push_back(L);
    }
    return out;
}

Eigen::VectorXd xavier_init(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(spec.parameter_count());
    std::mt19937_64 rng(seed);
    for (const LayerOffset& L : layer_offsets(spec)) {
        const double r = std::sqrt(6.0 / (L.fan_in + L.fan_out));
        std::uniform_real_distribution<double> u(-r, r);
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(L.fan_in) * L.fan_out; ++k) w[L.weight + k] = u(rng);
    }
    return w;
}

}  // namespace elastipinn::net
