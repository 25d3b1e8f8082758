#include "elastipinn/network/serialize.hpp"

#include <stdexcept>

namespace elastipinn::net {

using nlohmann::json;

json to_json(const FourierSpec& fs) {
    json B = json::array();
    for (Eigen::Index r = 0; r < fs.B.rows(); ++r) B.push_back({fs.B(r, 0), fs.B(r, 1), fs.B(r, 2)});
    return {{"m", fs.m}, {"sigma", fs.sigma}, {"seed", fs.seed}, {"B", B}};
}

FourierSpec fourier_from_json(const json& j) {
    FourierSpec fs;
    fs.m = j.at("m").get<int>();
    fs.sigma = j.at("sigma").get<double>();
    fs.seed = j.at("seed").get<std::uint64_t>();
    const json& B = j.at("B");
    if (static_cast<int>(B.size()) != fs.m) throw std::invalid_argument("fourier: B must have m rows");
    fs.B.resize(fs.m, 3);
    for (int r = 0; r < fs.m; ++r)
        for (int c = 0; c < 3; ++c) fs.B(r, c) = B.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c));
    return fs;
}

json to_json(const MlpSpec& spec) {
    json j = {{"input_dim", spec.input_dim},
              {"hidden", spec.hidden},
              {"output_dim", spec.output_dim},
              {"input_scale", {spec.input_scale[0], spec.input_scale[1], spec.input_scale[2]}}};
    if (spec.fourier) j["fourier"] = to_json(*spec.fourier);
    return j;
}

MlpSpec mlp_from_json(const json& j) {
    MlpSpec spec;
    spec.input_dim = j.at("input_dim").get<int>();
    spec.hidden = j.at("hidden").get<std::vector<int>>();
    spec.output_dim = j.at("output_dim").get<int>();
    const auto s = j.at("input_scale").get<std::vector<double>>();
    if (s.size() != 3) throw std::invalid_argument("mlp: input_scale needs 3 entries");
    spec.input_scale = Eigen::Vector3d(s[0], s[1], s[2]);
    if (j.contains("fourier")) spec.fourier = fourier_from_json(j.at("fourier"));
    spec.validate();
    return spec;
}

json network_to_json(const MlpSpec& spec, const Eigen::VectorXd& w, std::uint64_t seed) {
    return {{"spec", to_json(spec)}, {"seed", seed}, {"weights", std::vector<double>(w.data(), w.data() + w.size())}};
}

void network_from_json(const json& j, MlpSpec& spec, Eigen::VectorXd& w, std::uint64_t& seed) {
    spec = mlp_from_json(j.at("spec"));
    seed = j.at("seed").get<std::uint64_t>();
    const auto v = j.at("weights").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(v.size()) != spec.parameter_count())
        throw std::invalid_argument("network: weight count does not match spec");
    w = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace elastipinn::net
