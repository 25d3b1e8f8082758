#pragma once

#include <cstdint>

#include <json.hpp>

#include "elastipinn/network/mlp.hpp"

namespace elastipinn::net {

nlohmann::json to_json(const FourierSpec& fs);
FourierSpec fourier_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MlpSpec& spec);
MlpSpec mlp_from_json(const nlohmann::json& j);

// {"spec": ..., "seed": ..., "weights": [...]}; doubles round-trip exactly.
nlohmann::json network_to_json(const MlpSpec& spec, const Eigen::VectorXd& w, std::uint64_t seed);
void network_from_json(const nlohmann::json& j, MlpSpec& spec, Eigen::VectorXd& w, std::uint64_t& seed);

}  // namespace elastipinn::net
