#include "elastipinn/mechanics/material.hpp"

#include <stdexcept>

namespace elastipinn::mech {

const std::vector<std::string>& parameter_names(Law law) {
    static const std::vector<std::string> nh{"mu", "kappa"};
    static const std::vector<std::string> gu{"alpha", "b_f", "b_t", "b_fs", "kappa", "beta"};
    static const std::vector<std::string> ho{"a", "b", "a_f", "b_f", "kappa"};
    switch (law) {
        case Law::NeoHookean:
            return nh;
        case Law::Guccione:
            return gu;
        case Law::HolzapfelOgden1F:
            return ho;
    }
    throw std::invalid_argument("unknown law");
}

int parameter_index(Law law, const std::string& name) {
    const auto& names = parameter_names(law);
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

Eigen::VectorXd parameters(const MaterialModel& m) {
    return std::visit(
        [](const auto& law) -> Eigen::VectorXd {
            using L = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<L, NeoHookean>) {
                return Eigen::Vector2d(law.mu, law.kappa);
            } else if constexpr (std::is_same_v<L, Guccione>) {
                Eigen::VectorXd p(6);
                p << law.alpha, law.b_f, law.b_t, law.b_fs, law.kappa, law.beta;
                return p;
            } else {
                Eigen::VectorXd p(5);
                p << law.a, law.b, law.a_f, law.b_f, law.kappa;
                return p;
            }
        },
        m.law);
}

MaterialModel with_parameters(const MaterialModel& m, const Eigen::VectorXd& p) {
    MaterialModel out = m;
    if (p.size() != parameter_count(m.kind()))
        throw std::invalid_argument("parameter vector has wrong length for " + law_name(m.kind()));
    switch (m.kind()) {
        case Law::NeoHookean:
            out.law = NeoHookean{p[0], p[1]};
            break;
        case Law::Guccione:
            out.law = Guccione{p[0], p[1], p[2], p[3], p[4], p[5]};
            break;
        case Law::HolzapfelOgden1F:
            out.law = HolzapfelOgden1F{p[0], p[1], p[2], p[3], p[4]};
            break;
    }
    return out;
}

void validate(const MaterialModel& m) {
    const Eigen::VectorXd p = parameters(m);
    const auto& names = parameter_names(m.kind());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!(p[i] > 0.0))
            throw std::invalid_argument(law_name(m.kind()) + " parameter '" + names[static_cast<std::size_t>(i)] +
                                        "' must be > 0");
    }
}

std::string law_name(Law law) {
    switch (law) {
        case Law::NeoHookean:
            return "neo-hookean";
        case Law::Guccione:
            return "guccione";
        case Law::HolzapfelOgden1F:
            return "holzapfel-ogden-1f";
    }
    return "?";
}

Law law_from_name(const std::string& name) {
    if (name == "neo-hookean") return Law::NeoHookean;
    if (name == "guccione") return Law::Guccione;
    if (name == "holzapfel-ogden-1f") return Law::HolzapfelOgden1F;
    throw std::invalid_argument("unknown material law '" + name + "'");
}

}  // namespace elastipinn::mech
