#include "elastipinn/sampling/stiffness.hpp"

#include <cmath>

namespace elastipinn::sampling {

double network_output_to_mu(const NetworkField& f, double o, double* dmu_do) {
    if (!f.softplus) {
        if (dmu_do) *dmu_do = f.mu_ref;
        return f.mu_ref * (1.0 + o);
    }
    const double ln2 = std::log(2.0);
    // log(1 + e^o) without overflow
    const double sp = o > 30.0 ? o : std::log1p(std::exp(o));
    if (dmu_do) *dmu_do = f.mu_ref / ln2 / (1.0 + std::exp(-o));
    return f.mu_ref * sp / ln2;
}

int region_of(const TwoRegionField& f, const Eigen::Vector3d& x) {
    if (x[0] < f.split) return 0;
    if (x[0] > f.split) return 1;
    return f.mu_l > f.mu_r ? 0 : 1;
}

double stiffness_at(const StiffnessField& field, const Eigen::Vector3d& x) {
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantField>) {
                return f.mu;
            } else if constexpr (std::is_same_v<T, TwoRegionField>) {
                return region_of(f, x) == 0 ? f.mu_l : f.mu_r;
            } else if constexpr (std::is_same_v<T, ScarSpheresField>) {
                const double r = (x - f.center).norm();
                for (std::size_t i = 0; i < f.radii.size(); ++i)
                    if (r <= f.radii[i]) return f.values[i];
                return f.background;
            } else {
                const double o = net::forward(f.spec, f.weights, x)[0];
                return network_output_to_mu(f, o);
            }
        },
        field);
}

std::string field_kind(const StiffnessField& f) {
    static const char* names[] = {"constant", "two-region", "scar-spheres", "network"};
    return names[f.index()];
}

}  // namespace elastipinn::sampling
