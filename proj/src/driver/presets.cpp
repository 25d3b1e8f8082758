#include "elastipinn/driver/presets.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace elastipinn::driver {

namespace {

ExperimentConfig neo_hookean_base(const std::string& name) {
    ExperimentConfig c;
    c.name = name;
    c.truth.material.law = mech::NeoHookean{10.0, 1000.0};
    c.model = c.truth.material;
    c.param.mode = loss::StiffnessMode::Global;
    c.param.scalars = {{"mu", 15.0}};
    c.noise_ld = {0.0, 0.05, 0.10};
    c.sampling = sampling::SamplingPlan::setting(2);
    c.weights = {2.3e7, 0.0, 2.3e4, 2.3e2, 2.3e2, 0.0, 0.0};
    c.weights_inferred = true;
    c.schedule.bfgs = 4000;
    c.output_dir = "runs/" + name;
    return c;
}

ExperimentConfig iso_homogeneous(int setting) {
    ExperimentConfig c = neo_hookean_base("iso-homogeneous-setting" + std::to_string(setting));
    c.description = "Neo-Hookean slab, homogeneous mu from displacements, point counts of setting " +
                    std::to_string(setting);
    c.sampling = sampling::SamplingPlan::setting(setting);
    return c;
}

ExperimentConfig guccione(bool varying) {
    ExperimentConfig c;
    c.name = varying ? "guccione-varying-fiber" : "guccione-constant-fiber";
    c.description = varying ? "Guccione slab, fibres turning 0-24 deg through the thickness, estimate alpha"
                            : "Guccione slab, fibres along x, estimate alpha";
    c.truth.material.law = mech::Guccione{};
    if (varying) c.truth.material.fiber = mech::FiberFrame::linear_in_z(24.0, 2.0);
    c.model = c.truth.material;
    c.pressure = -4.0;
    c.param.scalars = {{"alpha", 1.314}};
    c.noise_ld = {0.0, 0.05, 0.10};
    c.sampling.n_pde = 5000;
    c.weights = {1.2e7, 0.0, 1.2e5, 1.2e2, 1.2e2, 0.0, 1e-7};
    c.weights_inferred = true;
    c.schedule.bfgs = 15000;
    c.output_dir = "runs/" + c.name;
    return c;
}

ExperimentConfig two_region(bool field) {
    ExperimentConfig c = neo_hookean_base(field ? "two-region-field" : "two-region-scalar");
    c.description = field ? "Two-region stiffness 7.5 | 15 kPa estimated as a network field"
                          : "Two-region stiffness 7.5 | 15 kPa estimated as one constant per half";
    c.truth.stiffness = sampling::TwoRegionField{7.5, 15.0, 5.0};
    c.sampling.n_pde = 5000;
    c.param.scalars.clear();
    if (field) {
        c.param.mode = loss::StiffnessMode::Field;
        c.param.mu_ref = 10.0;
        c.prior = {true, 10.0};
        c.weights = {13606.28, 0.0, 13606279.30, 136.06, 136.06, 1e-3, 0.0};
        c.schedule.bfgs = 4000;
    } else {
        c.param.mode = loss::StiffnessMode::TwoRegion;
        c.param.region_init = {15.0, 25.0};
        c.weights = {1.3606e7, 0.0, 13606.28, 136.06, 136.06, 0.0, 0.0};
        c.schedule.bfgs = 8000;
    }
    c.weights_inferred = true;
    return c;
}

ExperimentConfig scar(double pixel) {
    const bool coarse = pixel > 0.2 + 1e-12;
    ExperimentConfig c = neo_hookean_base(coarse ? "scar-field-0.4mm" : "scar-field-0.2mm");
    c.description = std::string("Concentric scar inclusion estimated as a network field from displacement and strain ") +
                    (coarse ? "pixels of 0.4 mm" : "on the 0.2 mm grid");
    c.truth.material.law = mech::NeoHookean{7.5, 500.0};
    c.model = c.truth.material;
    c.truth.stiffness = sampling::ScarSpheresField{};
    c.data.layout = ObservationLayout::Lattice;
    c.data.lattice_spacing = 0.2;
    c.data.pixel_spacing = coarse ? 0.4 : 0.0;
    c.data.strain = true;
    c.sampling = sampling::SamplingPlan::setting(3);
    c.sampling.n_pde = 5000;
    c.param.scalars.clear();
    c.param.mode = loss::StiffnessMode::Field;
    c.param.mu_ref = 7.5;
    c.prior = {true, 7.5};
    c.weights = {1.5e7, 1.5e7, 1.5e4, 1.5e2, 1.5e2, 1e-2, 1.0};
    c.weights_inferred = true;
    c.schedule.adam = 1000;
    c.schedule.bfgs = 8000;
    return c;
}

ExperimentConfig model_mismatch() {
    ExperimentConfig c = guccione(true);
    c.name = "model-mismatch-ho";
    c.description = "Data from the one-fibre Holzapfel-Ogden law, PINN with the Guccione law, estimate alpha";
    c.truth.material.law = mech::HolzapfelOgden1F{};
    c.weights = {1.2e7, 0.0, 1.2e4, 1.2e2, 1.2e2, 0.0, 1e-7};
    c.output_dir = "runs/" + c.name;
    return c;
}

ExperimentConfig bulk_modulus() {
    ExperimentConfig c = neo_hookean_base("bulk-modulus");
    c.description = "Neo-Hookean slab, joint estimation of mu and the bulk modulus kappa";
    c.param.scalars = {{"mu", 15.0}, {"kappa", 250.0}};
    return c;
}

ExperimentConfig adam_only() {
    ExperimentConfig c = guccione(false);
    c.name = "adam-only";
    c.description = "Guccione slab with fibres along x trained by a single Adam phase of 60000 epochs";
    c.schedule.adam_only = true;
    c.schedule.adam_only_epochs = 60000;
    c.output_dir = "runs/" + c.name;
    return c;
}

ExperimentConfig fourier_sweep() {
    ExperimentConfig c = scar(0.2);
    c.name = "fourier-sweep";
    c.description = "Scar inclusion with Fourier features on the displacement network, sigma_F in {1, 2, 4}";
    c.network.fourier = true;
    c.network.fourier_m = 16;
    c.network.fourier_sigmas = {1.0, 2.0, 4.0};
    c.output_dir = "runs/" + c.name;
    return c;
}

struct Entry {
    PresetInfo info;
    std::function<ExperimentConfig()> make;
};

const std::vector<Entry>& entries() {
    static const std::vector<Entry> list = [] {
        std::vector<std::function<ExperimentConfig()>> makers{
            [] { return iso_homogeneous(1); },
            [] { return iso_homogeneous(2); },
            [] { return iso_homogeneous(3); },
            [] { return iso_homogeneous(4); },
            [] { return guccione(false); },
            [] { return guccione(true); },
            [] { return two_region(false); },
            [] { return two_region(true); },
            [] { return scar(0.2); },
            [] { return scar(0.4); },
            [] { return model_mismatch(); },
            [] { return bulk_modulus(); },
            [] { return adam_only(); },
            [] { return fourier_sweep(); },
        };
        std::vector<Entry> out;
        for (auto& m : makers) {
            const ExperimentConfig c = m();
            out.push_back({{c.name, c.description}, m});
        }
        return out;
    }();
    return list;
}

}  // namespace

const std::vector<PresetInfo>& preset_list() {
    static const std::vector<PresetInfo> infos = [] {
        std::vector<PresetInfo> v;
        for (const auto& e : entries()) v.push_back(e.info);
        return v;
    }();
    return infos;
}

bool is_preset(const std::string& name) {
    const auto& e = entries();
    return std::any_of(e.begin(), e.end(), [&](const Entry& x) { return x.info.name == name; });
}

ExperimentConfig preset(const std::string& name) {
    for (const auto& e : entries())
        if (e.info.name == name) {
            ExperimentConfig c = e.make();
            c.validate();
            return c;
        }
    throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace elastipinn::driver
