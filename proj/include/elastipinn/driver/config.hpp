#pragma once

// Declarative experiment description and its JSON form.
//
// The loader is strict: every object is checked against its known keys and
// an unknown key is an error rather than being ignored. Overrides use dotted
// paths into the same document ("noise.ld=0.05").

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "elastipinn/losses/objective.hpp"
#include "elastipinn/mechanics/material.hpp"
#include "elastipinn/optim/train.hpp"
#include "elastipinn/sampling/geometry.hpp"
#include "elastipinn/sampling/points.hpp"
#include "elastipinn/sampling/stiffness.hpp"

namespace elastipinn::driver {

// Raised for malformed or inconsistent configurations.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DataSource { Manufactured, FemImport };
enum class ObservationLayout { Random, Lattice };

struct TruthSpec {
    mech::MaterialModel material;
    // Spatially varying first parameter; homogeneous when empty.
    std::optional<sampling::StiffnessField> stiffness;
};

struct DataSpec {
    DataSource source = DataSource::Manufactured;
    std::string displacement = "slab-quadratic";  // manufactured preset
    std::string fem_path;                         // fem-import CSV
    ObservationLayout layout = ObservationLayout::Random;
    double lattice_spacing = 0.2;  // mm
    double pixel_spacing = 0.0;    // block-average to this spacing when > 0
    bool strain = false;           // strain observations
};

struct NetworkSpec {
    std::vector<int> hidden{32, 16, 8};
    bool fourier = false;
    int fourier_m = 16;
    std::vector<double> fourier_sigmas{1.0};  // one case per value
};

struct LoggingSpec {
    long log_every = 1;
    long test_every = 1;
    long checkpoint_every = 0;
};

struct ExportSpec {
    double lattice_spacing = 0.2;  // 0 disables the field export
};

struct ExperimentConfig {
    std::string name = "custom";
    std::string description;

    sampling::SlabGeometry geometry;
    double pressure = -8.0;  // kPa
    double robin_k = 10.0;   // kPa/mm

    TruthSpec truth;
    DataSpec data;
    mech::MaterialModel model;  // law the PINN assumes, with fixed parameter values
    loss::PdeForm pde_form = loss::PdeForm::Divergence;
    loss::Parametrization param;
    loss::PriorSpec prior;
    NetworkSpec network;
    sampling::SamplingPlan sampling;
    std::vector<double> noise_ld{0.0};
    loss::LossWeights weights;
    bool weights_inferred = false;
    optim::Schedule schedule;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    LoggingSpec logging;
    ExportSpec exports;
    std::string output_dir;
    bool deterministic = false;

    // Throws ConfigError naming the offending field.
    void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
// Strict parse; throws ConfigError on unknown keys, wrong types or invalid values.
ExperimentConfig config_from_json(const nlohmann::json& j);

// `path=value` with value parsed as JSON (bare words are taken as strings).
// The path must name an existing key of the full configuration document.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// A preset name or a path to a JSON file, with overrides applied in order.
ExperimentConfig load_config(const std::string& name_or_path, const std::vector<std::string>& overrides = {});

}  // namespace elastipinn::driver
