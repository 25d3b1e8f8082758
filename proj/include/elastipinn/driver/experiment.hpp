#pragma once

// Running an experiment: problem assembly per seed, training, metrics,
// replicate aggregation and the run directory.
//
// Run directory layout:
//   config.json, seeds.json, summary.json
//   <case>/aggregate.csv                  geometric mean and envelope per series
//   <case>/seed-<s>/loss.csv              epoch,phase,term,raw,weighted,split
//   <case>/seed-<s>/trajectory.csv        epoch,phase,e_mu,<estimates>
//   <case>/seed-<s>/metrics.json
//   <case>/seed-<s>/checkpoints/*.json
//   <case>/seed-<s>/fields.csv, fields_truth.csv, fields.json

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "elastipinn/data/manufactured.hpp"
#include "elastipinn/driver/config.hpp"
#include "elastipinn/losses/metrics.hpp"
#include "elastipinn/losses/objective.hpp"
#include "elastipinn/optim/train.hpp"

namespace elastipinn::driver {

// One point of the sweep: noise level and, with Fourier features, sigma_F.
struct CaseSpec {
    double ld = 0.0;
    std::optional<double> fourier_sigma;
    std::string label;  // "ld-0.05" or "sigma-2_ld-0.05"
};

std::vector<CaseSpec> expand_cases(const ExperimentConfig& cfg);

// Everything needed to train and score one replicate.
struct Problem {
    loss::Objective train;
    loss::Objective test;
    loss::TestTruth truth;
    std::optional<data::ManufacturedProblem> manufactured;
};

Problem build_problem(const ExperimentConfig& cfg, const CaseSpec& c, std::uint64_t seed);

// Per-logged-state series of one replicate, keyed by name ("e_mu",
// "train.total", "test.pde", "estimate.mu", ...).
struct Trajectory {
    std::vector<long> epoch;
    std::vector<std::string> phase;
    std::map<std::string, std::vector<double>> series;
};

struct SeedResult {
    std::uint64_t seed = 0;
    bool failed = false;
    std::string message;
    loss::MetricRecord metrics;
    std::optional<double> ratio;  // two-region truth only
    optim::TrainingRecord record;
    Trajectory trajectory;
    double seconds = 0.0;
};

struct SeriesAggregate {
    std::vector<long> epoch;
    std::vector<double> geomean, min, max;
    std::vector<int> count;
    long excluded = 0;  // non-positive or non-finite values left out
};

struct ReplicateReport {
    CaseSpec spec;
    std::vector<SeedResult> seeds;
    std::map<std::string, SeriesAggregate> aggregate;
    // Arithmetic means over the successful seeds.
    std::map<std::string, double> mean;
    int failed = 0;
};

// Geometric mean over the strictly positive finite values at each epoch
// (last logged value per epoch), with the min/max envelope of the same values.
SeriesAggregate aggregate_series(const std::vector<const Trajectory*>& runs, const std::string& name);

struct RunOptions {
    bool write = true;  // run directory artifacts
    std::string output_dir;  // overrides cfg.output_dir when non-empty
    std::function<void(const std::string&)> progress;
};

std::vector<ReplicateReport> run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

// Trains and scores one seed without touching the file system.
SeedResult run_seed(const ExperimentConfig& cfg, const CaseSpec& c, std::uint64_t seed,
                    const optim::TrainOptions& extra = {});

// mu_l / mu_r. The field form averages mu over the sample points on either
// side of `split`; throws std::domain_error when a side has no points.
double region_ratio(double mu_l, double mu_r);
double region_ratio(const loss::Objective& obj, const Eigen::VectorXd& theta, const Eigen::Matrix3Xd& x,
                    double split);

// Lattice exports. `fields.csv` columns: x,y,z,valid,ux,uy,uz,E11..E33,
// s11..s33 (Cauchy, column-major), mu,J.
void write_field_csv(const std::string& path, const loss::FieldPrediction& f);
loss::FieldPrediction truth_fields(const data::ManufacturedProblem& mp, const Eigen::Matrix3Xd& x);

// Checkpoint file with embedded configuration, case and seed.
nlohmann::json checkpoint_to_json(const optim::Checkpoint& c, const ExperimentConfig& cfg, const CaseSpec& cs,
                                  std::uint64_t seed);

struct LoadedCheckpoint {
    ExperimentConfig config;
    CaseSpec spec;
    std::uint64_t seed = 0;
    std::string kind;
    long epoch = 0;
    Eigen::VectorXd theta;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

std::string format_number(double v);

}  // namespace elastipinn::driver
