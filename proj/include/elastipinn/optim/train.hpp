#pragma once

// Two-phase training: data-only pre-training of the displacement network,
// then the full physics-informed objective over every trainable unknown.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "elastipinn/losses/objective.hpp"
#include "elastipinn/optim/adam.hpp"
#include "elastipinn/optim/bfgs.hpp"

namespace elastipinn::optim {

struct Schedule {
    bool adam_only = false;
    long pre_adam = 600;
    long pre_bfgs_max = 5000;  // BFGS runs until |grad|_inf < pre_tol or this many iterations
    double pre_tol = 1e-8;
    long adam = 600;
    long bfgs = 8000;
    long adam_only_epochs = 60000;
    AdamConfig adam_cfg;
    BfgsConfig bfgs_cfg;

    void validate() const;
};

struct Checkpoint {
    std::string kind;  // "periodic", "best", "last-finite", "final"
    long epoch = 0;
    std::string phase;
    double value = 0.0;
    Eigen::VectorXd theta;
    std::optional<AdamState> adam;
    long bfgs_iterations = 0;
};

struct PhaseRecord {
    std::string name;
    long start_epoch = 0;
    long end_epoch = 0;
    std::string stop_reason;
};

struct TrainOptions {
    long log_every = 1;   // full train breakdown, all terms
    long test_every = 1;  // breakdown on the test split
    long checkpoint_every = 0;
    bool keep_log = true;  // keep breakdowns in the record
    std::function<void(const loss::LossBreakdown&, const std::string& phase)> on_log;
    std::function<void(const Checkpoint&)> on_checkpoint;
    // Called once for every logged state, before its breakdowns.
    std::function<void(long epoch, const std::string& phase, const Eigen::VectorXd& theta)> on_state;
};

struct TrainingRecord {
    std::vector<PhaseRecord> phases;
    std::vector<std::pair<std::string, loss::LossBreakdown>> log;
    Eigen::VectorXd theta;
    Eigen::VectorXd best_theta;
    double best_value = std::numeric_limits<double>::infinity();
    long best_epoch = -1;
    long epochs = 0;
    long evaluations = 0;
    bool aborted = false;
    std::string abort_message;
    std::string abort_term;
    Eigen::Vector3d abort_point = Eigen::Vector3d::Constant(std::nan(""));
    long abort_epoch = -1;
};

// Phase names: "pretrain-adam", "pretrain-bfgs", "adam", "bfgs", or
// "adam-only".
TrainingRecord train(const loss::Objective& obj, const Eigen::VectorXd& theta0, const Schedule& schedule,
                     const TrainOptions& options = {}, const loss::Objective* test = nullptr);

}  // namespace elastipinn::optim
