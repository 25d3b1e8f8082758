#pragma once

// The composite training objective and its exact gradient.
//
// The trainable vector theta is laid out as
//   [ w_u | w_mu (field mode) | region values (two-region mode) | scalars ]
// Region values and scalars are stored relative to their initial guess, so
// every physical unknown starts at 1 whatever its units.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "elastipinn/data/manufactured.hpp"
#include "elastipinn/data/observations.hpp"
#include "elastipinn/losses/terms.hpp"
#include "elastipinn/mechanics/material.hpp"
#include "elastipinn/network/mlp.hpp"
#include "elastipinn/sampling/geometry.hpp"
#include "elastipinn/sampling/points.hpp"
#include "elastipinn/sampling/stiffness.hpp"

namespace elastipinn::loss {

enum class StiffnessMode { Global, TwoRegion, Field };
std::string_view stiffness_mode_name(StiffnessMode m);
StiffnessMode stiffness_mode_from_name(std::string_view name);

struct TrainableScalar {
    std::string name;  // material parameter name
    double init = 1.0;
};

// How the material parameters are produced from theta. The first material
// parameter (mu, alpha or a) is the stiffness that the two-region and field
// modes make spatially varying.
struct Parametrization {
    StiffnessMode mode = StiffnessMode::Global;
    std::vector<TrainableScalar> scalars;

    double split = 5.0;                       // two-region interface, x (mm)
    std::array<double, 2> region_init{15.0, 25.0};

    net::MlpSpec mu_spec = [] {
        net::MlpSpec s;
        s.hidden = {12, 8, 4};
        s.output_dim = 1;
        return s;
    }();
    double mu_ref = 10.0;
    bool softplus = false;

    void validate(mech::Law law) const;
};

struct FaceData {
    sampling::Face face = sampling::Face::G1;
    Eigen::Vector3d normal = Eigen::Vector3d::Zero();
    Eigen::Matrix3Xd x;
    Eigen::Matrix3Xd source;  // g_N or g_R, 3 x n (zero for the physical problem)
};

// Everything a loss is evaluated on. Sources and body forces default to zero.
struct Dataset {
    data::ObservationSet obs;
    Eigen::Matrix3Xd pde;
    Eigen::Matrix3Xd body_force;  // 3 x pde.cols()
    std::array<FaceData, 6> faces;

    void validate() const;
};

// Point sets with zero body force and sources (the physical slab problem).
Dataset physical_dataset(data::ObservationSet obs, const sampling::PointSet& pts);
// Point sets with the body force and boundary sources that make a
// manufactured displacement exact.
Dataset manufactured_dataset(const data::ManufacturedProblem& mp, data::ObservationSet obs,
                             const sampling::PointSet& pts);

struct Model {
    mech::MaterialModel material;  // fixed parameter values and fibre field
    Parametrization param;
    net::MlpSpec u_spec;
    double pressure = -8.0;  // kPa, follower load on the lateral faces
    double robin_k = 10.0;   // kPa/mm
    PdeForm pde_form = PdeForm::Divergence;
    PriorSpec prior;
    LossWeights weights;

    void validate() const;
};

struct Evaluation {
    double value = 0.0;          // sum of the weighted objective terms
    Eigen::VectorXd gradient;    // empty unless requested
    LossBreakdown breakdown;     // objective and logging terms
    bool poisoned = false;
    std::string poison_term;
    Eigen::Vector3d poison_point = Eigen::Vector3d::Constant(std::nan(""));
    std::string poison_message;
};

struct EvalRequest {
    TermMask objective = all_terms();  // terms in value and gradient
    TermMask logging = no_terms();     // terms evaluated for the breakdown only
    bool gradient = true;
};

// Estimated parameters at a point, for metrics and exports.
struct ParameterSnapshot {
    Eigen::VectorXd global;              // material parameters with scalars applied
    std::array<double, 2> region{0, 0};  // two-region mode
};

class Objective {
public:
    Objective(Model model, Dataset data);

    const Model& model() const { return model_; }
    const Dataset& data() const { return data_; }

    Eigen::Index size() const { return n_u_ + n_mu_ + n_region_ + n_scalar_; }
    Eigen::Index u_size() const { return n_u_; }
    Eigen::Index mu_offset() const { return n_u_; }
    Eigen::Index mu_size() const { return n_mu_; }
    Eigen::Index region_offset() const { return n_u_ + n_mu_; }
    Eigen::Index scalar_offset() const { return n_u_ + n_mu_ + n_region_; }
    Eigen::Index scalar_count() const { return n_scalar_; }
    Eigen::Index physical_count() const { return n_region_ + n_scalar_; }

    // Whether a term has data to act on (strain observations, prior, ...).
    bool applicable(Term t) const;

    // Xavier weights for both networks, 1 for every relative physical value.
    Eigen::VectorXd initial(std::uint64_t seed) const;

    Evaluation evaluate(const Eigen::VectorXd& theta, const EvalRequest& req = {}) const;

    // Material parameters (kPa etc.) at x for a given theta.
    mech::ParamVec parameters_at(const Eigen::VectorXd& theta, const Eigen::Vector3d& x) const;
    ParameterSnapshot snapshot(const Eigen::VectorXd& theta) const;
    // Estimated stiffness field mu(x) = first parameter.
    sampling::StiffnessField stiffness_field(const Eigen::VectorXd& theta) const;

private:
    Model model_;
    Dataset data_;
    Eigen::Index n_u_ = 0, n_mu_ = 0, n_region_ = 0, n_scalar_ = 0;
    std::vector<int> scalar_index_;
    mech::ParamVec base_;
    int base_count_ = 0;
};

// Standalone term evaluations. They share no code with Objective and serve
// as independent references.
double obs_loss(const net::MlpSpec& spec, const Eigen::VectorXd& w, const data::ObservationSet& obs,
                double weight = 1.0);
double strain_obs_loss(const net::MlpSpec& spec, const Eigen::VectorXd& w, const data::ObservationSet& obs,
                       double weight = 1.0);
double prior_loss(const sampling::NetworkField& mu_net, double mu_prior, const Eigen::Matrix3Xd& x,
                  double weight = 1.0);
double tikhonov(const Eigen::VectorXd& w, double weight = 1.0);

// Single-term evaluations through Objective with everything else disabled.
double pde_loss(const Objective& obj, const Eigen::VectorXd& theta);
double bc_neumann_loss(const Objective& obj, const Eigen::VectorXd& theta);
double bc_robin_loss(const Objective& obj, const Eigen::VectorXd& theta);

// Loss trajectory CSV: epoch,phase,term,raw,weighted,split
std::string loss_csv_header();
std::string loss_csv_rows(const LossBreakdown& b, const std::string& phase);

}  // namespace elastipinn::loss
