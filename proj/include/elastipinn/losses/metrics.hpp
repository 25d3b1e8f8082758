#pragma once

// Field predictions of a trained model and their normalized errors.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "elastipinn/losses/objective.hpp"

namespace elastipinn::loss {

using TensorBlock = Eigen::Matrix<double, 9, Eigen::Dynamic>;  // column-major 3x3 per point

struct FieldPrediction {
    Eigen::Matrix3Xd x;
    Eigen::Matrix3Xd u;
    TensorBlock E;
    TensorBlock sigma;
    Eigen::VectorXd mu;        // first material parameter
    Eigen::VectorXd J;
    std::vector<bool> valid;   // false where J is not admissible; E and sigma are NaN there
};

FieldPrediction predict_fields(const Objective& obj, const Eigen::VectorXd& theta, const Eigen::Matrix3Xd& x);

// Ground truth on the held-out test points.
struct TestTruth {
    Eigen::Matrix3Xd x_obs;
    Eigen::Matrix3Xd u;
    std::optional<TensorBlock> E;
    std::optional<TensorBlock> sigma;
    Eigen::Matrix3Xd x_pde;
    Eigen::VectorXd mu;          // stiffness at x_pde (may be empty)
    double mu_max = 0.0;         // max of the stiffness over the domain
    Eigen::VectorXd parameters;  // true material parameters (first entry = background stiffness)
    std::array<double, 2> region{0.0, 0.0};
};

struct MetricRecord {
    double e_mu = std::nan("");
    double e_u = std::nan("");
    double e_E = std::nan("");
    double e_sigma = std::nan("");
    // Relative errors of the trainable scalars (and mu_l, mu_r in two-region mode).
    std::vector<std::pair<std::string, double>> parameters;
    std::vector<std::pair<std::string, double>> estimates;
};

// e_u, e_E, e_sigma: ||pred - truth|| / ||truth|| over the stacked test
// vectors. e_mu: relative error of the first trainable scalar in global mode,
// otherwise the RMS stiffness error over x_pde divided by mu_max.
MetricRecord error_metrics(const Objective& obj, const Eigen::VectorXd& theta, const TestTruth& truth);

// Only the stiffness and parameter entries of the record (no field predictions).
MetricRecord parameter_metrics(const Objective& obj, const Eigen::VectorXd& theta, const TestTruth& truth);

double relative_l2(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

}  // namespace elastipinn::loss
