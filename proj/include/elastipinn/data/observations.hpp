#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "elastipinn/mechanics/tensor.hpp"
#include "elastipinn/sampling/geometry.hpp"

namespace elastipinn::data {

using StrainBlock = Eigen::Matrix<double, 6, Eigen::Dynamic>;  // E11,E22,E33,E12,E13,E23

struct NoiseRecord {
    double sigma = 0.0;
    double ld = 0.0;
    std::uint64_t seed = 0;
};

struct ObservationSet {
    Eigen::Matrix3Xd x;  // mm
    Eigen::Matrix3Xd u;  // mm, possibly noisy
    std::optional<StrainBlock> E;
    std::string provenance = "manufactured";  // or "fem-import"
    NoiseRecord noise;
    // Displacements before noise; equal to u when no noise was added.
    Eigen::Matrix3Xd u_clean;

    Eigen::Index size() const { return x.cols(); }
    bool has_strain() const { return E.has_value(); }
    mech::Mat3d strain(Eigen::Index i) const;
};

Eigen::Matrix<double, 6, 1> pack_strain(const mech::Mat3d& E);
mech::Mat3d unpack_strain(const Eigen::Matrix<double, 6, 1>& e);

// CSV with header `x,y,z,ux,uy,uz[,E11,E22,E33,E12,E13,E23]`. A JSON sidecar
// `<path>.json` with provenance and noise record is read when present.
ObservationSet import_fem_csv(const std::string& path);
void export_csv(const ObservationSet& obs, const std::string& path);

// Adds i.i.d. N(0, sigma^2) to every displacement component with
// sigma = ld * max|u| / 3 over the clean set. ld = 0 returns the input.
ObservationSet add_noise(const ObservationSet& obs, double ld, std::uint64_t seed);

// Block means over cells of the given spacing: cell index floor(x / h) per
// axis. Positions, displacements and strains are averaged.
ObservationSet downsample_to_pixels(const ObservationSet& obs, double spacing, const sampling::SlabGeometry& g);

// Random subset of n observations (all when n >= size).
ObservationSet subsample(const ObservationSet& obs, Eigen::Index n, std::uint64_t seed);

double max_displacement_norm(const Eigen::Matrix3Xd& u);

}  // namespace elastipinn::data
