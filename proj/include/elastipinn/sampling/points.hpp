#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "elastipinn/sampling/geometry.hpp"

namespace elastipinn::sampling {

struct SamplingPlan {
    int n_obs = 500;
    int n_pde = 2500;
    int n_bc_lateral = 50;     // per face 1-4
    int n_bc_topbottom = 250;  // per face 5-6

    // Settings 1-4 of the homogeneous benchmark.
    static SamplingPlan setting(int k);
    void validate() const;
};

struct FacePoints {
    Face face = Face::G1;
    Eigen::Vector3d normal = Eigen::Vector3d::Zero();
    Eigen::Matrix3Xd x;
};

struct PointSet {
    Eigen::Matrix3Xd pde;
    std::array<FacePoints, 6> faces;

    int boundary_count() const;
};

// i.i.d. uniform points in the open slab.
Eigen::Matrix3Xd sample_interior(const SlabGeometry& g, int n, std::uint64_t seed);

// Uniform points on one face, all carrying the face's outward normal.
FacePoints sample_face(const SlabGeometry& g, Face face, int n, std::uint64_t seed);

// Collocation and boundary points of a plan (observation points are drawn by
// the data module).
PointSet sample_collocation(const SlabGeometry& g, const SamplingPlan& plan, std::uint64_t seed);

// Regular lattice including the faces: round(L/h)+1 points along x, etc.
Eigen::Matrix3Xd lattice(const SlabGeometry& g, double spacing);
std::array<int, 3> lattice_shape(const SlabGeometry& g, double spacing);

}  // namespace elastipinn::sampling
