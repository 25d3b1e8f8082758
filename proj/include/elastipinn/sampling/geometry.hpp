#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace elastipinn::sampling {

// Slab (0,L) x (0,W) x (0,H) in mm.
struct SlabGeometry {
    double L = 10.0;
    double W = 10.0;
    double H = 2.0;

    Eigen::Vector3d extent() const { return {L, W, H}; }
    void validate() const;
};

// Faces 1-4 are lateral (x=0, y=0, x=L, y=W), 5 and 6 are bottom and top.
enum class Face { G1 = 1, G2, G3, G4, G5, G6 };

inline constexpr std::array<Face, 6> kAllFaces{Face::G1, Face::G2, Face::G3, Face::G4, Face::G5, Face::G6};

inline bool is_lateral(Face f) { return static_cast<int>(f) <= 4; }
inline int face_index(Face f) { return static_cast<int>(f) - 1; }

Eigen::Vector3d outward_normal(Face f);
std::string face_name(Face f);

// Independent stream seed from a base seed and a stream label.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace elastipinn::sampling
