#include "elastipinn/sampling/geometry.hpp"

#include <stdexcept>

namespace elastipinn::sampling {

void SlabGeometry::validate() const {
    if (!(L > 0.0 && W > 0.0 && H > 0.0)) throw std::invalid_argument("geometry: L, W and H must be > 0");
}

Eigen::Vector3d outward_normal(Face f) {
    switch (f) {
        case Face::G1:
            return {-1.0, 0.0, 0.0};
        case Face::G2:
            return {0.0, -1.0, 0.0};
        case Face::G3:
            return {1.0, 0.0, 0.0};
        case Face::G4:
            return {0.0, 1.0, 0.0};
        case Face::G5:
            return {0.0, 0.0, -1.0};
        case Face::G6:
            return {0.0, 0.0, 1.0};
    }
    throw std::invalid_argument("invalid face");
}

std::string face_name(Face f) { return "G" + std::to_string(static_cast<int>(f)); }

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    // splitmix64 of the combined key
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace elastipinn::sampling
