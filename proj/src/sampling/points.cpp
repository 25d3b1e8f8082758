#include "elastipinn/sampling/points.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace elastipinn::sampling {

namespace {

// Uniform in the open interval (0, len).
double open_uniform(std::mt19937_64& rng, double len) {
    std::uniform_real_distribution<double> u(0.0, len);
    double v;
    do {
        v = u(rng);
    } while (v <= 0.0 || v >= len);
    return v;
}

}  // namespace

SamplingPlan SamplingPlan::setting(int k) {
    if (k < 1 || k > 4) throw std::invalid_argument("sampling: setting must be 1..4");
    const int s = 1 << (k - 1);
    SamplingPlan p;
    p.n_obs = 250 * s;
    p.n_pde = 1250 * s;
    p.n_bc_lateral = 25 * s;
    p.n_bc_topbottom = 125 * s;
    return p;
}

void SamplingPlan::validate() const {
    if (n_obs < 1 || n_pde < 1 || n_bc_lateral < 1 || n_bc_topbottom < 1)
        throw std::invalid_argument("sampling: all point counts must be >= 1");
}

int PointSet::boundary_count() const {
    int n = 0;
    for (const auto& f : faces) n += static_cast<int>(f.x.cols());
    return n;
}

Eigen::Matrix3Xd sample_interior(const SlabGeometry& g, int n, std::uint64_t seed) {
    if (n < 0) throw std::invalid_argument("sample_interior: negative count");
    std::mt19937_64 rng(seed);
    Eigen::Matrix3Xd x(3, n);
    for (int i = 0; i < n; ++i) {
        x(0, i) = open_uniform(rng, g.L);
        x(1, i) = open_uniform(rng, g.W);
        x(2, i) = open_uniform(rng, g.H);
    }
    return x;
}

FacePoints sample_face(const SlabGeometry& g, Face face, int n, std::uint64_t seed) {
    if (n < 0) throw std::invalid_argument("sample_face: negative count");
    FacePoints fp;
    fp.face = face;
    fp.normal = outward_normal(face);
    fp.x = sample_interior(g, n, seed);
    const int axis = (face == Face::G1 || face == Face::G3) ? 0 : (face == Face::G2 || face == Face::G4) ? 1 : 2;
    const bool upper = face == Face::G3 || face == Face::G4 || face == Face::G6;
    fp.x.row(axis).setConstant(upper ? g.extent()[axis] : 0.0);
    return fp;
}

PointSet sample_collocation(const SlabGeometry& g, const SamplingPlan& plan, std::uint64_t seed) {
    PointSet ps;
    ps.pde = sample_interior(g, plan.n_pde, derive_seed(seed, 100));
    for (Face f : kAllFaces) {
        const int n = is_lateral(f) ? plan.n_bc_lateral : plan.n_bc_topbottom;
        ps.faces[static_cast<std::size_t>(face_index(f))] =
            sample_face(g, f, n, derive_seed(seed, 200 + static_cast<std::uint64_t>(face_index(f))));
    }
    return ps;
}

std::array<int, 3> lattice_shape(const SlabGeometry& g, double spacing) {
    if (!(spacing > 0.0)) throw std::invalid_argument("lattice: spacing must be > 0");
    const Eigen::Vector3d e = g.extent();
    std::array<int, 3> s{};
    for (int a = 0; a < 3; ++a) {
        if (spacing > e[a]) throw std::invalid_argument("lattice: spacing larger than the domain");
        s[static_cast<std::size_t>(a)] = static_cast<int>(std::floor(e[a] / spacing + 1e-9)) + 1;
    }
    return s;
}

Eigen::Matrix3Xd lattice(const SlabGeometry& g, double spacing) {
    const auto s = lattice_shape(g, spacing);
    Eigen::Matrix3Xd x(3, static_cast<Eigen::Index>(s[0]) * s[1] * s[2]);
    Eigen::Index c = 0;
    for (int k = 0; k < s[2]; ++k)
        for (int j = 0; j < s[1]; ++j)
            for (int i = 0; i < s[0]; ++i) x.col(c++) << i * spacing, j * spacing, k * spacing;
    return x;
}

}  // namespace elastipinn::sampling
