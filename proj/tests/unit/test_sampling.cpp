#include <doctest.h>

#include "elastipinn/network/mlp.hpp"
#include "elastipinn/sampling/points.hpp"
#include "elastipinn/sampling/stiffness.hpp"

using namespace elastipinn;
using namespace elastipinn::sampling;

TEST_CASE("slab faces") {
    CHECK(outward_normal(Face::G1) == Eigen::Vector3d(-1, 0, 0));
    CHECK(outward_normal(Face::G2) == Eigen::Vector3d(0, -1, 0));
    CHECK(outward_normal(Face::G3) == Eigen::Vector3d(1, 0, 0));
    CHECK(outward_normal(Face::G4) == Eigen::Vector3d(0, 1, 0));
    CHECK(outward_normal(Face::G5) == Eigen::Vector3d(0, 0, -1));
    CHECK(outward_normal(Face::G6) == Eigen::Vector3d(0, 0, 1));
}

TEST_CASE("interior sampling") {
    const SlabGeometry g;
    const Eigen::Matrix3Xd x = sample_interior(g, SamplingPlan::setting(2).n_pde, 1);
    CHECK(x.cols() == 2500);
    CHECK((x.row(0).array() > 0.0).all());
    CHECK((x.row(0).array() < 10.0).all());
    CHECK((x.row(1).array() > 0.0).all());
    CHECK((x.row(1).array() < 10.0).all());
    CHECK((x.row(2).array() > 0.0).all());
    CHECK((x.row(2).array() < 2.0).all());
    CHECK(sample_interior(g, 10, 5) == sample_interior(g, 10, 5));
    CHECK(sample_interior(g, 10, 5) != sample_interior(g, 10, 6));
    const Eigen::Vector3d mean = sample_interior(g, 100000, 3).rowwise().mean();
    CHECK(std::abs(mean[0] - 5.0) < 0.05);
    CHECK(std::abs(mean[1] - 5.0) < 0.05);
    CHECK(std::abs(mean[2] - 1.0) < 0.01);
}

TEST_CASE("face sampling") {
    const SlabGeometry g;
    const FacePoints f1 = sample_face(g, Face::G1, 40, 2);
    CHECK((f1.x.row(0).array() == 0.0).all());
    CHECK(f1.normal == Eigen::Vector3d(-1, 0, 0));
    const FacePoints f6 = sample_face(g, Face::G6, 40, 2);
    CHECK((f6.x.row(2).array() == 2.0).all());
    const PointSet ps = sample_collocation(g, SamplingPlan::setting(2), 4);
    CHECK(ps.faces[4].x.cols() == 250);
    CHECK(ps.faces[5].x.cols() == 250);
    CHECK(ps.faces[0].x.cols() == 50);
    CHECK(ps.pde.cols() == 2500);
}

TEST_CASE("sampling plans") {
    const SamplingPlan s1 = SamplingPlan::setting(1), s4 = SamplingPlan::setting(4);
    CHECK(s1.n_obs == 250);
    CHECK(s1.n_pde == 1250);
    CHECK(s1.n_bc_lateral == 25);
    CHECK(s1.n_bc_topbottom == 125);
    CHECK(s4.n_obs == 2000);
    CHECK(s4.n_pde == 10000);
    CHECK(s4.n_bc_lateral == 200);
    CHECK(s4.n_bc_topbottom == 1000);
    CHECK_THROWS(SamplingPlan::setting(5));
}

TEST_CASE("lattice") {
    const Eigen::Matrix3Xd x = lattice(SlabGeometry{}, 0.2);
    CHECK(x.cols() == 51 * 51 * 11);
    CHECK(x.row(0).maxCoeff() == doctest::Approx(10.0));
    CHECK(x.row(2).maxCoeff() == doctest::Approx(2.0));
}

TEST_CASE("stiffness fields") {
    CHECK(stiffness_at(TwoRegionField{}, {2, 5, 1}) == 7.5);
    CHECK(stiffness_at(TwoRegionField{}, {7, 5, 1}) == 15.0);
    CHECK(stiffness_at(TwoRegionField{}, {5, 5, 1}) == 15.0);
    const ScarSpheresField scar;
    CHECK(stiffness_at(scar, {3, 3, 1}) == 15.0);
    CHECK(stiffness_at(scar, {9, 9, 1}) == 7.5);
    CHECK(stiffness_at(scar, {4.0, 3, 1}) == 15.0);
    CHECK(stiffness_at(scar, {4.2, 3, 1}) == 12.5);
    CHECK(stiffness_at(scar, {4.5, 3, 1}) == 12.5);
    CHECK(stiffness_at(scar, {4.8, 3, 1}) == 10.0);
    CHECK(stiffness_at(scar, {5.0, 3, 1}) == 10.0);
    CHECK(stiffness_at(scar, {5.01, 3, 1}) == 7.5);
    CHECK(stiffness_at(ConstantField{12.0}, {0, 0, 0}) == 12.0);
    NetworkField nf;
    nf.spec.hidden = {4};
    nf.spec.output_dim = 1;
    nf.weights = Eigen::VectorXd::Zero(nf.spec.parameter_count());
    CHECK(stiffness_at(nf, {1, 1, 1}) == 10.0);
    nf.softplus = true;
    CHECK(stiffness_at(nf, {1, 1, 1}) == doctest::Approx(10.0));
}
