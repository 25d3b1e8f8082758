#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "elastipinn/data/manufactured.hpp"
#include "elastipinn/data/observations.hpp"
#include "elastipinn/mechanics/kinematics.hpp"
#include "elastipinn/sampling/points.hpp"

using namespace elastipinn;
using namespace elastipinn::data;
using mech::Mat3d;
using mech::Vec3d;

namespace {

const double kOracle[][6] = {
#include "body_force_oracle.inc"
};

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("elastipinn_" + name)).string();
}

ManufacturedProblem nh_problem(const std::string& u = "slab-quadratic") {
    ManufacturedProblem mp;
    mp.u = QuadraticDisplacement::preset(u);
    return mp;
}

}  // namespace

TEST_CASE("manufactured body force") {
    SUBCASE("zero displacement") {
        const ManufacturedProblem mp = nh_problem("zero");
        CHECK(mp.body_force(Vec3d(1.0, 2.0, 1.0)).norm() == 0.0);
    }
    SUBCASE("affine displacement has constant stress") {
        const ManufacturedProblem mp = nh_problem("affine");
        CHECK(mp.body_force(Vec3d(4.0, 2.0, 1.5)).norm() < 1e-12);
    }
    SUBCASE("matches the symbolic oracle") {
        const ManufacturedProblem mp = nh_problem();
        for (const auto& row : kOracle) {
            const Vec3d f = mp.body_force(Vec3d(row[0], row[1], row[2]));
            const Vec3d ref(row[3], row[4], row[5]);
            CHECK((f - ref).norm() / ref.norm() < 1e-8);
        }
    }
    SUBCASE("the displacement preset is isochoric and admissible") {
        const ManufacturedProblem mp = nh_problem();
        CHECK_NOTHROW(mp.check_admissible());
        for (double x : {0.0, 5.0, 10.0})
            CHECK(mech::det3<double>(Mat3d::Identity() + mp.u.gradient(Vec3d(x, 10.0 - x, 1.0))) ==
                  doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("inadmissible fields are rejected") {
        ManufacturedProblem mp = nh_problem("zero");
        mp.u.A(0, 0) = -1.5;
        CHECK_THROWS_AS(mp.check_admissible(), std::domain_error);
    }
}

TEST_CASE("manufactured boundary sources close the boundary conditions") {
    const ManufacturedProblem mp = nh_problem();
    const Vec3d x(0.0, 3.0, 1.0), n(-1.0, 0.0, 0.0);
    const Mat3d F = Mat3d::Identity() + mp.u.gradient(x);
    const Vec3d resid = mp.first_pk(x) * n + mp.pressure * mech::cofactor3(F) * n - mp.neumann_source(x, n);
    CHECK(resid.norm() < 1e-12);
}

TEST_CASE("csv import and export") {
    SUBCASE("header only") {
        const std::string p = temp_path("empty.csv");
        std::ofstream(p) << "x,y,z,ux,uy,uz\n";
        CHECK(import_fem_csv(p).size() == 0);
    }
    SUBCASE("single row") {
        const std::string p = temp_path("one.csv");
        std::ofstream(p) << "x,y,z,ux,uy,uz\n1.0,2.0,0.5,0.01,0.02,0.00\n";
        const ObservationSet o = import_fem_csv(p);
        REQUIRE(o.size() == 1);
        CHECK(o.x.col(0) == Vec3d(1.0, 2.0, 0.5));
        CHECK(o.u.col(0) == Vec3d(0.01, 0.02, 0.0));
        CHECK(o.provenance == "fem-import");
        CHECK_FALSE(o.has_strain());
    }
    SUBCASE("malformed rows name their line") {
        const std::string p = temp_path("bad.csv");
        std::ofstream(p) << "x,y,z,ux,uy,uz\n1,2,3,4,5,6\n1,2,abc,4,5,6\n";
        try {
            import_fem_csv(p);
            FAIL("expected an error");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
        std::ofstream(p) << "x,y,z,ux,uy,uz\n1,2,3,4,5,nan\n";
        CHECK_THROWS(import_fem_csv(p));
        std::ofstream(p) << "x,y,z,ux,uy\n";
        CHECK_THROWS(import_fem_csv(p));
    }
    SUBCASE("round trip with strain is lossless") {
        const ManufacturedProblem mp = nh_problem();
        ObservationSet o = add_noise(mp.sample_observations(500, 3, true), 0.05, 4);
        const std::string p = temp_path("round.csv");
        export_csv(o, p);
        const ObservationSet r = import_fem_csv(p);
        CHECK(r.size() == 500);
        CHECK(r.x == o.x);
        CHECK(r.u == o.u);
        CHECK(*r.E == *o.E);
        CHECK(r.noise.ld == 0.05);
        CHECK(r.noise.sigma == o.noise.sigma);
        CHECK(r.provenance == "manufactured");
    }
}

TEST_CASE("noise injection") {
    const ManufacturedProblem mp = nh_problem();
    const ObservationSet clean = mp.sample_observations(1000, 8, false);
    SUBCASE("LD = 0 is the identity") {
        const ObservationSet o = add_noise(clean, 0.0, 1);
        CHECK(o.u == clean.u);
    }
    SUBCASE("empirical sigma") {
        const ObservationSet big = mp.sample_observations(33334, 9, false);
        const ObservationSet o = add_noise(big, 0.1, 2);
        const double sigma = 0.1 * max_displacement_norm(big.u) / 3.0;
        CHECK(o.noise.sigma == doctest::Approx(sigma));
        const Eigen::Matrix3Xd diff = o.u - big.u;
        const Eigen::ArrayXd e = Eigen::Map<const Eigen::ArrayXd>(diff.data(), diff.size());
        CHECK(e.size() >= 100000);
        const double sd = std::sqrt((e - e.mean()).square().sum() / (e.size() - 1));
        CHECK(std::abs(sd - sigma) / sigma < 0.02);
        CHECK(o.u_clean == big.u);
    }
    SUBCASE("mean preserving over seeds") {
        Eigen::Matrix3Xd acc = Eigen::Matrix3Xd::Zero(3, clean.size());
        for (std::uint64_t s = 0; s < 200; ++s) acc += add_noise(clean, 0.1, s).u - clean.u;
        acc /= 200.0;
        const double sigma = 0.1 * max_displacement_norm(clean.u) / 3.0;
        CHECK(std::abs(acc.mean()) < 5.0 * sigma / std::sqrt(200.0 * acc.size()));
    }
}

TEST_CASE("pixel downsampling") {
    const ManufacturedProblem mp = nh_problem();
    const ObservationSet fine = mp.lattice_observations(0.2, true);
    CHECK(fine.size() == 51 * 51 * 11);
    SUBCASE("same spacing is the identity on lattice data") {
        const ObservationSet d = downsample_to_pixels(fine, 0.2, mp.geometry);
        CHECK(d.size() == fine.size());
        CHECK((d.u - fine.u).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("doubling the spacing halves the cell count per axis") {
        const ObservationSet d = downsample_to_pixels(fine, 0.4, mp.geometry);
        CHECK(d.size() == 26 * 26 * 6);
        CHECK(d.has_strain());
    }
    SUBCASE("block mean of equal vectors") {
        ObservationSet two;
        two.x = Eigen::Matrix3Xd(3, 2);
        two.x << 0.1, 0.15, 0.1, 0.1, 0.1, 0.1;
        two.u = Eigen::Matrix3Xd(3, 2);
        two.u << 1, 1, 2, 2, 3, 3;
        const ObservationSet d = downsample_to_pixels(two, 0.4, mp.geometry);
        REQUIRE(d.size() == 1);
        CHECK(d.u.col(0) == Vec3d(1, 2, 3));
    }
    SUBCASE("spacing larger than the domain") {
        CHECK_THROWS_AS(downsample_to_pixels(fine, 3.0, mp.geometry), std::invalid_argument);
    }
}
