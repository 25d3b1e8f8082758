#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "elastipinn/driver/config.hpp"
#include "elastipinn/driver/experiment.hpp"
#include "elastipinn/driver/presets.hpp"

using namespace elastipinn;
using namespace elastipinn::driver;
using nlohmann::json;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("elastipinn_" + name)).string();
}

// Tiny homogeneous problem with a few iterations per phase.
ExperimentConfig tiny() {
    return load_config("iso-homogeneous-setting1",
                       {"sampling.n_obs=20", "sampling.n_pde=30", "sampling.n_bc_lateral=3",
                        "sampling.n_bc_topbottom=5", "network.hidden=[6]", "schedule.pretrain_adam=3",
                        "schedule.pretrain_bfgs_max=2", "schedule.adam=3", "schedule.bfgs=2",
                        "export.lattice_spacing=0"});
}

}  // namespace

TEST_CASE("presets") {
    CHECK(preset_list().size() >= 11);
    for (const auto& p : preset_list()) {
        CAPTURE(p.name);
        const ExperimentConfig c = preset(p.name);
        CHECK(c.name == p.name);
        CHECK_FALSE(c.description.empty());
        // The JSON form round-trips.
        const json j = to_json(c);
        CHECK(to_json(config_from_json(j)) == j);
    }
    CHECK(is_preset("two-region-field"));
    CHECK_FALSE(is_preset("two-region"));
    CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("strict config parsing") {
    json j = to_json(preset("iso-homogeneous-setting2"));

    SUBCASE("unknown top-level key") {
        j["extra"] = 1;
        CHECK_THROWS_AS(config_from_json(j), ConfigError);
    }
    SUBCASE("unknown nested key") {
        j["schedule"]["adam_steps"] = 10;
        CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("schedule: unknown key 'adam_steps'"), ConfigError);
    }
    SUBCASE("wrong type") {
        j["sampling"]["n_pde"] = "many";
        CHECK_THROWS_AS(config_from_json(j), ConfigError);
    }
    SUBCASE("invalid value") {
        j["noise"]["ld"] = -0.1;
        CHECK_THROWS_AS(config_from_json(j), ConfigError);
    }
    SUBCASE("duplicate seeds") {
        j["seeds"] = {1, 1};
        CHECK_THROWS_AS(config_from_json(j), ConfigError);
    }
}

TEST_CASE("overrides") {
    const ExperimentConfig c = load_config("two-region-scalar", {"noise.ld=[0.05]", "schedule.bfgs=77", "seeds=[3]"});
    CHECK(c.noise_ld == std::vector<double>{0.05});
    CHECK(c.schedule.bfgs == 77);
    CHECK(c.seeds == std::vector<std::uint64_t>{3});
    // The override survives the snapshot written to the run directory.
    CHECK(to_json(c)["schedule"]["bfgs"] == 77);

    CHECK_THROWS_AS(load_config("two-region-scalar", {"schedule.nope=1"}), ConfigError);
    CHECK_THROWS_AS(load_config("two-region-scalar", {"schedule.bfgs"}), ConfigError);
    CHECK_THROWS_AS(load_config("two-region-scalar", {"schedule.bfgs=-1"}), ConfigError);
    CHECK_THROWS_AS(load_config("no-such-preset"), ConfigError);

    SUBCASE("file") {
        const std::string path = temp_path("config.json");
        std::ofstream(path) << to_json(c).dump(2);
        const ExperimentConfig f = load_config(path, {"schedule.adam=5"});
        CHECK(f.schedule.bfgs == 77);
        CHECK(f.schedule.adam == 5);
        std::filesystem::remove(path);
    }
}

TEST_CASE("case expansion") {
    ExperimentConfig c = preset("iso-homogeneous-setting2");
    const auto cases = expand_cases(c);
    REQUIRE(cases.size() == 3);
    CHECK(cases[1].label == "ld-0.05");
    CHECK(c.seeds.size() == 5);

    const auto f = expand_cases(preset("fourier-sweep"));
    REQUIRE(f.size() == 9);
    CHECK(f[6].fourier_sigma == 4.0);
    CHECK(f[6].label == "sigma-4_ld-0");
}

TEST_CASE("region ratio") {
    CHECK(region_ratio(7.5, 15.0) == doctest::Approx(0.5));
    CHECK(region_ratio(7.05, 14.9) == doctest::Approx(0.473).epsilon(1e-3));
    CHECK_THROWS_AS(region_ratio(1.0, 0.0), std::domain_error);

    const ExperimentConfig c = preset("two-region-scalar");
    const Problem p = build_problem(c, expand_cases(c)[0], 1);
    const Eigen::VectorXd theta = p.train.initial(1);
    const Eigen::Matrix3Xd& x = p.train.data().pde;
    CHECK(region_ratio(p.train, theta, x, 5.0) == doctest::Approx(15.0 / 25.0));
    CHECK_THROWS_AS(region_ratio(p.train, theta, x, -1.0), std::domain_error);
}

TEST_CASE("lattice field export") {
    const ExperimentConfig c = preset("iso-homogeneous-setting1");
    const Problem p = build_problem(c, expand_cases(c)[0], 2);
    const Eigen::Matrix3Xd grid = sampling::lattice(c.geometry, 0.2);
    CHECK(grid.cols() == 51 * 51 * 11);
    const Eigen::VectorXd theta = Eigen::VectorXd::Zero(p.train.size());
    const loss::FieldPrediction f = loss::predict_fields(p.train, theta, grid);
    CHECK(f.u.cwiseAbs().maxCoeff() == 0.0);
    CHECK(f.E.cwiseAbs().maxCoeff() == 0.0);

    const loss::FieldPrediction t = truth_fields(*p.manufactured, grid.leftCols(4));
    const std::string path = temp_path("fields.csv");
    write_field_csv(path, t);
    std::ifstream in(path);
    std::string header, line;
    std::getline(in, header);
    CHECK(header.rfind("x,y,z,valid,ux,uy,uz,E11", 0) == 0);
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);
    std::filesystem::remove(path);
}

TEST_CASE("replicates and aggregation") {
    ExperimentConfig c = tiny();
    RunOptions ro;
    ro.write = false;
    const auto reports = run_experiment(c, ro);
    REQUIRE(reports.size() == 3);
    for (const auto& r : reports) {
        CHECK(r.seeds.size() == 5);
        CHECK(r.failed == 0);
        CHECK(r.mean.count("e_mu") == 1);
    }

    const ReplicateReport& r = reports[2];
    const SeriesAggregate& a = r.aggregate.at("e_mu");
    REQUIRE_FALSE(a.epoch.empty());
    for (std::size_t k = 0; k < a.epoch.size(); ++k) {
        CHECK(a.min[k] <= a.geomean[k] * (1 + 1e-12));
        CHECK(a.geomean[k] <= a.max[k] * (1 + 1e-12));
        for (const auto& s : r.seeds) {
            const auto& t = s.trajectory;
            for (std::size_t i = 0; i < t.epoch.size(); ++i)
                if (t.epoch[i] == a.epoch[k] && i + 1 < t.epoch.size() && t.epoch[i + 1] != t.epoch[i]) {
                    CHECK(t.series.at("e_mu")[i] >= a.min[k]);
                    CHECK(t.series.at("e_mu")[i] <= a.max[k]);
                }
        }
    }
}

TEST_CASE("aggregate excludes non-positive values") {
    Trajectory t1, t2;
    t1.epoch = {0, 1};
    t2.epoch = {0, 1};
    t1.series["s"] = {1.0, 4.0};
    t2.series["s"] = {4.0, 0.0};
    const SeriesAggregate a = aggregate_series({&t1, &t2}, "s");
    REQUIRE(a.epoch.size() == 2);
    CHECK(a.geomean[0] == doctest::Approx(2.0));
    CHECK(a.count[1] == 1);
    CHECK(a.geomean[1] == doctest::Approx(4.0));
    CHECK(a.excluded == 1);
}

TEST_CASE("checkpoint round trip") {
    const ExperimentConfig c = tiny();
    const CaseSpec cs = expand_cases(c)[1];
    optim::Checkpoint ck;
    ck.kind = "best";
    ck.epoch = 12;
    ck.phase = "adam";
    ck.theta = Eigen::VectorXd::LinSpaced(7, -1.0, 1.0);
    const std::string path = temp_path("ck.json");
    std::ofstream(path) << checkpoint_to_json(ck, c, cs, 4).dump();
    const LoadedCheckpoint l = load_checkpoint(path);
    CHECK(l.kind == "best");
    CHECK(l.epoch == 12);
    CHECK(l.seed == 4);
    CHECK(l.spec.ld == cs.ld);
    CHECK(l.theta == ck.theta);
    CHECK(to_json(l.config) == to_json(c));
    std::filesystem::remove(path);
}
