// elastipinn: generate data, train experiments, evaluate checkpoints.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "elastipinn/data/observations.hpp"
#include "elastipinn/driver/config.hpp"
#include "elastipinn/driver/experiment.hpp"
#include "elastipinn/driver/presets.hpp"
#include "elastipinn/sampling/points.hpp"
#include "elastipinn/util/parallel.hpp"

namespace fs = std::filesystem;
using namespace elastipinn;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Options {
    int verbosity = 1;
    std::string config;
    std::vector<std::string> overrides;
    std::string out;
    bool deterministic = false;
    std::uint64_t seed = 1;
    double ld = -1.0;
    std::string checkpoint;
    double lattice = 0.0;
    std::string write_dir;
    bool print = false;
};

void info(const Options& o, const std::string& msg) {
    if (o.verbosity > 0) std::cout << msg << std::endl;
}

driver::ExperimentConfig load(const Options& o) {
    if (o.config.empty()) throw driver::ConfigError("--config is required");
    driver::ExperimentConfig cfg = driver::load_config(o.config, o.overrides);
    if (o.deterministic) cfg.deterministic = true;
    if (!o.out.empty()) cfg.output_dir = o.out;
    return cfg;
}

int cmd_presets(const Options& o) {
    std::size_t width = 0;
    for (const auto& p : driver::preset_list()) width = std::max(width, p.name.size());
    for (const auto& p : driver::preset_list())
        std::cout << p.name << std::string(width - p.name.size() + 2, ' ') << p.description << '\n';
    if (!o.write_dir.empty()) {
        fs::create_directories(o.write_dir);
        for (const auto& p : driver::preset_list()) {
            std::ofstream out(fs::path(o.write_dir) / (p.name + ".json"));
            out << driver::to_json(driver::preset(p.name)).dump(2) << '\n';
        }
        info(o, "wrote " + std::to_string(driver::preset_list().size()) + " preset files to " + o.write_dir);
    }
    return kOk;
}

int cmd_validate(const Options& o) {
    const driver::ExperimentConfig cfg = load(o);
    if (o.print) std::cout << driver::to_json(cfg).dump(2) << '\n';
    info(o, "ok: " + cfg.name + " (" + std::to_string(driver::expand_cases(cfg).size()) + " cases x " +
                std::to_string(cfg.seeds.size()) + " seeds)");
    return kOk;
}

void write_points(const std::string& path, const loss::Dataset& d) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "set,x,y,z,nx,ny,nz\n";
    char buf[160];
    for (Eigen::Index i = 0; i < d.pde.cols(); ++i) {
        std::snprintf(buf, sizeof buf, "pde,%.17g,%.17g,%.17g,0,0,0\n", d.pde(0, i), d.pde(1, i), d.pde(2, i));
        out << buf;
    }
    for (const auto& f : d.faces)
        for (Eigen::Index i = 0; i < f.x.cols(); ++i) {
            std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%g,%g,%g\n", sampling::face_name(f.face).c_str(),
                          f.x(0, i), f.x(1, i), f.x(2, i), f.normal[0], f.normal[1], f.normal[2]);
            out << buf;
        }
}

int cmd_generate(const Options& o) {
    const driver::ExperimentConfig cfg = load(o);
    if (o.out.empty()) throw driver::ConfigError("--out is required");
    driver::CaseSpec c = driver::expand_cases(cfg).front();
    if (o.ld >= 0.0) c.ld = o.ld;
    c.label = "ld-" + driver::format_number(c.ld);
    const driver::Problem p = driver::build_problem(cfg, c, o.seed);
    fs::create_directories(o.out);
    const fs::path dir(o.out);
    data::export_csv(p.train.data().obs, (dir / "observations.csv").string());
    data::export_csv(p.test.data().obs, (dir / "test_observations.csv").string());
    write_points((dir / "points.csv").string(), p.train.data());
    write_points((dir / "test_points.csv").string(), p.test.data());
    if (p.manufactured && cfg.exports.lattice_spacing > 0.0) {
        const Eigen::Matrix3Xd grid = sampling::lattice(cfg.geometry, cfg.exports.lattice_spacing);
        driver::write_field_csv((dir / "fields_truth.csv").string(), driver::truth_fields(*p.manufactured, grid));
    }
    std::ofstream(dir / "config.json") << driver::to_json(cfg).dump(2) << '\n';
    info(o, "wrote " + std::to_string(p.train.data().obs.size()) + " observations (LD " + driver::format_number(c.ld) +
                ", seed " + std::to_string(o.seed) + ") to " + o.out);
    return kOk;
}

int cmd_train(const Options& o) {
    const driver::ExperimentConfig cfg = load(o);
    if (cfg.output_dir.empty()) throw driver::ConfigError("output.dir is empty; pass --out");
    info(o, "experiment " + cfg.name + " -> " + cfg.output_dir + " (" + std::to_string(util::worker_count()) +
                " threads)");
    driver::RunOptions ro;
    ro.progress = [&](const std::string& s) { info(o, "  " + s); };
    const auto reports = driver::run_experiment(cfg, ro);
    int failed = 0;
    for (const auto& r : reports) {
        failed += r.failed;
        std::string line = r.spec.label + ":";
        for (const char* k : {"e_mu", "e_u", "e_E", "e_sigma", "ratio"}) {
            auto it = r.mean.find(k);
            if (it != r.mean.end()) line += std::string(" ") + k + "=" + driver::format_number(it->second);
        }
        if (r.failed) line += " failed=" + std::to_string(r.failed);
        info(o, line);
    }
    if (failed > 0) {
        std::cerr << "elastipinn: " << failed << " replicate(s) failed; see metrics.json in " << cfg.output_dir
                  << '\n';
        for (const auto& r : reports)
            for (const auto& s : r.seeds)
                if (s.failed) std::cerr << "  " << r.spec.label << " seed " << s.seed << ": " << s.message << '\n';
        return kRuntimeError;
    }
    return kOk;
}

int cmd_eval(const Options& o) {
    if (o.checkpoint.empty()) throw driver::ConfigError("--checkpoint is required");
    const driver::LoadedCheckpoint ck = driver::load_checkpoint(o.checkpoint);
    const driver::Problem p = driver::build_problem(ck.config, ck.spec, ck.seed);
    if (ck.theta.size() != p.train.size())
        throw driver::ConfigError(o.checkpoint + ": parameter vector does not match the configuration");
    const loss::MetricRecord m = loss::error_metrics(p.train, ck.theta, p.truth);
    json j = {{"checkpoint", o.checkpoint}, {"kind", ck.kind}, {"epoch", ck.epoch}, {"seed", ck.seed},
              {"case", ck.spec.label}, {"e_mu", m.e_mu}, {"e_u", m.e_u}, {"e_E", m.e_E}, {"e_sigma", m.e_sigma}};
    for (const auto& [k, v] : m.estimates) j["estimates"][k] = v;
    for (const auto& [k, v] : m.parameters) j["parameter_errors"][k] = v;
    std::cout << j.dump(2) << '\n';
    if (!o.out.empty()) {
        fs::create_directories(o.out);
        const fs::path dir(o.out);
        std::ofstream(dir / "metrics.json") << j.dump(2) << '\n';
        const double h = o.lattice > 0.0 ? o.lattice : ck.config.exports.lattice_spacing;
        if (h > 0.0) {
            const Eigen::Matrix3Xd grid = sampling::lattice(ck.config.geometry, h);
            driver::write_field_csv((dir / "fields.csv").string(), loss::predict_fields(p.train, ck.theta, grid));
            if (p.manufactured)
                driver::write_field_csv((dir / "fields_truth.csv").string(), driver::truth_fields(*p.manufactured, grid));
            std::ofstream(dir / "fields.json") << json{{"spacing", h},
                                                       {"shape", sampling::lattice_shape(ck.config.geometry, h)},
                                                       {"order", "x fastest, then y, then z"},
                                                       {"truth", p.manufactured.has_value()}}
                                                      .dump(2)
                                               << '\n';
        }
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Physics-informed neural networks for hyperelastic stiffness estimation"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    int verbose = 0;
    bool quiet = false;
    app.add_flag("-v,--verbose", verbose, "More output");
    app.add_flag("-q,--quiet", quiet, "Errors only");

    auto add_config = [&](CLI::App* s) {
        s->add_option("-c,--config", o.config, "Preset name or JSON config file")->required();
        s->add_option("--set", o.overrides, "Override a config value: dotted.key=json")->take_all();
    };

    CLI::App* presets = app.add_subcommand("presets", "List the named experiments");
    presets->add_option("--write", o.write_dir, "Also write every preset as JSON into this directory");

    CLI::App* validate = app.add_subcommand("validate-config", "Check a configuration and exit");
    add_config(validate);
    validate->add_flag("--print", o.print, "Print the resolved configuration");

    CLI::App* generate = app.add_subcommand("generate", "Write the observations and point sets of one replicate");
    add_config(generate);
    generate->add_option("-o,--out", o.out, "Output directory")->required();
    generate->add_option("--seed", o.seed, "Replicate seed");
    generate->add_option("--ld", o.ld, "Noise level (default: first of noise.ld)")->check(CLI::NonNegativeNumber);

    CLI::App* train = app.add_subcommand("train", "Run an experiment and write its run directory");
    add_config(train);
    train->add_option("-o,--out", o.out, "Run directory (overrides output.dir)");
    train->add_flag("--deterministic", o.deterministic, "Byte-reproducible artifacts (no timings)");

    CLI::App* eval = app.add_subcommand("eval", "Score a checkpoint and export its fields");
    eval->add_option("--checkpoint", o.checkpoint, "Checkpoint JSON file")->required();
    eval->add_option("-o,--out", o.out, "Directory for metrics and field exports");
    eval->add_option("--lattice", o.lattice, "Export lattice spacing in mm")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }
    o.verbosity = quiet ? 0 : 1 + verbose;

    try {
        if (*presets) return cmd_presets(o);
        if (*validate) return cmd_validate(o);
        if (*generate) return cmd_generate(o);
        if (*train) return cmd_train(o);
        if (*eval) return cmd_eval(o);
    } catch (const driver::ConfigError& e) {
        std::cerr << "elastipinn: config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "elastipinn: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kRuntimeError;
}
