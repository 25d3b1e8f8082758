#include "elastipinn/driver/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "elastipinn/data/observations.hpp"
#include "elastipinn/mechanics/kinematics.hpp"
#include "elastipinn/network/serialize.hpp"
#include "elastipinn/sampling/points.hpp"

namespace elastipinn::driver {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Seed streams. Training and test sets never share a stream.
enum Stream : std::uint64_t {
    kTrainPoints = 1001,
    kTrainObs = 1002,
    kTrainNoise = 1003,
    kTestPoints = 2001,
    kTestObs = 2002,
    kTestNoise = 2003,
    kFourier = 3001,
    kInit = 4001,
};

std::uint64_t stream(std::uint64_t seed, Stream s) { return sampling::derive_seed(seed, s); }

double stiffness_max(const ExperimentConfig& cfg) {
    const double base = mech::parameters(cfg.truth.material)[0];
    if (!cfg.truth.stiffness) return base;
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, sampling::ConstantField>)
                return f.mu;
            else if constexpr (std::is_same_v<T, sampling::TwoRegionField>)
                return std::max(f.mu_l, f.mu_r);
            else if constexpr (std::is_same_v<T, sampling::ScarSpheresField>)
                return std::max({f.background, f.values[0], f.values[1], f.values[2]});
            else
                return base;
        },
        *cfg.truth.stiffness);
}

double truth_stiffness(const ExperimentConfig& cfg, const Eigen::Vector3d& x) {
    if (cfg.truth.stiffness) return sampling::stiffness_at(*cfg.truth.stiffness, x);
    return mech::parameters(cfg.truth.material)[0];
}

data::ManufacturedProblem manufactured_of(const ExperimentConfig& cfg) {
    data::ManufacturedProblem mp;
    mp.geometry = cfg.geometry;
    mp.material = cfg.truth.material;
    mp.field = cfg.truth.stiffness;
    mp.u = data::QuadraticDisplacement::preset(cfg.data.displacement);
    mp.pressure = cfg.pressure;
    mp.robin_k = cfg.robin_k;
    mp.check_admissible();
    return mp;
}

data::ObservationSet manufactured_observations(const ExperimentConfig& cfg, const data::ManufacturedProblem& mp,
                                               std::uint64_t seed) {
    if (cfg.data.layout == ObservationLayout::Random)
        return mp.sample_observations(cfg.sampling.n_obs, seed, cfg.data.strain);
    data::ObservationSet grid = mp.lattice_observations(cfg.data.lattice_spacing, cfg.data.strain);
    if (cfg.data.pixel_spacing > 0.0) grid = data::downsample_to_pixels(grid, cfg.data.pixel_spacing, cfg.geometry);
    return data::subsample(grid, cfg.sampling.n_obs, seed);
}

// Splits imported observations into disjoint training and test subsets.
std::pair<data::ObservationSet, data::ObservationSet> split_import(const ExperimentConfig& cfg,
                                                                    std::uint64_t seed) {
    const data::ObservationSet all = data::import_fem_csv(cfg.data.fem_path);
    const Eigen::Index n = all.size();
    const Eigen::Index want = std::min<Eigen::Index>(cfg.sampling.n_obs, n / 2);
    if (want < 1) throw std::runtime_error(cfg.data.fem_path + ": too few observations to split into train and test");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(stream(seed, kTrainObs));
    std::shuffle(order.begin(), order.end(), rng);
    const bool clean = all.u_clean.cols() == n;
    auto take = [&](Eigen::Index start) {
        data::ObservationSet o;
        o.provenance = all.provenance;
        o.x.resize(3, want);
        o.u.resize(3, want);
        o.u_clean.resize(3, want);
        if (all.E && cfg.data.strain) o.E = data::StrainBlock(6, want);
        for (Eigen::Index k = 0; k < want; ++k) {
            const Eigen::Index i = order[static_cast<std::size_t>(start + k)];
            o.x.col(k) = all.x.col(i);
            o.u.col(k) = all.u.col(i);
            o.u_clean.col(k) = clean ? all.u_clean.col(i) : all.u.col(i);
            if (o.E) o.E->col(k) = all.E->col(i);
        }
        return o;
    };
    if (cfg.data.strain && !all.E) throw std::runtime_error(cfg.data.fem_path + ": data.strain is set but the file has no strain columns");
    return {take(0), take(want)};
}

loss::Model make_model(const ExperimentConfig& cfg, const CaseSpec& c, std::uint64_t seed) {
    loss::Model m;
    m.material = cfg.model;
    m.param = cfg.param;
    const Eigen::Vector3d scale = cfg.geometry.extent().cwiseInverse();
    m.param.mu_spec.input_scale = scale;
    m.u_spec.hidden = cfg.network.hidden;
    m.u_spec.input_scale = scale;
    if (c.fourier_sigma)
        m.u_spec.fourier = net::FourierSpec::draw(cfg.network.fourier_m, *c.fourier_sigma, stream(seed, kFourier));
    m.pressure = cfg.pressure;
    m.robin_k = cfg.robin_k;
    m.pde_form = cfg.pde_form;
    m.prior = cfg.prior;
    m.weights = cfg.weights;
    return m;
}

loss::TensorBlock tensors(const Eigen::Matrix3Xd& x, const std::function<mech::Mat3d(const mech::Vec3d&)>& f) {
    loss::TensorBlock out(9, x.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        const mech::Mat3d T = f(x.col(i));
        out.col(i) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(T.data());
    }
    return out;
}

bool two_region_truth(const ExperimentConfig& cfg) {
    return cfg.truth.stiffness && std::holds_alternative<sampling::TwoRegionField>(*cfg.truth.stiffness);
}

std::optional<double> ratio_of(const ExperimentConfig& cfg, const Problem& p, const Eigen::VectorXd& theta) {
    if (!two_region_truth(cfg)) return std::nullopt;
    const double split = std::get<sampling::TwoRegionField>(*cfg.truth.stiffness).split;
    if (cfg.param.mode == loss::StiffnessMode::TwoRegion) {
        const auto snap = p.train.snapshot(theta);
        return region_ratio(snap.region[0], snap.region[1]);
    }
    return region_ratio(p.train, theta, p.truth.x_pde, split);
}

std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

json metrics_json(const SeedResult& r, const CaseSpec& c, bool deterministic) {
    json j;
    j["seed"] = r.seed;
    j["case"] = {{"label", c.label}, {"ld", c.ld}};
    if (c.fourier_sigma) j["case"]["fourier_sigma"] = *c.fourier_sigma;
    j["status"] = r.failed ? "failed" : "ok";
    if (!r.message.empty()) j["message"] = r.message;
    j["e_mu"] = r.metrics.e_mu;
    j["e_u"] = r.metrics.e_u;
    j["e_E"] = r.metrics.e_E;
    j["e_sigma"] = r.metrics.e_sigma;
    json pe = json::object(), es = json::object();
    for (const auto& [k, v] : r.metrics.parameters) pe[k] = v;
    for (const auto& [k, v] : r.metrics.estimates) es[k] = v;
    j["parameter_errors"] = pe;
    j["estimates"] = es;
    if (r.ratio) j["ratio"] = *r.ratio;
    const auto& rec = r.record;
    j["epochs"] = rec.epochs;
    j["evaluations"] = rec.evaluations;
    j["best"] = {{"epoch", rec.best_epoch}, {"value", rec.best_value}};
    json phases = json::array();
    for (const auto& p : rec.phases)
        phases.push_back({{"name", p.name}, {"start", p.start_epoch}, {"end", p.end_epoch}, {"stop", p.stop_reason}});
    j["phases"] = phases;
    if (rec.aborted) {
        j["abort"] = {{"epoch", rec.abort_epoch},
                      {"term", rec.abort_term},
                      {"point", {rec.abort_point[0], rec.abort_point[1], rec.abort_point[2]}},
                      {"message", rec.abort_message}};
    }
    if (!deterministic) j["seconds"] = r.seconds;
    return j;
}

std::string trajectory_csv(const Trajectory& t) {
    std::ostringstream out;
    out << "epoch,phase";
    for (const auto& [k, v] : t.series) out << ',' << k;
    out << '\n';
    for (std::size_t i = 0; i < t.epoch.size(); ++i) {
        out << t.epoch[i] << ',' << t.phase[i];
        for (const auto& [k, v] : t.series) out << ',' << csv_number(v[i]);
        out << '\n';
    }
    return out.str();
}

std::string aggregate_csv(const std::map<std::string, SeriesAggregate>& agg) {
    std::ostringstream out;
    out << "series,epoch,geomean,min,max,count,excluded\n";
    for (const auto& [name, a] : agg)
        for (std::size_t i = 0; i < a.epoch.size(); ++i)
            out << name << ',' << a.epoch[i] << ',' << csv_number(a.geomean[i]) << ',' << csv_number(a.min[i]) << ','
                << csv_number(a.max[i]) << ',' << a.count[i] << ',' << a.excluded << '\n';
    return out.str();
}

}  // namespace

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::vector<CaseSpec> expand_cases(const ExperimentConfig& cfg) {
    std::vector<CaseSpec> out;
    std::vector<std::optional<double>> sigmas;
    if (cfg.network.fourier)
        for (double s : cfg.network.fourier_sigmas) sigmas.emplace_back(s);
    else
        sigmas.emplace_back(std::nullopt);
    for (const auto& s : sigmas)
        for (double ld : cfg.noise_ld) {
            CaseSpec c;
            c.ld = ld;
            c.fourier_sigma = s;
            c.label = (s ? "sigma-" + format_number(*s) + "_" : std::string()) + "ld-" + format_number(ld);
            out.push_back(c);
        }
    return out;
}

Problem build_problem(const ExperimentConfig& cfg, const CaseSpec& c, std::uint64_t seed) {
    cfg.validate();
    const loss::Model model = make_model(cfg, c, seed);
    const sampling::PointSet train_pts = sampling::sample_collocation(cfg.geometry, cfg.sampling, stream(seed, kTrainPoints));
    const sampling::PointSet test_pts = sampling::sample_collocation(cfg.geometry, cfg.sampling, stream(seed, kTestPoints));

    loss::TestTruth truth;
    truth.x_pde = test_pts.pde;
    truth.mu.resize(test_pts.pde.cols());
    for (Eigen::Index i = 0; i < test_pts.pde.cols(); ++i) truth.mu[i] = truth_stiffness(cfg, test_pts.pde.col(i));
    truth.mu_max = stiffness_max(cfg);
    truth.parameters = mech::parameters(cfg.model);
    if (two_region_truth(cfg)) {
        const auto& tr = std::get<sampling::TwoRegionField>(*cfg.truth.stiffness);
        truth.region = {tr.mu_l, tr.mu_r};
    }

    if (cfg.data.source == DataSource::Manufactured) {
        data::ManufacturedProblem mp = manufactured_of(cfg);
        data::ObservationSet obs = manufactured_observations(cfg, mp, stream(seed, kTrainObs));
        data::ObservationSet tobs = manufactured_observations(cfg, mp, stream(seed, kTestObs));
        obs = data::add_noise(obs, c.ld, stream(seed, kTrainNoise));
        tobs = data::add_noise(tobs, c.ld, stream(seed, kTestNoise));
        truth.x_obs = tobs.x;
        truth.u = tobs.u_clean;
        truth.E = tensors(tobs.x, [&](const mech::Vec3d& x) { return mp.strain(x); });
        truth.sigma = tensors(tobs.x, [&](const mech::Vec3d& x) { return mp.cauchy(x); });
        loss::Objective train(model, loss::manufactured_dataset(mp, std::move(obs), train_pts));
        loss::Objective test(model, loss::manufactured_dataset(mp, std::move(tobs), test_pts));
        return Problem{std::move(train), std::move(test), std::move(truth), std::move(mp)};
    }

    auto [obs, tobs] = split_import(cfg, seed);
    obs = data::add_noise(obs, c.ld, stream(seed, kTrainNoise));
    tobs = data::add_noise(tobs, c.ld, stream(seed, kTestNoise));
    truth.x_obs = tobs.x;
    truth.u = tobs.u_clean;
    if (tobs.E) {
        loss::TensorBlock E(9, tobs.size());
        for (Eigen::Index i = 0; i < tobs.size(); ++i) {
            const mech::Mat3d Ei = tobs.strain(i);
            E.col(i) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(Ei.data());
        }
        truth.E = E;
    }
    loss::Objective train(model, loss::physical_dataset(std::move(obs), train_pts));
    loss::Objective test(model, loss::physical_dataset(std::move(tobs), test_pts));
    return Problem{std::move(train), std::move(test), std::move(truth), std::nullopt};
}

double region_ratio(double mu_l, double mu_r) {
    if (!(mu_r != 0.0) || !std::isfinite(mu_l) || !std::isfinite(mu_r))
        throw std::domain_error("region ratio: right-region stiffness must be finite and nonzero");
    return mu_l / mu_r;
}

double region_ratio(const loss::Objective& obj, const Eigen::VectorXd& theta, const Eigen::Matrix3Xd& x,
                    double split) {
    double sum[2] = {0.0, 0.0};
    long count[2] = {0, 0};
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        const int side = x(0, i) < split ? 0 : 1;
        sum[side] += obj.parameters_at(theta, x.col(i))[0];
        ++count[side];
    }
    if (count[0] == 0 || count[1] == 0) throw std::domain_error("region ratio: a region has no sample points");
    return region_ratio(sum[0] / static_cast<double>(count[0]), sum[1] / static_cast<double>(count[1]));
}

SeriesAggregate aggregate_series(const std::vector<const Trajectory*>& runs, const std::string& name) {
    // Last value per epoch for every run.
    std::map<long, std::vector<double>> by_epoch;
    for (const Trajectory* t : runs) {
        auto it = t->series.find(name);
        if (it == t->series.end()) continue;
        std::map<long, double> last;
        for (std::size_t i = 0; i < t->epoch.size(); ++i) last[t->epoch[i]] = it->second[i];
        for (const auto& [e, v] : last) by_epoch[e].push_back(v);
    }
    SeriesAggregate a;
    for (const auto& [e, values] : by_epoch) {
        double logsum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
        int n = 0;
        for (double v : values) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                if (!std::isnan(v)) ++a.excluded;
                continue;
            }
            logsum += std::log(v);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            ++n;
        }
        if (n == 0) continue;
        a.epoch.push_back(e);
        a.geomean.push_back(std::exp(logsum / n));
        a.min.push_back(lo);
        a.max.push_back(hi);
        a.count.push_back(n);
    }
    return a;
}

SeedResult run_seed(const ExperimentConfig& cfg, const CaseSpec& c, std::uint64_t seed,
                    const optim::TrainOptions& extra) {
    SeedResult r;
    r.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const Problem p = build_problem(cfg, c, seed);
        Trajectory& tr = r.trajectory;
        auto push = [&](const std::string& key, std::size_t row, double v) {
            auto& s = tr.series[key];
            s.resize(row + 1, std::nan(""));
            s[row] = v;
        };

        optim::TrainOptions opt = extra;
        opt.log_every = cfg.logging.log_every;
        opt.test_every = cfg.logging.test_every;
        opt.checkpoint_every = cfg.logging.checkpoint_every;
        opt.keep_log = false;
        opt.on_state = [&, user = extra.on_state](long epoch, const std::string& phase, const Eigen::VectorXd& th) {
            const std::size_t row = tr.epoch.size();
            tr.epoch.push_back(epoch);
            tr.phase.push_back(phase);
            const loss::MetricRecord m = loss::parameter_metrics(p.train, th, p.truth);
            push("e_mu", row, m.e_mu);
            for (const auto& [k, v] : m.estimates) push("estimate." + k, row, v);
            if (user) user(epoch, phase, th);
        };
        opt.on_log = [&, user = extra.on_log](const loss::LossBreakdown& b, const std::string& phase) {
            const std::size_t row = tr.epoch.size() - 1;
            for (loss::Term t : loss::kAllTerms)
                if (b.has(t)) push(b.split + "." + std::string(loss::term_name(t)), row, b.raw_of(t));
            push(b.split + ".total", row, b.total);
            if (user) user(b, phase);
        };

        const Eigen::VectorXd theta0 = p.train.initial(stream(seed, kInit));
        r.record = optim::train(p.train, theta0, cfg.schedule, opt, cfg.logging.test_every > 0 ? &p.test : nullptr);
        // Pad the series so that every column spans every row.
        for (auto& [k, v] : tr.series) v.resize(tr.epoch.size(), std::nan(""));

        if (r.record.aborted) {
            r.failed = true;
            r.message = r.record.abort_message;
        }
        r.metrics = loss::error_metrics(p.train, r.record.theta, p.truth);
        r.ratio = ratio_of(cfg, p, r.record.theta);
    } catch (const std::exception& e) {
        r.failed = true;
        r.message = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

json checkpoint_to_json(const optim::Checkpoint& c, const ExperimentConfig& cfg, const CaseSpec& cs,
                        std::uint64_t seed) {
    json j;
    j["kind"] = c.kind;
    j["epoch"] = c.epoch;
    j["phase"] = c.phase;
    j["value"] = c.value;
    j["seed"] = seed;
    j["case"] = {{"label", cs.label}, {"ld", cs.ld}};
    if (cs.fourier_sigma) j["case"]["fourier_sigma"] = *cs.fourier_sigma;
    j["theta"] = std::vector<double>(c.theta.data(), c.theta.data() + c.theta.size());
    if (c.adam) {
        j["adam"] = {{"t", c.adam->t},
                     {"m", std::vector<double>(c.adam->m.data(), c.adam->m.data() + c.adam->m.size())},
                     {"v", std::vector<double>(c.adam->v.data(), c.adam->v.data() + c.adam->v.size())}};
    }
    j["bfgs_iterations"] = c.bfgs_iterations;
    j["config"] = to_json(cfg);
    return j;
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    for (const char* k : {"kind", "epoch", "seed", "case", "theta", "config"})
        if (!j.contains(k)) throw ConfigError(path + ": checkpoint lacks '" + std::string(k) + "'");
    LoadedCheckpoint out;
    out.config = config_from_json(j.at("config"));
    out.kind = j.at("kind").get<std::string>();
    out.epoch = j.at("epoch").get<long>();
    out.seed = j.at("seed").get<std::uint64_t>();
    const json& cj = j.at("case");
    out.spec.label = cj.at("label").get<std::string>();
    out.spec.ld = cj.at("ld").get<double>();
    if (cj.contains("fourier_sigma")) out.spec.fourier_sigma = cj.at("fourier_sigma").get<double>();
    const auto th = j.at("theta").get<std::vector<double>>();
    out.theta = Eigen::Map<const Eigen::VectorXd>(th.data(), static_cast<Eigen::Index>(th.size()));
    return out;
}

loss::FieldPrediction truth_fields(const data::ManufacturedProblem& mp, const Eigen::Matrix3Xd& x) {
    loss::FieldPrediction f;
    const Eigen::Index n = x.cols();
    f.x = x;
    f.u.resize(3, n);
    f.E.resize(9, n);
    f.sigma.resize(9, n);
    f.mu.resize(n);
    f.J.resize(n);
    f.valid.assign(static_cast<std::size_t>(n), true);
    for (Eigen::Index i = 0; i < n; ++i) {
        const mech::Vec3d xi = x.col(i);
        f.u.col(i) = mp.displacement(xi);
        const mech::Mat3d E = mp.strain(xi);
        const mech::Mat3d s = mp.cauchy(xi);
        f.E.col(i) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(E.data());
        f.sigma.col(i) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(s.data());
        f.mu[i] = mp.stiffness(xi);
        f.J[i] = mech::det3((mech::Mat3d::Identity() + mp.u.gradient(xi)).eval());
    }
    return f;
}

void write_field_csv(const std::string& path, const loss::FieldPrediction& f) {
    std::ostringstream out;
    out << "x,y,z,valid,ux,uy,uz";
    static const char* idx[9] = {"11", "21", "31", "12", "22", "32", "13", "23", "33"};
    for (const char* k : idx) out << ",E" << k;
    for (const char* k : idx) out << ",s" << k;
    out << ",mu,J\n";
    for (Eigen::Index i = 0; i < f.x.cols(); ++i) {
        out << csv_number(f.x(0, i)) << ',' << csv_number(f.x(1, i)) << ',' << csv_number(f.x(2, i)) << ','
            << (f.valid[static_cast<std::size_t>(i)] ? 1 : 0);
        for (int r = 0; r < 3; ++r) out << ',' << csv_number(f.u(r, i));
        for (int r = 0; r < 9; ++r) out << ',' << csv_number(f.E(r, i));
        for (int r = 0; r < 9; ++r) out << ',' << csv_number(f.sigma(r, i));
        out << ',' << csv_number(f.mu[i]) << ',' << csv_number(f.J[i]) << '\n';
    }
    write_text(path, out.str());
}

std::vector<ReplicateReport> run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
    cfg.validate();
    const fs::path root = options.output_dir.empty() ? fs::path(cfg.output_dir) : fs::path(options.output_dir);
    const bool write = options.write;
    if (write) {
        if (root.empty()) throw ConfigError("output.dir: required to write a run directory");
        fs::create_directories(root);
        write_text(root / "config.json", to_json(cfg).dump(2) + "\n");
        write_text(root / "seeds.json", json(cfg.seeds).dump() + "\n");
    }
    auto say = [&](const std::string& s) {
        if (options.progress) options.progress(s);
    };

    std::vector<ReplicateReport> reports;
    json summary;
    summary["name"] = cfg.name;
    summary["cases"] = json::array();
    for (const CaseSpec& c : expand_cases(cfg)) {
        ReplicateReport rep;
        rep.spec = c;
        const fs::path case_dir = root / c.label;
        for (std::uint64_t seed : cfg.seeds) {
            say(c.label + " seed " + std::to_string(seed));
            const fs::path dir = case_dir / ("seed-" + std::to_string(seed));
            std::ofstream loss_out;
            optim::TrainOptions extra;
            if (write) {
                fs::create_directories(dir / "checkpoints");
                loss_out.open(dir / "loss.csv", std::ios::binary);
                loss_out << loss::loss_csv_header();
                extra.on_log = [&](const loss::LossBreakdown& b, const std::string& phase) {
                    loss_out << loss::loss_csv_rows(b, phase);
                };
                extra.on_checkpoint = [&](const optim::Checkpoint& ck) {
                    const std::string file =
                        ck.kind == "periodic" ? "periodic-" + std::to_string(ck.epoch) + ".json" : ck.kind + ".json";
                    write_text(dir / "checkpoints" / file, checkpoint_to_json(ck, cfg, c, seed).dump() + "\n");
                };
            }
            SeedResult r = run_seed(cfg, c, seed, extra);
            if (write) {
                loss_out.close();
                write_text(dir / "trajectory.csv", trajectory_csv(r.trajectory));
                write_text(dir / "metrics.json", metrics_json(r, c, cfg.deterministic).dump(2) + "\n");
                if (!r.failed && cfg.exports.lattice_spacing > 0.0) {
                    const Eigen::Matrix3Xd grid = sampling::lattice(cfg.geometry, cfg.exports.lattice_spacing);
                    const Problem p = build_problem(cfg, c, seed);
                    write_field_csv((dir / "fields.csv").string(), loss::predict_fields(p.train, r.record.theta, grid));
                    if (p.manufactured)
                        write_field_csv((dir / "fields_truth.csv").string(), truth_fields(*p.manufactured, grid));
                    const auto shape = sampling::lattice_shape(cfg.geometry, cfg.exports.lattice_spacing);
                    write_text(dir / "fields.json",
                               json{{"spacing", cfg.exports.lattice_spacing},
                                    {"shape", shape},
                                    {"order", "x fastest, then y, then z"},
                                    {"truth", p.manufactured.has_value()}}
                                       .dump(2) +
                                   "\n");
                }
            }
            if (r.failed) {
                ++rep.failed;
                say(c.label + " seed " + std::to_string(seed) + " failed: " + r.message);
            }
            rep.seeds.push_back(std::move(r));
        }

        std::vector<const Trajectory*> runs;
        for (const auto& s : rep.seeds) runs.push_back(&s.trajectory);
        std::set<std::string> names;
        for (const auto* t : runs)
            for (const auto& [k, v] : t->series) names.insert(k);
        for (const auto& k : names) rep.aggregate[k] = aggregate_series(runs, k);

        std::map<std::string, std::pair<double, int>> acc;
        auto add = [&](const std::string& k, double v) {
            if (!std::isfinite(v)) return;
            acc[k].first += v;
            acc[k].second += 1;
        };
        for (const auto& s : rep.seeds) {
            if (s.failed) continue;
            add("e_mu", s.metrics.e_mu);
            add("e_u", s.metrics.e_u);
            add("e_E", s.metrics.e_E);
            add("e_sigma", s.metrics.e_sigma);
            for (const auto& [k, v] : s.metrics.parameters) add("error." + k, v);
            for (const auto& [k, v] : s.metrics.estimates) add("estimate." + k, v);
            if (s.ratio) add("ratio", *s.ratio);
        }
        for (const auto& [k, v] : acc) rep.mean[k] = v.first / v.second;

        json cj;
        cj["label"] = c.label;
        cj["ld"] = c.ld;
        if (c.fourier_sigma) cj["fourier_sigma"] = *c.fourier_sigma;
        cj["failed"] = rep.failed;
        cj["mean"] = rep.mean;
        json per = json::array();
        for (const auto& s : rep.seeds) per.push_back(metrics_json(s, c, cfg.deterministic));
        cj["seeds"] = per;
        summary["cases"].push_back(cj);
        if (write) write_text(case_dir / "aggregate.csv", aggregate_csv(rep.aggregate));
        reports.push_back(std::move(rep));
    }
    if (write) write_text(root / "summary.json", summary.dump(2) + "\n");
    return reports;
}

}  // namespace elastipinn::driver
