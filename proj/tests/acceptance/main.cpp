// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance                 run everything
//   acceptance --only a,b      run the named criteria
//   acceptance --list          print the criterion names
//   acceptance --report FILE   also write the lines to FILE

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../support/mechanics.hpp"
#include "../support/toy.hpp"
#include "elastipinn/data/observations.hpp"
#include "elastipinn/driver/config.hpp"
#include "elastipinn/driver/experiment.hpp"
#include "elastipinn/driver/presets.hpp"
#include "elastipinn/mechanics/kinematics.hpp"
#include "elastipinn/mechanics/stress.hpp"
#include "elastipinn/network/mlp.hpp"
#include "elastipinn/optim/adam.hpp"
#include "elastipinn/optim/bfgs.hpp"
#include "elastipinn/util/parallel.hpp"

namespace fs = std::filesystem;
using namespace elastipinn;
using mech::Mat3d;
using mech::Vec3d;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome ad_gradient() {
    const auto t0 = Clock::now();
    const loss::Objective obj = testing::toy_objective();
    for (loss::Term t : loss::kAllTerms)
        if (!obj.applicable(t)) return {false, "toy problem does not exercise every term"};
    if (obj.data().obs.size() != 5 || obj.data().pde.cols() != 10) return {false, "toy problem has the wrong size"};

    Eigen::VectorXd th = obj.initial(3);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.0, 0.05);
    for (Eigen::Index i = 0; i < obj.u_size() + obj.mu_size(); ++i)
        if (th[i] == 0.0) th[i] = nd(rng);

    loss::EvalRequest req;
    const loss::Evaluation ev = obj.evaluate(th, req);
    if (ev.poisoned) return {false, "poisoned toy loss"};
    loss::EvalRequest vreq;
    vreq.gradient = false;
    const Eigen::VectorXd fd = testing::central_difference(
        [&](const Eigen::VectorXd& y) { return obj.evaluate(y, vreq).value; }, th, 1e-5);
    const double err = testing::max_relative_error(ev.gradient, fd, 1e-6 * fd.lpNorm<Eigen::Infinity>());
    const double t = seconds_since(t0);
    return {err < 1e-5 && t < 10.0, std::to_string(th.size()) + " weights, max rel err " + fmt("%.2e", err) +
                                        ", " + fmt("%.2f", t) + " s"};
}

Outcome constitutive() {
    std::mt19937_64 rng(11);
    double nh_err = 0.0;
    mech::MaterialModel nh;
    const auto& p = std::get<mech::NeoHookean>(nh.law);
    for (int i = 0; i < 100; ++i) {
        const Mat3d F = testing::random_F(rng);
        const Mat3d P = mech::first_pk_stress(nh, mech::kinematics(F - Mat3d::Identity()));
        const Mat3d ref = testing::neo_hookean_P(p.mu, p.kappa, F);
        nh_err = std::max(nh_err, (P - ref).norm() / ref.norm());
    }
    double obj_err = 0.0, sym_err = 0.0, w0 = 0.0;
    for (const auto& m : testing::all_laws()) {
        for (int i = 0; i < 100; ++i) {
            const Mat3d F = testing::random_F(rng);
            const Mat3d Q = testing::random_rotation(rng);
            const Vec3d x(2.0, 7.0, 1.1);
            const mech::DeformationState s = mech::kinematics(F - Mat3d::Identity(), Vec3d::UnitX(), x);
            const double w = mech::strain_energy(m, s, x);
            const double wq = mech::strain_energy(m, mech::kinematics(Q * F - Mat3d::Identity()), x);
            obj_err = std::max(obj_err, std::abs(w - wq));
            const Mat3d sigma = mech::cauchy_stress(mech::first_pk_stress(m, s, x), s);
            sym_err = std::max(sym_err, (sigma - sigma.transpose()).cwiseAbs().maxCoeff());
        }
        w0 = std::max(w0, std::abs(mech::strain_energy(m, mech::kinematics(Mat3d::Zero()), Vec3d(1.0, 2.0, 0.5))));
    }
    const bool pass = nh_err < 1e-8 && obj_err <= 1e-10 && sym_err <= 1e-8 && w0 == 0.0;
    return {pass, "P rel err " + fmt("%.1e", nh_err) + ", |W(QF)-W(F)| " + fmt("%.1e", obj_err) + ", asym " +
                      fmt("%.1e", sym_err) + ", W(I) " + fmt("%g", w0)};
}

// Divergence of P by Richardson-extrapolated central differences.
Vec3d fd_divergence(const data::ManufacturedProblem& mp, const Vec3d& x, double h) {
    Vec3d div = Vec3d::Zero();
    for (int j = 0; j < 3; ++j) {
        auto d = [&](double s) {
            const Vec3d e = s * Vec3d::Unit(j);
            return Vec3d((mp.first_pk(x + e) - mp.first_pk(x - e)).col(j) / (2.0 * s));
        };
        div += (4.0 * d(0.5 * h) - d(h)) / 3.0;
    }
    return div;
}

// True when the stiffness is constant over the difference stencil at x.
bool smooth_stencil(const data::ManufacturedProblem& mp, const Vec3d& x, double h) {
    const double mu = mp.stiffness(x);
    for (int j = 0; j < 3; ++j)
        for (double s : {-h, -0.5 * h, 0.5 * h, h})
            if (mp.stiffness(x + s * Vec3d::Unit(j)) != mu) return false;
    return true;
}

Outcome manufactured_consistency() {
    const double h = 2e-3;
    double worst = 0.0;
    std::string worst_name;
    int problems = 0;
    for (const auto& info : driver::preset_list()) {
        const driver::ExperimentConfig cfg = driver::preset(info.name);
        if (cfg.data.source != driver::DataSource::Manufactured) continue;
        driver::ExperimentConfig small = cfg;
        small.data.layout = driver::ObservationLayout::Random;
        small.data.pixel_spacing = 0.0;
        const driver::Problem p = driver::build_problem(small, driver::expand_cases(small).front(), 1);
        const data::ManufacturedProblem& mp = *p.manufactured;
        ++problems;
        std::mt19937_64 rng(17);
        const Eigen::Vector3d ext = cfg.geometry.extent();
        std::uniform_real_distribution<double> u(0.0, 1.0);
        int n = 0;
        while (n < 100) {
            Vec3d x;
            for (int k = 0; k < 3; ++k) x[k] = 2.0 * h + (ext[k] - 4.0 * h) * u(rng);
            if (!smooth_stencil(mp, x, h)) continue;
            const double r = (fd_divergence(mp, x, h) + mp.body_force(x)).norm();
            if (r > worst) {
                worst = r;
                worst_name = info.name;
            }
            ++n;
        }
    }
    return {worst < 1e-8 && problems > 0, std::to_string(problems) + " problems x 100 points, max |div P + b| " +
                                              fmt("%.1e", worst) + " kPa/mm (" + worst_name + ")"};
}

// Budgets for the recovery runs. Full logging of every breakdown is off;
// the loss total is still written each epoch.
const std::vector<std::string> kRecoveryLogging{"logging.log_every=100", "logging.test_every=0",
                                                "export.lattice_spacing=0"};

driver::SeedResult recover(const std::string& preset, double ld, std::uint64_t seed, std::vector<std::string> sets) {
    sets.insert(sets.end(), kRecoveryLogging.begin(), kRecoveryLogging.end());
    const driver::ExperimentConfig cfg = driver::load_config(preset, sets);
    driver::CaseSpec c;
    c.ld = ld;
    c.label = "ld-" + driver::format_number(ld);
    return driver::run_seed(cfg, c, seed);
}

double estimate(const driver::SeedResult& r, const std::string& name) {
    for (const auto& [k, v] : r.metrics.estimates)
        if (k == name) return v;
    return std::nan("");
}

Outcome homogeneous_recovery() {
    const std::vector<std::string> budget{"schedule.pretrain_adam=600", "schedule.pretrain_bfgs_max=2000",
                                          "schedule.adam=600", "schedule.bfgs=1200"};
    bool pass = true;
    std::ostringstream os;
    for (double ld : {0.0, 0.05, 0.10}) {
        const auto t0 = Clock::now();
        const driver::SeedResult r = recover("iso-homogeneous-setting2", ld, 1, budget);
        const double t = seconds_since(t0);
        const double mu = estimate(r, "mu");
        const double err = std::abs(mu - 10.0) / 10.0;
        const double tol = ld == 0.0 ? 0.05 : 0.10;
        bool ok = !r.failed && err < tol;
        if (ld == 0.0) ok = ok && t < 15.0 * 60.0;
        pass = pass && ok;
        os << (ld == 0.0 ? "" : "; ") << "LD " << ld << ": mu " << fmt("%.4f", mu) << " (" << fmt("%.2f", 100 * err)
           << "%, " << fmt("%.0f", t) << " s)";
    }
    return {pass, os.str()};
}

Outcome two_region_recovery() {
    const driver::SeedResult r =
        recover("two-region-scalar", 0.0, 1,
                {"schedule.pretrain_adam=600", "schedule.pretrain_bfgs_max=2000", "schedule.adam=600",
                 "schedule.bfgs=1500"});
    const double l = estimate(r, "mu_l"), rr = estimate(r, "mu_r");
    const double el = std::abs(l - 7.5) / 7.5, er = std::abs(rr - 15.0) / 15.0;
    const double ratio = r.ratio.value_or(std::nan(""));
    const bool pass = !r.failed && ratio >= 0.42 && ratio <= 0.58 && el < 0.15 && er < 0.15;
    return {pass, "ratio " + fmt("%.4f", ratio) + ", mu_l " + fmt("%.3f", l) + " (" + fmt("%.1f", 100 * el) +
                      "%), mu_r " + fmt("%.3f", rr) + " (" + fmt("%.1f", 100 * er) + "%)"};
}

Outcome schedule_ablation() {
    // Equal total epoch budget: 200 + 400 + 200 + 200 against 1000 Adam epochs.
    const std::vector<std::string> two_phase{"schedule.pretrain_adam=200", "schedule.pretrain_bfgs_max=400",
                                             "schedule.adam=200",
                                             "schedule.bfgs=200"};
    const std::vector<std::string> adam_only{"schedule.mode=adam-only", "schedule.adam_only_epochs=1000"};
    int wins = 0;
    std::ostringstream os;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const driver::SeedResult a = recover("iso-homogeneous-setting1", 0.0, seed, two_phase);
        const driver::SeedResult b = recover("iso-homogeneous-setting1", 0.0, seed, adam_only);
        const long ea = a.record.phases.empty() ? 0 : a.record.phases.back().end_epoch;
        const long eb = b.record.phases.empty() ? 0 : b.record.phases.back().end_epoch;
        const bool ok = !a.failed && !b.failed && a.metrics.e_mu <= b.metrics.e_mu;
        wins += ok;
        os << (seed == 1 ? "" : "; ") << "seed " << seed << ": " << fmt("%.2e", a.metrics.e_mu) << " ("
           << ea << " ep) vs " << fmt("%.2e", b.metrics.e_mu) << " (" << eb << " ep)";
    }
    return {wins >= 4, std::to_string(wins) + "/5 two-phase no worse; " + os.str()};
}

Outcome optimizer_targets() {
    int worst_iter = 0;
    double worst_dx = 0.0;
    for (unsigned seed = 1; seed <= 50; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd;
        Eigen::MatrixXd M(4, 4);
        for (int i = 0; i < 16; ++i) M.data()[i] = nd(rng);
        const Eigen::MatrixXd A = M * M.transpose() + 0.5 * Eigen::MatrixXd::Identity(4, 4);
        Eigen::VectorXd b(4);
        for (int i = 0; i < 4; ++i) b[i] = nd(rng);
        const Eigen::VectorXd xs = A.ldlt().solve(b);
        auto f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
            g = A * x - b;
            return 0.5 * x.dot(A * x) - b.dot(x);
        };
        optim::BfgsState s;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
        int it = 0;
        while (it < 6 && (x - xs).norm() >= 1e-8) {
            optim::bfgs_step(s, x, f);
            ++it;
        }
        worst_dx = std::max(worst_dx, (x - xs).norm());
        worst_iter = std::max(worst_iter, it);
    }
    double adam_dev = 0.0;
    for (double g : {1e-4, 0.3, -2.0, 5e3}) {
        optim::AdamState s(1);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
        optim::adam_step(s, x, Eigen::VectorXd::Constant(1, g));
        adam_dev = std::max(adam_dev, std::abs(std::abs(x[0]) - s.cfg.lr) / s.cfg.lr);
    }
    const bool pass = worst_dx < 1e-8 && worst_iter <= 6 && adam_dev < 1e-3;
    return {pass, "BFGS 50 SPD 4D quadratics: max |x-x*| " + fmt("%.1e", worst_dx) + " in <= " +
                      std::to_string(worst_iter) + " iterations; Adam |step|/lr - 1 <= " + fmt("%.1e", adam_dev)};
}

Outcome noise_machinery() {
    data::ManufacturedProblem mp;
    mp.u = data::QuadraticDisplacement::preset("slab-quadratic");
    const data::ObservationSet big = mp.sample_observations(33334, 5, false);
    const double ld = 0.1;
    const data::ObservationSet o = data::add_noise(big, ld, 7);
    const double sigma = ld * data::max_displacement_norm(big.u) / 3.0;
    const Eigen::Matrix3Xd diff = o.u - big.u;
    const Eigen::ArrayXd e = Eigen::Map<const Eigen::ArrayXd>(diff.data(), diff.size());
    const double sd = std::sqrt((e - e.mean()).square().sum() / static_cast<double>(e.size() - 1));
    const double rel = std::abs(sd - sigma) / sigma;
    const data::ObservationSet z = data::add_noise(big, 0.0, 7);
    const bool identity = z.u == big.u;
    return {rel < 0.02 && identity && e.size() >= 100000,
            std::to_string(e.size()) + " samples, sigma " + fmt("%.4e", sd) + " vs " + fmt("%.4e", sigma) + " (" +
                fmt("%.2f", 100 * rel) + "%), LD 0 identity " + (identity ? "yes" : "no")};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "elastipinn_acceptance_determinism";
    fs::remove_all(root);
    const std::vector<std::string> tiny{
        "sampling.n_obs=40",         "sampling.n_pde=60",         "sampling.n_bc_lateral=4",
        "sampling.n_bc_topbottom=8", "schedule.pretrain_adam=5",  "schedule.pretrain_bfgs_max=5",
        "schedule.adam=5",           "schedule.bfgs=5",           "schedule.adam_only_epochs=10",
        "seeds=[3]",                 "noise.ld=[0.05]",           "network.fourier.sigma=[2]",
        "export.lattice_spacing=0",  "logging.checkpoint_every=0"};
    const int workers = util::worker_count();
    int files = 0;
    std::string mismatch;
    for (const auto& info : driver::preset_list()) {
        driver::ExperimentConfig cfg = driver::load_config(info.name, tiny);
        cfg.deterministic = true;
        for (int run = 0; run < 2; ++run) {
            // The second run uses a different worker count.
            util::set_worker_count(run == 0 ? 1 : 3);
            driver::RunOptions ro;
            ro.output_dir = (root / info.name / std::to_string(run)).string();
            driver::run_experiment(cfg, ro);
        }
        for (const auto& c : driver::expand_cases(cfg)) {
            const fs::path rel = fs::path(c.label) / "seed-3" / "loss.csv";
            const std::string a = slurp(root / info.name / "0" / rel);
            const std::string b = slurp(root / info.name / "1" / rel);
            ++files;
            if (a.empty() || a != b) mismatch += (mismatch.empty() ? "" : ", ") + info.name;
        }
    }
    util::set_worker_count(workers);
    fs::remove_all(root);
    return {mismatch.empty(), std::to_string(files) + " loss.csv pairs across " +
                                  std::to_string(driver::preset_list().size()) + " presets" +
                                  (mismatch.empty() ? ", byte-identical" : "; differ: " + mismatch)};
}

Outcome fourier_embedding() {
    const int m = 16;
    const net::FourierSpec fs = net::FourierSpec::draw(m, 2.0, 9);
    const Eigen::VectorXd g0 = net::fourier_embed(fs, Eigen::Vector3d::Zero());
    Eigen::VectorXd expect(2 * m);
    expect << Eigen::VectorXd::Ones(m), Eigen::VectorXd::Zero(m);
    const bool dim = fs.dim() == 2 * m && g0.size() == 2 * m;
    const bool zero = dim && g0 == expect;
    double worst = 0.0;
    for (double sigma : {1.0, 2.0, 4.0}) {
        const net::FourierSpec big = net::FourierSpec::draw(3334, sigma, 21);
        const double mean = big.B.mean();
        const double sd =
            std::sqrt((big.B.array() - mean).square().sum() / static_cast<double>(big.B.size() - 1));
        worst = std::max(worst, std::abs(sd - sigma) / sigma);
    }
    return {dim && zero && worst < 0.05, "dim " + std::to_string(g0.size()) + ", gamma(0) " +
                                             (zero ? "exact" : "wrong") + ", B std dev max " +
                                             fmt("%.2f", 100 * worst) + "% off over 10002 entries"};
}

std::vector<Criterion> criteria() {
    return {
        {"ad-gradient", ad_gradient},
        {"constitutive", constitutive},
        {"manufactured-consistency", manufactured_consistency},
        {"homogeneous-recovery", homogeneous_recovery},
        {"two-region-recovery", two_region_recovery},
        {"schedule-ablation", schedule_ablation},
        {"optimizer-targets", optimizer_targets},
        {"noise-machinery", noise_machinery},
        {"determinism", determinism},
        {"fourier-embedding", fourier_embedding},
    };
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"elastipinn acceptance suite"};
    std::vector<std::string> only;
    std::string report;
    bool list = false;
    app.add_option("--only", only, "Criteria to run")->delimiter(',');
    app.add_option("--report", report, "Also write the result lines to this file");
    app.add_flag("--list", list, "List the criteria");
    CLI11_PARSE(app, argc, argv);

    const auto all = criteria();
    if (list) {
        for (const auto& c : all) std::cout << c.name << '\n';
        return 0;
    }
    for (const auto& n : only)
        if (std::none_of(all.begin(), all.end(), [&](const Criterion& c) { return c.name == n; })) {
            std::cerr << "unknown criterion '" << n << "'\n";
            return 2;
        }

    std::ofstream rep;
    if (!report.empty()) rep.open(report);
    int failed = 0;
    for (const auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const std::string line = std::string(o.pass ? "PASS" : "FAIL") + "  " + c.name + "  " + o.detail + "  [" +
                                 fmt("%.1f", seconds_since(t0)) + " s]";
        std::cout << line << std::endl;
        if (rep) rep << line << '\n' << std::flush;
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
