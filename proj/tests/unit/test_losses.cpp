#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "../support/toy.hpp"
#include "elastipinn/losses/metrics.hpp"
#include "elastipinn/losses/objective.hpp"
#include "elastipinn/mechanics/kinematics.hpp"
#include "elastipinn/util/parallel.hpp"

using namespace elastipinn;
using namespace elastipinn::loss;
using elastipinn::testing::ToyOptions;
using elastipinn::testing::toy_objective;
using mech::Mat3d;
using mech::Vec3d;

namespace {

double value_of(const Objective& obj, const Eigen::VectorXd& th, TermMask mask = all_terms()) {
    EvalRequest req;
    req.objective = mask;
    req.gradient = false;
    return obj.evaluate(th, req).value;
}

Eigen::VectorXd perturbed_initial(const Objective& obj, std::uint64_t seed) {
    Eigen::VectorXd th = obj.initial(seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.8, 1.3);
    for (Eigen::Index i = obj.u_size() + obj.mu_size(); i < th.size(); ++i) th[i] = u(rng);
    // Nonzero biases exercise every weight.
    std::normal_distribution<double> nd(0.0, 0.05);
    for (Eigen::Index i = 0; i < obj.u_size() + obj.mu_size(); ++i)
        if (th[i] == 0.0) th[i] = nd(rng);
    return th;
}

double fd_check(const Objective& obj, const Eigen::VectorXd& th, TermMask mask = all_terms()) {
    EvalRequest req;
    req.objective = mask;
    const Evaluation ev = obj.evaluate(th, req);
    REQUIRE_FALSE(ev.poisoned);
    const Eigen::VectorXd fd =
        testing::central_difference([&](const Eigen::VectorXd& y) { return value_of(obj, y, mask); }, th);
    return testing::max_relative_error(ev.gradient, fd, 1e-6 * fd.lpNorm<Eigen::Infinity>());
}

data::ObservationSet one_point(const Vec3d& x, const Vec3d& u) {
    data::ObservationSet o;
    o.x = x;
    o.u = u;
    o.u_clean = u;
    return o;
}

Model zero_model() {
    Model m;
    m.u_spec = net::MlpSpec{3, {4}, 3};
    return m;
}

}  // namespace

TEST_CASE("composite gradient matches central differences") {
    SUBCASE("field mode, all seven terms") {
        const Objective obj = toy_objective();
        for (Term t : kAllTerms) CHECK(obj.applicable(t));
        const Eigen::VectorXd th = perturbed_initial(obj, 3);
        const double e = fd_check(obj, th);
        CHECK(e < 1e-5);
    }
    SUBCASE("global mu and kappa") {
        ToyOptions o;
        o.mode = StiffnessMode::Global;
        o.scalars = {{"mu", 15.0}, {"kappa", 800.0}};
        const Objective obj = toy_objective(o);
        const double e = fd_check(obj, perturbed_initial(obj, 4));
        CHECK(e < 1e-5);
    }
    SUBCASE("two regions") {
        ToyOptions o;
        o.mode = StiffnessMode::TwoRegion;
        const Objective obj = toy_objective(o);
        const double e = fd_check(obj, perturbed_initial(obj, 5));
        CHECK(e < 1e-5);
    }
    SUBCASE("guccione with a turning fibre and joint alpha, beta") {
        ToyOptions o;
        o.material.law = mech::Guccione{};
        o.material.fiber = mech::FiberFrame::linear_in_z();
        o.mode = StiffnessMode::Global;
        o.scalars = {{"alpha", 1.314}, {"beta", 1.2}};
        const Objective obj = toy_objective(o);
        const double e = fd_check(obj, perturbed_initial(obj, 6));
        CHECK(e < 1e-5);
    }
    SUBCASE("holzapfel-ogden field mode") {
        ToyOptions o;
        o.material.law = mech::HolzapfelOgden1F{};
        const Objective obj = toy_objective(o);
        const double e = fd_check(obj, perturbed_initial(obj, 8));
        CHECK(e < 1e-5);
    }
    SUBCASE("stress-norm pde form") {
        ToyOptions o;
        o.form = PdeForm::StressNorm;
        const Objective obj = toy_objective(o);
        const double e = fd_check(obj, perturbed_initial(obj, 9));
        CHECK(e < 1e-5);
    }
    SUBCASE("softplus stiffness map") {
        const Objective base = toy_objective();
        Model m = base.model();
        m.param.softplus = true;
        const Objective obj(m, base.data());
        const double e = fd_check(obj, perturbed_initial(obj, 10));
        CHECK(e < 1e-5);
    }
}

TEST_CASE("reference-state loss values") {
    const Eigen::VectorXd w0 = Eigen::VectorXd::Zero(zero_model().u_spec.parameter_count());
    sampling::SlabGeometry g;
    sampling::SamplingPlan plan{1, 6, 3, 4};
    const sampling::PointSet pts = sampling::sample_collocation(g, plan, 11);

    SUBCASE("zero network under pressure: squared residual p^2 per point") {
        Model m = zero_model();
        sampling::PointSet one_face = pts;
        for (int f = 1; f < 6; ++f) one_face.faces[static_cast<std::size_t>(f)].x.resize(3, 0);
        const Objective obj(m, physical_dataset(one_point(Vec3d(1, 1, 1), Vec3d::Zero()), one_face));
        CHECK(bc_neumann_loss(obj, w0) == doctest::Approx(64.0).epsilon(1e-14));
        m.pressure = 0.0;
        const Objective free(m, physical_dataset(one_point(Vec3d(1, 1, 1), Vec3d::Zero()), one_face));
        CHECK(bc_neumann_loss(free, w0) == 0.0);
    }
    SUBCASE("neumann term sums the per-face means") {
        const Objective obj(zero_model(), physical_dataset(one_point(Vec3d(1, 1, 1), Vec3d::Zero()), pts));
        CHECK(bc_neumann_loss(obj, w0) == doctest::Approx(4 * 64.0).epsilon(1e-14));
    }
    SUBCASE("zero network: stress free interior and unloaded springs") {
        const Objective obj(zero_model(), physical_dataset(one_point(Vec3d(1, 1, 1), Vec3d(1, 0, 0)), pts));
        CHECK(pde_loss(obj, w0) == 0.0);
        CHECK(bc_robin_loss(obj, w0) == 0.0);
        EvalRequest req;
        req.objective = only({Term::Obs});
        CHECK(obj.evaluate(w0, req).value == 1.0);
    }
    SUBCASE("tikhonov") {
        CHECK(tikhonov(Eigen::Vector2d(3.0, 4.0)) == 25.0);
        CHECK(tikhonov(Eigen::Vector2d::Zero(), 2.0) == 0.0);
    }
}

TEST_CASE("robin term scales with k squared when P n vanishes") {
    // A rigid translation has P = 0 and u = c, so the residual is k c.
    Model m = zero_model();
    m.u_spec.hidden = {1};
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m.u_spec.parameter_count());
    const auto offs = net::layer_offsets(m.u_spec);
    w.segment(offs[1].bias, 3) = Eigen::Vector3d(0.1, -0.2, 0.05);
    sampling::SamplingPlan plan{1, 1, 0, 5};
    const sampling::PointSet pts = sampling::sample_collocation(sampling::SlabGeometry{}, plan, 3);
    const Objective a(m, physical_dataset(one_point(Vec3d(1, 1, 1), Vec3d::Zero()), pts));
    m.robin_k *= 2.0;
    const Objective b(m, physical_dataset(one_point(Vec3d(1, 1, 1), Vec3d::Zero()), pts));
    const double la = bc_robin_loss(a, w);
    CHECK(la == doctest::Approx(2 * 100.0 * 0.0525).epsilon(1e-12));
    CHECK(bc_robin_loss(b, w) == doctest::Approx(4.0 * la).epsilon(1e-13));
}

TEST_CASE("observation losses against independent references") {
    const Objective obj = toy_objective(ToyOptions{.n_obs = 40});
    const Eigen::VectorXd th = perturbed_initial(obj, 21);
    const Eigen::VectorXd w = th.head(obj.u_size());
    const auto& obs = obj.data().obs;
    EvalRequest req;
    req.objective = only({Term::Obs, Term::ObsE});
    req.gradient = false;
    const LossBreakdown b = obj.evaluate(th, req).breakdown;

    SUBCASE("displacement term matches a reversed brute-force sum") {
        double s = 0.0;
        for (Eigen::Index i = obs.size() - 1; i >= 0; --i)
            s += (obs.u.col(i) - net::forward(obj.model().u_spec, w, Vec3d(obs.x.col(i)))).squaredNorm();
        s /= static_cast<double>(obs.size());
        CHECK(std::abs(b.raw_of(Term::Obs) - s) / s < 1e-12);
        CHECK(std::abs(obs_loss(obj.model().u_spec, w, obs) - s) / s < 1e-12);
    }
    SUBCASE("strain term matches finite-difference strains") {
        double s = 0.0;
        const double h = 1e-5;
        for (Eigen::Index i = 0; i < obs.size(); ++i) {
            Mat3d F = Mat3d::Identity();
            for (int l = 0; l < 3; ++l) {
                Vec3d xp = obs.x.col(i), xm = obs.x.col(i);
                xp[l] += h;
                xm[l] -= h;
                F.col(l) += (net::forward(obj.model().u_spec, w, xp) - net::forward(obj.model().u_spec, w, xm)) / (2 * h);
            }
            s += (obs.strain(i) - mech::green_lagrange(F)).squaredNorm();
        }
        s /= static_cast<double>(obs.size());
        CHECK(std::abs(b.raw_of(Term::ObsE) - s) / s < 1e-6);
        CHECK(std::abs(strain_obs_loss(obj.model().u_spec, w, obs) - b.raw_of(Term::ObsE)) / s < 1e-12);
    }
    SUBCASE("missing strain payload") {
        data::ObservationSet o = obs;
        o.E.reset();
        CHECK_THROWS_AS(strain_obs_loss(obj.model().u_spec, w, o), std::invalid_argument);
        o.x.resize(3, 0);
        o.u.resize(3, 0);
        CHECK_THROWS_AS(obs_loss(obj.model().u_spec, w, o), std::invalid_argument);
    }
}

TEST_CASE("prior term") {
    const Objective obj = toy_objective();
    Eigen::VectorXd th = perturbed_initial(obj, 2);
    EvalRequest req;
    req.objective = only({Term::Prior});
    req.gradient = false;
    const double raw = obj.evaluate(th, req).breakdown.raw_of(Term::Prior);
    const auto f = std::get<sampling::NetworkField>(obj.stiffness_field(th));
    CHECK(std::abs(raw - prior_loss(f, 10.0, obj.data().pde)) / raw < 1e-12);
    // NN_mu == 0 gives mu == mu_ref == mu_prior.
    th.segment(obj.mu_offset(), obj.mu_size()).setZero();
    CHECK(obj.evaluate(th, req).breakdown.raw_of(Term::Prior) == 0.0);
}

TEST_CASE("breakdown bookkeeping") {
    const Objective obj = toy_objective();
    const Eigen::VectorXd th = perturbed_initial(obj, 12);
    const Evaluation ev = obj.evaluate(th);
    double s = 0.0;
    for (Term t : kAllTerms) {
        CHECK(ev.breakdown.has(t));
        CHECK(ev.breakdown.raw_of(t) >= 0.0);
        CHECK(ev.breakdown.weighted_of(t) == obj.model().weights[t] * ev.breakdown.raw_of(t));
        s += ev.breakdown.weighted_of(t);
    }
    CHECK(ev.breakdown.total == s);
    CHECK(ev.value == s);

    SUBCASE("logging terms do not enter value or gradient") {
        EvalRequest obs_only;
        obs_only.objective = only({Term::Obs, Term::ObsE});
        EvalRequest logged = obs_only;
        logged.logging = all_terms();
        const Evaluation a = obj.evaluate(th, obs_only);
        const Evaluation b = obj.evaluate(th, logged);
        CHECK(a.value == b.value);
        CHECK(a.gradient == b.gradient);
        CHECK(b.breakdown.has(Term::Pde));
        CHECK_FALSE(a.breakdown.has(Term::Pde));
        CHECK(b.gradient.tail(obj.size() - obj.u_size()).isZero(0.0));
    }
    SUBCASE("csv rows") {
        const std::string rows = loss_csv_rows(ev.breakdown, "full");
        CHECK(loss_csv_header() == "epoch,phase,term,raw,weighted,split\n");
        CHECK(std::count(rows.begin(), rows.end(), '\n') == 8);
        CHECK(rows.find("0,full,pde,") != std::string::npos);
        CHECK(rows.find(",train\n") != std::string::npos);
    }
}

TEST_CASE("gradient direction is invariant under common weight scaling") {
    const Objective a = toy_objective();
    Model m = a.model();
    for (Term t : kAllTerms) m.weights[t] *= 37.0;
    const Objective b(m, a.data());
    const Eigen::VectorXd th = perturbed_initial(a, 13);
    const Eigen::VectorXd ga = a.evaluate(th).gradient, gb = b.evaluate(th).gradient;
    CHECK((ga.normalized() - gb.normalized()).norm() < 1e-10);
    CHECK(b.evaluate(th).value == doctest::Approx(37.0 * a.evaluate(th).value).epsilon(1e-12));
}

TEST_CASE("losses are invariant under point permutation") {
    const Objective a = toy_objective();
    Dataset d = a.data();
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(d.pde.cols());
    perm.setIdentity();
    std::reverse(perm.indices().data(), perm.indices().data() + perm.size());
    d.pde = d.pde * perm;
    d.body_force = d.body_force * perm;
    for (auto& f : d.faces) {
        f.x = f.x.rowwise().reverse().eval();
        f.source = f.source.rowwise().reverse().eval();
    }
    const Objective b(a.model(), d);
    const Eigen::VectorXd th = perturbed_initial(a, 14);
    const LossBreakdown ba = a.evaluate(th).breakdown, bb = b.evaluate(th).breakdown;
    for (Term t : kAllTerms) CHECK(bb.raw_of(t) == doctest::Approx(ba.raw_of(t)).epsilon(1e-13));
}

TEST_CASE("results do not depend on the worker count") {
    const Objective obj = toy_objective(ToyOptions{.n_pde = 600, .n_face = 100});
    const Eigen::VectorXd th = perturbed_initial(obj, 15);
    util::set_worker_count(1);
    const Evaluation a = obj.evaluate(th);
    util::set_worker_count(4);
    const Evaluation b = obj.evaluate(th);
    util::set_worker_count(0);
    CHECK(a.value == b.value);
    CHECK(a.gradient == b.gradient);
}

TEST_CASE("inverted states poison the loss") {
    const Objective obj = toy_objective();
    Eigen::VectorXd th = Eigen::VectorXd::Zero(obj.size());
    th.tail(obj.physical_count()).setOnes();
    // u = -2 x: F = -I everywhere.
    const auto offs = net::layer_offsets(obj.model().u_spec);
    const Eigen::Vector3d sc = obj.model().u_spec.input_scale;
    // tanh is close to linear for small inputs, so scale by a small factor and undo it after the last layer.
    const double eps = 1e-4;
    Eigen::Map<Eigen::MatrixXd> W0(th.data() + offs[0].weight, offs[0].fan_out, offs[0].fan_in);
    Eigen::Map<Eigen::MatrixXd> W1(th.data() + offs[1].weight, offs[1].fan_out, offs[1].fan_in);
    Eigen::Map<Eigen::MatrixXd> W2(th.data() + offs[2].weight, offs[2].fan_out, offs[2].fan_in);
    for (int k = 0; k < 3; ++k) W0(k, k) = eps / sc[k];
    for (int k = 0; k < 3; ++k) W1(k, k) = 1.0;
    for (int k = 0; k < 3; ++k) W2(k, k) = -2.0 / eps;
    const Evaluation ev = obj.evaluate(th);
    CHECK(ev.poisoned);
    CHECK(ev.value == std::numeric_limits<double>::infinity());
    CHECK(ev.poison_term == "pde");
    CHECK(ev.poison_point.allFinite());
    CHECK_THROWS_AS(pde_loss(obj, th), std::domain_error);
}

TEST_CASE("error metrics") {
    ToyOptions o;
    o.mode = StiffnessMode::Global;
    o.scalars = {{"mu", 15.0}};
    const Objective obj = toy_objective(o);
    const Eigen::VectorXd th = perturbed_initial(obj, 16);
    const Eigen::Matrix3Xd x = sampling::sample_interior(sampling::SlabGeometry{}, 20, 99);
    const FieldPrediction p = predict_fields(obj, th, x);

    TestTruth t;
    t.x_obs = x;
    t.u = p.u;
    t.E = p.E;
    t.sigma = p.sigma;
    t.parameters = Eigen::Vector2d(15.0 * th[obj.scalar_offset()], 1000.0);
    MetricRecord r = error_metrics(obj, th, t);
    CHECK(r.e_u == 0.0);
    CHECK(r.e_E == 0.0);
    CHECK(r.e_sigma == 0.0);
    CHECK(r.e_mu == 0.0);

    Eigen::VectorXd at15 = th;
    at15[obj.scalar_offset()] = 1.0;
    t.parameters[0] = 10.0;
    r = error_metrics(obj, at15, t);
    CHECK(r.e_mu == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.estimates.front().second == 15.0);

    for (Eigen::Index i = 0; i < 20; ++i) {
        const Mat3d s = Eigen::Map<const Mat3d>(p.sigma.col(i).data());
        CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-8);
    }
    t.u.setZero();
    CHECK_THROWS_AS(error_metrics(obj, th, t), std::domain_error);
}

TEST_CASE("field-form stiffness error") {
    ToyOptions o;
    o.mode = StiffnessMode::TwoRegion;
    const Objective obj = toy_objective(o);
    Eigen::VectorXd th = obj.initial(1);
    th[obj.region_offset()] = 7.5 / 15.0;
    th[obj.region_offset() + 1] = 15.0 / 25.0;
    TestTruth t;
    t.x_obs = sampling::sample_interior(sampling::SlabGeometry{}, 10, 5);
    t.u = Eigen::Matrix3Xd::Ones(3, 10);
    t.x_pde = sampling::sample_interior(sampling::SlabGeometry{}, 50, 6);
    t.mu.resize(50);
    for (Eigen::Index i = 0; i < 50; ++i) t.mu[i] = t.x_pde(0, i) < 5.0 ? 7.5 : 15.0;
    t.mu_max = 15.0;
    t.region = {7.5, 15.0};
    const MetricRecord r = error_metrics(obj, th, t);
    CHECK(r.e_mu < 1e-15);
    CHECK(r.parameters[0].first == "mu_l");
    CHECK(r.parameters[1].second < 1e-15);
    th[obj.region_offset() + 1] = 16.5 / 25.0;
    CHECK(error_metrics(obj, th, t).e_mu > 0.0);
}
