#include "elastipinn/losses/objective.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "elastipinn/autodiff/dual.hpp"
#include "elastipinn/mechanics/kernels.hpp"
#include "elastipinn/mechanics/kinematics.hpp"
#include "elastipinn/network/jet.hpp"
#include "elastipinn/util/parallel.hpp"

namespace elastipinn::loss {

using mech::Mat3d;
using mech::ParamVec;
using mech::Vec3d;

std::string_view stiffness_mode_name(StiffnessMode m) {
    switch (m) {
        case StiffnessMode::Global:
            return "global";
        case StiffnessMode::TwoRegion:
            return "two-region";
        case StiffnessMode::Field:
            return "field";
    }
    return "?";
}

StiffnessMode stiffness_mode_from_name(std::string_view name) {
    if (name == "global") return StiffnessMode::Global;
    if (name == "two-region") return StiffnessMode::TwoRegion;
    if (name == "field") return StiffnessMode::Field;
    throw std::invalid_argument("unknown stiffness mode '" + std::string(name) + "'");
}

void Parametrization::validate(mech::Law law) const {
    std::vector<int> seen;
    for (const auto& s : scalars) {
        const int idx = mech::parameter_index(law, s.name);
        if (idx < 0)
            throw std::invalid_argument("'" + s.name + "' is not a parameter of " + mech::law_name(law));
        for (int k : seen)
            if (k == idx) throw std::invalid_argument("trainable scalar '" + s.name + "' listed twice");
        seen.push_back(idx);
        if (!(s.init > 0.0 && std::isfinite(s.init)))
            throw std::invalid_argument("initial guess of '" + s.name + "' must be > 0");
        if (idx == 0 && mode != StiffnessMode::Global)
            throw std::invalid_argument("'" + s.name + "' is already spatially parametrized");
    }
    if (mode == StiffnessMode::TwoRegion) {
        if (!(region_init[0] > 0.0 && region_init[1] > 0.0))
            throw std::invalid_argument("two-region initial guesses must be > 0");
    }
    if (mode == StiffnessMode::Field) {
        mu_spec.validate();
        if (mu_spec.output_dim != 1) throw std::invalid_argument("stiffness network must have one output");
        if (!(mu_ref > 0.0)) throw std::invalid_argument("mu_ref must be > 0");
    }
}

void Dataset::validate() const {
    if (obs.u.cols() != obs.x.cols()) throw std::invalid_argument("observation x and u differ in length");
    if (obs.E && obs.E->cols() != obs.x.cols())
        throw std::invalid_argument("observation strain block differs in length");
    if (body_force.cols() != 0 && body_force.cols() != pde.cols())
        throw std::invalid_argument("body force must have one column per collocation point");
    for (const auto& f : faces)
        if (f.source.cols() != 0 && f.source.cols() != f.x.cols())
            throw std::invalid_argument("boundary source must have one column per face point");
}

Dataset physical_dataset(data::ObservationSet obs, const sampling::PointSet& pts) {
    Dataset d;
    d.obs = std::move(obs);
    d.pde = pts.pde;
    d.body_force = Eigen::Matrix3Xd::Zero(3, pts.pde.cols());
    for (std::size_t f = 0; f < 6; ++f) {
        d.faces[f].face = pts.faces[f].face;
        d.faces[f].normal = pts.faces[f].normal;
        d.faces[f].x = pts.faces[f].x;
        d.faces[f].source = Eigen::Matrix3Xd::Zero(3, pts.faces[f].x.cols());
    }
    return d;
}

Dataset manufactured_dataset(const data::ManufacturedProblem& mp, data::ObservationSet obs,
                             const sampling::PointSet& pts) {
    Dataset d = physical_dataset(std::move(obs), pts);
    for (Eigen::Index i = 0; i < d.pde.cols(); ++i) d.body_force.col(i) = mp.body_force(d.pde.col(i));
    for (auto& f : d.faces) {
        const bool lateral = sampling::is_lateral(f.face);
        for (Eigen::Index i = 0; i < f.x.cols(); ++i)
            f.source.col(i) = lateral ? mp.neumann_source(f.x.col(i), f.normal) : mp.robin_source(f.x.col(i), f.normal);
    }
    return d;
}

void Model::validate() const {
    mech::validate(material);
    param.validate(material.kind());
    u_spec.validate();
    if (u_spec.output_dim != 3) throw std::invalid_argument("displacement network must have three outputs");
    if (!std::isfinite(pressure)) throw std::invalid_argument("pressure must be finite");
    if (!(robin_k >= 0.0)) throw std::invalid_argument("robin stiffness must be >= 0");
    weights.validate();
    prior.validate();
}

namespace {

// Per point: F = I + grad u and, for order 2, G_j = dF/dx_j from a jet.
Mat3d gradient_at(const net::JetTrace& t, Eigen::Index i) {
    Mat3d F = Mat3d::Identity();
    for (int l = 0; l < 3; ++l) F.col(l) += t.channel(net::d1_channel(l)).col(i);
    return F;
}

std::array<Mat3d, 3> second_at(const net::JetTrace& t, Eigen::Index i) {
    std::array<Mat3d, 3> G;
    for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l)
            G[static_cast<std::size_t>(j)].col(l) = t.channel(net::d2_channel(net::pair_index(l, j))).col(i);
    return G;
}

// d(v . cof(F) n)/dF
Mat3d cofactor_contraction_grad(const Mat3d& F, const Vec3d& v, const Vec3d& n) {
    using D = ad::Dual<double, 9>;
    mech::Mat3<D> Fd;
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) Fd(r, c) = D(F(r, c), r + 3 * c);
    const mech::Mat3<D> C = mech::cofactor3(Fd);
    D s(0.0);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) s += v[a] * C(a, b) * n[b];
    Mat3d g;
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) g(r, c) = s.d[static_cast<std::size_t>(r + 3 * c)];
    return g;
}

struct PointFailure {
    bool failed = false;
    std::string message;
};

bool finite(const Mat3d& m) { return m.allFinite(); }

}  // namespace

Objective::Objective(Model model, Dataset data) : model_(std::move(model)), data_(std::move(data)) {
    model_.validate();
    data_.validate();
    if (data_.body_force.cols() == 0) data_.body_force = Eigen::Matrix3Xd::Zero(3, data_.pde.cols());
    for (auto& f : data_.faces)
        if (f.source.cols() == 0) f.source = Eigen::Matrix3Xd::Zero(3, f.x.cols());
    const auto& p = model_.param;
    n_u_ = model_.u_spec.parameter_count();
    n_mu_ = p.mode == StiffnessMode::Field ? p.mu_spec.parameter_count() : 0;
    n_region_ = p.mode == StiffnessMode::TwoRegion ? 2 : 0;
    n_scalar_ = static_cast<Eigen::Index>(p.scalars.size());
    for (const auto& s : p.scalars) scalar_index_.push_back(mech::parameter_index(model_.material.kind(), s.name));
    const Eigen::VectorXd v = mech::parameters(model_.material);
    base_count_ = static_cast<int>(v.size());
    base_.setZero();
    base_.head(base_count_) = v;
}

bool Objective::applicable(Term t) const {
    switch (t) {
        case Term::Obs:
            return data_.obs.size() > 0;
        case Term::ObsE:
            return data_.obs.size() > 0 && data_.obs.has_strain();
        case Term::Pde:
            return data_.pde.cols() > 0;
        case Term::BcN:
        case Term::BcR:
            for (const auto& f : data_.faces)
                if (f.x.cols() > 0 && sampling::is_lateral(f.face) == (t == Term::BcN)) return true;
            return false;
        case Term::Prior:
            return model_.prior.enabled && model_.param.mode == StiffnessMode::Field && data_.pde.cols() > 0;
        case Term::Tikhonov:
            return true;
    }
    return false;
}

Eigen::VectorXd Objective::initial(std::uint64_t seed) const {
    Eigen::VectorXd theta(size());
    theta.head(n_u_) = net::xavier_init(model_.u_spec, sampling::derive_seed(seed, 1));
    if (n_mu_ > 0) theta.segment(n_u_, n_mu_) = net::xavier_init(model_.param.mu_spec, sampling::derive_seed(seed, 2));
    theta.tail(n_region_ + n_scalar_).setOnes();
    return theta;
}

namespace {

struct MuMap {
    double ref;
    bool softplus;
    // value, first and second derivative with respect to the network output
    void eval(double o, double& m, double& m1, double& m2) const {
        if (!softplus) {
            m = ref * (1.0 + o);
            m1 = ref;
            m2 = 0.0;
            return;
        }
        const double ln2 = std::log(2.0);
        const double sig = 1.0 / (1.0 + std::exp(-o));
        m = ref * (o > 30.0 ? o : std::log1p(std::exp(o))) / ln2;
        m1 = ref * sig / ln2;
        m2 = ref * sig * (1.0 - sig) / ln2;
    }
};

// Material parameters on a point set and what is needed to push their
// adjoints back into theta.
struct ParamField {
    std::vector<ParamVec> p;
    std::vector<std::array<double, 3>> dmu;  // spatial gradient of parameter 0 (field mode)
    std::vector<int> region;
    std::optional<net::JetTrace> trace;
    Eigen::VectorXd m1, m2;
};

}  // namespace

mech::ParamVec Objective::parameters_at(const Eigen::VectorXd& theta, const Eigen::Vector3d& x) const {
    ParamVec p = base_;
    for (Eigen::Index s = 0; s < n_scalar_; ++s)
        p[scalar_index_[static_cast<std::size_t>(s)]] =
            theta[scalar_offset() + s] * model_.param.scalars[static_cast<std::size_t>(s)].init;
    const auto& pz = model_.param;
    if (pz.mode == StiffnessMode::TwoRegion) {
        const int r = sampling::region_of(sampling::TwoRegionField{pz.region_init[0], pz.region_init[1], pz.split}, x);
        p[0] = theta[region_offset() + r] * pz.region_init[static_cast<std::size_t>(r)];
    } else if (pz.mode == StiffnessMode::Field) {
        const Eigen::VectorXd w = theta.segment(n_u_, n_mu_);
        const double o = net::forward(pz.mu_spec, w, x)[0];
        double m, m1, m2;
        MuMap{pz.mu_ref, pz.softplus}.eval(o, m, m1, m2);
        p[0] = m;
    }
    return p;
}

ParameterSnapshot Objective::snapshot(const Eigen::VectorXd& theta) const {
    ParameterSnapshot s;
    ParamVec p = base_;
    for (Eigen::Index k = 0; k < n_scalar_; ++k)
        p[scalar_index_[static_cast<std::size_t>(k)]] =
            theta[scalar_offset() + k] * model_.param.scalars[static_cast<std::size_t>(k)].init;
    s.global = p.head(base_count_);
    if (n_region_ > 0)
        for (int r = 0; r < 2; ++r)
            s.region[static_cast<std::size_t>(r)] =
                theta[region_offset() + r] * model_.param.region_init[static_cast<std::size_t>(r)];
    return s;
}

sampling::StiffnessField Objective::stiffness_field(const Eigen::VectorXd& theta) const {
    const auto& pz = model_.param;
    const ParameterSnapshot s = snapshot(theta);
    switch (pz.mode) {
        case StiffnessMode::TwoRegion:
            return sampling::TwoRegionField{s.region[0], s.region[1], pz.split};
        case StiffnessMode::Field:
            return sampling::NetworkField{pz.mu_spec, theta.segment(n_u_, n_mu_), pz.mu_ref, pz.softplus};
        case StiffnessMode::Global:
            break;
    }
    return sampling::ConstantField{s.global[0]};
}

namespace {

class Evaluator {
public:
    Evaluator(const Objective& obj, const Eigen::VectorXd& theta, const EvalRequest& req,
              const std::vector<int>& scalar_index, const ParamVec& base)
        : obj_(obj), m_(obj.model()), d_(obj.data()), theta_(theta), req_(req), scalar_index_(scalar_index) {
        ev_.gradient = req.gradient ? Eigen::VectorXd::Zero(obj.size()) : Eigen::VectorXd();
        base_ = base;
        for (Eigen::Index s = 0; s < obj.scalar_count(); ++s)
            base_[scalar_index_[static_cast<std::size_t>(s)]] =
                theta[obj.scalar_offset() + s] * m_.param.scalars[static_cast<std::size_t>(s)].init;
        w_u_ = theta.head(obj.u_size());
        if (obj.mu_size() > 0) w_mu_ = theta.segment(obj.mu_offset(), obj.mu_size());
    }

    Evaluation run() {
        tikhonov();
        observations();
        interior();
        boundary();
        ev_.breakdown.finalize();
        ev_.value = 0.0;
        for (Term t : kAllTerms)
            if (req_.objective[static_cast<std::size_t>(term_index(t))] && ev_.breakdown.has(t))
                ev_.value += ev_.breakdown.weighted_of(t);
        if (ev_.poisoned || !std::isfinite(ev_.value)) {
            if (!ev_.poisoned) {
                ev_.poisoned = true;
                ev_.poison_term = "total";
                ev_.poison_message = "non-finite loss value";
            }
            ev_.value = std::numeric_limits<double>::infinity();
        }
        return std::move(ev_);
    }

private:
    bool wanted(Term t) const {
        const auto i = static_cast<std::size_t>(term_index(t));
        return (req_.objective[i] || req_.logging[i]) && obj_.applicable(t);
    }
    bool differentiate(Term t) const {
        return req_.gradient && req_.objective[static_cast<std::size_t>(term_index(t))] && obj_.applicable(t);
    }
    double weight(Term t) const { return m_.weights[t]; }

    void poison(Term t, const Eigen::Vector3d& x, const std::string& msg) {
        if (ev_.poisoned) return;
        ev_.poisoned = true;
        ev_.poison_term = std::string(term_name(t));
        ev_.poison_point = x;
        ev_.poison_message = msg;
    }

    void tikhonov() {
        if (!wanted(Term::Tikhonov)) return;
        ev_.breakdown.set(Term::Tikhonov, w_u_.squaredNorm(), weight(Term::Tikhonov));
        if (differentiate(Term::Tikhonov)) ev_.gradient.head(obj_.u_size()) += 2.0 * weight(Term::Tikhonov) * w_u_;
    }

    void observations() {
        const bool want_u = wanted(Term::Obs), want_e = wanted(Term::ObsE);
        if (!want_u && !want_e) return;
        const auto& obs = d_.obs;
        const Eigen::Index n = obs.size();
        const net::JetTrace t = net::jet_forward(m_.u_spec, w_u_, obs.x, want_e ? 1 : 0);
        Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(3, t.output.cols());
        bool any = false;
        if (want_u) {
            const Eigen::Matrix3Xd r = obs.u - t.channel(0);
            const double raw = r.squaredNorm() / static_cast<double>(n);
            ev_.breakdown.set(Term::Obs, raw, weight(Term::Obs));
            if (differentiate(Term::Obs)) {
                adj.middleCols(0, n) -= (2.0 * weight(Term::Obs) / static_cast<double>(n)) * r;
                any = true;
            }
        }
        if (want_e) {
            const bool grad = differentiate(Term::ObsE);
            const double c = 2.0 * weight(Term::ObsE) / static_cast<double>(n);
            double sum = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const Mat3d F = gradient_at(t, i);
                const Mat3d D = obs.strain(i) - mech::green_lagrange(F);
                sum += D.squaredNorm();
                if (grad) {
                    const Mat3d dF = -c * F * D;
                    for (int l = 0; l < 3; ++l) adj.col(net::d1_channel(l) * n + i) += dF.col(l);
                }
            }
            ev_.breakdown.set(Term::ObsE, sum / static_cast<double>(n), weight(Term::ObsE));
            any = any || grad;
        }
        if (any) net::jet_backward(m_.u_spec, w_u_, t, adj, ev_.gradient.head(obj_.u_size()));
    }

    // Material parameters at every point of X; order 1 adds d(param 0)/dx
    // in field mode.
    ParamField params_on(const Eigen::Matrix3Xd& X, int order) const {
        ParamField pf;
        const Eigen::Index n = X.cols();
        pf.p.assign(static_cast<std::size_t>(n), base_);
        pf.dmu.assign(static_cast<std::size_t>(n), {0.0, 0.0, 0.0});
        const auto& pz = m_.param;
        if (pz.mode == StiffnessMode::TwoRegion) {
            const sampling::TwoRegionField split{pz.region_init[0], pz.region_init[1], pz.split};
            pf.region.resize(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) {
                const int r = sampling::region_of(split, X.col(i));
                pf.region[static_cast<std::size_t>(i)] = r;
                pf.p[static_cast<std::size_t>(i)][0] =
                    theta_[obj_.region_offset() + r] * pz.region_init[static_cast<std::size_t>(r)];
            }
        } else if (pz.mode == StiffnessMode::Field) {
            pf.trace = net::jet_forward(pz.mu_spec, w_mu_, X, order);
            pf.m1.resize(n);
            pf.m2.resize(n);
            const MuMap map{pz.mu_ref, pz.softplus};
            for (Eigen::Index i = 0; i < n; ++i) {
                double m, m1, m2;
                map.eval(pf.trace->channel(0)(0, i), m, m1, m2);
                pf.p[static_cast<std::size_t>(i)][0] = m;
                pf.m1[i] = m1;
                pf.m2[i] = m2;
                if (order >= 1)
                    for (int j = 0; j < 3; ++j)
                        pf.dmu[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                            m1 * pf.trace->channel(net::d1_channel(j))(0, i);
            }
        }
        return pf;
    }

    // Pushes per-point parameter adjoints (and, for order 1, adjoints of the
    // parameter gradients) back into theta. Sums run in point order.
    void backprop_params(const ParamField& pf, const std::vector<ParamVec>& dp,
                         const std::vector<std::array<double, 3>>* ddmu) {
        const Eigen::Index n = static_cast<Eigen::Index>(dp.size());
        for (Eigen::Index s = 0; s < obj_.scalar_count(); ++s) {
            const int idx = scalar_index_[static_cast<std::size_t>(s)];
            double g = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) g += dp[static_cast<std::size_t>(i)][idx];
            ev_.gradient[obj_.scalar_offset() + s] += g * m_.param.scalars[static_cast<std::size_t>(s)].init;
        }
        const auto& pz = m_.param;
        if (pz.mode == StiffnessMode::TwoRegion) {
            double g[2] = {0.0, 0.0};
            for (Eigen::Index i = 0; i < n; ++i)
                g[pf.region[static_cast<std::size_t>(i)]] += dp[static_cast<std::size_t>(i)][0];
            for (int r = 0; r < 2; ++r)
                ev_.gradient[obj_.region_offset() + r] += g[r] * pz.region_init[static_cast<std::size_t>(r)];
        } else if (pz.mode == StiffnessMode::Field) {
            const net::JetTrace& t = *pf.trace;
            Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(1, t.output.cols());
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto si = static_cast<std::size_t>(i);
                double a0 = dp[si][0] * pf.m1[i];
                if (ddmu) {
                    for (int j = 0; j < 3; ++j) {
                        const double dd = (*ddmu)[si][static_cast<std::size_t>(j)];
                        a0 += dd * pf.m2[i] * t.channel(net::d1_channel(j))(0, i);
                        adj(0, net::d1_channel(j) * n + i) = dd * pf.m1[i];
                    }
                }
                adj(0, i) = a0;
            }
            net::jet_backward(pz.mu_spec, w_mu_, t, adj, ev_.gradient.segment(obj_.mu_offset(), obj_.mu_size()));
        }
    }

    void interior() {
        const bool want_pde = wanted(Term::Pde), want_prior = wanted(Term::Prior);
        if (!want_pde && !want_prior) return;
        const Eigen::Index n = d_.pde.cols();
        const bool grad_pde = differentiate(Term::Pde), grad_prior = differentiate(Term::Prior);
        const ParamField pf = params_on(d_.pde, want_pde ? 1 : 0);

        std::vector<ParamVec> dp(static_cast<std::size_t>(n), ParamVec::Zero());
        std::vector<std::array<double, 3>> ddmu(static_cast<std::size_t>(n), {0.0, 0.0, 0.0});

        if (want_pde) {
            const net::JetTrace t = net::jet_forward(m_.u_spec, w_u_, d_.pde, 2);
            const bool stress_norm = m_.pde_form == PdeForm::StressNorm;
            const double c = 2.0 * weight(Term::Pde) / static_cast<double>(n);
            std::vector<double> sq(static_cast<std::size_t>(n), 0.0);
            std::vector<PointFailure> fail(static_cast<std::size_t>(n));
            std::vector<Mat3d> dF(grad_pde ? static_cast<std::size_t>(n) : 0);
            std::vector<std::array<Mat3d, 3>> dG(grad_pde && !stress_norm ? static_cast<std::size_t>(n) : 0);
            const mech::Law law = m_.material.kind();
            util::parallel_for(static_cast<std::size_t>(n), [&](std::size_t b, std::size_t e) {
                for (std::size_t i = b; i < e; ++i) {
                    const auto ii = static_cast<Eigen::Index>(i);
                    mech::PointState s;
                    s.F = gradient_at(t, ii);
                    s.x = d_.pde.col(ii);
                    s.p = pf.p[i];
                    for (int j = 0; j < 3; ++j) s.dp[static_cast<std::size_t>(j)][0] = pf.dmu[i][static_cast<std::size_t>(j)];
                    const double J = mech::det3(s.F);
                    if (!(J >= mech::kMinJacobian)) {
                        fail[i] = {true, "J = " + std::to_string(J) + " below admissible minimum"};
                        continue;
                    }
                    if (stress_norm) {
                        const mech::ContractionGrad cg0 = mech::contraction_grad(law, m_.material.fiber, s, Mat3d::Zero());
                        sq[i] = cg0.P.squaredNorm();
                        if (!finite(cg0.P)) fail[i] = {true, "non-finite stress"};
                        if (grad_pde && !fail[i].failed) {
                            const mech::ContractionGrad cg = mech::contraction_grad(law, m_.material.fiber, s, c * cg0.P);
                            dF[i] = cg.dF;
                            dp[i] = cg.dp;
                        }
                        continue;
                    }
                    s.G = second_at(t, ii);
                    const mech::StressDivergence sd = mech::stress_divergence(law, m_.material.fiber, s);
                    const Vec3d r = sd.div + d_.body_force.col(ii);
                    sq[i] = r.squaredNorm();
                    if (!r.allFinite()) {
                        fail[i] = {true, "non-finite residual"};
                        continue;
                    }
                    if (grad_pde) {
                        const mech::DivergenceAdjoint a = mech::divergence_adjoint(law, m_.material.fiber, s, c * r);
                        dF[i] = a.dF;
                        dG[i] = a.dG;
                        dp[i] = a.dp;
                        for (int j = 0; j < 3; ++j) ddmu[i][static_cast<std::size_t>(j)] = a.ddp[static_cast<std::size_t>(j)][0];
                    }
                }
            });
            double sum = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto si = static_cast<std::size_t>(i);
                if (fail[si].failed) {
                    poison(Term::Pde, d_.pde.col(i), fail[si].message);
                    continue;
                }
                sum += sq[si];
            }
            ev_.breakdown.set(Term::Pde, ev_.poisoned ? std::numeric_limits<double>::infinity() : sum / static_cast<double>(n),
                              weight(Term::Pde));
            if (grad_pde && !ev_.poisoned) {
                Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(3, t.output.cols());
                for (Eigen::Index i = 0; i < n; ++i) {
                    const auto si = static_cast<std::size_t>(i);
                    for (int l = 0; l < 3; ++l) adj.col(net::d1_channel(l) * n + i) += dF[si].col(l);
                    if (!stress_norm)
                        for (int j = 0; j < 3; ++j)
                            for (int l = 0; l < 3; ++l)
                                adj.col(net::d2_channel(net::pair_index(l, j)) * n + i) +=
                                    dG[si][static_cast<std::size_t>(j)].col(l);
                }
                net::jet_backward(m_.u_spec, w_u_, t, adj, ev_.gradient.head(obj_.u_size()));
            }
        }

        if (want_prior) {
            const double c = 2.0 * weight(Term::Prior) / static_cast<double>(n);
            double sum = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double r = m_.prior.mu - pf.p[static_cast<std::size_t>(i)][0];
                sum += r * r;
                if (grad_prior) dp[static_cast<std::size_t>(i)][0] -= c * r;
            }
            ev_.breakdown.set(Term::Prior, sum / static_cast<double>(n), weight(Term::Prior));
        }

        if ((grad_pde || grad_prior) && !ev_.poisoned)
            backprop_params(pf, dp, pf.trace && pf.trace->order >= 1 ? &ddmu : nullptr);
    }

    void boundary() {
        const bool want_n = wanted(Term::BcN), want_r = wanted(Term::BcR);
        if (!want_n && !want_r) return;
        // All face points of the requested kinds in one jet.
        std::vector<int> faces;
        Eigen::Index total = 0;
        for (int f = 0; f < 6; ++f) {
            const auto& fd = d_.faces[static_cast<std::size_t>(f)];
            if (fd.x.cols() == 0) continue;
            const bool lateral = sampling::is_lateral(fd.face);
            if ((lateral && want_n) || (!lateral && want_r)) {
                faces.push_back(f);
                total += fd.x.cols();
            }
        }
        Eigen::Matrix3Xd X(3, total);
        std::vector<Eigen::Index> start;
        {
            Eigen::Index k = 0;
            for (int f : faces) {
                const auto& fd = d_.faces[static_cast<std::size_t>(f)];
                start.push_back(k);
                X.middleCols(k, fd.x.cols()) = fd.x;
                k += fd.x.cols();
            }
        }
        const net::JetTrace t = net::jet_forward(m_.u_spec, w_u_, X, 1);
        const ParamField pf = params_on(X, 0);
        const mech::Law law = m_.material.kind();

        std::vector<double> sq(static_cast<std::size_t>(total), 0.0);
        std::vector<PointFailure> fail(static_cast<std::size_t>(total));
        std::vector<Mat3d> dF(static_cast<std::size_t>(total), Mat3d::Zero());
        std::vector<Vec3d> du(static_cast<std::size_t>(total), Vec3d::Zero());
        std::vector<ParamVec> dp(static_cast<std::size_t>(total), ParamVec::Zero());
        std::vector<bool> grad_face(faces.size());

        for (std::size_t fi = 0; fi < faces.size(); ++fi) {
            const auto& fd = d_.faces[static_cast<std::size_t>(faces[fi])];
            const bool lateral = sampling::is_lateral(fd.face);
            const Term term = lateral ? Term::BcN : Term::BcR;
            const bool grad = differentiate(term);
            grad_face[fi] = grad;
            const Eigen::Index nf = fd.x.cols();
            const double c = 2.0 * weight(term) / static_cast<double>(nf);
            const Vec3d nrm = fd.normal;
            util::parallel_for(static_cast<std::size_t>(nf), [&](std::size_t b, std::size_t e) {
                for (std::size_t q = b; q < e; ++q) {
                    const auto li = static_cast<Eigen::Index>(q);
                    const Eigen::Index gi = start[fi] + li;
                    const auto sg = static_cast<std::size_t>(gi);
                    mech::PointState s;
                    s.F = gradient_at(t, gi);
                    s.x = X.col(gi);
                    s.p = pf.p[sg];
                    const double J = mech::det3(s.F);
                    if (!(J >= mech::kMinJacobian)) {
                        fail[sg] = {true, "J = " + std::to_string(J) + " below admissible minimum"};
                        continue;
                    }
                    const mech::ContractionGrad cg0 = mech::contraction_grad(law, m_.material.fiber, s, Mat3d::Zero());
                    Vec3d rho = cg0.P * nrm - fd.source.col(li);
                    if (lateral)
                        rho += m_.pressure * (mech::cofactor3(s.F) * nrm);
                    else
                        rho += m_.robin_k * t.channel(0).col(gi);
                    sq[sg] = rho.squaredNorm();
                    if (!rho.allFinite()) {
                        fail[sg] = {true, "non-finite traction residual"};
                        continue;
                    }
                    if (!grad) continue;
                    const Vec3d v = c * rho;
                    const mech::ContractionGrad cg = mech::contraction_grad(law, m_.material.fiber, s, v * nrm.transpose());
                    dF[sg] = cg.dF;
                    dp[sg] = cg.dp;
                    if (lateral)
                        dF[sg] += m_.pressure * cofactor_contraction_grad(s.F, v, nrm);
                    else
                        du[sg] = m_.robin_k * v;
                }
            });
        }

        double sum_n = 0.0, sum_r = 0.0;
        bool any_grad = false;
        for (std::size_t fi = 0; fi < faces.size(); ++fi) {
            const auto& fd = d_.faces[static_cast<std::size_t>(faces[fi])];
            const bool lateral = sampling::is_lateral(fd.face);
            double s = 0.0;
            for (Eigen::Index li = 0; li < fd.x.cols(); ++li) {
                const auto sg = static_cast<std::size_t>(start[fi] + li);
                if (fail[sg].failed) {
                    poison(lateral ? Term::BcN : Term::BcR, X.col(start[fi] + li), fail[sg].message);
                    continue;
                }
                s += sq[sg];
            }
            (lateral ? sum_n : sum_r) += s / static_cast<double>(fd.x.cols());
            any_grad = any_grad || grad_face[fi];
        }
        const double inf = std::numeric_limits<double>::infinity();
        if (want_n) ev_.breakdown.set(Term::BcN, ev_.poisoned ? inf : sum_n, weight(Term::BcN));
        if (want_r) ev_.breakdown.set(Term::BcR, ev_.poisoned ? inf : sum_r, weight(Term::BcR));
        if (!any_grad || ev_.poisoned) return;

        Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(3, t.output.cols());
        for (Eigen::Index i = 0; i < total; ++i) {
            const auto si = static_cast<std::size_t>(i);
            adj.col(i) += du[si];
            for (int l = 0; l < 3; ++l) adj.col(net::d1_channel(l) * total + i) += dF[si].col(l);
        }
        net::jet_backward(m_.u_spec, w_u_, t, adj, ev_.gradient.head(obj_.u_size()));
        backprop_params(pf, dp, nullptr);
    }

    const Objective& obj_;
    const Model& m_;
    const Dataset& d_;
    const Eigen::VectorXd& theta_;
    const EvalRequest& req_;
    const std::vector<int>& scalar_index_;
    ParamVec base_;
    Eigen::VectorXd w_u_, w_mu_;
    Evaluation ev_;
};

}  // namespace

Evaluation Objective::evaluate(const Eigen::VectorXd& theta, const EvalRequest& req) const {
    if (theta.size() != size())
        throw std::invalid_argument("parameter vector has length " + std::to_string(theta.size()) + ", expected " +
                                    std::to_string(size()));
    return Evaluator(*this, theta, req, scalar_index_, base_).run();
}

double obs_loss(const net::MlpSpec& spec, const Eigen::VectorXd& w, const data::ObservationSet& obs, double weight) {
    if (obs.size() == 0) throw std::invalid_argument("observation set is empty");
    double s = 0.0;
    for (Eigen::Index i = 0; i < obs.size(); ++i)
        s += (obs.u.col(i) - net::forward(spec, w, Eigen::Vector3d(obs.x.col(i)))).squaredNorm();
    return weight * s / static_cast<double>(obs.size());
}

double strain_obs_loss(const net::MlpSpec& spec, const Eigen::VectorXd& w, const data::ObservationSet& obs,
                       double weight) {
    if (!obs.has_strain()) throw std::invalid_argument("observation set carries no strain data");
    if (obs.size() == 0) throw std::invalid_argument("observation set is empty");
    using D = ad::Dual<double, 3>;
    double s = 0.0;
    const Eigen::Matrix<D, Eigen::Dynamic, 1> wd = w.cast<D>();
    for (Eigen::Index i = 0; i < obs.size(); ++i) {
        mech::Vec3<D> x;
        for (int j = 0; j < 3; ++j) x[j] = D(obs.x(j, i), j);
        const auto u = net::forward<D>(spec, wd.data(), x);
        Mat3d F = Mat3d::Identity();
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) F(k, l) += u[k].d[static_cast<std::size_t>(l)];
        s += (obs.strain(i) - 0.5 * (F.transpose() * F - Mat3d::Identity())).squaredNorm();
    }
    return weight * s / static_cast<double>(obs.size());
}

double prior_loss(const sampling::NetworkField& mu_net, double mu_prior, const Eigen::Matrix3Xd& x, double weight) {
    if (x.cols() == 0) return 0.0;
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        const double r = mu_prior - sampling::stiffness_at(mu_net, x.col(i));
        s += r * r;
    }
    return weight * s / static_cast<double>(x.cols());
}

double tikhonov(const Eigen::VectorXd& w, double weight) { return weight * w.squaredNorm(); }

namespace {
double single_term(const Objective& obj, const Eigen::VectorXd& theta, Term t) {
    EvalRequest req;
    req.objective = only({t});
    req.gradient = false;
    const Evaluation ev = obj.evaluate(theta, req);
    if (ev.poisoned) throw std::domain_error(ev.poison_term + ": " + ev.poison_message);
    return ev.breakdown.weighted_of(t);
}
}  // namespace

double pde_loss(const Objective& obj, const Eigen::VectorXd& theta) { return single_term(obj, theta, Term::Pde); }
double bc_neumann_loss(const Objective& obj, const Eigen::VectorXd& theta) {
    return single_term(obj, theta, Term::BcN);
}
double bc_robin_loss(const Objective& obj, const Eigen::VectorXd& theta) { return single_term(obj, theta, Term::BcR); }

std::string loss_csv_header() { return "epoch,phase,term,raw,weighted,split\n"; }

std::string loss_csv_rows(const LossBreakdown& b, const std::string& phase) {
    std::string out;
    char buf[160];
    for (Term t : kAllTerms) {
        if (!b.has(t)) continue;
        std::snprintf(buf, sizeof buf, "%ld,%s,%s,%.17g,%.17g,%s\n", b.epoch, phase.c_str(),
                      std::string(term_name(t)).c_str(), b.raw_of(t), b.weighted_of(t), b.split.c_str());
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "%ld,%s,total,%.17g,%.17g,%s\n", b.epoch, phase.c_str(), b.total, b.total,
                  b.split.c_str());
    out += buf;
    return out;
}

}  // namespace elastipinn::loss
