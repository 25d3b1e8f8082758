#include "elastipinn/optim/train.hpp"

#include <cmath>
#include <stdexcept>

namespace elastipinn::optim {

using loss::EvalRequest;
using loss::Evaluation;
using loss::Term;
using loss::TermMask;

void Schedule::validate() const {
    for (long v : {pre_adam, pre_bfgs_max, adam, bfgs, adam_only_epochs})
        if (v < 0) throw std::invalid_argument("schedule: epoch counts must be >= 0");
    if (!(pre_tol > 0.0)) throw std::invalid_argument("schedule: convergence tolerance must be > 0");
    adam_cfg.validate();
    bfgs_cfg.validate();
}

namespace {

struct Phase {
    std::string name;
    bool full = true;     // full objective and every unknown; else data terms and w_u
    bool bfgs = false;
    long iterations = 0;  // Adam steps or BFGS iteration cap
    double tol = 0.0;     // BFGS gradient tolerance (0 keeps the configured one)
};

class Trainer {
public:
    Trainer(const loss::Objective& obj, const Schedule& sch, const TrainOptions& opt, const loss::Objective* test)
        : obj_(obj), sch_(sch), opt_(opt), test_(test) {}

    TrainingRecord run(const Eigen::VectorXd& theta0) {
        sch_.validate();
        if (theta0.size() != obj_.size()) throw std::invalid_argument("train: initial parameters have wrong length");
        rec_.theta = theta0;
        rec_.best_theta = theta0;
        last_finite_ = theta0;
        std::vector<Phase> phases;
        if (sch_.adam_only) {
            phases.push_back({"adam-only", true, false, sch_.adam_only_epochs, 0.0});
        } else {
            phases.push_back({"pretrain-adam", false, false, sch_.pre_adam, 0.0});
            phases.push_back({"pretrain-bfgs", false, true, sch_.pre_bfgs_max, sch_.pre_tol});
            phases.push_back({"adam", true, false, sch_.adam, 0.0});
            phases.push_back({"bfgs", true, true, sch_.bfgs, 0.0});
        }
        for (const Phase& p : phases) {
            if (p.iterations == 0) continue;
            PhaseRecord pr{p.name, epoch_, epoch_, ""};
            pr.stop_reason = p.bfgs ? run_bfgs(p) : run_adam(p);
            pr.end_epoch = epoch_;
            rec_.phases.push_back(pr);
            if (rec_.aborted) break;
        }
        if (!rec_.phases.empty() && !rec_.aborted) {
            const Phase* last = nullptr;
            for (const Phase& p : phases)
                if (p.name == rec_.phases.back().name) last = &p;
            log_state(rec_.theta, *last, nullptr, true);
            emit_checkpoint("final", last->name, last_value_, nullptr, 0);
        }
        if (rec_.best_epoch >= 0) emit_checkpoint("best", "best", rec_.best_value, nullptr, 0);
        rec_.epochs = epoch_;
        return std::move(rec_);
    }

private:
    static TermMask data_terms() { return loss::only({Term::Obs, Term::ObsE}); }

    Eigen::Index free_count(const Phase& p) const { return p.full ? obj_.size() : obj_.u_size(); }

    Evaluation evaluate(const Eigen::VectorXd& theta, const Phase& p, bool gradient, bool log_all) {
        EvalRequest req;
        req.objective = p.full ? loss::all_terms() : data_terms();
        req.logging = log_all ? loss::all_terms() : loss::no_terms();
        req.gradient = gradient;
        ++rec_.evaluations;
        return obj_.evaluate(theta, req);
    }

    bool due(long every) const { return every > 0 && epoch_ % every == 0; }

    bool covers_all(const loss::LossBreakdown& b) const {
        for (Term t : loss::kAllTerms)
            if (obj_.applicable(t) && !b.has(t)) return false;
        return true;
    }

    // Logs the state reached at the current epoch once per phase. `ev` is an
    // evaluation at theta with the phase objective (may be null).
    void log_state(const Eigen::VectorXd& theta, const Phase& p, const Evaluation* ev, bool force = false) {
        if (logged_epoch_ == epoch_ && logged_phase_ == p.name) return;
        logged_epoch_ = epoch_;
        logged_phase_ = p.name;
        if (opt_.on_state) opt_.on_state(epoch_, p.name, theta);
        const bool full_log = force || due(opt_.log_every);
        loss::LossBreakdown b;
        if (ev && (!full_log || covers_all(ev->breakdown)))
            b = ev->breakdown;
        else
            b = evaluate(theta, p, false, true).breakdown;
        b.epoch = epoch_;
        b.split = "train";
        emit(b, p.name);
        if (test_ && (force || due(opt_.test_every))) {
            EvalRequest req;
            req.gradient = false;
            ++rec_.evaluations;
            loss::LossBreakdown tb = test_->evaluate(theta, req).breakdown;
            tb.epoch = epoch_;
            tb.split = "test";
            emit(tb, p.name);
        }
    }

    void emit(const loss::LossBreakdown& b, const std::string& phase) {
        if (opt_.on_log) opt_.on_log(b, phase);
        if (opt_.keep_log) rec_.log.emplace_back(phase, b);
    }

    void emit_checkpoint(const std::string& kind, const std::string& phase, double value, const AdamState* adam,
                         long bfgs_iter) {
        if (!opt_.on_checkpoint) return;
        Checkpoint c;
        c.kind = kind;
        c.epoch = epoch_;
        c.phase = phase;
        c.value = value;
        c.theta = kind == "best" ? rec_.best_theta : (kind == "last-finite" ? last_finite_ : rec_.theta);
        if (kind == "best") c.epoch = rec_.best_epoch;
        if (adam) c.adam = *adam;
        c.bfgs_iterations = bfgs_iter;
        opt_.on_checkpoint(c);
    }

    void track_best(const Phase& p, double value, const Eigen::VectorXd& theta) {
        if (!p.full || !(value < rec_.best_value)) return;
        rec_.best_value = value;
        rec_.best_theta = theta;
        rec_.best_epoch = epoch_;
    }

    void abort(const Evaluation& ev, const std::string& phase) {
        rec_.aborted = true;
        rec_.abort_epoch = epoch_;
        rec_.abort_term = ev.poison_term;
        rec_.abort_point = ev.poison_point;
        rec_.theta = last_finite_;
        rec_.abort_message = "poisoned loss in phase " + phase + " at epoch " + std::to_string(epoch_) +
                             ", term " + ev.poison_term + ": " + ev.poison_message;
        emit_checkpoint("last-finite", phase, last_value_, nullptr, 0);
    }

    void periodic(const Phase& p, double value, const AdamState* adam, long bfgs_iter) {
        if (opt_.checkpoint_every <= 0 || epoch_ == 0 || epoch_ % opt_.checkpoint_every != 0) return;
        if (epoch_ == last_periodic_) return;
        last_periodic_ = epoch_;
        emit_checkpoint("periodic", p.name, value, adam, bfgs_iter);
    }

    std::string run_adam(const Phase& p) {
        const Eigen::Index n = free_count(p);
        AdamState st(n, sch_.adam_cfg);
        for (long k = 0; k < p.iterations; ++k) {
            const bool full_log = due(opt_.log_every);
            const Evaluation ev = evaluate(rec_.theta, p, true, full_log && !p.full);
            if (ev.poisoned) {
                abort(ev, p.name);
                return "aborted";
            }
            last_value_ = ev.value;
            last_finite_ = rec_.theta;
            track_best(p, ev.value, rec_.theta);
            log_state(rec_.theta, p, &ev);
            periodic(p, ev.value, &st, 0);
            try {
                adam_step(st, rec_.theta.head(n), ev.gradient.head(n));
            } catch (const std::domain_error&) {
                Evaluation bad = ev;
                bad.poison_term = "gradient";
                bad.poison_message = "non-finite gradient";
                abort(bad, p.name);
                return "aborted";
            }
            ++epoch_;
        }
        return "iterations";
    }

    std::string run_bfgs(const Phase& p) {
        const Eigen::Index n = free_count(p);
        BfgsConfig cfg = sch_.bfgs_cfg;
        if (p.tol > 0.0) cfg.tol_grad = p.tol;
        BfgsState st(cfg);
        Eigen::VectorXd x = rec_.theta.head(n);
        Eigen::VectorXd work = rec_.theta;
        // Evaluations of the current step, to recover the accepted point's breakdown.
        std::vector<Evaluation> trials;
        Oracle oracle = [&](const Eigen::VectorXd& y, Eigen::VectorXd& g) {
            work.head(n) = y;
            Evaluation ev = evaluate(work, p, true, false);
            g = ev.gradient.head(n);
            const double v = ev.poisoned ? std::numeric_limits<double>::infinity() : ev.value;
            trials.push_back(std::move(ev));
            return v;
        };
        int failures = 0;
        std::string reason = "iterations";
        for (long k = 0; k < p.iterations; ++k) {
            trials.clear();
            const bool first = !st.started;
            BfgsStep step;
            try {
                step = bfgs_step(st, x, oracle);
            } catch (const std::domain_error&) {
                abort(trials.empty() ? Evaluation{} : trials.front(), p.name);
                return "aborted";
            }
            if (first) {
                const Evaluation& e0 = trials.front();
                last_value_ = e0.value;
                track_best(p, e0.value, rec_.theta);
                log_state(rec_.theta, p, &e0);
                periodic(p, e0.value, nullptr, 0);
                trials.erase(trials.begin());
            }
            if (step.converged && step.step == 0.0) {
                reason = "converged: " + step.diagnostic;
                break;
            }
            if (step.failed) {
                ++failures;
                st.reset_curvature();
                if (step.step == 0.0) {
                    if (failures >= 2) {
                        reason = "stopped: " + step.diagnostic;
                        break;
                    }
                    continue;
                }
            } else {
                failures = 0;
            }
            rec_.theta.head(n) = x;
            last_finite_ = rec_.theta;
            ++epoch_;
            last_value_ = step.f;
            track_best(p, step.f, rec_.theta);
            const Evaluation* accepted = nullptr;
            for (const auto& t : trials)
                if (!t.poisoned && t.value == step.f) accepted = &t;
            log_state(rec_.theta, p, accepted);
            periodic(p, step.f, nullptr, st.iter);
            if (step.converged) {
                reason = "converged: " + step.diagnostic;
                break;
            }
        }
        return reason;
    }

    const loss::Objective& obj_;
    const Schedule& sch_;
    const TrainOptions& opt_;
    const loss::Objective* test_;
    TrainingRecord rec_;
    long epoch_ = 0;
    long last_periodic_ = -1;
    long logged_epoch_ = -1;
    std::string logged_phase_;
    double last_value_ = std::nan("");
    Eigen::VectorXd last_finite_;
};

}  // namespace

TrainingRecord train(const loss::Objective& obj, const Eigen::VectorXd& theta0, const Schedule& schedule,
                     const TrainOptions& options, const loss::Objective* test) {
    return Trainer(obj, schedule, options, test).run(theta0);
}

}  // namespace elastipinn::optim
