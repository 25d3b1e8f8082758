#include "elastipinn/optim/bfgs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace elastipinn::optim {

void BfgsConfig::validate() const {
    if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw std::invalid_argument("bfgs: need 0 < c1 < c2 < 1");
    if (!(tol_grad > 0.0)) throw std::invalid_argument("bfgs: tol_grad must be > 0");
    if (!(tol_f >= 0.0)) throw std::invalid_argument("bfgs: tol_f must be >= 0");
    if (max_linesearch < 1) throw std::invalid_argument("bfgs: max_linesearch must be >= 1");
    if (history < 1) throw std::invalid_argument("bfgs: history must be >= 1");
}

void BfgsState::reset_curvature() {
    H.resize(0, 0);
    S.clear();
    Y.clear();
    scaled = false;
}

namespace {

constexpr double kCurvatureFloor = 1e-12;

struct Trial {
    double a = 0.0, f = 0.0, dphi = 0.0;
    Eigen::VectorXd g;
    bool finite() const { return std::isfinite(f) && std::isfinite(dphi); }
};

// Minimizer of the cubic through (a0, f0, d0) and (a1, f1, d1), or NaN.
double cubic_min(double a0, double f0, double d0, double a1, double f1, double d1) {
    const double t1 = d0 + d1 - 3.0 * (f0 - f1) / (a0 - a1);
    const double disc = t1 * t1 - d0 * d1;
    if (!(disc >= 0.0)) return std::nan("");
    const double t2 = std::copysign(std::sqrt(disc), a1 - a0);
    const double den = d1 - d0 + 2.0 * t2;
    if (den == 0.0) return std::nan("");
    return a1 - (a1 - a0) * (d1 + t2 - t1) / den;
}

Eigen::VectorXd direction(const BfgsState& s, const Eigen::VectorXd& g) {
    if (s.dense) {
        if (s.H.size() == 0) return -g;
        return -(s.H * g);
    }
    const std::size_t k = s.S.size();
    if (k == 0) return -g;
    Eigen::VectorXd q = g;
    std::vector<double> alpha(k), rho(k);
    for (std::size_t i = k; i-- > 0;) {
        rho[i] = 1.0 / s.Y[i].dot(s.S[i]);
        alpha[i] = rho[i] * s.S[i].dot(q);
        q -= alpha[i] * s.Y[i];
    }
    const double gamma = s.S.back().dot(s.Y.back()) / s.Y.back().squaredNorm();
    Eigen::VectorXd r = gamma * q;
    for (std::size_t i = 0; i < k; ++i) {
        const double beta = rho[i] * s.Y[i].dot(r);
        r += (alpha[i] - beta) * s.S[i];
    }
    return -r;
}

void update(BfgsState& s, const Eigen::VectorXd& sv, const Eigen::VectorXd& yv) {
    const double sy = sv.dot(yv);
    if (!(sy > kCurvatureFloor) || !std::isfinite(sy)) {
        ++s.skipped_updates;
        return;
    }
    if (!s.dense) {
        s.S.push_back(sv);
        s.Y.push_back(yv);
        while (static_cast<int>(s.S.size()) > s.cfg.history) {
            s.S.pop_front();
            s.Y.pop_front();
        }
        return;
    }
    const Eigen::Index n = sv.size();
    if (s.H.size() == 0 || !s.scaled) {
        s.H = (sy / yv.squaredNorm()) * Eigen::MatrixXd::Identity(n, n);
        s.scaled = true;
    }
    const double rho = 1.0 / sy;
    const Eigen::VectorXd Hy = s.H * yv;
    const double yHy = yv.dot(Hy);
    // (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded
    s.H.noalias() -= rho * (sv * Hy.transpose() + Hy * sv.transpose());
    s.H.noalias() += (rho * rho * yHy + rho) * (sv * sv.transpose());
}

}  // namespace

BfgsStep bfgs_step(BfgsState& s, Eigen::VectorXd& x, const Oracle& oracle) {
    BfgsStep out;
    if (!s.started) {
        s.cfg.validate();
        s.dense = x.size() <= s.cfg.dense_limit;
        s.g.resize(x.size());
        s.f = oracle(x, s.g);
        ++s.evaluations;
        ++out.evaluations;
        if (!std::isfinite(s.f) || !s.g.allFinite())
            throw std::domain_error("bfgs: objective is not finite at the starting point");
        s.started = true;
    }
    out.f = s.f;
    if (s.g.lpNorm<Eigen::Infinity>() < s.cfg.tol_grad) {
        out.converged = true;
        out.diagnostic = "gradient below tolerance";
        return out;
    }

    Eigen::VectorXd d = direction(s, s.g);
    double dphi0 = s.g.dot(d);
    if (!(dphi0 < 0.0)) {
        s.reset_curvature();
        d = -s.g;
        dphi0 = s.g.dot(d);
    }
    const bool fresh = s.dense ? s.H.size() == 0 : s.S.empty();
    double a = fresh ? std::min(1.0, 1.0 / s.g.norm()) : 1.0;

    const double f0 = s.f;
    const BfgsConfig& c = s.cfg;
    Trial best{0.0, f0, dphi0, s.g};
    int evals = 0;
    auto eval = [&](double alpha) {
        Trial t;
        t.a = alpha;
        t.g.resize(x.size());
        t.f = oracle(x + alpha * d, t.g);
        t.dphi = t.g.allFinite() ? t.g.dot(d) : std::nan("");
        ++evals;
        if (t.finite() && t.f < best.f) best = t;
        return t;
    };
    auto armijo = [&](const Trial& t) { return t.finite() && t.f <= f0 + c.c1 * t.a * dphi0; };
    auto strong_curvature = [&](const Trial& t) { return std::abs(t.dphi) <= -c.c2 * dphi0; };

    std::optional<Trial> accepted;
    Trial prev{0.0, f0, dphi0, s.g};
    Trial lo, hi;
    bool zoom = false;
    while (evals < c.max_linesearch) {
        Trial t = eval(a);
        if (!armijo(t) || (prev.a > 0.0 && t.f >= prev.f)) {
            lo = prev;
            hi = t;
            zoom = true;
            break;
        }
        if (strong_curvature(t)) {
            accepted = t;
            break;
        }
        if (t.dphi >= 0.0) {
            lo = t;
            hi = prev;
            zoom = true;
            break;
        }
        prev = t;
        a *= 2.0;
    }
    while (zoom && !accepted && evals < c.max_linesearch) {
        const double left = std::min(lo.a, hi.a), right = std::max(lo.a, hi.a);
        double aj = std::nan("");
        if (hi.finite()) aj = cubic_min(lo.a, lo.f, lo.dphi, hi.a, hi.f, hi.dphi);
        const double margin = 0.1 * (right - left);
        if (!std::isfinite(aj) || aj < left + margin || aj > right - margin) aj = 0.5 * (lo.a + hi.a);
        if (right - left < 1e-16 * std::max(1.0, right)) break;
        Trial t = eval(aj);
        if (!armijo(t) || t.f >= lo.f) {
            hi = t;
        } else {
            if (strong_curvature(t)) {
                accepted = t;
                break;
            }
            if (t.dphi * (hi.a - lo.a) >= 0.0) hi = lo;
            lo = t;
        }
    }

    if (accepted && c.refine && evals < c.max_linesearch) {
        const Trial& t = *accepted;
        const double ac = cubic_min(0.0, f0, dphi0, t.a, t.f, t.dphi);
        if (std::isfinite(ac) && ac > 0.0 && std::abs(ac - t.a) > c.refine_tol * t.a) {
            Trial r = eval(ac);
            if (armijo(r) && r.f < t.f && r.dphi >= c.c2 * dphi0) accepted = r;
        }
    }

    out.evaluations += evals;
    s.evaluations += evals;
    Trial step;
    if (accepted) {
        step = *accepted;
    } else {
        out.failed = true;
        out.diagnostic = "line search failed after " + std::to_string(evals) + " evaluations";
        if (!(best.a > 0.0)) {
            s.reset_curvature();
            out.f = s.f;
            return out;
        }
        step = best;
    }
    const Eigen::VectorXd sv = step.a * d;
    x += sv;
    update(s, sv, step.g - s.g);
    const double f_old = s.f;
    s.f = step.f;
    s.g = step.g;
    ++s.iter;
    out.f = s.f;
    out.step = step.a;
    if (s.g.lpNorm<Eigen::Infinity>() < c.tol_grad) {
        out.converged = true;
        out.diagnostic = "gradient below tolerance";
    } else if (c.tol_f > 0.0 && f_old - s.f <= c.tol_f * std::max({std::abs(f_old), std::abs(s.f), 1.0})) {
        out.converged = true;
        out.diagnostic = "relative decrease below tolerance";
    }
    return out;
}

}  // namespace elastipinn::optim
