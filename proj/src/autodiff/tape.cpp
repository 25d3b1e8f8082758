#include "elastipinn/autodiff/tape.hpp"

#include <cmath>

namespace elastipinn::ad {

namespace {
thread_local Tape* g_active = nullptr;
}  // namespace

Tape* Tape::active() { return g_active; }

ActiveTape::ActiveTape(Tape& tape) : previous_(g_active) { g_active = &tape; }
ActiveTape::~ActiveTape() { g_active = previous_; }

std::vector<double> Tape::backward(std::int32_t output) const {
    std::vector<double> adj(nodes_.size(), 0.0);
    if (output < 0) return adj;
    adj[static_cast<std::size_t>(output)] = 1.0;
    for (std::int32_t i = output; i >= 0; --i) {
        const double a = adj[static_cast<std::size_t>(i)];
        if (a == 0.0) continue;
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.lhs >= 0) adj[static_cast<std::size_t>(n.lhs)] += a * n.dlhs;
        if (n.rhs >= 0) adj[static_cast<std::size_t>(n.rhs)] += a * n.drhs;
    }
    return adj;
}

Var Var::independent(double v) {
    Var x(v);
    Tape* t = Tape::active();
    if (!t) throw std::logic_error("Var::independent called without an active tape");
    x.index_ = t->new_leaf();
    return x;
}

Var Var::unary(const Var& a, double value, double da) {
    Var r(value);
    Tape* t = Tape::active();
    if (t && !a.is_constant()) {
        r.index_ = t->push({a.index_, -1, da, 0.0});
        if (!std::isfinite(value) || !std::isfinite(da)) t->poison();
    }
    return r;
}

Var Var::binary(const Var& a, const Var& b, double value, double da, double db) {
    Var r(value);
    Tape* t = Tape::active();
    if (t && !(a.is_constant() && b.is_constant())) {
        r.index_ = t->push({a.index_, b.index_, da, db});
        if (!std::isfinite(value) || !std::isfinite(da) || !std::isfinite(db)) t->poison();
    }
    return r;
}

Var& Var::operator+=(const Var& o) { return *this = *this + o; }
Var& Var::operator-=(const Var& o) { return *this = *this - o; }
Var& Var::operator*=(const Var& o) { return *this = *this * o; }
Var& Var::operator/=(const Var& o) { return *this = *this / o; }

Var operator-(const Var& a) { return Var::unary(a, -a.value(), -1.0); }
Var operator+(const Var& a, const Var& b) {
    if (b.is_constant()) return Var::unary(a, a.value() + b.value(), 1.0);
    if (a.is_constant()) return Var::unary(b, a.value() + b.value(), 1.0);
    return Var::binary(a, b, a.value() + b.value(), 1.0, 1.0);
}
Var operator-(const Var& a, const Var& b) {
    if (b.is_constant()) return Var::unary(a, a.value() - b.value(), 1.0);
    if (a.is_constant()) return Var::unary(b, a.value() - b.value(), -1.0);
    return Var::binary(a, b, a.value() - b.value(), 1.0, -1.0);
}
Var operator*(const Var& a, const Var& b) {
    if (b.is_constant()) return Var::unary(a, a.value() * b.value(), b.value());
    if (a.is_constant()) return Var::unary(b, a.value() * b.value(), a.value());
    return Var::binary(a, b, a.value() * b.value(), b.value(), a.value());
}
Var operator/(const Var& a, const Var& b) {
    const double inv = 1.0 / b.value();
    const double q = a.value() / b.value();
    if (b.is_constant()) return Var::unary(a, q, inv);
    if (a.is_constant()) return Var::unary(b, q, -q * inv);
    return Var::binary(a, b, q, inv, -q * inv);
}

Var exp(const Var& a) {
    const double e = std::exp(a.value());
    return Var::unary(a, e, e);
}
Var log(const Var& a) { return Var::unary(a, std::log(a.value()), 1.0 / a.value()); }
Var sqrt(const Var& a) {
    const double s = std::sqrt(a.value());
    return Var::unary(a, s, 0.5 / s);
}
Var tanh(const Var& a) {
    const double t = std::tanh(a.value());
    return Var::unary(a, t, 1.0 - t * t);
}
Var sin(const Var& a) { return Var::unary(a, std::sin(a.value()), std::cos(a.value())); }
Var cos(const Var& a) { return Var::unary(a, std::cos(a.value()), -std::sin(a.value())); }
Var pow(const Var& a, double p) {
    return Var::unary(a, std::pow(a.value(), p), p * std::pow(a.value(), p - 1.0));
}
Var pow(const Var& a, const Var& p) { return exp(p * log(a)); }
Var abs(const Var& a) { return a.value() < 0.0 ? -a : a; }

}  // namespace elastipinn::ad
