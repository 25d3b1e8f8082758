#pragma once

// Reverse-mode differentiation on a linear tape of scalar operations.
//
// A Tape records every operation on Var values while it is the active tape of
// the calling thread. One tape serves one loss evaluation; it is cleared after
// each backward sweep. Operations producing a non-finite value poison the tape
// and remember the loss term that was active at that moment.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "elastipinn/autodiff/dual.hpp"

namespace elastipinn::ad {

class PoisonedError : public std::runtime_error {
public:
    PoisonedError(const std::string& term, const std::string& detail)
        : std::runtime_error("non-finite value in loss term '" + term + "': " + detail), term_(term) {}
    const std::string& term() const { return term_; }

private:
    std::string term_;
};

class Tape {
public:
    struct Node {
        std::int32_t lhs;
        std::int32_t rhs;
        double dlhs;
        double drhs;
    };

    std::int32_t new_leaf() { return push({-1, -1, 0.0, 0.0}); }
    std::int32_t push(const Node& n) {
        nodes_.push_back(n);
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    std::size_t size() const { return nodes_.size(); }

    // Adjoints of every node with respect to `output`.
    std::vector<double> backward(std::int32_t output) const;

    void clear() {
        nodes_.clear();
        poisoned_ = false;
        poison_term_.clear();
    }

    void poison() {
        if (!poisoned_) {
            poisoned_ = true;
            poison_term_ = term_ ? term_ : "<unlabelled>";
        }
    }
    bool poisoned() const { return poisoned_; }
    const std::string& poison_term() const { return poison_term_; }

    void set_term(const char* term) { term_ = term; }
    const char* term() const { return term_; }

    static Tape* active();

private:
    friend class ActiveTape;
    std::vector<Node> nodes_;
    bool poisoned_ = false;
    std::string poison_term_;
    const char* term_ = nullptr;
};

// Makes a tape the active tape of this thread for the lifetime of the guard.
class ActiveTape {
public:
    explicit ActiveTape(Tape& tape);
    ~ActiveTape();
    ActiveTape(const ActiveTape&) = delete;
    ActiveTape& operator=(const ActiveTape&) = delete;

private:
    Tape* previous_;
};

// Labels the operations recorded in a scope with a loss-term name.
class TermScope {
public:
    explicit TermScope(const char* term) : tape_(Tape::active()) {
        if (tape_) {
            previous_ = tape_->term();
            tape_->set_term(term);
        }
    }
    ~TermScope() {
        if (tape_) tape_->set_term(previous_);
    }
    TermScope(const TermScope&) = delete;
    TermScope& operator=(const TermScope&) = delete;

private:
    Tape* tape_;
    const char* previous_ = nullptr;
};

// Scalar recorded on the active tape. Vars without a tape index are constants.
class Var {
public:
    Var() = default;
    template <typename S>
        requires std::is_arithmetic_v<S>
    Var(S v) : value_(static_cast<double>(v)) {}  // NOLINT(google-explicit-constructor)

    // Registers a new independent variable on the active tape.
    static Var independent(double v);

    double value() const { return value_; }
    std::int32_t index() const { return index_; }
    bool is_constant() const { return index_ < 0; }

    explicit operator double() const { return value_; }

    Var& operator+=(const Var& o);
    Var& operator-=(const Var& o);
    Var& operator*=(const Var& o);
    Var& operator/=(const Var& o);

    static Var unary(const Var& a, double value, double da);
    static Var binary(const Var& a, const Var& b, double value, double da, double db);

private:
    double value_ = 0.0;
    std::int32_t index_ = -1;
};

template <>
struct passive<Var> {
    static double value(const Var& x) { return x.value(); }
};

Var operator-(const Var& a);
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);

inline bool operator<(const Var& a, const Var& b) { return a.value() < b.value(); }
inline bool operator>(const Var& a, const Var& b) { return a.value() > b.value(); }
inline bool operator<=(const Var& a, const Var& b) { return a.value() <= b.value(); }
inline bool operator>=(const Var& a, const Var& b) { return a.value() >= b.value(); }

Var exp(const Var& a);
Var log(const Var& a);
Var sqrt(const Var& a);
Var tanh(const Var& a);
Var sin(const Var& a);
Var cos(const Var& a);
Var pow(const Var& a, double p);
Var pow(const Var& a, const Var& p);
Var abs(const Var& a);

}  // namespace elastipinn::ad

namespace Eigen {

template <>
struct NumTraits<elastipinn::ad::Var> : NumTraits<double> {
    using Real = elastipinn::ad::Var;
    using NonInteger = elastipinn::ad::Var;
    using Nested = elastipinn::ad::Var;
    using Literal = elastipinn::ad::Var;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 1,
        AddCost = 4,
        MulCost = 4,
    };
};

}  // namespace Eigen

namespace Eigen {

template <typename BinaryOp>
struct ScalarBinaryOpTraits<elastipinn::ad::Var, double, BinaryOp> {
    using ReturnType = elastipinn::ad::Var;
};
template <typename BinaryOp>
struct ScalarBinaryOpTraits<double, elastipinn::ad::Var, BinaryOp> {
    using ReturnType = elastipinn::ad::Var;
};

}  // namespace Eigen
