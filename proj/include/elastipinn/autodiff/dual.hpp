#pragma once

// Forward-mode dual numbers with a fixed number of derivative directions.
//
// Dual<T, N> carries a value of type T and N directional derivatives of type
// T. T may itself be a Dual (or a reverse-mode Var), which gives nested
// forward-over-forward or forward-over-reverse differentiation.

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <type_traits>

#include <Eigen/Core>

namespace elastipinn::ad {

template <typename T, int N>
class Dual;

template <typename T>
struct is_dual : std::false_type {};
template <typename T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};
template <typename T>
inline constexpr bool is_dual_v = is_dual<T>::value;

// Plain value of any (possibly nested) AD scalar.
template <typename T>
struct passive {
    static double value(const T& x) { return static_cast<double>(x); }
};

template <typename T>
double value_of(const T& x) {
    return passive<T>::value(x);
}

template <typename T, int N>
class Dual {
public:
    static constexpr int size = N;
    using value_type = T;

    T val{};
    std::array<T, N> d{};

    constexpr Dual() = default;

    template <typename S>
        requires std::is_arithmetic_v<S>
    constexpr Dual(S v) : val(static_cast<double>(v)) {}  // NOLINT(google-explicit-constructor)

    constexpr Dual(const T& v) : val(v) {}  // NOLINT(google-explicit-constructor)

    Dual(const T& v, int dir) : val(v) { d[dir] = T(1.0); }

    // Seeds the value with an arbitrary tangent vector.
    Dual(const T& v, const std::array<T, N>& tangent) : val(v), d(tangent) {}

    Dual& operator+=(const Dual& o) {
        val += o.val;
        for (int i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        val -= o.val;
        for (int i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (int i = 0; i < N; ++i) d[i] = d[i] * o.val + val * o.d[i];
        val *= o.val;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        *this = *this / o;
        return *this;
    }

    template <typename S>
        requires std::is_arithmetic_v<S>
    Dual& operator+=(S s) {
        val += static_cast<double>(s);
        return *this;
    }
    template <typename S>
        requires std::is_arithmetic_v<S>
    Dual& operator-=(S s) {
        val -= static_cast<double>(s);
        return *this;
    }
    template <typename S>
        requires std::is_arithmetic_v<S>
    Dual& operator*=(S s) {
        const double c = static_cast<double>(s);
        val *= c;
        for (int i = 0; i < N; ++i) d[i] *= c;
        return *this;
    }

    explicit operator double() const { return value_of(val); }
};

template <typename T, int N>
struct passive<Dual<T, N>> {
    static double value(const Dual<T, N>& x) { return value_of(x.val); }
};

// Applies a scalar function with known first derivative: result = f(a), f'(a).
template <typename T, int N>
Dual<T, N> chain(const Dual<T, N>& a, const T& f, const T& df) {
    Dual<T, N> r(f);
    for (int i = 0; i < N; ++i) r.d[i] = df * a.d[i];
    return r;
}

template <typename T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
    Dual<T, N> r(-a.val);
    for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
}
template <typename T, int N>
Dual<T, N> operator+(const Dual<T, N>& a) {
    return a;
}

template <typename T, int N>
Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) {
    return a += b;
}
template <typename T, int N>
Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) {
    return a -= b;
}
template <typename T, int N>
Dual<T, N> operator*(const Dual<T, N>& a, const Dual<T, N>& b) {
    Dual<T, N> r(a.val * b.val);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.val + a.val * b.d[i];
    return r;
}
template <typename T, int N>
Dual<T, N> operator/(const Dual<T, N>& a, const Dual<T, N>& b) {
    const T inv = T(1.0) / b.val;
    const T q = a.val / b.val;
    Dual<T, N> r(q);
    for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] - q * b.d[i]) * inv;
    return r;
}

// Mixed arithmetic with passive real scalars.
template <typename T, int N, typename S>
    requires std::is_arithmetic_v<S>
Dual<T, N> operator+(Dual<T, N> a, S s) {
    a.val += static_cast<double>(s);
    return a;
}
template <typename T, int N, typename S>
    requires std::is_arithmetic_v<S>
Dual<T, N> operator+(S s, Dual<T, N> a) {
    a.val += static_cast<double>(s);
    return a;
}
template <typename T, int N, typename S>
    requires std::is_arithmetic_v<S>
Dual<T, N> operator-(Dual<T, N> a, S s) {
    a.val -= static_cast<double>(s);
    return a;
}
template <typename T, int N, typename S>
    requires std::is_arithmetic_v<S>
Dual<T, N> operator-(S s, const Dual<T, N>& a) {
    Dual<T, N> r = -a;
    r.val += static_cast<double>(s);
    return r;
}
template <typename T, int N, typename S>
    requires std::is_arithmetic_v<S>
Dual<T, N> operator*(Dual<T, N> a, S s) {
    const double c = static_cast<double>(s);
    a.val *= c;
    for (int i = 0; i < N; ++i) a.d[i] *= c;
    return a;
}
template <typename T, int N, typename S>
    requires std::is_arithmetic_v<S>
Dual<T, N> operator*(S s, Dual<T, N> a) {
    return a * s;
}
template <typename T, int N, typename S>
    requires std::is_arithmetic_v<S>
Dual<T, N> operator/(Dual<T, N> a, S s) {
    return a * (1.0 / static_cast<double>(s));
}
template <typename T, int N, typename S>
    requires std::is_arithmetic_v<S>
Dual<T, N> operator/(S s, const Dual<T, N>& a) {
    return Dual<T, N>(T(static_cast<double>(s))) / a;
}

template <typename T, int N>
bool operator<(const Dual<T, N>& a, const Dual<T, N>& b) {
    return value_of(a) < value_of(b);
}
template <typename T, int N>
bool operator>(const Dual<T, N>& a, const Dual<T, N>& b) {
    return value_of(a) > value_of(b);
}
template <typename T, int N, typename S>
    requires std::is_arithmetic_v<S>
bool operator<(const Dual<T, N>& a, S b) {
    return value_of(a) < static_cast<double>(b);
}
template <typename T, int N, typename S>
    requires std::is_arithmetic_v<S>
bool operator>(const Dual<T, N>& a, S b) {
    return value_of(a) > static_cast<double>(b);
}
template <typename T, int N, typename S>
    requires std::is_arithmetic_v<S>
bool operator<=(const Dual<T, N>& a, S b) {
    return value_of(a) <= static_cast<double>(b);
}

// Elementary functions. Unqualified calls resolve to std:: for doubles and to
// these overloads (by ADL) for nested duals and tape variables.
using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;
using std::tanh;

template <typename T, int N>
Dual<T, N> exp(const Dual<T, N>& a) {
    const T e = exp(a.val);
    return chain(a, e, e);
}
template <typename T, int N>
Dual<T, N> log(const Dual<T, N>& a) {
    return chain(a, log(a.val), T(1.0) / a.val);
}
template <typename T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
    const T s = sqrt(a.val);
    return chain(a, s, T(0.5) / s);
}
template <typename T, int N>
Dual<T, N> tanh(const Dual<T, N>& a) {
    const T t = tanh(a.val);
    return chain(a, t, T(1.0) - t * t);
}
template <typename T, int N>
Dual<T, N> sin(const Dual<T, N>& a) {
    return chain(a, sin(a.val), cos(a.val));
}
template <typename T, int N>
Dual<T, N> cos(const Dual<T, N>& a) {
    return chain(a, cos(a.val), -sin(a.val));
}
template <typename T, int N>
Dual<T, N> pow(const Dual<T, N>& a, double p) {
    const T ap = pow(a.val, p);
    return chain(a, ap, p * pow(a.val, p - 1.0));
}
template <typename T, int N>
Dual<T, N> pow(const Dual<T, N>& a, const Dual<T, N>& p) {
    return exp(p * log(a));
}
template <typename T, int N>
Dual<T, N> abs(const Dual<T, N>& a) {
    return value_of(a) < 0.0 ? -a : a;
}

template <typename T>
bool isfinite_all(const T& x) {
    if constexpr (is_dual_v<T>) {
        if (!isfinite_all(x.val)) return false;
        for (const auto& di : x.d)
            if (!isfinite_all(di)) return false;
        return true;
    } else {
        return std::isfinite(value_of(x));
    }
}

}  // namespace elastipinn::ad

namespace Eigen {

template <typename T, int N>
struct NumTraits<elastipinn::ad::Dual<T, N>> : NumTraits<double> {
    using Real = elastipinn::ad::Dual<T, N>;
    using NonInteger = elastipinn::ad::Dual<T, N>;
    using Nested = elastipinn::ad::Dual<T, N>;
    using Literal = elastipinn::ad::Dual<T, N>;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 1,
        AddCost = 2 * (N + 1),
        MulCost = 4 * (N + 1),
    };
};

template <typename T, int N, typename BinaryOp>
struct ScalarBinaryOpTraits<elastipinn::ad::Dual<T, N>, double, BinaryOp> {
    using ReturnType = elastipinn::ad::Dual<T, N>;
};
template <typename T, int N, typename BinaryOp>
struct ScalarBinaryOpTraits<double, elastipinn::ad::Dual<T, N>, BinaryOp> {
    using ReturnType = elastipinn::ad::Dual<T, N>;
};

}  // namespace Eigen
