#pragma once

#include <Eigen/Core>

namespace elastipinn::mech {

template <typename T>
using Mat3 = Eigen::Matrix<T, 3, 3>;
template <typename T>
using Vec3 = Eigen::Matrix<T, 3, 1>;

using Mat3d = Mat3<double>;
using Vec3d = Vec3<double>;

template <typename T>
T det3(const Mat3<T>& a) {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// Cofactor matrix, cof(A) = det(A) A^{-T}.
template <typename T>
Mat3<T> cofactor3(const Mat3<T>& a) {
    Mat3<T> c;
    c(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
    c(0, 1) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
    c(0, 2) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
    c(1, 0) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
    c(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
    c(1, 2) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
    c(2, 0) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
    c(2, 1) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
    c(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    return c;
}

// Frobenius inner product A : B.
template <typename T>
T ddot(const Mat3<T>& a, const Mat3<T>& b) {
    T s = a(0, 0) * b(0, 0);
    for (int k = 1; k < 9; ++k) s += a(k % 3, k / 3) * b(k % 3, k / 3);
    return s;
}

// a . (M b)
template <typename T>
T quad(const Vec3<T>& a, const Mat3<T>& m, const Vec3<T>& b) {
    T s = T(0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += a[i] * m(i, j) * b[j];
    return s;
}

}  // namespace elastipinn::mech
