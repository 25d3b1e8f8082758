#include "elastipinn/mechanics/kernels.hpp"

#include <stdexcept>

#include "elastipinn/autodiff/dual.hpp"

namespace elastipinn::mech {

namespace {

using ad::Dual;

inline int flat(int r, int c) { return r + 3 * c; }

template <typename T>
Vec3<T> lift_point(const Vec3d& x) {
    return Vec3<T>(T(x[0]), T(x[1]), T(x[2]));
}

template <int NP>
StressDivergence divergence_impl(Law law, const FiberFrame& fiber, const PointState& s) {
    using I = Dual<double, 9>;
    using O = Dual<I, 3>;
    Mat3<O> F;
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) {
            O f(I(s.F(r, c), flat(r, c)));
            for (int j = 0; j < 3; ++j) f.d[static_cast<std::size_t>(j)] = I(s.G[static_cast<std::size_t>(j)](r, c));
            F(r, c) = f;
        }
    std::array<O, NP> p;
    for (int m = 0; m < NP; ++m) {
        O v(I(s.p[m]));
        for (int j = 0; j < 3; ++j) v.d[static_cast<std::size_t>(j)] = I(s.dp[static_cast<std::size_t>(j)][m]);
        p[static_cast<std::size_t>(m)] = v;
    }
    Vec3<O> x;
    for (int j = 0; j < 3; ++j) {
        x[j] = O(I(s.x[j]));
        x[j].d[static_cast<std::size_t>(j)] = I(1.0);
    }
    const O w = energy<O>(law, p.data(), F, frame_at<O>(fiber, x));
    StressDivergence out;
    out.W = w.val.val;
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) {
            out.P(r, c) = w.val.d[static_cast<std::size_t>(flat(r, c))];
            out.div[r] += w.d[static_cast<std::size_t>(c)].d[static_cast<std::size_t>(flat(r, c))];
        }
    return out;
}

template <int NP>
DivergenceAdjoint adjoint_impl(Law law, const FiberFrame& fiber, const PointState& s, const Vec3d& v) {
    constexpr int K = 9 + NP;
    using I = Dual<double, K>;
    using E1 = Dual<I, 1>;
    using E2 = Dual<E1, 1>;
    DivergenceAdjoint out;
    for (int j = 0; j < 3; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        Mat3<E2> F;
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < 3; ++r) {
                E1 val(I(s.F(r, c), flat(r, c)));
                if (c == j) val.d[0] = I(v[r]);
                E2 f(val);
                f.d[0] = E1(I(s.G[ju](r, c)));
                F(r, c) = f;
            }
        std::array<E2, NP> p;
        for (int m = 0; m < NP; ++m) {
            E2 q(E1(I(s.p[m], 9 + m)));
            q.d[0] = E1(I(s.dp[ju][m]));
            p[static_cast<std::size_t>(m)] = q;
        }
        Vec3<E2> x = lift_point<E2>(s.x);
        x[j].d[0] = E1(I(1.0));
        const E2 w = energy<E2>(law, p.data(), F, frame_at<E2>(fiber, x));
        // w.d[0].d[0] = d/dx_j (v . P e_j); its K-gradient is with respect to (F, p).
        const I& mixed = w.d[0].d[0];
        // w.val.d[0] = v . P e_j; its K-gradient is with respect to (G_j, dp_j).
        const I& first = w.val.d[0];
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < 3; ++r) {
                out.dF(r, c) += mixed.d[static_cast<std::size_t>(flat(r, c))];
                out.dG[ju](r, c) = first.d[static_cast<std::size_t>(flat(r, c))];
            }
        for (int m = 0; m < NP; ++m) {
            out.dp[m] += mixed.d[static_cast<std::size_t>(9 + m)];
            out.ddp[ju][m] = first.d[static_cast<std::size_t>(9 + m)];
        }
    }
    return out;
}

template <int NP>
ContractionGrad contraction_impl(Law law, const FiberFrame& fiber, const PointState& s, const Mat3d& M) {
    constexpr int K = 9 + NP;
    using I = Dual<double, K>;
    using E1 = Dual<I, 1>;
    Mat3<E1> F;
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) {
            E1 f(I(s.F(r, c), flat(r, c)));
            f.d[0] = I(M(r, c));
            F(r, c) = f;
        }
    std::array<E1, NP> p;
    for (int m = 0; m < NP; ++m) p[static_cast<std::size_t>(m)] = E1(I(s.p[m], 9 + m));
    const E1 w = energy<E1>(law, p.data(), F, frame_at<E1>(fiber, lift_point<E1>(s.x)));
    ContractionGrad out;
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) {
            out.P(r, c) = w.val.d[static_cast<std::size_t>(flat(r, c))];
            out.dF(r, c) = w.d[0].d[static_cast<std::size_t>(flat(r, c))];
        }
    for (int m = 0; m < NP; ++m) out.dp[m] = w.d[0].d[static_cast<std::size_t>(9 + m)];
    return out;
}

template <template <int> class Op, typename... Args>
auto dispatch(Law law, Args&&... args) {
    switch (parameter_count(law)) {
        case 2:
            return Op<2>::run(law, std::forward<Args>(args)...);
        case 5:
            return Op<5>::run(law, std::forward<Args>(args)...);
        case 6:
            return Op<6>::run(law, std::forward<Args>(args)...);
    }
    throw std::logic_error("unsupported parameter count");
}

template <int NP>
struct DivOp {
    static StressDivergence run(Law law, const FiberFrame& f, const PointState& s) {
        return divergence_impl<NP>(law, f, s);
    }
};
template <int NP>
struct AdjOp {
    static DivergenceAdjoint run(Law law, const FiberFrame& f, const PointState& s, const Vec3d& v) {
        return adjoint_impl<NP>(law, f, s, v);
    }
};
template <int NP>
struct ConOp {
    static ContractionGrad run(Law law, const FiberFrame& f, const PointState& s, const Mat3d& M) {
        return contraction_impl<NP>(law, f, s, M);
    }
};

}  // namespace

StressDivergence stress_divergence(Law law, const FiberFrame& fiber, const PointState& s) {
    return dispatch<DivOp>(law, fiber, s);
}

DivergenceAdjoint divergence_adjoint(Law law, const FiberFrame& fiber, const PointState& s, const Vec3d& v) {
    return dispatch<AdjOp>(law, fiber, s, v);
}

ContractionGrad contraction_grad(Law law, const FiberFrame& fiber, const PointState& s, const Mat3d& M) {
    return dispatch<ConOp>(law, fiber, s, M);
}

}  // namespace elastipinn::mech
