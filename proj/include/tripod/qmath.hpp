#ifndef TRIPOD_QMATH_HPP
#define TRIPOD_QMATH_HPP

// Minimal complex linear algebra for the fixed dimensions used by the tripod
// problem (2 = dark manifold, 4 = bare levels). Everything is by value and
// thread-safe. Tolerances are absolute: all matrices handled here are O(1).

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

#include "tripod/errors.hpp"

namespace tripod {

using cplx = std::complex<double>;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;

// ---------------------------------------------------------------------------
// Fixed-size vectors and matrices, row-major
// ---------------------------------------------------------------------------

template <std::size_t N>
struct CVec {
    std::array<cplx, N> v{};

    cplx& operator[](std::size_t i) { return v[i]; }
    const cplx& operator[](std::size_t i) const { return v[i]; }
};

template <std::size_t N>
struct CMat {
    std::array<cplx, N * N> a{};

    cplx& operator()(std::size_t i, std::size_t j) { return a[i * N + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return a[i * N + j]; }

    static CMat identity() {
        CMat m;
        for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }
    static CMat zero() { return CMat{}; }
};

using CVec2 = CVec<2>;
using CVec4 = CVec<4>;
using CMat2 = CMat<2>;
using CMat4 = CMat<4>;

template <std::size_t N>
CMat<N> operator+(const CMat<N>& x, const CMat<N>& y) {
    CMat<N> r;
    for (std::size_t i = 0; i < N * N; ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
}

template <std::size_t N>
CMat<N> operator-(const CMat<N>& x, const CMat<N>& y) {
    CMat<N> r;
    for (std::size_t i = 0; i < N * N; ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
}

template <std::size_t N>
CMat<N> operator*(cplx s, const CMat<N>& x) {
    CMat<N> r;
    for (std::size_t i = 0; i < N * N; ++i) r.a[i] = s * x.a[i];
    return r;
}

template <std::size_t N>
CMat<N> operator*(double s, const CMat<N>& x) { return cplx(s, 0.0) * x; }

template <std::size_t N>
CMat<N> operator*(const CMat<N>& x, const CMat<N>& y) {
    CMat<N> r;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < N; ++k) {
            const cplx xik = x(i, k);
            if (xik == cplx{}) continue;
            for (std::size_t j = 0; j < N; ++j) r(i, j) += xik * y(k, j);
        }
    return r;
}

template <std::size_t N>
CVec<N> operator*(const CMat<N>& m, const CVec<N>& x) {
    CVec<N> r;
    for (std::size_t i = 0; i < N; ++i) {
        cplx s{};
        for (std::size_t j = 0; j < N; ++j) s += m(i, j) * x[j];
        r[i] = s;
    }
    return r;
}

template <std::size_t N>
CVec<N> operator+(const CVec<N>& x, const CVec<N>& y) {
    CVec<N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = x[i] + y[i];
    return r;
}

template <std::size_t N>
CVec<N> operator-(const CVec<N>& x, const CVec<N>& y) {
    CVec<N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = x[i] - y[i];
    return r;
}

template <std::size_t N>
CVec<N> operator*(cplx s, const CVec<N>& x) {
    CVec<N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = s * x[i];
    return r;
}

template <std::size_t N>
CVec<N> operator*(double s, const CVec<N>& x) { return cplx(s, 0.0) * x; }

template <std::size_t N>
CMat<N> adjoint(const CMat<N>& m) {
    CMat<N> r;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) r(i, j) = std::conj(m(j, i));
    return r;
}

template <std::size_t N>
cplx trace(const CMat<N>& m) {
    cplx s{};
    for (std::size_t i = 0; i < N; ++i) s += m(i, i);
    return s;
}

// <x|y>, conjugate-linear in the first argument
template <std::size_t N>
cplx inner(const CVec<N>& x, const CVec<N>& y) {
    cplx s{};
    for (std::size_t i = 0; i < N; ++i) s += std::conj(x[i]) * y[i];
    return s;
}

template <std::size_t N>
double norm(const CVec<N>& x) { return std::sqrt(std::real(inner(x, x))); }

template <std::size_t N>
CVec<N> normalized(const CVec<N>& x) {
    const double n = norm(x);
    if (n == 0.0) throw invalid_input("cannot normalize a zero vector");
    return (1.0 / n) * x;
}

// |x><y|
template <std::size_t N>
CMat<N> outer(const CVec<N>& x, const CVec<N>& y) {
    CMat<N> r;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) r(i, j) = x[i] * std::conj(y[j]);
    return r;
}

template <std::size_t N>
double max_abs(const CMat<N>& m) {
    double r = 0.0;
    for (const auto& e : m.a) r = std::max(r, std::abs(e));
    return r;
}

template <std::size_t N>
double max_abs_diff(const CMat<N>& x, const CMat<N>& y) { return max_abs(x - y); }

template <std::size_t N>
double hermiticity_defect(const CMat<N>& m) { return max_abs_diff(m, adjoint(m)); }

template <std::size_t N>
double unitarity_defect(const CMat<N>& u) {
    return max_abs_diff(adjoint(u) * u, CMat<N>::identity());
}

template <std::size_t N>
bool is_hermitian(const CMat<N>& m, double tol = kHermitianTol) {
    return hermiticity_defect(m) <= tol;
}

template <std::size_t N>
bool is_unitary(const CMat<N>& u, double tol = kUnitaryTol) {
    return unitarity_defect(u) <= tol;
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition
// ---------------------------------------------------------------------------

template <std::size_t N>
struct EigenH {
    std::array<double, N> val{};   // ascending
    CMat<N> vec;                   // columns are eigenvectors
};

// Closed form for 2x2 Hermitian matrices.
inline EigenH<2> eigen_hermitian(const CMat2& h) {
    if (!is_hermitian(h, 1e-9))
        throw invalid_input("eigen_hermitian: matrix is not Hermitian");
    const double a = std::real(h(0, 0));
    const double d = std::real(h(1, 1));
    const cplx b = h(0, 1);
    const double m = 0.5 * (a + d);
    const double r = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
    EigenH<2> e;
    e.val = {m - r, m + r};
    if (r < 1e-300) {
        e.vec = CMat2::identity();
        return e;
    }
    // eigenvector for m + r: (b, (m+r) - a), or fallback when b ~ 0
    CVec2 vplus;
    if (std::abs(b) > 1e-15 * (std::abs(a) + std::abs(d) + 1.0)) {
        vplus = CVec2{{b, cplx(m + r - a, 0.0)}};
    } else {
        vplus = (a >= d) ? CVec2{{1.0, 0.0}} : CVec2{{0.0, 1.0}};
    }
    vplus = normalized(vplus);
    const CVec2 vminus{{-std::conj(vplus[1]), std::conj(vplus[0])}};
    EigenH<2> out;
    out.val = e.val;
    out.vec(0, 0) = vminus[0];
    out.vec(1, 0) = vminus[1];
    out.vec(0, 1) = vplus[0];
    out.vec(1, 1) = vplus[1];
    return out;
}

// Cyclic complex Jacobi for Hermitian matrices of any fixed small dimension.
template <std::size_t N>
EigenH<N> eigen_hermitian(const CMat<N>& h) {
    if (!is_hermitian(h, 1e-9))
        throw invalid_input("eigen_hermitian: matrix is not Hermitian");
    CMat<N> a = h;
    // symmetrize exactly so rounding in the input cannot bias the sweeps
    for (std::size_t i = 0; i < N; ++i) {
        a(i, i) = cplx(std::real(a(i, i)), 0.0);
        for (std::size_t j = i + 1; j < N; ++j) {
            const cplx m = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = m;
            a(j, i) = std::conj(m);
        }
    }
    CMat<N> v = CMat<N>::identity();
    const double scale = std::max(max_abs(a), 1e-300);
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t q = p + 1; q < N; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= 1e-15 * scale) break;
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t q = p + 1; q < N; ++q) {
                const cplx apq = a(p, q);
                if (std::abs(apq) <= 1e-18 * scale) continue;
                const double app = std::real(a(p, p));
                const double aqq = std::real(a(q, q));
                const cplx phase = apq / std::abs(apq);
                const double tau = (aqq - app) / (2.0 * std::abs(apq));
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // columns p,q of a and v are rotated by [[c, s*phase],[-s*conj(phase), c]]
                for (std::size_t i = 0; i < N; ++i) {
                    const cplx aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * std::conj(phase) * aiq;
                    a(i, q) = s * phase * aip + c * aiq;
                }
                for (std::size_t i = 0; i < N; ++i) {
                    const cplx api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * phase * aqi;
                    a(q, i) = s * std::conj(phase) * api + c * aqi;
                }
                for (std::size_t i = 0; i < N; ++i) {
                    const cplx vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * std::conj(phase) * viq;
                    v(i, q) = s * phase * vip + c * viq;
                }
            }
    }
    EigenH<N> e;
    std::array<std::size_t, N> idx{};
    for (std::size_t i = 0; i < N; ++i) idx[i] = i;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j)
            if (std::real(a(idx[j], idx[j])) < std::real(a(idx[i], idx[i])))
                std::swap(idx[i], idx[j]);
    for (std::size_t i = 0; i < N; ++i) {
        e.val[i] = std::real(a(idx[i], idx[i]));
        for (std::size_t r = 0; r < N; ++r) e.vec(r, i) = v(r, idx[i]);
    }
    return e;
}

// ---------------------------------------------------------------------------
// exp(i s H) for Hermitian H
// ---------------------------------------------------------------------------

// 2x2: Pauli closed form. H = a0*I + a.sigma, exp(isH) = e^{is a0}(cos(s|a|) I
// + i sin(s|a|) (a.sigma)/|a|).
inline CMat2 exp_i_hermitian(const CMat2& h, double s) {
    if (!is_hermitian(h))
        throw invalid_input("exp_i_hermitian: matrix is not Hermitian");
    const double a0 = 0.5 * std::real(h(0, 0) + h(1, 1));
    const double ax = std::real(h(0, 1));
    const double ay = -std::imag(h(0, 1));
    const double az = 0.5 * std::real(h(0, 0) - h(1, 1));
    const double an = std::sqrt(ax * ax + ay * ay + az * az);
    const cplx g = std::exp(cplx(0.0, s * a0));
    CMat2 u;
    if (an * std::abs(s) < 1e-300) {
        u = CMat2::identity();
    } else {
        const double cs = std::cos(s * an);
        const cplx isn = cplx(0.0, std::sin(s * an) / an);
        u(0, 0) = cs + isn * az;
        u(0, 1) = isn * cplx(ax, -ay);
        u(1, 0) = isn * cplx(ax, ay);
        u(1, 1) = cs - isn * az;
    }
    return g * u;
}

// NxN: Hermitian eigendecomposition.
template <std::size_t N>
CMat<N> exp_i_hermitian(const CMat<N>& h, double s) {
    if (!is_hermitian(h))
        throw invalid_input("exp_i_hermitian: matrix is not Hermitian");
    const EigenH<N> e = eigen_hermitian(h);
    CMat<N> u;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
            cplx acc{};
            for (std::size_t k = 0; k < N; ++k)
                acc += e.vec(i, k) * std::exp(cplx(0.0, s * e.val[k])) * std::conj(e.vec(j, k));
            u(i, j) = acc;
        }
    return u;
}

// ---------------------------------------------------------------------------
// Distances between 2x2 unitaries
// ---------------------------------------------------------------------------

// D = sqrt(2 - |Tr(U^dag V)|). Global-phase insensitive; maximum sqrt(2).
inline double frobenius_distance(const CMat2& u, const CMat2& v) {
    if (!is_unitary(u) || !is_unitary(v))
        throw invalid_input("frobenius_distance: inputs must be unitary");
    const double t = std::abs(trace(adjoint(u) * v));
    return std::sqrt(std::max(0.0, 2.0 - t));
}

// Gauge-invariant variant sqrt(4 - 2|Tr(U^dag V)|) = min_phi ||U - e^{i phi}V||_F.
// Maximum 2. Related by frobenius_distance_tilde = sqrt(2) * frobenius_distance.
inline double frobenius_distance_tilde(const CMat2& u, const CMat2& v) {
    if (!is_unitary(u) || !is_unitary(v))
        throw invalid_input("frobenius_distance_tilde: inputs must be unitary");
    const double t = std::abs(trace(adjoint(u) * v));
    return std::sqrt(std::max(0.0, 4.0 - 2.0 * t));
}

// Unitary factor of the polar decomposition A = U P, P >= 0. Used to project
// velocity-averaged propagators back onto the unitary group.
inline CMat2 polar_unitary(const CMat2& a) {
    const CMat2 h = adjoint(a) * a;        // Hermitian PSD
    const EigenH<2> e = eigen_hermitian(h);
    if (e.val[0] <= 1e-14)
        throw invalid_input("polar_unitary: matrix is (nearly) singular");
    // P^{-1/2} = V diag(val^{-1/2}) V^dag
    CMat2 pinvh;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            cplx acc{};
            for (std::size_t k = 0; k < 2; ++k)
                acc += e.vec(i, k) * (1.0 / std::sqrt(e.val[k])) * std::conj(e.vec(j, k));
            pinvh(i, j) = acc;
        }
    return a * pinvh;
}

inline cplx det(const CMat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

} // namespace tripod

#endif
