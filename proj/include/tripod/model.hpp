#ifndef TRIPOD_MODEL_HPP
#define TRIPOD_MODEL_HPP

// Tripod atom model: bare Hamiltonian, dark-state basis, and the geometric
// objects it generates (vector potential A, scalar potential W, phase-ramp
// connection omega_t).
//
// Internal units throughout: hbar = 1, time in us, length in um, so every
// energy is an angular frequency in rad/us. The atomic mass never appears
// directly; it enters through the recoil frequency omega_R and the thermal
// velocity vbar.

#include <array>
#include <cmath>
#include <numbers>

#include "tripod/errors.hpp"
#include "tripod/qmath.hpp"

namespace tripod {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Laser geometry, couplings and atom constants.
//
// Bare basis ordering everywhere: |1>, |2>, |3>, |e> with beam i coupling
// |i> <-> |e> at Rabi frequency rabi[i] and phase Phi_i(r) = k_i.r + theta_i.
// The controlled relative phases are phi1 = theta1 - theta3 and
// phi2 = theta2 - theta3.
struct TripodConfig {
    std::array<Vec3, 3> wavevectors;    // rad/um, all of magnitude k
    std::array<double, 3> rabi;         // rad/us
    std::array<double, 3> offset_phases{0.0, 0.0, 0.0};  // rad
    double omega_R = 0.0;               // recoil angular frequency, rad/us
    double thermal_vbar = 0.0;          // um/us

    double k() const { return wavevectors[0].norm(); }

    void validate() const {
        const double kk = k();
        if (!(kk > 0.0)) throw invalid_input("TripodConfig: |k| must be positive");
        for (const auto& kv : wavevectors)
            if (std::abs(kv.norm() - kk) > 1e-9 * kk)
                throw invalid_input("TripodConfig: wavevector magnitudes must be equal");
        for (double om : rabi)
            if (om < 0.0) throw invalid_input("TripodConfig: Rabi frequencies must be >= 0");
        if (!(omega_R > 0.0)) throw invalid_input("TripodConfig: omega_R must be positive");
        if (thermal_vbar < 0.0) throw invalid_input("TripodConfig: vbar must be >= 0");
    }

    bool equal_rabi(double rel_tol = 1e-12) const {
        const double m = std::max({rabi[0], rabi[1], rabi[2]});
        if (m == 0.0) return true;
        return std::abs(rabi[0] - rabi[1]) <= rel_tol * m &&
               std::abs(rabi[0] - rabi[2]) <= rel_tol * m;
    }
};

namespace sr87 {

// Physical constants (SI) and the Sr-87 intercombination-line numbers.
inline constexpr double atomic_mass_u = 86.9088774;
inline constexpr double u_kg = 1.66053906660e-27;
inline constexpr double hbar_SI = 1.054571817e-34;
inline constexpr double kB_SI = 1.380649e-23;
inline constexpr double lambda_um = 0.689;

inline double wavenumber() { return 2.0 * std::numbers::pi / lambda_um; }  // rad/um

// hbar k^2 / (2 M) converted to rad/us. Evaluates to 0.0303846 rad/us,
// i.e. 2pi x 4.8359 kHz (recoil temperature 0.2321 uK).
inline double recoil_omega() {
    const double k_SI = 2.0 * std::numbers::pi / (lambda_um * 1e-6);
    const double M = atomic_mass_u * u_kg;
    return hbar_SI * k_SI * k_SI / (2.0 * M) * 1e-6;
}

inline double recoil_temperature_uK() {
    return hbar_SI * recoil_omega() * 1e6 / kB_SI * 1e6;
}

// sqrt(kB T / M); numerically equal in um/us and in m/s.
inline double vbar_from_temperature_uK(double T_uK) {
    if (T_uK < 0.0) throw invalid_input("temperature must be >= 0");
    const double M = atomic_mass_u * u_kg;
    return std::sqrt(kB_SI * T_uK * 1e-6 / M);
}

inline double temperature_uK_from_vbar(double vbar) {
    const double M = atomic_mass_u * u_kg;
    return M * vbar * vbar / kB_SI * 1e6;
}

// Beams 1 and 3 co-propagate along x, beam 2 runs along y.
inline TripodConfig config(double rabi_rad_per_us, double T_uK) {
    const double k = wavenumber();
    TripodConfig cfg;
    cfg.wavevectors = {Vec3{k, 0, 0}, Vec3{0, k, 0}, Vec3{k, 0, 0}};
    cfg.rabi = {rabi_rad_per_us, rabi_rad_per_us, rabi_rad_per_us};
    cfg.omega_R = recoil_omega();
    cfg.thermal_vbar = vbar_from_temperature_uK(T_uK);
    cfg.validate();
    return cfg;
}

} // namespace sr87

inline double rabi_from_kHz(double f_kHz) {
    return 2.0 * std::numbers::pi * f_kHz * 1e-3;  // rad/us
}

// ---------------------------------------------------------------------------
// Bare Hamiltonian
// ---------------------------------------------------------------------------

inline std::array<double, 3> laser_phases(const TripodConfig& cfg, const Vec3& r) {
    return {cfg.wavevectors[0].dot(r) + cfg.offset_phases[0],
            cfg.wavevectors[1].dot(r) + cfg.offset_phases[1],
            cfg.wavevectors[2].dot(r) + cfg.offset_phases[2]};
}

// H = (1/2) sum_i Omega_i e^{i Phi_i} |e><i| + h.c., in the bare basis.
inline CMat4 coupling_hamiltonian(const std::array<double, 3>& omega,
                                  const std::array<double, 3>& phi) {
    CMat4 h;
    for (std::size_t i = 0; i < 3; ++i) {
        const cplx c = 0.5 * omega[i] * std::exp(cplx(0.0, phi[i]));
        h(3, i) = c;
        h(i, 3) = std::conj(c);
    }
    return h;
}

inline CMat4 bare_hamiltonian(const TripodConfig& cfg, const Vec3& r) {
    return coupling_hamiltonian(cfg.rabi, laser_phases(cfg, r));
}

// ---------------------------------------------------------------------------
// Dark basis
// ---------------------------------------------------------------------------

// Two orthonormal null vectors of the coupling row, stored as 4-component
// vectors with exactly zero excited amplitude. Gauge convention: in each
// vector the first nonzero coefficient among (|1> after factoring
// e^{-i Phi13}, |2> after e^{-i Phi23}, |3>) is real and positive, and the
// basis is built by orthogonalizing D1 (the |3>-free vector) first. With
// equal Rabi frequencies this reproduces
//   D1 = (e^{-i Phi13}|1> - e^{-i Phi23}|2>)/sqrt(2)
//   D2 = (e^{-i Phi13}|1> + e^{-i Phi23}|2> - 2|3>)/sqrt(6)
// and the gauge is smooth in r and in the offset phases.
struct DarkFrame {
    std::array<CVec4, 2> d;
    Vec3 r{};
    double phi1 = 0.0, phi2 = 0.0;

    const CVec4& D1() const { return d[0]; }
    const CVec4& D2() const { return d[1]; }
};

namespace detail {

inline CVec4 embed_ground(const std::array<cplx, 3>& g) {
    return CVec4{{g[0], g[1], g[2], cplx{}}};
}

// Multiply by a phase making the first significant gauge-factored coefficient
// real positive. Factors e13 = e^{-i Phi13}, e23 = e^{-i Phi23} are divided
// out of components 1 and 2 before the test.
inline void gauge_fix(CVec4& v, cplx e13, cplx e23) {
    const std::array<cplx, 3> probe = {v[0] / e13, v[1] / e23, v[2]};
    for (const cplx& p : probe) {
        if (std::abs(p) > 1e-9) {
            const cplx ph = std::conj(p) / std::abs(p);
            for (auto& c : v.v) c *= ph;
            return;
        }
    }
}

} // namespace detail

inline DarkFrame dark_basis(const TripodConfig& cfg, const Vec3& r,
                            double phi1, double phi2) {
    const double o1 = cfg.rabi[0], o2 = cfg.rabi[1], o3 = cfg.rabi[2];
    if (o1 == 0.0 && o2 == 0.0 && o3 == 0.0)
        throw degenerate_configuration("dark_basis: all couplings vanish");

    // phi1, phi2 are the controlled phases relative to beam 3; the config's
    // beam-3 offset is the common reference and must drop out of the frame.
    const double ref = cfg.offset_phases[2];
    const std::array<double, 3> theta = {phi1 + ref, phi2 + ref, ref};
    std::array<double, 3> Phi;
    for (std::size_t i = 0; i < 3; ++i) Phi[i] = cfg.wavevectors[i].dot(r) + theta[i];
    const cplx e13 = std::exp(cplx(0.0, -(Phi[0] - Phi[2])));
    const cplx e23 = std::exp(cplx(0.0, -(Phi[1] - Phi[2])));

    // null vectors of the row (o1 e^{i Phi1}, o2 e^{i Phi2}, o3 e^{i Phi3})
    CVec4 u = detail::embed_ground({o2 * e13, -o1 * e23, cplx{}});
    if (norm(u) < 1e-14) {
        // beams 1 and 2 both off: |1> and |2> are trivially dark
        u = detail::embed_ground({e13, cplx{}, cplx{}});
        if (o1 > 0.0) u = detail::embed_ground({cplx{}, e23, cplx{}});
    }
    CVec4 d1 = normalized(u);

    CVec4 w = detail::embed_ground({o3 * e13, cplx{}, cplx(-o1, 0.0)});
    if (norm(w) < 1e-14) w = detail::embed_ground({cplx{}, o3 * e23, cplx(-o2, 0.0)});
    if (norm(w) < 1e-14) w = detail::embed_ground({cplx{}, cplx{}, cplx(1.0, 0.0)});
    CVec4 d2 = w - inner(d1, w) * d1;
    if (norm(d2) < 1e-12) {
        CVec4 alt = detail::embed_ground({cplx{}, o3 * e23, cplx(-o2, 0.0)});
        d2 = alt - inner(d1, alt) * d1;
    }
    d2 = normalized(d2);

    detail::gauge_fix(d1, e13, e23);
    detail::gauge_fix(d2, e13, e23);

    DarkFrame f;
    f.d = {d1, d2};
    f.r = r;
    f.phi1 = phi1;
    f.phi2 = phi2;
    return f;
}

// Phase-align each frame vector to a reference frame (maximal overlap). Used
// to keep numerically sampled frames continuous along a path. Returns the
// smallest overlap magnitude encountered; values far below 1 signal that the
// two frames do not describe neighbouring points.
inline double align_frame(DarkFrame& f, const DarkFrame& ref) {
    double worst = 1.0;
    for (std::size_t i = 0; i < 2; ++i) {
        const cplx ov = inner(ref.d[i], f.d[i]);
        worst = std::min(worst, std::abs(ov));
        if (std::abs(ov) > 1e-12) {
            const cplx ph = std::conj(ov) / std::abs(ov);
            for (auto& c : f.d[i].v) c *= ph;
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Connection and gauge potentials
// ---------------------------------------------------------------------------

// Matrix of i <D_j | d/dt D_k> for the equal-Rabi basis when the two relative
// phases move at the given rates (any linear combination of phase and spatial
// derivatives has this shape):
//   (1/2) [[ r1+r2, (r1-r2)/sqrt(3) ], [ (r1-r2)/sqrt(3), (r1+r2)/3 ]]
inline CMat2 connection_omega_t(double rate1, double rate2) {
    CMat2 m;
    const double s = rate1 + rate2;
    const double d = (rate1 - rate2) / std::sqrt(3.0);
    m(0, 0) = 0.5 * s;
    m(0, 1) = 0.5 * d;
    m(1, 0) = 0.5 * d;
    m(1, 1) = s / 6.0;
    return m;
}

// The projector (1 + s.sigma)/2 with Bloch vector s = (-sqrt(3)/2, 0, 1/2)
// shared by A, A^2/2M and W in the co-propagating beam geometry.
inline CMat2 m_matrix() {
    CMat2 m;
    const double q = std::sqrt(3.0) / 4.0;
    m(0, 0) = 0.75;
    m(0, 1) = -q;
    m(1, 0) = -q;
    m(1, 1) = 0.25;
    return m;
}

struct GaugePotentials {
    std::array<CMat2, 3> A;   // Cartesian components, rad/um
    CMat2 Asq_over_2M;        // rad/us
    CMat2 W;                  // rad/us
    CMat2 M_matrix;
    double scalar_gap = 0.0;  // spectral gap of Asq_over_2M + W, rad/us
    bool closed_form = true;
    double fd_residual = 0.0; // finite-difference branch only
};

namespace detail {

inline std::array<double, 2> kappa_component(const TripodConfig& cfg, int c) {
    auto comp = [&](const Vec3& v) { return c == 0 ? v.x : (c == 1 ? v.y : v.z); };
    const Vec3 k13 = cfg.wavevectors[0] - cfg.wavevectors[2];
    const Vec3 k23 = cfg.wavevectors[1] - cfg.wavevectors[2];
    return {comp(k13), comp(k23)};
}

inline GaugePotentials gauge_closed_form(const TripodConfig& cfg) {
    GaugePotentials g;
    g.M_matrix = m_matrix();
    const Vec3 k13 = cfg.wavevectors[0] - cfg.wavevectors[2];
    const Vec3 k23 = cfg.wavevectors[1] - cfg.wavevectors[2];
    for (int c = 0; c < 3; ++c) {
        const auto kap = kappa_component(cfg, c);
        g.A[c] = connection_omega_t(kap[0], kap[1]);
    }
    CMat2 asq = CMat2::zero();
    for (int c = 0; c < 3; ++c) asq = asq + g.A[c] * g.A[c];
    const double k2 = cfg.k() * cfg.k();
    g.Asq_over_2M = (cfg.omega_R / k2) * asq;

    // grad matrix <grad D_j | grad D_k> from the analytic derivatives
    const double a = k13.dot(k13), b = k23.dot(k23);
    CMat2 grad;
    grad(0, 0) = 0.5 * (a + b);
    grad(0, 1) = (a - b) / (2.0 * std::sqrt(3.0));
    grad(1, 0) = grad(0, 1);
    grad(1, 1) = (a + b) / 6.0;
    g.W = (cfg.omega_R / k2) * (grad - asq);

    const EigenH<2> e = eigen_hermitian(g.Asq_over_2M + g.W);
    g.scalar_gap = e.val[1] - e.val[0];
    g.closed_form = true;
    return g;
}

inline GaugePotentials gauge_finite_difference(const TripodConfig& cfg,
                                               double step_um) {
    GaugePotentials g;
    g.M_matrix = m_matrix();
    const Vec3 r0{};
    const double p1 = cfg.offset_phases[0] - cfg.offset_phases[2];
    const double p2 = cfg.offset_phases[1] - cfg.offset_phases[2];
    const DarkFrame f0 = dark_basis(cfg, r0, p1, p2);

    // The analytic gauge fixing keeps the frame smooth in r, so the stencil
    // frames are used exactly as returned (re-phasing them would erase the
    // diagonal of the connection). Frame jumps across the stencil signal a
    // gauge branch switch and are reported as errors.
    std::array<std::array<CVec4, 2>, 3> grad{};  // d D_k / d r_c
    double worst_jump = 0.0;
    for (int c = 0; c < 3; ++c) {
        Vec3 dr{};
        (c == 0 ? dr.x : c == 1 ? dr.y : dr.z) = step_um;
        const DarkFrame fp = dark_basis(cfg, r0 + dr, p1, p2);
        const DarkFrame fm = dark_basis(cfg, r0 - dr, p1, p2);
        for (std::size_t kv = 0; kv < 2; ++kv) {
            worst_jump = std::max({worst_jump, norm(fp.d[kv] - f0.d[kv]),
                                   norm(fm.d[kv] - f0.d[kv])});
            grad[c][kv] = (1.0 / (2.0 * step_um)) * (fp.d[kv] - fm.d[kv]);
        }
    }
    g.fd_residual = worst_jump;
    if (worst_jump > 0.1)
        throw invalid_input("gauge_potentials: dark frame discontinuous across the "
                            "finite-difference stencil");

    for (int c = 0; c < 3; ++c) {
        CMat2 a;
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t kv = 0; kv < 2; ++kv)
                a(j, kv) = cplx(0.0, 1.0) * inner(f0.d[j], grad[c][kv]);
        g.A[c] = 0.5 * (a + adjoint(a));  // Hermitize the stencil error away
    }
    CMat2 asq = CMat2::zero();
    for (int c = 0; c < 3; ++c) asq = asq + g.A[c] * g.A[c];
    const double k2 = cfg.k() * cfg.k();
    g.Asq_over_2M = (cfg.omega_R / k2) * asq;

    CMat2 gradm;
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t kv = 0; kv < 2; ++kv) {
            cplx acc{};
            for (int c = 0; c < 3; ++c) acc += inner(grad[c][j], grad[c][kv]);
            gradm(j, kv) = acc;
        }
    gradm = 0.5 * (gradm + adjoint(gradm));
    g.W = (cfg.omega_R / k2) * (gradm - asq);

    const EigenH<2> e = eigen_hermitian(g.Asq_over_2M + g.W);
    g.scalar_gap = e.val[1] - e.val[0];
    g.closed_form = false;
    return g;
}

} // namespace detail

// A_jk = i <D_j | grad D_k> and the scalar potential of the dark manifold.
// Equal Rabi amplitudes use the analytic derivatives of the dark basis; any
// other configuration falls back to central finite differences (default step
// 1e-4 of a wavelength).
inline GaugePotentials gauge_potentials(const TripodConfig& cfg,
                                        double fd_step_um = -1.0) {
    cfg.validate();
    if (cfg.equal_rabi() && fd_step_um <= 0.0) return detail::gauge_closed_form(cfg);
    const double h = fd_step_um > 0.0
                         ? fd_step_um
                         : 1e-4 * (2.0 * std::numbers::pi / cfg.k());
    return detail::gauge_finite_difference(cfg, h);
}

} // namespace tripod

#endif
