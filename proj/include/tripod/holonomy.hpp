#ifndef TRIPOD_HOLONOMY_HPP
#define TRIPOD_HOLONOMY_HPP

// Path-ordered holonomies over loops in the (phi1, phi2) laser-phase plane.
//
// Operator ordering convention, fixed project-wide: states evolve as
// psi <- U_segment psi with segments applied left-multiplicatively in
// traversal order, so a loop with segments a, b, c gives U = U_c U_b U_a.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "tripod/errors.hpp"
#include "tripod/model.hpp"
#include "tripod/qmath.hpp"

namespace tripod {

struct PhaseSegment {
    std::array<double, 2> from{0.0, 0.0};  // (phi1, phi2) at segment start, rad
    std::array<double, 2> to{0.0, 0.0};
    double dt = 4.0;                       // us

    std::array<double, 2> delta() const { return {to[0] - from[0], to[1] - from[1]}; }
    std::array<double, 2> rates() const { return {delta()[0] / dt, delta()[1] / dt}; }
};

struct PhaseLoop {
    std::vector<PhaseSegment> segments;

    std::size_t size() const { return segments.size(); }

    bool chained(double tol = 1e-9) const {
        for (std::size_t i = 0; i + 1 < segments.size(); ++i)
            if (std::abs(segments[i].to[0] - segments[i + 1].from[0]) > tol ||
                std::abs(segments[i].to[1] - segments[i + 1].from[1]) > tol)
                return false;
        return true;
    }

    bool closed(double tol = 1e-9) const {
        if (segments.empty() || !chained(tol)) return false;
        return std::abs(segments.back().to[0] - segments.front().from[0]) <= tol &&
               std::abs(segments.back().to[1] - segments.front().from[1]) <= tol;
    }

    double duration() const {
        double t = 0.0;
        for (const auto& s : segments) t += s.dt;
        return t;
    }

    void validate() const {
        if (segments.empty()) throw invalid_loop("empty loop");
        for (const auto& s : segments)
            if (!(s.dt > 0.0)) throw invalid_loop("segment durations must be positive");
        if (!chained()) throw invalid_loop("segment endpoints do not chain");
    }
};

// The triangle used throughout: a (0,0)->(phi0,0), b ->(phi0,phi0), c ->(0,0).
inline PhaseLoop canonical_loop(double phi0, double dt_us = 4.0) {
    PhaseLoop l;
    l.segments = {
        {{0.0, 0.0}, {phi0, 0.0}, dt_us},
        {{phi0, 0.0}, {phi0, phi0}, dt_us},
        {{phi0, phi0}, {0.0, 0.0}, dt_us},
    };
    return l;
}

// Constant-rate segment: omega_t is constant, so the path-ordered exponential
// is exact. The phase increments alone fix the result; the duration drops out.
inline CMat2 segment_unitary(const PhaseSegment& seg) {
    const auto d = seg.delta();
    return exp_i_hermitian(connection_omega_t(d[0], d[1]), 1.0);
}

// Path-ordered product over a closed loop. Each linear segment is exact, so
// the result is independent of steps_per_segment; values > 1 subdivide the
// segments and exist as a cross-check mode (and for sampled, non-linear
// ramps, see holonomy_sampled).
inline CMat2 holonomy(const PhaseLoop& loop, int steps_per_segment = 1) {
    loop.validate();
    if (!loop.closed()) throw invalid_loop("holonomy: loop is not closed");
    if (steps_per_segment < 1) throw invalid_input("steps_per_segment must be >= 1");
    CMat2 u = CMat2::identity();
    for (const auto& seg : loop.segments) {
        const auto d = seg.delta();
        const CMat2 us = exp_i_hermitian(
            connection_omega_t(d[0] / steps_per_segment, d[1] / steps_per_segment), 1.0);
        for (int s = 0; s < steps_per_segment; ++s) u = us * u;
    }
    return u;
}

// Ordered product for an arbitrary sampled path phi(t): chord rule per step,
// first-order accurate in the number of samples for curved ramps.
inline CMat2 holonomy_sampled(const std::function<std::array<double, 2>(double)>& phi,
                              double t_total, int steps) {
    if (steps < 1) throw invalid_input("holonomy_sampled: steps must be >= 1");
    CMat2 u = CMat2::identity();
    const double h = t_total / steps;
    for (int s = 0; s < steps; ++s) {
        const auto p0 = phi(s * h);
        const auto p1 = phi((s + 1) * h);
        u = exp_i_hermitian(connection_omega_t(p1[0] - p0[0], p1[1] - p0[1]), 1.0) * u;
    }
    return u;
}

// Same geometric loop entered at a different vertex. start_vertex counts the
// segment whose start point becomes the new origin of traversal.
inline PhaseLoop cyclic_shift(const PhaseLoop& loop, std::size_t start_vertex) {
    loop.validate();
    if (!loop.closed()) throw invalid_loop("cyclic_shift: loop is not closed");
    if (start_vertex > loop.size())
        throw invalid_loop("cyclic_shift: vertex index out of range");
    const std::size_t n = loop.size();
    const std::size_t k = start_vertex % n;
    PhaseLoop out;
    out.segments.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.segments.push_back(loop.segments[(k + i) % n]);
    return out;
}

inline PhaseLoop reversed(const PhaseLoop& loop) {
    PhaseLoop out;
    out.segments.reserve(loop.size());
    for (auto it = loop.segments.rbegin(); it != loop.segments.rend(); ++it) {
        PhaseSegment s;
        s.from = it->to;
        s.to = it->from;
        s.dt = it->dt;
        out.segments.push_back(s);
    }
    return out;
}

// Holonomy of the open path made of the first n_segments of the loop.
inline CMat2 open_path_unitary(const PhaseLoop& loop, std::size_t n_segments) {
    if (n_segments > loop.size()) throw invalid_loop("open_path_unitary: too many segments");
    CMat2 u = CMat2::identity();
    for (std::size_t i = 0; i < n_segments; ++i) u = segment_unitary(loop.segments[i]) * u;
    return u;
}

struct WitnessReport {
    CMat2 U;            // loop from its given start
    CMat2 U_shifted;    // same loop entered at start_vertex
    double D = 0.0;     // sqrt(2 - |Tr|)
    double D_tilde = 0.0;
    double conjugacy_defect = 0.0;   // max|U' - V U V^dag|
    double trace_mismatch = 0.0;     // ||Tr U| - |Tr U'||
    std::size_t start_vertex = 0;
};

// Compares the holonomy with the one obtained from a cyclically shifted start
// and verifies that the two are unitarily related: U' = V U V^dag with V the
// holonomy of the connecting open path. D > 0 witnesses non-Abelianity.
inline WitnessReport nonabelian_witness(const PhaseLoop& loop,
                                        std::size_t start_vertex = static_cast<std::size_t>(-1)) {
    loop.validate();
    if (!loop.closed()) throw invalid_loop("nonabelian_witness: loop is not closed");
    if (loop.size() < 2) throw invalid_loop("nonabelian_witness: need at least 2 segments");
    if (start_vertex == static_cast<std::size_t>(-1)) start_vertex = loop.size() - 1;

    WitnessReport r;
    r.start_vertex = start_vertex;
    r.U = holonomy(loop);
    r.U_shifted = holonomy(cyclic_shift(loop, start_vertex));
    r.D = frobenius_distance(r.U, r.U_shifted);
    r.D_tilde = frobenius_distance_tilde(r.U, r.U_shifted);
    const CMat2 v = open_path_unitary(loop, start_vertex);
    r.conjugacy_defect = max_abs_diff(r.U_shifted, v * r.U * adjoint(v));
    r.trace_mismatch = std::abs(std::abs(trace(r.U)) - std::abs(trace(r.U_shifted)));
    return r;
}

// Exact dark-manifold propagator of the loop for an atom at rest with finite
// mass: each linear segment evolves under the constant matrix
// E_scalar - omega_t(rates), E_scalar = (A^2/2M + W) - A.v. This is the
// "pinned" holonomy dressed by the recoil scalar; it reduces to holonomy()
// when omega_R = 0 and v = 0.
inline CMat2 loop_propagator(const TripodConfig& cfg, const PhaseLoop& loop,
                             const Vec3& velocity = Vec3{}) {
    loop.validate();
    const GaugePotentials g = gauge_potentials(cfg);
    CMat2 e_scalar = g.Asq_over_2M + g.W;
    for (int c = 0; c < 3; ++c) {
        const double vc = (c == 0 ? velocity.x : c == 1 ? velocity.y : velocity.z);
        if (vc != 0.0) e_scalar = e_scalar - vc * g.A[c];
    }
    CMat2 u = CMat2::identity();
    for (const auto& seg : loop.segments) {
        const auto rt = seg.rates();
        const CMat2 h = e_scalar - connection_omega_t(rt[0], rt[1]);
        u = exp_i_hermitian(h, -seg.dt) * u;  // exp(-i h dt)
    }
    return u;
}

} // namespace tripod

#endif
