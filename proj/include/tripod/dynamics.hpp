#ifndef TRIPOD_DYNAMICS_HPP
#define TRIPOD_DYNAMICS_HPP

// Time evolution. Two integrators share one fixed-step RK4 core with an
// automatic step-halving policy (halve until no sampled population moves by
// more than 1e-8, then keep that step):
//
//  * evolve_full   - the 4-level oracle. For an initial plane wave the bare
//    components belong to one momentum family, so the exact dynamics is the
//    coupling Hamiltonian plus a kinetic diagonal
//        delta_i = v.(k3 - k_i) + omega_R |k3 - k_i|^2 / k^2,
//        delta_e = v.k3 + omega_R.
//    A classical trajectory r(t) = r0 + v t would reproduce the Doppler part
//    of delta but drop the recoil part, which drives the observable
//    (4/3) omega_R oscillation; the kinetic diagonal keeps both.
//
//  * evolve_adiabatic - the dark-manifold model
//        i d' = [ (A^2/2M + W) - A.v - omega_t(t) ] d.
//
// Position is fixed at r0 = 0: with this beam geometry the gauge field is
// uniform and only the velocity enters, through Doppler rates and recoil.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "tripod/errors.hpp"
#include "tripod/holonomy.hpp"
#include "tripod/model.hpp"
#include "tripod/qmath.hpp"

namespace tripod {

enum class EnvelopeShape { linear, sine2 };

// Piecewise schedule of Rabi envelopes and controlled phases. Within an
// interval the phases move linearly; the envelopes interpolate linearly or
// with a smooth sine^2 progress. Envelopes may jump between intervals
// (abrupt beam switching); phases must stay continuous.
struct Schedule {
    struct Interval {
        double t0 = 0.0, t1 = 0.0;
        std::array<double, 3> om0{}, om1{};   // rad/us
        std::array<double, 2> ph0{}, ph1{};   // (phi1, phi2), rad
        EnvelopeShape env = EnvelopeShape::linear;
    };

    std::vector<Interval> intervals;

    double t_begin() const { return intervals.front().t0; }
    double t_end() const { return intervals.back().t1; }

    void validate() const {
        if (intervals.empty()) throw invalid_input("Schedule: empty");
        for (const auto& iv : intervals) {
            if (!(iv.t1 > iv.t0)) throw invalid_input("Schedule: grid must be increasing");
            for (int i = 0; i < 3; ++i)
                if (iv.om0[i] < 0.0 || iv.om1[i] < 0.0)
                    throw invalid_input("Schedule: envelopes must be >= 0");
        }
        for (std::size_t i = 0; i + 1 < intervals.size(); ++i) {
            if (std::abs(intervals[i].t1 - intervals[i + 1].t0) > 1e-12)
                throw invalid_input("Schedule: intervals must be contiguous");
            for (int c = 0; c < 2; ++c)
                if (std::abs(intervals[i].ph1[c] - intervals[i + 1].ph0[c]) > 1e-9)
                    throw invalid_input("Schedule: phases must be continuous");
        }
    }

    static double progress(EnvelopeShape env, double x) {
        if (env == EnvelopeShape::linear) return x;
        const double s = std::sin(0.5 * std::numbers::pi * x);
        return s * s;
    }

    // Envelope rates and sweep rates jump between intervals, so a bare time
    // is ambiguous exactly at a boundary. Integration code resolves the
    // interval once per span (which never straddles a boundary) and evaluates
    // all Runge-Kutta stages against that interval.
    const Interval& at(double t) const {
        for (const auto& iv : intervals)
            if (t <= iv.t1 + 1e-12) return iv;
        return intervals.back();
    }

    const Interval& interval_for_span(double ta, double tb) const {
        return at(0.5 * (ta + tb));
    }

    static std::array<double, 3> omegas_in(const Interval& iv, double t) {
        const double x = std::clamp((t - iv.t0) / (iv.t1 - iv.t0), 0.0, 1.0);
        const double p = progress(iv.env, x);
        return {iv.om0[0] + p * (iv.om1[0] - iv.om0[0]),
                iv.om0[1] + p * (iv.om1[1] - iv.om0[1]),
                iv.om0[2] + p * (iv.om1[2] - iv.om0[2])};
    }

    static std::array<double, 2> phases_in(const Interval& iv, double t) {
        const double x = std::clamp((t - iv.t0) / (iv.t1 - iv.t0), 0.0, 1.0);
        return {iv.ph0[0] + x * (iv.ph1[0] - iv.ph0[0]),
                iv.ph0[1] + x * (iv.ph1[1] - iv.ph0[1])};
    }

    static std::array<double, 2> phase_rates_in(const Interval& iv) {
        return {(iv.ph1[0] - iv.ph0[0]) / (iv.t1 - iv.t0),
                (iv.ph1[1] - iv.ph0[1]) / (iv.t1 - iv.t0)};
    }

    std::array<double, 3> omegas(double t) const { return omegas_in(at(t), t); }
    std::array<double, 2> phases(double t) const { return phases_in(at(t), t); }
    std::array<double, 2> phase_rates(double t) const { return phase_rates_in(at(t)); }

    // Largest angular-frequency scale present, used to seed the step choice.
    double frequency_scale() const {
        double f = phase_rate_scale();
        for (const auto& iv : intervals)
            for (int i = 0; i < 3; ++i)
                f = std::max({f, std::sqrt(3.0) * iv.om0[i], std::sqrt(3.0) * iv.om1[i]});
        return f;
    }

    double phase_rate_scale() const {
        double f = 0.0;
        for (const auto& iv : intervals)
            f = std::max({f, std::abs(iv.ph1[0] - iv.ph0[0]) / (iv.t1 - iv.t0),
                          std::abs(iv.ph1[1] - iv.ph0[1]) / (iv.t1 - iv.t0)});
        return f;
    }

    static Schedule constant(const std::array<double, 3>& om,
                             const std::array<double, 2>& ph, double duration) {
        Schedule s;
        s.intervals.push_back({0.0, duration, om, om, ph, ph, EnvelopeShape::linear});
        return s;
    }

    static Schedule from_loop(const PhaseLoop& loop, const std::array<double, 3>& om) {
        loop.validate();
        Schedule s;
        double t = 0.0;
        for (const auto& seg : loop.segments) {
            s.intervals.push_back({t, t + seg.dt, om, om, seg.from, seg.to,
                                   EnvelopeShape::linear});
            t += seg.dt;
        }
        return s;
    }

    // Beams 1 and 2 on abruptly, beam 3 ramped over t0.
    static Schedule ignition_d2(double omega, double t0,
                                EnvelopeShape env = EnvelopeShape::linear) {
        Schedule s;
        s.intervals.push_back({0.0, t0, {omega, omega, 0.0}, {omega, omega, omega},
                               {0.0, 0.0}, {0.0, 0.0}, env});
        return s;
    }

    // Beam 1 on abruptly, beam 3 ramped; beam 2 stays off (it is switched on
    // abruptly at the end, which leaves the state untouched).
    static Schedule ignition_mixed(double omega, double t0,
                                   EnvelopeShape env = EnvelopeShape::linear) {
        Schedule s;
        s.intervals.push_back({0.0, t0, {omega, 0.0, 0.0}, {omega, 0.0, omega},
                               {0.0, 0.0}, {0.0, 0.0}, env});
        return s;
    }
};

// Kinetic diagonal of the momentum family built on |3>.
inline std::array<double, 4> kinetic_diagonal(const TripodConfig& cfg, const Vec3& v) {
    const double k2 = cfg.k() * cfg.k();
    std::array<double, 4> d{};
    for (int i = 0; i < 3; ++i) {
        const Vec3 q = cfg.wavevectors[2] - cfg.wavevectors[i];
        d[i] = v.dot(q) + cfg.omega_R * q.dot(q) / k2;
    }
    d[3] = v.dot(cfg.wavevectors[2]) + cfg.omega_R;
    return d;
}

struct IntegratorOptions {
    double pop_tol = 1e-8;      // halving criterion on sampled populations
    double sample_dt = 0.25;    // us between recorded samples
    int max_halvings = 10;
    double initial_phase_per_step = 0.02;  // rad of the fastest scale per step
};

struct FullTrajectory {
    std::vector<double> t;
    std::vector<std::array<double, 4>> pops;  // P1 P2 P3 Pe
    CVec4 final_state;
    double max_excited = 0.0;   // max |<e|psi>|^2 over the run
    double norm_drift = 0.0;
    double step = 0.0;
    int halvings = 0;
};

struct DarkTrajectory {
    std::vector<double> t;
    std::vector<std::array<double, 3>> pops;  // bare P1 P2 P3
    std::vector<CVec2> states;                // dark amplitudes at the samples
    CVec2 final_state;
    double step = 0.0;
    int halvings = 0;
};

namespace detail {

template <typename State, typename Deriv>
State rk4_step(const Deriv& f, const State& y, double t, double h) {
    const State k1 = f(t, y);
    State y2 = y;
    for (std::size_t i = 0; i < y.v.size(); ++i) y2[i] = y[i] + 0.5 * h * k1[i];
    const State k2 = f(t + 0.5 * h, y2);
    for (std::size_t i = 0; i < y.v.size(); ++i) y2[i] = y[i] + 0.5 * h * k2[i];
    const State k3 = f(t + 0.5 * h, y2);
    for (std::size_t i = 0; i < y.v.size(); ++i) y2[i] = y[i] + h * k3[i];
    const State k4 = f(t + h, y2);
    State out = y;
    for (std::size_t i = 0; i < y.v.size(); ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

inline std::vector<double> sample_times(const Schedule& sch, double sample_dt) {
    std::vector<double> ts;
    ts.push_back(sch.t_begin());
    for (const auto& iv : sch.intervals) {
        const int n = std::max(1, static_cast<int>(std::ceil((iv.t1 - iv.t0) / sample_dt)));
        for (int i = 1; i <= n; ++i) ts.push_back(iv.t0 + (iv.t1 - iv.t0) * i / n);
    }
    return ts;
}

// Integrate across [ta, tb] with steps no longer than h.
template <typename State, typename Deriv>
State integrate_span(const Deriv& f, State y, double ta, double tb, double h) {
    const int n = std::max(1, static_cast<int>(std::ceil((tb - ta) / h - 1e-12)));
    const double hh = (tb - ta) / n;
    for (int i = 0; i < n; ++i) y = rk4_step(f, y, ta + i * hh, hh);
    return y;
}

// Same, additionally tracking the running maximum of |<e|psi>|^2.
template <typename Deriv>
CVec4 integrate_span_track_e(const Deriv& f, CVec4 y, double ta, double tb, double h,
                             double& max_e) {
    const int n = std::max(1, static_cast<int>(std::ceil((tb - ta) / h - 1e-12)));
    const double hh = (tb - ta) / n;
    for (int i = 0; i < n; ++i) {
        y = rk4_step(f, y, ta + i * hh, hh);
        max_e = std::max(max_e, std::norm(y[3]));
    }
    return y;
}

} // namespace detail

// Exact 4-level Schrodinger integration for one velocity class.
inline FullTrajectory evolve_full(const TripodConfig& cfg, const Schedule& sch,
                                  const Vec3& v, const CVec4& psi0,
                                  const IntegratorOptions& opt = {}) {
    cfg.validate();
    sch.validate();
    if (std::abs(norm(psi0) - 1.0) > 1e-8)
        throw invalid_input("evolve_full: initial state must be normalized");

    const auto kin = kinetic_diagonal(cfg, v);
    const auto deriv_in = [&](const Schedule::Interval& iv, double t, const CVec4& y) {
        const auto om = Schedule::omegas_in(iv, t);
        const auto ph = Schedule::phases_in(iv, t);
        CVec4 dy;
        // -i H y with H = diag(kin) + coupling(om, (ph1, ph2, 0))
        const cplx c1 = 0.5 * om[0] * std::exp(cplx(0.0, ph[0]));
        const cplx c2 = 0.5 * om[1] * std::exp(cplx(0.0, ph[1]));
        const cplx c3 = cplx(0.5 * om[2], 0.0);
        const cplx mi(0.0, -1.0);
        dy[0] = mi * (kin[0] * y[0] + std::conj(c1) * y[3]);
        dy[1] = mi * (kin[1] * y[1] + std::conj(c2) * y[3]);
        dy[2] = mi * (kin[2] * y[2] + std::conj(c3) * y[3]);
        dy[3] = mi * (kin[3] * y[3] + c1 * y[0] + c2 * y[1] + c3 * y[2]);
        return dy;
    };

    double fscale = sch.frequency_scale();
    for (double d : kin) fscale = std::max(fscale, std::abs(d));
    double h = opt.initial_phase_per_step / std::max(fscale, 1e-6);

    const auto ts = detail::sample_times(sch, opt.sample_dt);
    auto run = [&](double step) {
        FullTrajectory tr;
        tr.step = step;
        CVec4 psi = psi0;
        tr.t.push_back(ts.front());
        tr.pops.push_back({std::norm(psi[0]), std::norm(psi[1]), std::norm(psi[2]),
                           std::norm(psi[3])});
        tr.max_excited = std::norm(psi[3]);
        for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
            const Schedule::Interval& iv = sch.interval_for_span(ts[i], ts[i + 1]);
            const auto deriv = [&](double t, const CVec4& y) { return deriv_in(iv, t, y); };
            psi = detail::integrate_span_track_e(deriv, psi, ts[i], ts[i + 1], step,
                                                 tr.max_excited);
            tr.t.push_back(ts[i + 1]);
            tr.pops.push_back({std::norm(psi[0]), std::norm(psi[1]), std::norm(psi[2]),
                               std::norm(psi[3])});
        }
        tr.final_state = psi;
        tr.norm_drift = std::abs(norm(psi) - 1.0);
        return tr;
    };

    FullTrajectory coarse = run(h);
    for (int halvings = 0;; ++halvings) {
        if (halvings >= opt.max_halvings)
            throw step_size_failure("evolve_full: step halving did not converge");
        FullTrajectory fine = run(0.5 * coarse.step);
        double dmax = 0.0;
        for (std::size_t i = 0; i < fine.pops.size(); ++i)
            for (int c = 0; c < 4; ++c)
                dmax = std::max(dmax, std::abs(fine.pops[i][c] - coarse.pops[i][c]));
        if (dmax < opt.pop_tol) {
            fine.halvings = halvings + 1;
            if (fine.norm_drift > 1e-6)
                throw step_size_failure("evolve_full: norm drift above 1e-6");
            return fine;
        }
        coarse = fine;
    }
}

// Effective dark-manifold evolution at fixed velocity. Requires equal Rabi
// amplitudes (the connection below is derived for that basis).
inline DarkTrajectory evolve_adiabatic(const TripodConfig& cfg, const Schedule& sch,
                                       const Vec3& v, const CVec2& d0,
                                       const IntegratorOptions& opt = {}) {
    cfg.validate();
    sch.validate();
    if (!cfg.equal_rabi(1e-9))
        throw invalid_input("evolve_adiabatic: requires equal Rabi amplitudes");
    if (std::abs(norm(d0) - 1.0) > 1e-8)
        throw invalid_input("evolve_adiabatic: initial state must be normalized");

    const GaugePotentials g = gauge_potentials(cfg);
    CMat2 e_scalar = g.Asq_over_2M + g.W;
    const std::array<double, 3> vc = {v.x, v.y, v.z};
    for (int c = 0; c < 3; ++c)
        if (vc[c] != 0.0) e_scalar = e_scalar - vc[c] * g.A[c];

    // the dark-manifold equation only contains phase rates and the scalar
    const double fscale = std::max({sch.phase_rate_scale(), max_abs(e_scalar), 1e-6});
    double h = opt.initial_phase_per_step / fscale;

    const auto ts = detail::sample_times(sch, opt.sample_dt);
    auto pops_at = [&](const CVec2& d, double t) {
        const auto ph = sch.phases(t);
        const DarkFrame f = dark_basis(cfg, Vec3{}, ph[0], ph[1]);
        std::array<double, 3> p{};
        for (int i = 0; i < 3; ++i) {
            const cplx a = d[0] * f.d[0][i] + d[1] * f.d[1][i];
            p[i] = std::norm(a);
        }
        return p;
    };
    auto run = [&](double step) {
        DarkTrajectory tr;
        tr.step = step;
        CVec2 d = d0;
        tr.t.push_back(ts.front());
        tr.pops.push_back(pops_at(d, ts.front()));
        tr.states.push_back(d);
        for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
            const Schedule::Interval& iv = sch.interval_for_span(ts[i], ts[i + 1]);
            const auto rt = Schedule::phase_rates_in(iv);
            const CMat2 hm = e_scalar - connection_omega_t(rt[0], rt[1]);
            const auto deriv = [&](double, const CVec2& y) {
                CVec2 dy;
                const cplx mi(0.0, -1.0);
                dy[0] = mi * (hm(0, 0) * y[0] + hm(0, 1) * y[1]);
                dy[1] = mi * (hm(1, 0) * y[0] + hm(1, 1) * y[1]);
                return dy;
            };
            d = detail::integrate_span(deriv, d, ts[i], ts[i + 1], step);
            tr.t.push_back(ts[i + 1]);
            tr.pops.push_back(pops_at(d, ts[i + 1]));
            tr.states.push_back(d);
        }
        tr.final_state = d;
        return tr;
    };

    DarkTrajectory coarse = run(h);
    for (int halvings = 0;; ++halvings) {
        if (halvings >= opt.max_halvings)
            throw step_size_failure("evolve_adiabatic: step halving did not converge");
        DarkTrajectory fine = run(0.5 * coarse.step);
        double dmax = 0.0;
        for (std::size_t i = 0; i < fine.pops.size(); ++i)
            for (int c = 0; c < 3; ++c)
                dmax = std::max(dmax, std::abs(fine.pops[i][c] - coarse.pops[i][c]));
        if (dmax < opt.pop_tol) {
            fine.halvings = halvings + 1;
            if (std::abs(norm(fine.final_state) - 1.0) > 1e-6)
                throw step_size_failure("evolve_adiabatic: norm drift above 1e-6");
            return fine;
        }
        coarse = fine;
    }
}

// Closed-form ballistic populations of |D2> at fixed velocity:
//   P1 = (5 P0/12)(1 - 3/5 cos w_v t),  P2 = P0/6,  P3 = (5 P0/12)(1 + ...),
//   w_v = (2/3)[k (v_x - v_y) + 2 omega_R].
inline double velocity_frequency(const TripodConfig& cfg, const Vec3& v) {
    return (2.0 / 3.0) * (cfg.k() * (v.x - v.y) + 2.0 * cfg.omega_R);
}

inline std::array<double, 3> ballistic_populations(const TripodConfig& cfg, const Vec3& v,
                                                   double t, double weight = 1.0) {
    if (t < 0.0) throw invalid_input("ballistic_populations: t must be >= 0");
    const double c = std::cos(velocity_frequency(cfg, v) * t);
    return {weight * 5.0 / 12.0 * (1.0 - 0.6 * c), weight / 6.0,
            weight * 5.0 / 12.0 * (1.0 + 0.6 * c)};
}

// P_i = |sum_j d_j <i|D_j>|^2
inline std::array<double, 3> bare_populations(const CVec2& d, const DarkFrame& f) {
    if (std::abs(norm(d) - 1.0) > 1e-6)
        throw invalid_input("bare_populations: dark vector must be normalized");
    std::array<double, 3> p{};
    for (int i = 0; i < 3; ++i) p[i] = std::norm(d[0] * f.d[0][i] + d[1] * f.d[1][i]);
    return p;
}

// ---------------------------------------------------------------------------
// Ignition sequences
// ---------------------------------------------------------------------------

enum class IgnitionStyle { D2, mixed };

struct IgnitionResult {
    CVec2 dark;               // projection onto (D1, D2), not normalized
    double dark_weight = 0.0; // |dark|^2
    double fidelity = 0.0;    // |<D2|psi>|^2 (D2 style) or dark_weight (mixed)
    double max_excited = 0.0;
    bool preparation_failure = false;  // excited leakage above 5%
};

// Starting from bare |3>, turn the beams on per the requested sequence and
// return the dark amplitudes. The final abrupt switch of the remaining beam
// projects without evolving, so the projection happens here analytically.
inline IgnitionResult ignite(const TripodConfig& cfg, IgnitionStyle style,
                             double t0_us = 8.0,
                             EnvelopeShape env = EnvelopeShape::linear,
                             const IntegratorOptions& opt_in = {}) {
    cfg.validate();
    if (!cfg.equal_rabi(1e-9))
        throw invalid_input("ignite: requires equal target Rabi amplitudes");
    const double om = cfg.rabi[0];
    const Schedule sch = (style == IgnitionStyle::D2)
                             ? Schedule::ignition_d2(om, t0_us, env)
                             : Schedule::ignition_mixed(om, t0_us, env);
    IntegratorOptions opt = opt_in;
    opt.sample_dt = std::min(opt.sample_dt, t0_us / 32.0);
    CVec4 psi0;
    psi0[2] = 1.0;
    const FullTrajectory tr = evolve_full(cfg, sch, Vec3{}, psi0, opt);

    const DarkFrame f = dark_basis(cfg, Vec3{}, 0.0, 0.0);
    IgnitionResult res;
    res.dark[0] = inner(f.d[0], tr.final_state);
    res.dark[1] = inner(f.d[1], tr.final_state);
    res.dark_weight = std::norm(res.dark[0]) + std::norm(res.dark[1]);
    res.max_excited = tr.max_excited;
    res.fidelity = (style == IgnitionStyle::D2) ? std::norm(res.dark[1]) : res.dark_weight;
    res.preparation_failure = res.max_excited > 0.05;
    return res;
}

// The mixed preparation actually realized in the lab, kept as a named preset.
inline CVec2 mixed_preparation_preset() {
    return CVec2{{cplx(0.6, 0.0), 0.8 * std::exp(cplx(0.0, 0.15 * std::numbers::pi))}};
}

inline CVec2 ideal_mixed_state() {
    return CVec2{{cplx(0.5, 0.0), cplx(std::sqrt(3.0) / 2.0, 0.0)}};
}

} // namespace tripod

#endif
