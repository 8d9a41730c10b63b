#ifndef TRIPOD_THERMAL_HPP
#define TRIPOD_THERMAL_HPP

// Maxwell-Boltzmann ensemble averaging over the dark-manifold dynamics.
//
// With beams 1 and 3 co-propagating along x and beam 2 along y, both the
// Doppler rates and A.v depend on the velocity only through u = v_x - v_y,
// which is Gaussian with standard deviation sqrt(2) vbar. Averages are
// therefore 1-D Gauss-Hermite quadratures over u; a seeded Monte-Carlo mode
// with full 3-D velocity sampling exists to validate that reduction.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include "tripod/dynamics.hpp"
#include "tripod/errors.hpp"
#include "tripod/holonomy.hpp"
#include "tripod/model.hpp"
#include "tripod/qmath.hpp"

namespace tripod {

struct ThermalSpec {
    double vbar = 0.0;          // um/us
    int quadrature_n = 64;
    bool monte_carlo = false;
    std::size_t mc_samples = 100000;
    std::uint64_t seed = 1;
    // static schedules admit an exact constant-H propagator per node; turn
    // this off to force every node through the RK4 integrator instead
    bool exact_static = true;

    void validate() const {
        if (vbar < 0.0) throw invalid_input("ThermalSpec: vbar must be >= 0");
        if (!monte_carlo && quadrature_n < 8)
            throw invalid_input("ThermalSpec: quadrature order must be >= 8");
        if (monte_carlo && mc_samples == 0)
            throw invalid_input("ThermalSpec: need at least one sample");
    }
};

// ---------------------------------------------------------------------------
// Gauss-Hermite nodes / deterministic Gaussian sampling
// ---------------------------------------------------------------------------

namespace detail {

// Symmetric tridiagonal QL with implicit shifts, tracking the first row of
// the eigenvector matrix (all that quadrature weights need).
inline void tql_first_row(std::vector<double>& d, std::vector<double>& e,
                          std::vector<double>& z) {
    const std::size_t n = d.size();
    for (std::size_t l = 0; l < n; ++l) {
        for (int iter = 0; iter < 64; ++iter) {
            std::size_t m = l;
            for (; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-16 * dd) break;
            }
            if (m == l) break;
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
            double s = 1.0, c = 1.0, p = 0.0;
            for (std::size_t i = m; i-- > l;) {
                double f = s * e[i], b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if (r == 0.0 && m > l) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    // insertion sort ascending
    for (std::size_t i = 1; i < n; ++i) {
        const double dv = d[i], zv = z[i];
        std::size_t j = i;
        while (j > 0 && d[j - 1] > dv) {
            d[j] = d[j - 1];
            z[j] = z[j - 1];
            --j;
        }
        d[j] = dv;
        z[j] = zv;
    }
}

} // namespace detail

struct GaussHermite {
    std::vector<double> x;  // nodes of integral exp(-x^2) f(x) dx
    std::vector<double> w;  // weights, sum = sqrt(pi)
};

// Golub-Welsch on the Hermite Jacobi matrix (off-diagonal sqrt(i/2)).
inline GaussHermite gauss_hermite(int n) {
    if (n < 1) throw invalid_input("gauss_hermite: order must be >= 1");
    std::vector<double> d(n, 0.0), e(n, 0.0), z(n, 0.0);
    for (int i = 1; i < n; ++i) e[i - 1] = std::sqrt(0.5 * i);
    z[0] = 1.0;
    detail::tql_first_row(d, e, z);
    GaussHermite gh;
    gh.x = d;
    gh.w.resize(n);
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    for (int i = 0; i < n; ++i) gh.w[i] = sqrt_pi * z[i] * z[i];
    return gh;
}

namespace detail {

// Deterministic standard normals: mt19937_64 + Box-Muller, independent of
// the standard library's distribution implementation.
class GaussianRng {
  public:
    explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}

    double operator()() {
        if (have_) {
            have_ = false;
            return cached_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 1e-300);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(a);
        have_ = true;
        return r * std::cos(a);
    }

  private:
    double uniform() {
        return (eng_() >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
    }
    std::mt19937_64 eng_;
    double cached_ = 0.0;
    bool have_ = false;
};

// Evaluate fn(i) for i in [0, n) on a few threads, results written to
// index-owned slots so the reduction order stays fixed.
template <typename Fn>
void parallel_for_index(std::size_t n, const Fn& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned wkr = 0; wkr < workers; ++wkr)
        pool.emplace_back([&, wkr] {
            for (std::size_t i = wkr; i < n; i += workers) fn(i);
        });
    for (auto& th : pool) th.join();
}

struct KahanAcc {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

} // namespace detail

// ---------------------------------------------------------------------------
// Closed-form thermal populations
// ---------------------------------------------------------------------------

// Velocity-averaged populations of |D2> under static beams:
//   P1 = 5/12 - (1/4) cos((4/3) wR t) exp[-(4/9)(k vbar t)^2],  P2 = 1/6,
//   P3 the mirror partner.
inline std::array<double, 3> mean_populations(const TripodConfig& cfg, double vbar,
                                              double t) {
    if (t < 0.0) throw invalid_input("mean_populations: t must be >= 0");
    const double phase = 4.0 / 3.0 * cfg.omega_R * t;
    const double arg = cfg.k() * vbar * t;
    const double env = std::exp(-4.0 / 9.0 * arg * arg);
    const double osc = 0.25 * std::cos(phase) * env;
    return {5.0 / 12.0 - osc, 1.0 / 6.0, 5.0 / 12.0 + osc};
}

inline double decoherence_time(const TripodConfig& cfg, double vbar) {
    if (!(vbar > 0.0)) throw invalid_input("decoherence_time: vbar must be positive");
    return 3.0 / (2.0 * cfg.k() * vbar);
}

// Tr(rho^2) with precondition checks (Hermitian, unit trace, PSD).
inline double purity(const CMat2& rho, double tol = 1e-8) {
    if (hermiticity_defect(rho) > tol)
        throw invalid_state("purity: density matrix is not Hermitian");
    if (std::abs(std::real(trace(rho)) - 1.0) > tol || std::abs(std::imag(trace(rho))) > tol)
        throw invalid_state("purity: density matrix must have unit trace");
    const EigenH<2> e = eigen_hermitian(0.5 * (rho + adjoint(rho)));
    if (e.val[0] < -tol || e.val[1] > 1.0 + tol)
        throw invalid_state("purity: eigenvalues outside [0, 1]");
    return std::real(trace(rho * rho));
}

// ---------------------------------------------------------------------------
// Ensemble averaging
// ---------------------------------------------------------------------------

struct EnsembleResult {
    std::vector<double> t;
    std::vector<std::array<double, 3>> pops;       // averaged P1 P2 P3
    std::vector<CMat2> rho;                        // dark density matrix
    std::vector<double> purity_t;                  // Tr rho(t)^2
    std::array<double, 3> final_pops{};
    CMat2 final_rho;
    double final_purity = 0.0;
    bool quadrature_converged = true;
    double quadrature_change = 0.0;  // outputs shift when n doubles
};

enum class Scenario { hold, loop };

namespace detail {

struct VelocityNode {
    Vec3 v;
    double weight;  // already normalized, sum = 1
};

inline std::vector<VelocityNode> velocity_nodes(const ThermalSpec& spec, int order) {
    std::vector<VelocityNode> nodes;
    if (spec.vbar == 0.0) {
        nodes.push_back({Vec3{}, 1.0});
        return nodes;
    }
    if (spec.monte_carlo) {
        GaussianRng rng(spec.seed);
        nodes.reserve(spec.mc_samples);
        const double w = 1.0 / static_cast<double>(spec.mc_samples);
        for (std::size_t i = 0; i < spec.mc_samples; ++i) {
            const Vec3 v{spec.vbar * rng(), spec.vbar * rng(), spec.vbar * rng()};
            nodes.push_back({v, w});
        }
        return nodes;
    }
    const GaussHermite gh = gauss_hermite(order);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    nodes.reserve(gh.x.size());
    for (std::size_t i = 0; i < gh.x.size(); ++i) {
        // u = vx - vy is N(0, 2 vbar^2); substitute u = 2 vbar x
        const double u = 2.0 * spec.vbar * gh.x[i];
        nodes.push_back({Vec3{u, 0.0, 0.0}, gh.w[i] * inv_sqrt_pi});
    }
    return nodes;
}

inline EnsembleResult ensemble_run(const TripodConfig& cfg, const ThermalSpec& spec,
                                   const Schedule& sch, const CVec2& d0, int order,
                                   double sample_dt) {
    const auto nodes = velocity_nodes(spec, order);
    const auto ts = detail::sample_times(sch, sample_dt);
    const std::size_t nt = ts.size();

    bool static_phases = spec.exact_static;
    for (const auto& iv : sch.intervals)
        if (std::abs(iv.ph1[0] - iv.ph0[0]) > 1e-15 ||
            std::abs(iv.ph1[1] - iv.ph0[1]) > 1e-15)
            static_phases = false;

    const GaugePotentials g = gauge_potentials(cfg);
    const CMat2 scalar_base = g.Asq_over_2M + g.W;
    IntegratorOptions opt;
    opt.sample_dt = sample_dt;

    // rho(t) accumulated chunk by chunk; fixed chunk boundaries keep the
    // reduction order (and hence the output bits) independent of the thread
    // count. Static schedules use the exact constant-H propagator per node.
    constexpr std::size_t chunk = 256;
    const std::size_t nchunks = (nodes.size() + chunk - 1) / chunk;
    std::vector<std::vector<std::array<double, 8>>> partial(
        nchunks, std::vector<std::array<double, 8>>(nt, std::array<double, 8>{}));

    detail::parallel_for_index(nchunks, [&](std::size_t ci) {
        std::vector<std::array<detail::KahanAcc, 8>> acc(nt);
        std::vector<CVec2> states;
        const std::size_t lo = ci * chunk;
        const std::size_t hi = std::min(nodes.size(), lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) {
            if (static_phases) {
                CMat2 h = scalar_base;
                const std::array<double, 3> vc = {nodes[i].v.x, nodes[i].v.y, nodes[i].v.z};
                for (int c = 0; c < 3; ++c)
                    if (vc[c] != 0.0) h = h - vc[c] * g.A[c];
                states.resize(nt);
                for (std::size_t s = 0; s < nt; ++s)
                    states[s] = exp_i_hermitian(h, -(ts[s] - ts.front())) * d0;
            } else {
                states = evolve_adiabatic(cfg, sch, nodes[i].v, d0, opt).states;
            }
            for (std::size_t s = 0; s < nt; ++s) {
                const CMat2 r = outer(states[s], states[s]);
                int k = 0;
                for (const auto& e : r.a) {
                    acc[s][k++].add(nodes[i].weight * std::real(e));
                    acc[s][k++].add(nodes[i].weight * std::imag(e));
                }
            }
        }
        for (std::size_t s = 0; s < nt; ++s)
            for (int k = 0; k < 8; ++k) partial[ci][s][k] = acc[s][k].s;
    });

    EnsembleResult res;
    res.t = ts;
    res.pops.resize(nt);
    res.rho.resize(nt);
    res.purity_t.resize(nt);
    for (std::size_t s = 0; s < nt; ++s) {
        std::array<detail::KahanAcc, 8> acc{};
        for (std::size_t ci = 0; ci < nchunks; ++ci)
            for (int k = 0; k < 8; ++k) acc[k].add(partial[ci][s][k]);
        CMat2 rho;
        int k = 0;
        for (auto& e : rho.a) {
            const double re = acc[k++].s;
            const double im = acc[k++].s;
            e = cplx(re, im);
        }
        // renormalize rounding in the trace
        const double tr = std::real(trace(rho));
        rho = (1.0 / tr) * rho;
        res.rho[s] = rho;
        res.purity_t[s] = std::real(trace(rho * rho));
        const auto ph = sch.phases(ts[s]);
        const DarkFrame f = dark_basis(cfg, Vec3{}, ph[0], ph[1]);
        for (int i = 0; i < 3; ++i) {
            CVec2 m{{std::conj(f.d[0][i]), std::conj(f.d[1][i])}};
            // P_i = m^dag rho m with m_j = <i|D_j>
            cplx p{};
            for (int a_ = 0; a_ < 2; ++a_)
                for (int b_ = 0; b_ < 2; ++b_)
                    p += std::conj(m[a_]) * rho(a_, b_) * m[b_];
            res.pops[s][i] = std::real(p);
        }
    }
    res.final_pops = res.pops.back();
    res.final_rho = res.rho.back();
    res.final_purity = res.purity_t.back();
    return res;
}

} // namespace detail

// Average the adiabatic dynamics over the velocity distribution, either for a
// static hold of the given duration or around a phase loop. Quadrature
// convergence is checked by doubling the order; failure is reported in the
// result, not thrown.
inline EnsembleResult ensemble_average(const TripodConfig& cfg, const ThermalSpec& spec,
                                       Scenario scenario, const CVec2& d0,
                                       double hold_duration_us = 12.0,
                                       const PhaseLoop& loop = PhaseLoop{},
                                       double sample_dt = 0.25) {
    cfg.validate();
    spec.validate();
    Schedule sch;
    if (scenario == Scenario::hold) {
        const double p1 = cfg.offset_phases[0] - cfg.offset_phases[2];
        const double p2 = cfg.offset_phases[1] - cfg.offset_phases[2];
        sch = Schedule::constant(cfg.rabi, {p1, p2}, hold_duration_us);
    } else {
        if (!loop.closed()) throw invalid_loop("ensemble_average: loop is not closed");
        sch = Schedule::from_loop(loop, cfg.rabi);
    }
    EnsembleResult res = detail::ensemble_run(cfg, spec, sch, d0, spec.quadrature_n,
                                              sample_dt);
    if (!spec.monte_carlo && spec.vbar > 0.0) {
        const EnsembleResult res2 = detail::ensemble_run(cfg, spec, sch, d0,
                                                         2 * spec.quadrature_n, sample_dt);
        double change = 0.0;
        for (int i = 0; i < 3; ++i)
            change = std::max(change, std::abs(res.final_pops[i] - res2.final_pops[i]));
        change = std::max(change, std::abs(res.final_purity - res2.final_purity));
        res.quadrature_change = change;
        res.quadrature_converged = change <= 1e-6;
    }
    return res;
}

// Velocity-averaged loop propagator <U(u)> and its closest unitary. The polar
// part is the effective thermal gate; the singular values of <U> drop below 1
// as the ensemble dephases.
struct AveragedPropagator {
    CMat2 mean;        // <U>, generally not unitary
    CMat2 unitary;     // polar factor of <U>
    double defect = 0.0;  // max|1 - singular value|
};

inline AveragedPropagator averaged_propagator(const TripodConfig& cfg,
                                              const ThermalSpec& spec,
                                              const PhaseLoop& loop) {
    cfg.validate();
    spec.validate();
    loop.validate();
    const auto nodes = detail::velocity_nodes(spec, spec.quadrature_n);
    std::vector<CMat2> us(nodes.size());
    detail::parallel_for_index(nodes.size(), [&](std::size_t i) {
        us[i] = loop_propagator(cfg, loop, nodes[i].v);
    });
    std::array<detail::KahanAcc, 8> acc{};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        int k = 0;
        for (const auto& e : us[i].a) {
            acc[k++].add(nodes[i].weight * std::real(e));
            acc[k++].add(nodes[i].weight * std::imag(e));
        }
    }
    AveragedPropagator ap;
    int k = 0;
    for (auto& e : ap.mean.a) {
        const double re = acc[k++].s;
        const double im = acc[k++].s;
        e = cplx(re, im);
    }
    ap.unitary = polar_unitary(ap.mean);
    const CMat2 p = adjoint(ap.unitary) * ap.mean;  // Hermitian positive factor
    const EigenH<2> e = eigen_hermitian(0.5 * (p + adjoint(p)));
    ap.defect = std::max(std::abs(1.0 - e.val[0]), std::abs(1.0 - e.val[1]));
    return ap;
}

// ---------------------------------------------------------------------------
// Thermal vs pinned distance
// ---------------------------------------------------------------------------

// Bare-population distance between the ensemble-averaged final state of the
// loop and the v = 0 prediction of the same model. Quantifies how much of the
// thermal decoherence survives; it shrinks as the geometric coupling grows.
inline double thermal_vs_pinned_distance(const TripodConfig& cfg, const ThermalSpec& spec,
                                         const PhaseLoop& loop, const CVec2& d0) {
    if (!loop.closed()) throw invalid_loop("thermal_vs_pinned_distance: open loop");
    const EnsembleResult th = ensemble_average(cfg, spec, Scenario::loop, d0, 0.0, loop);
    const CMat2 u0 = loop_propagator(cfg, loop, Vec3{});
    const CVec2 dp = u0 * d0;
    const auto phs = loop.segments.front().from;
    const DarkFrame f = dark_basis(cfg, Vec3{}, phs[0], phs[1]);
    const auto pin = bare_populations(normalized(dp), f);
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double dlt = th.final_pops[i] - pin[i];
        s += dlt * dlt;
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Interferometric thermometry
// ---------------------------------------------------------------------------

struct PopulationRecord {
    double t = 0.0;                 // us
    std::array<double, 3> pops{};   // P1 P2 P3
};

struct ThermometryFit {
    double vbar = 0.0;          // um/us
    double temperature_uK = 0.0;
    double residual = 0.0;      // rms of the fitted difference signal
    double amplitude = 0.5;     // fitted or fixed
    double offset = 0.0;
    bool no_decay = false;      // signal consistent with vbar = 0
};

struct ThermometryOptions {
    bool fit_nuisance = false;  // free amplitude/offset as in the experiment
    double vbar_max = 0.05;     // um/us, search upper bound
};

namespace detail {

// Sum of squared residuals of P3 - P1 against A cos((4/3) wR t) E(t) + c,
// with A, c either fixed at (1/2, 0) or profiled by linear least squares.
inline double thermometry_sse(const std::vector<PopulationRecord>& series,
                              const TripodConfig& cfg, double vbar, bool nuisance,
                              double* amp_out, double* off_out) {
    const std::size_t n = series.size();
    double sxx = 0.0, sx = 0.0, sxy = 0.0, sy = 0.0, syy = 0.0;
    for (const auto& rec : series) {
        const double y = rec.pops[2] - rec.pops[0];
        const double arg = cfg.k() * vbar * rec.t;
        const double x = std::cos(4.0 / 3.0 * cfg.omega_R * rec.t) *
                         std::exp(-4.0 / 9.0 * arg * arg);
        sxx += x * x;
        sx += x;
        sxy += x * y;
        sy += y;
        syy += y * y;
    }
    double a = 0.5, c = 0.0;
    if (nuisance) {
        const double det = sxx * n - sx * sx;
        if (std::abs(det) < 1e-12) {
            a = 0.0;
            c = sy / n;
        } else {
            a = (sxy * n - sx * sy) / det;
            c = (sxx * sy - sx * sxy) / det;
        }
    }
    if (amp_out) *amp_out = a;
    if (off_out) *off_out = c;
    return syy - 2.0 * a * sxy - 2.0 * c * sy + a * a * sxx + 2.0 * a * c * sx +
           c * c * n;
}

} // namespace detail

// Least-squares fit of the decaying interference signal P3 - P1 for the
// thermal velocity. Coarse grid on vbar followed by golden-section
// refinement; amplitude/offset solve is linear when enabled.
inline ThermometryFit fit_temperature(const std::vector<PopulationRecord>& series,
                                      const TripodConfig& cfg,
                                      const ThermometryOptions& opt = {}) {
    if (series.size() < 8) throw fit_failure("fit_temperature: need at least 8 points");
    double ymin = 1e300, ymax = -1e300;
    for (const auto& rec : series) {
        const double y = rec.pops[2] - rec.pops[0];
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    if (ymax - ymin < 1e-6)
        throw fit_failure("fit_temperature: difference signal is flat, not identifiable");

    const auto sse = [&](double vb) {
        return detail::thermometry_sse(series, cfg, vb, opt.fit_nuisance, nullptr, nullptr);
    };
    const int coarse = 256;
    double best_v = 0.0, best_s = 1e300;
    for (int i = 0; i <= coarse; ++i) {
        const double vb = opt.vbar_max * i / coarse;
        const double s = sse(vb);
        if (s < best_s) {
            best_s = s;
            best_v = vb;
        }
    }
    double lo = std::max(0.0, best_v - opt.vbar_max / coarse);
    double hi = std::min(opt.vbar_max, best_v + opt.vbar_max / coarse);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = sse(x1), f2 = sse(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = sse(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = sse(x2);
        }
    }
    ThermometryFit fit;
    fit.vbar = 0.5 * (lo + hi);
    const double s = detail::thermometry_sse(series, cfg, fit.vbar, opt.fit_nuisance,
                                             &fit.amplitude, &fit.offset);
    fit.residual = std::sqrt(std::max(0.0, s) / series.size());
    fit.temperature_uK = sr87::temperature_uK_from_vbar(fit.vbar);
    fit.no_decay = fit.vbar < 1e-2 * opt.vbar_max;
    return fit;
}

} // namespace tripod

#endif
