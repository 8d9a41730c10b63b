// Scenario runner for the tripod dark-state simulator. Each subcommand
// reproduces one analysis of the experiment (ballistic expansion, phase-loop
// scans, operator reconstruction, thermometry, adiabaticity) and writes a
// deterministic CSV.
//
// Exit codes: 0 success, 2 configuration error, 3 physics inconsistency,
// 4 I/O failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tripod/io.hpp"
#include "tripod/tripod.hpp"

using namespace tripod;

namespace {

constexpr double pi = std::numbers::pi;

struct CommonFlags {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> phi0;          // rad
    std::optional<double> temperature;   // uK
    std::optional<double> rabi_kHz;
    std::optional<long> steps;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "configuration file (flat key = value with [sections])");
    cmd->add_option("--out", f.out_path, "output CSV path");
    cmd->add_option("--seed", f.seed, "RNG seed (Monte-Carlo and synthetic noise)");
    cmd->add_option("--phi0", f.phi0, "loop excursion phi0 in rad");
    cmd->add_option("--temperature-uK", f.temperature, "gas temperature in uK");
    cmd->add_option("--rabi-kHz", f.rabi_kHz, "Rabi frequency in kHz (all beams)");
    cmd->add_option("--steps", f.steps, "grid resolution (see each subcommand)");
}

// Configuration assembled from file + flag overrides. Flags win.
struct RunSetup {
    Config file;
    CommonFlags flags;

    double number(const std::string& key, double fallback) const {
        return file.get_number(key, fallback);
    }
    long integer(const std::string& key, long fallback) const {
        return file.get_integer(key, fallback);
    }

    double rabi_kHz(double fallback) const {
        if (flags.rabi_kHz) return *flags.rabi_kHz;
        return number("beams.rabi_kHz", fallback);
    }
    double temperature_uK() const {
        if (flags.temperature) return *flags.temperature;
        return number("thermal.temperature_uK", 0.5);
    }
    double phi0() const {
        if (flags.phi0) return *flags.phi0;
        return number("loop.phi0", pi);
    }
    double loop_dt() const { return number("loop.dt_us", 4.0); }
    std::uint64_t seed() const {
        if (flags.seed) return *flags.seed;
        return static_cast<std::uint64_t>(integer("run.seed", 1));
    }
    std::string out(const std::string& fallback) const {
        return !flags.out_path.empty() ? flags.out_path
                                       : file.get_string("run.out", fallback);
    }

    TripodConfig tripod(double default_rabi_kHz) const {
        TripodConfig cfg = sr87::config(rabi_from_kHz(rabi_kHz(default_rabi_kHz)),
                                        temperature_uK());
        if (file.has("atom.omega_R")) cfg.omega_R = number("atom.omega_R", cfg.omega_R);
        if (file.has("thermal.vbar"))
            cfg.thermal_vbar = number("thermal.vbar", cfg.thermal_vbar);
        cfg.rabi[0] *= number("beams.rabi_scale1", 1.0);
        cfg.rabi[1] *= number("beams.rabi_scale2", 1.0);
        cfg.rabi[2] *= number("beams.rabi_scale3", 1.0);
        cfg.validate();
        return cfg;
    }

    ThermalSpec thermal(const TripodConfig& cfg) const {
        ThermalSpec spec;
        spec.vbar = cfg.thermal_vbar;
        spec.quadrature_n = static_cast<int>(integer("thermal.quadrature_n", 64));
        spec.monte_carlo = integer("thermal.monte_carlo", 0) != 0;
        spec.mc_samples = static_cast<std::size_t>(integer("thermal.mc_samples", 100000));
        spec.seed = seed();
        spec.validate();
        return spec;
    }

    // Hash covers the file settings plus every effective override.
    std::uint64_t config_hash(const TripodConfig& cfg, double p0) const {
        Config h = file;
        h.set("effective.rabi", format_number(cfg.rabi[0]));
        h.set("effective.rabi2", format_number(cfg.rabi[1]));
        h.set("effective.rabi3", format_number(cfg.rabi[2]));
        h.set("effective.omega_R", format_number(cfg.omega_R));
        h.set("effective.vbar", format_number(cfg.thermal_vbar));
        h.set("effective.phi0", format_number(p0));
        h.set("effective.seed", std::to_string(seed()));
        return h.hash();
    }

    PhaseLoop loop() const {
        const std::string verts = file.get_string("loop.vertices", "");
        if (verts.empty()) return canonical_loop(phi0(), loop_dt());
        // "p1,p2; p1,p2; ..." - closed automatically through the first vertex
        std::vector<std::array<double, 2>> vs;
        std::stringstream ss(verts);
        std::string item;
        while (std::getline(ss, item, ';')) {
            const auto comma = item.find(',');
            if (comma == std::string::npos)
                throw config_error("loop.vertices: expected 'phi1,phi2' pairs");
            try {
                vs.push_back({std::stod(item.substr(0, comma)),
                              std::stod(item.substr(comma + 1))});
            } catch (const std::exception&) {
                throw config_error("loop.vertices: non-numeric vertex in '" + item + "'");
            }
        }
        if (vs.size() < 2) throw config_error("loop.vertices: need at least two vertices");
        PhaseLoop l;
        const double dt = loop_dt();
        for (std::size_t i = 0; i < vs.size(); ++i) {
            const auto& a = vs[i];
            const auto& b = vs[(i + 1) % vs.size()];
            l.segments.push_back({{a[0], a[1]}, {b[0], b[1]}, dt});
        }
        return l;
    }
};

std::string matrix_to_text(const CMat2& m) {
    std::ostringstream os;
    os << "[[" << format_number(std::real(m(0, 0))) << (std::imag(m(0, 0)) < 0 ? "" : "+")
       << format_number(std::imag(m(0, 0))) << "i, "
       << format_number(std::real(m(0, 1))) << (std::imag(m(0, 1)) < 0 ? "" : "+")
       << format_number(std::imag(m(0, 1))) << "i], ["
       << format_number(std::real(m(1, 0))) << (std::imag(m(1, 0)) < 0 ? "" : "+")
       << format_number(std::imag(m(1, 0))) << "i, "
       << format_number(std::real(m(1, 1))) << (std::imag(m(1, 1)) < 0 ? "" : "+")
       << format_number(std::imag(m(1, 1))) << "i]]";
    return os.str();
}

CVec2 south_pole() {
    CVec2 d;
    d[1] = 1.0;
    return d;
}

// ---------------------------------------------------------------------------
// fig2: ballistic expansion of the bare populations
// ---------------------------------------------------------------------------

int run_fig2(const RunSetup& run) {
    const TripodConfig cfg = run.tripod(250.0);
    const ThermalSpec spec = run.thermal(cfg);
    const double t_max = run.number("run.t_max_us", 60.0);
    const double dt = run.number("run.time_step_us", 0.5);

    const EnsembleResult ens = ensemble_average(cfg, spec, Scenario::hold, south_pole(),
                                                t_max, PhaseLoop{}, dt);
    CsvWriter csv(run.out("fig2.csv"),
                  {"t_us", "P1", "P2", "P3", "P3_minus_P1", "envelope", "P1_avg",
                   "P2_avg", "P3_avg"},
                  run.config_hash(cfg, 0.0));
    csv.comment("closed-form ballistic populations plus ensemble-integrator cross-check");
    for (std::size_t i = 0; i < ens.t.size(); ++i) {
        const double t = ens.t[i];
        const auto p = mean_populations(cfg, spec.vbar, t);
        const double arg = cfg.k() * spec.vbar * t;
        const double env = std::exp(-4.0 / 9.0 * arg * arg);
        csv.row({t, p[0], p[1], p[2], p[2] - p[0], env, ens.pops[i][0], ens.pops[i][1],
                 ens.pops[i][2]});
    }
    std::cout << "fig2: " << ens.t.size() << " rows, tau = "
              << format_number(decoherence_time(cfg, spec.vbar)) << " us\n";
    return 0;
}

// ---------------------------------------------------------------------------
// fig3: populations, dark-state reconstruction and purity vs phi0
// ---------------------------------------------------------------------------

int run_fig3(const RunSetup& run) {
    const TripodConfig cfg = run.tripod(450.0);
    const ThermalSpec spec = run.thermal(cfg);
    const long n = run.flags.steps ? *run.flags.steps : run.integer("run.phi0_grid_n", 25);
    if (n < 2) throw config_error("fig3 needs at least 2 grid points");
    const double phi_max = run.number("run.phi0_max", 1.2 * pi);
    const double dt = run.loop_dt();

    CsvWriter csv(run.out("fig3.csv"),
                  {"phi0_over_pi", "P1_pin", "P2_pin", "P3_pin", "P1_th", "P2_th",
                   "P3_th", "popD1", "popD2", "phi_azim", "purity"},
                  run.config_hash(cfg, phi_max));
    csv.comment("pinned = infinite-mass geometric transport; th = thermal ensemble");
    csv.comment("popD1/popD2/phi_azim from the measurement-style reconstruction of the"
                " thermal populations; phi_azim = 0 where undefined (pole states)");
    const DarkFrame f0 = dark_basis(cfg, Vec3{}, 0.0, 0.0);
    for (long i = 0; i < n; ++i) {
        const double p0 = phi_max * static_cast<double>(i) / (n - 1);
        const PhaseLoop loop = canonical_loop(p0, dt);
        const CVec2 dpin = holonomy(loop) * south_pole();
        const auto ppin = bare_populations(dpin, f0);
        const EnsembleResult ens =
            ensemble_average(cfg, spec, Scenario::loop, south_pole(), 0.0, loop, dt);
        const auto& pth = ens.final_pops;
        DarkReconstruction rec = dark_from_populations(pth[0], pth[1], pth[2]);
        rec = sign_resolve(rec, normalized(dpin));
        const double phi_azim = rec.phi_defined ? rec.phi : 0.0;
        csv.row({p0 / pi, ppin[0], ppin[1], ppin[2], pth[0], pth[1], pth[2],
                 rec.d1_abs * rec.d1_abs, rec.d2_abs * rec.d2_abs, phi_azim,
                 ens.final_purity});
    }
    std::cout << "fig3: " << n << " phi0 points up to " << format_number(phi_max / pi)
              << " pi\n";
    return 0;
}

// ---------------------------------------------------------------------------
// fig4: operator reconstruction at phi0 = pi
// ---------------------------------------------------------------------------

struct Fig4Variant {
    std::string name;
    CMat2 U, Us;
};

int run_fig4(const RunSetup& run) {
    const TripodConfig cfg = run.tripod(450.0);
    const ThermalSpec spec = run.thermal(cfg);
    const double p0 = run.flags.phi0 ? *run.flags.phi0 : pi;
    const PhaseLoop loop = canonical_loop(p0, run.loop_dt());
    const PhaseLoop shifted = cyclic_shift(loop, 2);

    std::vector<Fig4Variant> variants;
    variants.push_back({"geometric", holonomy(loop), holonomy(shifted)});
    variants.push_back({"rest_atom", loop_propagator(cfg, loop, Vec3{}),
                        loop_propagator(cfg, shifted, Vec3{})});
    variants.push_back({"thermal_avg", averaged_propagator(cfg, spec, loop).unitary,
                        averaged_propagator(cfg, spec, shifted).unitary});

    // measurement-pipeline reconstruction on the thermal ensemble outputs
    const CVec2 x1 = south_pole();
    const CVec2 x2 = mixed_preparation_preset();
    auto reconstruct_U = [&](const PhaseLoop& lp, const CMat2& pred) {
        auto observe = [&](const CVec2& x) {
            const EnsembleResult ens =
                ensemble_average(cfg, spec, Scenario::loop, x, 0.0, lp, lp.duration());
            const auto& p = ens.final_pops;
            DarkReconstruction rec = dark_from_populations(p[0], p[1], p[2]);
            rec = sign_resolve(rec, normalized(pred * x));
            rec.sign_resolved = true;  // pole states carry no sign to resolve
            return rec;
        };
        return unitary_from_two_states(x1, observe(x1), x2, observe(x2), pred);
    };
    const CMat2 pred = variants[1].U;
    const CMat2 preds = variants[1].Us;
    const UnitaryFit urec = reconstruct_U(loop, pred);
    const UnitaryFit urecs = reconstruct_U(shifted, preds);
    variants.push_back({"reconstruction", urec.U, urecs.U});

    std::vector<std::string> cols = {"variant"};
    for (const char* m : {"U", "Us"})
        for (const char* e : {"00", "01", "10", "11"}) {
            cols.push_back(std::string(m) + e + "_re");
            cols.push_back(std::string(m) + e + "_im");
        }
    cols.push_back("D");
    cols.push_back("D_tilde");
    CsvWriter csv(run.out("fig4.csv"), cols, run.config_hash(cfg, p0));
    csv.comment("variant 0 geometric (infinite mass), 1 rest atom with recoil,"
                " 2 thermal averaged propagator, 3 reconstruction pipeline");
    std::cout << "fig4 at phi0 = " << format_number(p0 / pi) << " pi\n";
    for (std::size_t i = 0; i < variants.size(); ++i) {
        const auto& v = variants[i];
        std::vector<double> row = {static_cast<double>(i)};
        for (const CMat2* m : {&v.U, &v.Us})
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) {
                    row.push_back(std::real((*m)(r, c)));
                    row.push_back(std::imag((*m)(r, c)));
                }
        const double d = frobenius_distance(v.U, v.Us);
        const double dt = frobenius_distance_tilde(v.U, v.Us);
        row.push_back(d);
        row.push_back(dt);
        csv.row(row);
        std::cout << "  " << v.name << ": D = " << format_number(d)
                  << ", D_tilde = " << format_number(dt) << "\n"
                  << "    U  = " << matrix_to_text(v.U) << "\n"
                  << "    U' = " << matrix_to_text(v.Us) << "\n";
    }
    const WitnessReport w = nonabelian_witness(loop);
    std::cout << "  sanity D(U,U) = " << format_number(frobenius_distance(w.U, w.U))
              << ", conjugacy defect = " << format_number(w.conjugacy_defect)
              << ", |Tr| mismatch = " << format_number(w.trace_mismatch) << "\n";
    std::cout << "  note: D = sqrt(2-|Tr|) saturates at sqrt(2) = 1.414; a maximum of 2\n"
                 "  belongs to the variant D_tilde = sqrt(4-2|Tr|), reported alongside.\n"
              << "  reconstruction residuals: " << format_number(urec.residual) << ", "
              << format_number(urecs.residual) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// thermometry: synthetic data generation and temperature recovery
// ---------------------------------------------------------------------------

int run_thermometry(const RunSetup& run) {
    const TripodConfig cfg = run.tripod(250.0);
    const double T_true = run.temperature_uK();
    const double vbar_true = cfg.thermal_vbar;
    const double sigma = run.number("run.noise_sigma", 0.0);
    const long shots = run.integer("run.shots", 1);
    const double t_max = run.number("run.t_max_us", 48.0);
    const long npts = run.flags.steps ? *run.flags.steps : run.integer("run.points", 61);
    if (npts < 8) throw config_error("thermometry needs at least 8 points");

    detail::GaussianRng rng(run.seed());
    std::vector<PopulationRecord> series;
    for (long i = 0; i < npts; ++i) {
        PopulationRecord rec;
        rec.t = t_max * static_cast<double>(i) / (npts - 1);
        rec.pops = mean_populations(cfg, vbar_true, rec.t);
        if (sigma > 0.0) {
            for (auto& p : rec.pops) {
                double acc = 0.0;
                for (long s = 0; s < shots; ++s) acc += p + sigma * rng();
                p = std::max(0.0, acc / shots);
            }
        }
        series.push_back(rec);
    }

    ThermometryOptions opt;
    opt.fit_nuisance = run.integer("run.fit_nuisance", sigma > 0.0 ? 1 : 0) != 0;
    const ThermometryFit fit = fit_temperature(series, cfg, opt);

    if (!run.out("").empty() || !run.flags.out_path.empty()) {
        CsvWriter csv(run.out("thermometry.csv"),
                      {"t_us", "P1", "P2", "P3", "diff", "fit_model"},
                      run.config_hash(cfg, 0.0));
        for (const auto& rec : series) {
            const double arg = cfg.k() * fit.vbar * rec.t;
            const double model = fit.amplitude *
                                     std::cos(4.0 / 3.0 * cfg.omega_R * rec.t) *
                                     std::exp(-4.0 / 9.0 * arg * arg) +
                                 fit.offset;
            csv.row({rec.t, rec.pops[0], rec.pops[1], rec.pops[2],
                     rec.pops[2] - rec.pops[0], model});
        }
    }

    const double vbar_err = vbar_true > 0.0
                                ? std::abs(fit.vbar - vbar_true) / vbar_true
                                : fit.vbar;
    std::cout << "thermometry: truth T = " << format_number(T_true)
              << " uK (vbar = " << format_number(vbar_true * 1e3) << " mm/s)\n"
              << "  recovered T = " << format_number(fit.temperature_uK)
              << " uK, vbar = " << format_number(fit.vbar * 1e3)
              << " mm/s, rel. vbar error = " << format_number(vbar_err) << "\n"
              << "  residual rms = " << format_number(fit.residual)
              << (fit.no_decay ? ", no-decay signal (vbar at grid floor)" : "") << "\n";
    if (vbar_true > 0.0)
        std::cout << "  tau = " << format_number(decoherence_time(cfg, vbar_true))
                  << " us\n";
    return 0;
}

// ---------------------------------------------------------------------------
// adiabaticity: full vs dark-manifold integration across sweep rates
// ---------------------------------------------------------------------------

int run_adiabaticity(const RunSetup& run) {
    const double p0 = run.flags.phi0 ? *run.flags.phi0 : pi;
    const double dt = run.loop_dt();
    const double gamma = p0 / dt;
    const double rmin = run.number("run.ratio_min", 1.0);
    const double rmax = run.number("run.ratio_max", 20.0);
    const long n = run.flags.steps ? *run.flags.steps : run.integer("run.ratio_n", 12);
    if (n < 2 || rmin <= 0.0 || rmax <= rmin)
        throw config_error("adiabaticity scan needs ratio_max > ratio_min > 0, n >= 2");

    const PhaseLoop loop = canonical_loop(p0, dt);
    TripodConfig cfg0 = run.tripod(450.0);
    CsvWriter csv(run.out("adiabaticity.csv"),
                  {"ratio", "rabi_kHz", "pop_discrepancy", "max_excited"},
                  run.config_hash(cfg0, p0));
    csv.comment("ratio = sqrt(3) Omega / gamma with gamma = phi0 / dt");
    std::cout << "adiabaticity scan, gamma = " << format_number(gamma) << " rad/us\n";
    for (long i = 0; i < n; ++i) {
        const double ratio = rmin * std::pow(rmax / rmin, static_cast<double>(i) / (n - 1));
        const double om = ratio * gamma / std::sqrt(3.0);
        TripodConfig cfg = cfg0;
        cfg.rabi = {om, om, om};
        const Schedule sch = Schedule::from_loop(loop, cfg.rabi);
        IntegratorOptions opt;
        opt.sample_dt = dt;
        const CVec4 psi0 = dark_basis(cfg, Vec3{}, 0.0, 0.0).D2();
        const FullTrajectory full = evolve_full(cfg, sch, Vec3{}, psi0, opt);
        const DarkTrajectory dark = evolve_adiabatic(cfg, sch, Vec3{}, south_pole(), opt);
        double disc = 0.0;
        for (int c = 0; c < 3; ++c)
            disc = std::max(disc, std::abs(full.pops.back()[c] - dark.pops.back()[c]));
        csv.row({ratio, om / (2 * pi) * 1e3, disc, full.max_excited});
        std::cout << "  ratio " << format_number(ratio) << ": discrepancy "
                  << format_number(disc) << ", max excited "
                  << format_number(full.max_excited) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// loop: ad-hoc holonomy report
// ---------------------------------------------------------------------------

int run_loop(const RunSetup& run) {
    const PhaseLoop loop = run.loop();
    if (!loop.closed()) throw invalid_loop("loop: path does not close");
    const TripodConfig cfg = run.tripod(450.0);
    const WitnessReport w = nonabelian_witness(loop);
    std::cout << "loop with " << loop.size() << " segments, duration "
              << format_number(loop.duration()) << " us\n"
              << "  U  = " << matrix_to_text(w.U) << "\n"
              << "  U' = " << matrix_to_text(w.U_shifted) << " (start vertex "
              << w.start_vertex << ")\n"
              << "  D = " << format_number(w.D)
              << ", D_tilde = " << format_number(w.D_tilde) << "\n"
              << "  conjugacy defect = " << format_number(w.conjugacy_defect)
              << ", |Tr| mismatch = " << format_number(w.trace_mismatch) << "\n";
    if (run.flags.steps && *run.flags.steps > 1) {
        const CMat2 sub = holonomy(loop, static_cast<int>(*run.flags.steps));
        std::cout << "  subdivision cross-check (" << *run.flags.steps
                  << " steps/segment): max deviation "
                  << format_number(max_abs_diff(sub, w.U)) << "\n";
    }
    const CMat2 rest = loop_propagator(cfg, loop, Vec3{});
    std::cout << "  rest-atom propagator (recoil included): U = "
              << matrix_to_text(rest) << "\n";
    if (!run.out("").empty() || !run.flags.out_path.empty()) {
        CsvWriter csv(run.out("loop.csv"),
                      {"entry", "U_re", "U_im", "Us_re", "Us_im"},
                      run.config_hash(cfg, 0.0));
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                csv.row({static_cast<double>(2 * r + c), std::real(w.U(r, c)),
                         std::imag(w.U(r, c)), std::real(w.U_shifted(r, c)),
                         std::imag(w.U_shifted(r, c))});
    }
    return 0;
}

const char* kConfigHelp = R"(Configuration file keys (flat 'key = value' with [section] headers):
  [atom]     omega_R (rad/us, default: recomputed Sr-87 recoil 0.0303846)
  [beams]    rabi_kHz, rabi_scale1, rabi_scale2, rabi_scale3
  [thermal]  temperature_uK, vbar (um/us), quadrature_n, monte_carlo (0/1),
             mc_samples
  [loop]     phi0 (rad), dt_us (per segment), vertices ("p1,p2; p1,p2; ...",
             closed through the first vertex)
  [run]      out, seed, t_max_us, time_step_us, phi0_grid_n, phi0_max,
             noise_sigma, shots, points, fit_nuisance, ratio_min, ratio_max,
             ratio_n
Command-line flags override file values. Units: us, um, rad; energies are
angular frequencies in rad/us.)";

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tripod: dark-state dynamics, holonomies and thermometry of a "
                 "4-level tripod atom"};
    app.footer(kConfigHelp);
    app.require_subcommand(1);

    CommonFlags flags;
    struct Sub {
        const char* name;
        const char* desc;
        int (*fn)(const RunSetup&);
    };
    const std::vector<Sub> subs = {
        {"fig2", "ballistic expansion of the bare populations (closed form + ensemble)",
         run_fig2},
        {"fig3", "phase-loop scan: populations, dark reconstruction, purity vs phi0",
         run_fig3},
        {"fig4", "operator reconstruction at phi0 = pi (all model variants)", run_fig4},
        {"thermometry", "synthetic-data temperature recovery", run_thermometry},
        {"adiabaticity", "full vs dark-manifold integrator scan over sweep rates",
         run_adiabaticity},
        {"loop", "holonomy report for an ad-hoc phase loop", run_loop},
    };
    std::map<std::string, int (*)(const RunSetup&)> dispatch;
    for (const auto& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.desc);
        add_common(cmd, flags);
        dispatch[s.name] = s.fn;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    RunSetup run;
    run.flags = flags;
    try {
        if (!flags.config_path.empty()) run.file = Config::parse_file(flags.config_path);
        for (const auto& s : subs)
            if (app.got_subcommand(s.name)) return dispatch[s.name](run);
        return 2;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const error& e) {
        std::cerr << "physics error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
