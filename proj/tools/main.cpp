// qfc: steady-state tables, moment flows, stochastic ensembles, grid and
// Fock-space master-equation runs for continuously measured oscillators with
// Markovian feedback. Deterministic given config + seed; CSV output only.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "qfc/control.hpp"
#include "qfc/csv.hpp"
#include "qfc/errors.hpp"
#include "qfc/fockspace.hpp"
#include "qfc/gridsim.hpp"
#include "qfc/moments.hpp"
#include "qfc/trajectories.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

const double kFig1X = 1.0 / std::sqrt(2.0);
const double kFig1Y = 5.0 / (8.0 * std::sqrt(2.0));
const double kFig1Z = 0.5;

json default_config() {
    json c;
    c["seed"] = 12345;
    c["workers"] = 0;
    c["steady"] = {{"kappa", 0.25},
                   {"grid", {{"enabled", false},
                             {"start", 0.01},
                             {"end", 16.0},
                             {"scale", "log"},
                             {"count", 25}}}};
    c["moments"] = {{"kappa", 0.25}, {"x0", kFig1X},      {"y0", kFig1Y},
                    {"z0", kFig1Z},  {"tau_end", 50.0},   {"dtau", 1e-3},
                    {"record_stride", 10}};
    c["ensemble"] = {{"kappa", 0.25},
                     {"n_traj", 100},
                     {"tau_end", 60.0},
                     {"dtau", 1e-3},
                     {"record_stride", 100},
                     {"scheme", "weak2"},
                     {"gains", {{"mode", "optimal"}, {"u_tilde", 0.0}, {"v_tilde", 0.0}}},
                     {"q0", 0.0},
                     {"p0", 1.0},
                     {"x0", kFig1X},
                     {"y0", kFig1Y},
                     {"z0", kFig1Z},
                     {"step_budget", 1e9}};
    c["grid"] = {{"kappa", 0.25},
                 {"measurement", true},
                 {"gains", {{"mode", "none"}, {"chi", 0.0}, {"delta", 0.0}}},
                 {"potential", {{"kind", "harmonic"}, {"a4", 0.0}, {"a2", 0.0}}},
                 {"tau_end", 40.0},
                 {"dt", 1e-3},
                 {"n_points", 1024},
                 {"half_width", 12.0},
                 {"q0", 3.0},
                 {"p0", 0.0},
                 {"width", std::sqrt(kFig1X)},
                 {"record_stride", 100},
                 {"snapshot_stride", 2000},
                 {"boundary_threshold", 1e-6}};
    c["fock"] = {{"generator", "rwa"},
                 {"kappa", 0.01},
                 {"mass", 1.0},
                 {"omega", 1.0},
                 {"hbar", 1.0},
                 {"u", 0.0},
                 {"v", -0.02},
                 {"n_max", 30},
                 {"t_end", 600.0},
                 {"dt", 0.02},
                 {"record_stride", 100},
                 {"initial", {{"kind", "number"}, {"n", 1}, {"N", 0.125}}}};
    c["design"] = {{"kappa", 0.25},
                   {"gains", {{"mode", "optimal"}, {"u", 0.0}, {"v", 0.0}}},
                   {"kelvin",
                    {{"enabled", false},
                     {"mass", 1e-15},
                     {"omega", 1e6},
                     {"hbar", 1.054571817e-34},
                     {"k_B", 1.380649e-23}}}};
    return c;
}

void apply_preset(json& cfg, const std::string& name) {
    if (name == "fig1") {
        // defaults already reproduce the moment-transient figure
    } else if (name == "fig3") {
        cfg["ensemble"]["kappa"] = 0.25;
        cfg["ensemble"]["n_traj"] = 100;
        cfg["ensemble"]["tau_end"] = 60.0;
        cfg["ensemble"]["gains"]["mode"] = "optimal";
        cfg["ensemble"]["scheme"] = "weak2";
    } else if (name == "fig4a") {
        cfg["grid"]["measurement"] = false;
        cfg["grid"]["gains"]["mode"] = "none";
    } else if (name == "fig4b") {
        cfg["grid"]["measurement"] = true;
        cfg["grid"]["gains"]["mode"] = "none";
    } else if (name == "fig4c") {
        cfg["grid"]["measurement"] = true;
        cfg["grid"]["gains"]["mode"] = "optimal";
    } else if (name == "thermal-check") {
        cfg["fock"]["generator"] = "rwa";
        cfg["fock"]["kappa"] = 0.01;
        cfg["fock"]["u"] = 0.0;
        cfg["fock"]["v"] = -0.02;
        cfg["fock"]["t_end"] = 600.0;
        cfg["fock"]["initial"]["kind"] = "number";
        cfg["fock"]["initial"]["n"] = 1;
    } else {
        throw qfc::InvalidInputError("unknown preset: " + name);
    }
}

// Every key in `user` must exist in `base` with a compatible type; values are
// copied over. Unknown keys are errors, not warnings.
void merge_validated(json& base, const json& user, const std::string& path) {
    if (!user.is_object()) throw qfc::InvalidInputError("config node is not an object: " + path);
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string child = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key()))
            throw qfc::InvalidInputError("unknown config key: " + child);
        json& slot = base[it.key()];
        const json& val = it.value();
        if (slot.is_object()) {
            merge_validated(slot, val, child);
        } else if (slot.is_number() && val.is_number()) {
            slot = val;
        } else if (slot.type() == val.type()) {
            slot = val;
        } else {
            throw qfc::InvalidInputError("config key has the wrong type: " + child);
        }
    }
}

struct Output {
    fs::path dir;
    std::vector<std::string> files;

    explicit Output(const std::string& out) : dir(out) { fs::create_directories(dir); }

    std::string path(const std::string& name) {
        files.push_back(name);
        return (dir / name).string();
    }

    void manifest(const std::string& command, const std::string& preset, const json& cfg) {
        json m;
        m["artifact"] = "qfc";
        m["version"] = kVersion;
        m["command"] = command;
        m["preset"] = preset;
        m["config"] = cfg;
        m["outputs"] = files;
        std::ofstream f(dir / "manifest.json", std::ios::binary);
        f << m.dump(2) << "\n";
    }
};

qfc::OscillatorConfig unit_oscillator(double kappa) {
    return {1.0, 1.0, 2.0 * kappa, 1.0};
}

qfc::FeedbackGains ensemble_gains(const json& g, double kappa) {
    const std::string mode = g.at("mode").get<std::string>();
    if (mode == "optimal") return qfc::optimal_gains(kappa, unit_oscillator(kappa));
    if (mode == "none") return qfc::FeedbackGains::zero();
    if (mode == "manual")
        return qfc::FeedbackGains::from_dimensionless(g.at("u_tilde").get<double>(),
                                                      g.at("v_tilde").get<double>(),
                                                      unit_oscillator(kappa));
    throw qfc::InvalidInputError("gains.mode must be optimal, none or manual");
}

int cmd_steady(const json& cfg, Output& out) {
    const json& s = cfg.at("steady");
    std::vector<double> kappas;
    if (s.at("grid").at("enabled").get<bool>()) {
        const json& g = s.at("grid");
        const double start = g.at("start").get<double>();
        const double end = g.at("end").get<double>();
        const int count = g.at("count").get<int>();
        const std::string scale = g.at("scale").get<std::string>();
        if (count < 2 || start <= 0.0 || end <= start)
            throw qfc::InvalidInputError("invalid kappa grid");
        for (int i = 0; i < count; ++i) {
            const double t = static_cast<double>(i) / (count - 1);
            kappas.push_back(scale == "log" ? start * std::pow(end / start, t)
                                            : start + (end - start) * t);
        }
    } else {
        kappas.push_back(s.at("kappa").get<double>());
    }
    struct Row {
        double kappa, x, y, z, e, u, v, rate;
    };
    std::vector<Row> rows;
    for (double kappa : kappas) {
        const auto m = qfc::stationary_moments(kappa);
        const auto g = qfc::optimal_gains(kappa, unit_oscillator(kappa));
        rows.push_back({kappa, m.x, m.y, m.z, qfc::stationary_energy(kappa), g.u, g.v,
                        qfc::decay_rate(kappa, 1.0)});
    }
    qfc::CsvWriter csv(out.path("steady.csv"));
    csv.header("kappa,x,y,z,E,u,v,rate");
    std::printf("%10s %10s %10s %10s %10s %11s %11s %10s\n", "kappa", "x_inf", "y_inf", "z_inf",
                "E/hw", "u", "v", "rate");
    for (const Row& r : rows) {
        csv.row(r.kappa, r.x, r.y, r.z, r.e, r.u, r.v, r.rate);
        std::printf("%10.5g %10.7f %10.7f %10.7f %10.7f %11.7f %11.7f %10.7f\n", r.kappa, r.x,
                    r.y, r.z, r.e, r.u, r.v, r.rate);
    }
    if (kappas.size() == 1)
        std::printf("convergence time scales: tau >> %.4g (measurement), tau >> %.4g (feedback)\n",
                    qfc::convergence_tau_measurement(kappas[0]),
                    qfc::convergence_tau_feedback(kappas[0]));
    return 0;
}

int cmd_moments(const json& cfg, Output& out) {
    const json& m = cfg.at("moments");
    const double kappa = m.at("kappa").get<double>();
    const qfc::MomentState s0{m.at("x0").get<double>(), m.at("y0").get<double>(),
                              m.at("z0").get<double>(), 0.0};
    const auto series = qfc::integrate_moments(s0, kappa, m.at("tau_end").get<double>(),
                                               m.at("dtau").get<double>());
    const int stride = m.at("record_stride").get<int>();
    if (stride < 1) throw qfc::InvalidInputError("record_stride must be >= 1");
    qfc::CsvWriter csv(out.path("moments.csv"));
    csv.header("tau,x,y,z,defect");
    for (std::size_t i = 0; i < series.size(); i += static_cast<std::size_t>(stride)) {
        const auto& s = series[i];
        csv.row(s.tau, s.x, s.y, s.z, qfc::uncertainty_defect(s));
    }
    if ((series.size() - 1) % static_cast<std::size_t>(stride) != 0) {
        const auto& s = series.back();
        csv.row(s.tau, s.x, s.y, s.z, qfc::uncertainty_defect(s));
    }
    const auto& last = series.back();
    std::printf("moments: tau=%g x=%.7f y=%.7f z=%.7f defect=%.3e\n", last.tau, last.x, last.y,
                last.z, qfc::uncertainty_defect(last));
    return 0;
}

int cmd_ensemble(const json& cfg, Output& out) {
    const json& e = cfg.at("ensemble");
    qfc::EnsembleSpec spec;
    spec.kappa = e.at("kappa").get<double>();
    spec.n_traj = e.at("n_traj").get<int>();
    spec.master_seed = cfg.at("seed").get<std::uint64_t>();
    spec.dtau = e.at("dtau").get<double>();
    spec.tau_end = e.at("tau_end").get<double>();
    spec.record_stride = e.at("record_stride").get<int>();
    spec.step_budget = e.at("step_budget").get<double>();
    const std::string scheme = e.at("scheme").get<std::string>();
    if (scheme == "weak2")
        spec.scheme = qfc::Scheme::weak2;
    else if (scheme == "euler_maruyama" || scheme == "euler")
        spec.scheme = qfc::Scheme::euler_maruyama;
    else
        throw qfc::InvalidInputError("scheme must be weak2 or euler_maruyama");
    spec.gains = ensemble_gains(e.at("gains"), spec.kappa);
    spec.initial = {e.at("q0").get<double>(), e.at("p0").get<double>(),
                    {e.at("x0").get<double>(), e.at("y0").get<double>(), e.at("z0").get<double>(),
                     0.0},
                    0.0};
    const auto res = qfc::run_ensemble(spec, cfg.at("workers").get<int>());
    qfc::CsvWriter csv(out.path("ensemble.csv"));
    csv.header("tau,meanQ,stdQ,meanP,stdP,meanE,stdE");
    for (std::size_t j = 0; j < res.tau.size(); ++j)
        csv.row(res.tau[j], res.mean_Q[j], res.std_Q[j], res.mean_P[j], res.std_P[j],
                res.mean_E[j], res.std_E[j]);
    std::printf("ensemble: %d trajectories, final <E>=%.6f (stationary %.6f)\n", spec.n_traj,
                res.mean_E.back(), qfc::stationary_energy(spec.kappa));
    return 0;
}

int cmd_grid(const json& cfg, Output& out) {
    const json& g = cfg.at("grid");
    qfc::grid::GridSimConfig gc;
    gc.cfg = {1.0, 1.0, 1.0, 1.0};
    const double kappa = g.at("kappa").get<double>();
    gc.gamma = g.at("measurement").get<bool>() ? qfc::gamma_for_kappa(kappa) : 0.0;
    const json& pot = g.at("potential");
    const std::string kind = pot.at("kind").get<std::string>();
    if (kind == "harmonic")
        gc.potential = qfc::grid::PotentialSpec::harmonic();
    else if (kind == "free")
        gc.potential = qfc::grid::PotentialSpec::free_particle();
    else if (kind == "quartic")
        gc.potential = qfc::grid::PotentialSpec::quartic(pot.at("a4").get<double>(),
                                                         pot.at("a2").get<double>());
    else
        throw qfc::InvalidInputError("potential.kind must be harmonic, free or quartic");
    const json& gains = g.at("gains");
    const std::string mode = gains.at("mode").get<std::string>();
    if (mode == "optimal") {
        const auto og = qfc::optimal_gains(kappa, unit_oscillator(kappa));
        gc.chi = og.u;  // position frame: lab and frame gains coincide
        gc.delta = og.v;
    } else if (mode == "manual") {
        gc.chi = gains.at("chi").get<double>();
        gc.delta = gains.at("delta").get<double>();
    } else if (mode != "none") {
        throw qfc::InvalidInputError("gains.mode must be optimal, none or manual");
    }
    gc.dt = g.at("dt").get<double>();
    gc.seed = cfg.at("seed").get<std::uint64_t>();
    gc.record_stride = g.at("record_stride").get<int>();
    gc.snapshot_stride = g.at("snapshot_stride").get<int>();
    gc.geom = qfc::grid::GridGeometry::centered(g.at("half_width").get<double>(),
                                                g.at("n_points").get<int>());
    gc.init_qbar = g.at("q0").get<double>();
    gc.init_pbar = g.at("p0").get<double>();
    gc.init_width = g.at("width").get<double>();
    gc.boundary_threshold = g.at("boundary_threshold").get<double>();

    qfc::grid::GridEngine engine(gc);
    const auto res = engine.run_trajectory(g.at("tau_end").get<double>());
    qfc::grid::write_series_csv(out.path("grid_series.csv"), res);
    for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "grid_snapshot_%04zu.csv", i);
        qfc::grid::write_snapshot_csv(out.path(name), res.geom, res.snapshots[i]);
    }
    const auto& last = res.series.back().e;
    std::printf("grid: tau=%g q=%.5f varq=%.5f energy=%.5f (%zu snapshots)\n",
                res.series.back().tau, last.q, last.varq, last.energy, res.snapshots.size());
    return 0;
}

int cmd_fock(const json& cfg, Output& out) {
    const json& f = cfg.at("fock");
    qfc::fock::FockRunSpec spec;
    const double kappa = f.at("kappa").get<double>();
    const double mass = f.at("mass").get<double>();
    const double omega = f.at("omega").get<double>();
    const double hbar = f.at("hbar").get<double>();
    spec.cfg = {mass, omega, 2.0 * kappa * mass * omega * omega / hbar, hbar};
    spec.gains = qfc::FeedbackGains::from_si(f.at("u").get<double>(), f.at("v").get<double>(),
                                             spec.cfg);
    const std::string gen = f.at("generator").get<std::string>();
    if (gen == "rwa")
        spec.generator = qfc::fock::FockRunSpec::Generator::rwa;
    else if (gen == "full")
        spec.generator = qfc::fock::FockRunSpec::Generator::full;
    else
        throw qfc::InvalidInputError("generator must be rwa or full");
    spec.n_max = f.at("n_max").get<int>();
    spec.t_end = f.at("t_end").get<double>();
    spec.dt = f.at("dt").get<double>();
    spec.record_stride = f.at("record_stride").get<int>();
    const json& init = f.at("initial");
    const std::string ikind = init.at("kind").get<std::string>();
    if (ikind == "number") {
        const int n = init.at("n").get<int>();
        spec.initial_state = [n](int nm) { return qfc::fock::number_state(nm, n); };
    } else if (ikind == "thermal") {
        const double N = init.at("N").get<double>();
        spec.initial_state = [N](int nm) { return qfc::fock::thermal_state(nm, N); };
    } else {
        throw qfc::InvalidInputError("initial.kind must be number or thermal");
    }
    const auto res = qfc::fock::run_master_equation(spec);
    qfc::fock::write_series_csv(out.path("fock.csv"), res);
    std::printf("fock: t=%g <n>=%.6f trace=%.9f purity=%.6f\n", res.series.back().t,
                res.series.back().n_mean, res.series.back().trace, res.series.back().purity);
    return 0;
}

int cmd_design(const json& cfg, Output& out) {
    const json& d = cfg.at("design");
    const double kappa = d.at("kappa").get<double>();
    const auto osc = unit_oscillator(kappa);
    const json& gj = d.at("gains");
    const std::string mode = gj.at("mode").get<std::string>();
    qfc::FeedbackGains g;
    if (mode == "optimal")
        g = qfc::optimal_gains(kappa, osc);
    else if (mode == "manual")
        g = qfc::FeedbackGains::from_si(gj.at("u").get<double>(), gj.at("v").get<double>(), osc);
    else
        throw qfc::InvalidInputError("gains.mode must be optimal or manual");

    std::printf("feedback design at kappa = %g (internal units hbar = m = omega = 1)\n", kappa);
    std::printf("  u         = %.10f\n  v         = %.10f\n", g.u, g.v);
    std::printf("  decay rate of <Q>,<P> with optimal gains: %.10f\n",
                qfc::decay_rate(kappa, 1.0));
    std::printf("  stationary energy E/(hbar omega) = %.10f\n", qfc::stationary_energy(kappa));
    if (kappa > 0.1)
        std::printf("  warning: RWA validity assumes kappa << 1 (kappa = %g)\n", kappa);
    if (g.v >= 0.0) {
        std::printf("  warning: heating regime (v >= 0); no thermal analogy\n");
    } else {
        const auto bath = qfc::bath_parameters(g, kappa, osc);
        std::printf("  gamma'    = %.10f\n  N_bath    = %.10f\n", bath.gamma_prime, bath.N_bath);
        std::printf("  T_eff     = %.10f hbar*omega/k_B\n", bath.T_eff);
        const json& kelvin = d.at("kelvin");
        if (kelvin.at("enabled").get<bool>()) {
            qfc::OscillatorConfig si{kelvin.at("mass").get<double>(),
                                     kelvin.at("omega").get<double>(), 1.0,
                                     kelvin.at("hbar").get<double>()};
            std::printf("  T_eff     = %.6e K (omega = %.3e rad/s)\n",
                        qfc::temperature_kelvin(bath.T_eff, si, kelvin.at("k_B").get<double>()),
                        si.omega);
        }
    }
    (void)out;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"measurement-based feedback control of a quantum particle: simulation toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, preset, out_dir = ".";
    bool print_config = false;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int workers = -1;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--preset", preset, "named preset (fig1, fig3, fig4a, fig4b, fig4c, thermal-check)");
    app.add_option("--seed", seed, "master seed")->each([&](const std::string&) { seed_given = true; });
    app.add_option("--workers", workers, "worker threads (0 = hardware)");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--print-config", print_config, "print the effective config and exit");

    auto* steady = app.add_subcommand("steady", "stationary moments, energy, gains, rate");
    double kappa_flag = -1.0;
    std::string kappa_grid;
    steady->add_option("--kappa", kappa_flag, "relative measurement strength");
    steady->add_option("--kappa-grid", kappa_grid, "start:end:scale:count (scale = log|lin)");

    auto* moments = app.add_subcommand("moments", "deterministic second-moment transient");
    double m_kappa = -1.0, m_tau_end = -1.0, m_dtau = -1.0;
    moments->add_option("--kappa", m_kappa, "relative measurement strength");
    moments->add_option("--tau-end", m_tau_end, "integration horizon (dimensionless)");
    moments->add_option("--dtau", m_dtau, "step size");

    auto* ensemble = app.add_subcommand("ensemble", "stochastic trajectory ensemble");
    double e_kappa = -1.0, e_tau_end = -1.0;
    int e_ntraj = -1;
    std::string e_scheme;
    ensemble->add_option("--kappa", e_kappa, "relative measurement strength");
    ensemble->add_option("--tau-end", e_tau_end, "horizon");
    ensemble->add_option("--n-traj", e_ntraj, "number of trajectories");
    ensemble->add_option("--scheme", e_scheme, "weak2 or euler_maruyama");

    auto* gridcmd = app.add_subcommand("grid", "grid-based stochastic wavefunction run");
    double g_tau_end = -1.0, g_dt = -1.0;
    gridcmd->add_option("--tau-end", g_tau_end, "horizon");
    gridcmd->add_option("--dt", g_dt, "step size");

    auto* fock = app.add_subcommand("fock", "truncated number-basis master equation");
    double f_tend = -1.0;
    int f_nmax = -1;
    std::string f_gen;
    fock->add_option("--t-end", f_tend, "horizon (seconds)");
    fock->add_option("--n-max", f_nmax, "basis truncation");
    fock->add_option("--generator", f_gen, "rwa or full");

    auto* design = app.add_subcommand("design", "feedback gains and thermal analogy report");
    double d_kappa = -1.0, d_u = 0.0, d_v = 0.0;
    bool d_manual = false;
    design->add_option("--kappa", d_kappa, "relative measurement strength");
    design->add_option("--u", d_u, "manual gain u")->each([&](const std::string&) { d_manual = true; });
    design->add_option("--v", d_v, "manual gain v")->each([&](const std::string&) { d_manual = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        json cfg = default_config();
        if (!preset.empty()) apply_preset(cfg, preset);
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw qfc::InvalidInputError("cannot read config file: " + config_path);
            json user = json::parse(f);
            merge_validated(cfg, user, "");
        }
        if (seed_given) cfg["seed"] = seed;
        if (workers >= 0) cfg["workers"] = workers;

        // flag overrides, flags win over preset and file
        if (steady->parsed()) {
            if (steady->count("--kappa") > 0) {
                cfg["steady"]["kappa"] = kappa_flag;
                cfg["steady"]["grid"]["enabled"] = false;
            }
            if (!kappa_grid.empty()) {
                double a, b;
                char scale[8];
                int count;
                if (std::sscanf(kappa_grid.c_str(), "%lf:%lf:%7[a-z]:%d", &a, &b, scale, &count) != 4)
                    throw qfc::InvalidInputError("--kappa-grid expects start:end:scale:count");
                cfg["steady"]["grid"] = {{"enabled", true},
                                         {"start", a},
                                         {"end", b},
                                         {"scale", std::string(scale)},
                                         {"count", count}};
            }
        }
        if (moments->parsed()) {
            if (moments->count("--kappa") > 0) cfg["moments"]["kappa"] = m_kappa;
            if (moments->count("--tau-end") > 0) cfg["moments"]["tau_end"] = m_tau_end;
            if (moments->count("--dtau") > 0) cfg["moments"]["dtau"] = m_dtau;
        }
        if (ensemble->parsed()) {
            if (ensemble->count("--kappa") > 0) cfg["ensemble"]["kappa"] = e_kappa;
            if (ensemble->count("--tau-end") > 0) cfg["ensemble"]["tau_end"] = e_tau_end;
            if (ensemble->count("--n-traj") > 0) cfg["ensemble"]["n_traj"] = e_ntraj;
            if (!e_scheme.empty()) cfg["ensemble"]["scheme"] = e_scheme;
        }
        if (gridcmd->parsed()) {
            if (gridcmd->count("--tau-end") > 0) cfg["grid"]["tau_end"] = g_tau_end;
            if (gridcmd->count("--dt") > 0) cfg["grid"]["dt"] = g_dt;
        }
        if (fock->parsed()) {
            if (fock->count("--t-end") > 0) cfg["fock"]["t_end"] = f_tend;
            if (fock->count("--n-max") > 0) cfg["fock"]["n_max"] = f_nmax;
            if (!f_gen.empty()) cfg["fock"]["generator"] = f_gen;
        }
        if (design->parsed()) {
            if (design->count("--kappa") > 0) cfg["design"]["kappa"] = d_kappa;
            if (d_manual) {
                cfg["design"]["gains"]["mode"] = "manual";
                cfg["design"]["gains"]["u"] = d_u;
                cfg["design"]["gains"]["v"] = d_v;
            }
        }

        if (print_config) {
            std::printf("%s\n", cfg.dump(2).c_str());
            return 0;
        }

        Output out(out_dir);
        int rc = 0;
        std::string name;
        if (steady->parsed()) {
            name = "steady";
            rc = cmd_steady(cfg, out);
        } else if (moments->parsed()) {
            name = "moments";
            rc = cmd_moments(cfg, out);
        } else if (ensemble->parsed()) {
            name = "ensemble";
            rc = cmd_ensemble(cfg, out);
        } else if (gridcmd->parsed()) {
            name = "grid";
            rc = cmd_grid(cfg, out);
        } else if (fock->parsed()) {
            name = "fock";
            rc = cmd_fock(cfg, out);
        } else if (design->parsed()) {
            name = "design";
            rc = cmd_design(cfg, out);
        }
        out.manifest(name, preset, cfg);
        return rc;
    } catch (const qfc::InvalidInputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const qfc::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failure: %s\n", e.what());
        return 3;
    }
}
