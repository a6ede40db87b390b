#pragma once
// Experiment presets behind the CLI: the stationarity warm-up rule, derived
// per-run seeds, the figure sweeps, and run manifests. Everything here is a
// thin, deterministic composition of the core modules.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgbm/copula.hpp"
#include "rgbm/core.hpp"
#include "rgbm/io.hpp"
#include "rgbm/mixing.hpp"
#include "rgbm/mobility.hpp"
#include "rgbm/stationary.hpp"

namespace rgbm {

struct ExperimentConfig {
    std::string preset;
    ModelParams params; // base parameters; params.seed is the master seed
    std::vector<double> tau_grid;
    std::vector<double> sigma_sq_grid;
    std::vector<std::size_t> subsample_sizes;
    double delta = 20.0;
    std::size_t q = 10;
    std::size_t repetitions = 20;
    std::string out_dir = "out";
    unsigned workers = 1;
    bool paper_scale = false;
    std::size_t plateau_window = 10;
    double alpha = 0.05;
    std::size_t copula_samples = 100000;
    double horizon = 200.0;     // simulate preset
    double record_every = 0.0;  // simulate preset; 0 = endpoints only
    std::string panel_path;     // measure / mix input
    std::size_t mix_k = 1000;   // mix subsample size

    void validate_sweep() const {
        if (tau_grid.empty() || sigma_sq_grid.empty())
            throw std::invalid_argument("config: sweep grids must be nonempty");
        if (repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
        if (!(delta > 0.0)) throw std::invalid_argument("config: delta must be > 0");
        if (q < 2) throw std::invalid_argument("config: q must be >= 2");
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("config: alpha in (0,1)");
    }
};

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    return {{"preset", c.preset},
            {"params", c.params},
            {"tau_grid", c.tau_grid},
            {"sigma_sq_grid", c.sigma_sq_grid},
            {"subsample_sizes", c.subsample_sizes},
            {"delta", c.delta},
            {"q", c.q},
            {"repetitions", c.repetitions},
            {"out_dir", c.out_dir},
            {"workers", c.workers},
            {"paper_scale", c.paper_scale},
            {"plateau_window", c.plateau_window},
            {"alpha", c.alpha},
            {"copula_samples", c.copula_samples},
            {"horizon", c.horizon},
            {"record_every", c.record_every},
            {"panel_path", c.panel_path},
            {"mix_k", c.mix_k}};
}

inline void apply_config_json(ExperimentConfig& c, const nlohmann::json& j) {
    c.preset = j.value("preset", c.preset);
    if (j.contains("params")) {
        const auto& p = j.at("params");
        c.params.mu = p.value("mu", c.params.mu);
        c.params.sigma = p.value("sigma", c.params.sigma);
        c.params.tau = p.value("tau", c.params.tau);
        c.params.n_agents = p.value("n_agents", c.params.n_agents);
        c.params.dt = p.value("dt", c.params.dt);
        c.params.seed = p.value("seed", c.params.seed);
    }
    c.tau_grid = j.value("tau_grid", c.tau_grid);
    c.sigma_sq_grid = j.value("sigma_sq_grid", c.sigma_sq_grid);
    c.subsample_sizes = j.value("subsample_sizes", c.subsample_sizes);
    c.delta = j.value("delta", c.delta);
    c.q = j.value("q", c.q);
    c.repetitions = j.value("repetitions", c.repetitions);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.workers = j.value("workers", c.workers);
    c.paper_scale = j.value("paper_scale", c.paper_scale);
    c.plateau_window = j.value("plateau_window", c.plateau_window);
    c.alpha = j.value("alpha", c.alpha);
    c.copula_samples = j.value("copula_samples", c.copula_samples);
    c.horizon = j.value("horizon", c.horizon);
    c.record_every = j.value("record_every", c.record_every);
    c.panel_path = j.value("panel_path", c.panel_path);
    c.mix_k = j.value("mix_k", c.mix_k);
}

inline ExperimentConfig config_defaults(const std::string& preset) {
    ExperimentConfig c;
    c.preset = preset;
    c.params.mu = 0.02;
    c.params.sigma = 0.1;
    c.params.tau = 0.02;
    c.params.n_agents = 10000;
    c.params.dt = 0.1;
    c.params.seed = 0;
    if (preset == "fig1" || preset == "fig2") {
        c.tau_grid = {0.005, 0.01, 0.02, 0.04, 0.07, 0.1};
        c.sigma_sq_grid = {0.005, 0.01, 0.02};
    } else if (preset == "fig3") {
        c.tau_grid = {-0.1, -0.07, -0.04, -0.02, -0.01, -0.005};
        c.sigma_sq_grid = {0.005, 0.01, 0.02};
    } else if (preset == "figA2") {
        c.tau_grid = {0.02, 0.04};
        c.sigma_sq_grid = {0.005, 0.01, 0.02};
        c.subsample_sizes = {100, 1000};
    }
    return c;
}

// Desk scale runs everywhere by default; paper_scale escalates only the knobs
// that distinguish production runs: 1000 averaging windows for the mobility
// sweeps and N = 10^5 for the subsample-size study.
inline ExperimentConfig effective_config(ExperimentConfig c) {
    if (c.paper_scale) {
        if (c.preset == "fig1" || c.preset == "fig3") c.repetitions = 1000;
        if (c.preset == "figA2") c.params.n_agents = 100000;
    }
    return c;
}

inline double snap_to_grid(double t, double dt) { return std::round(t / dt) * dt; }

// Warm-up before measuring in the stationary regime: five relaxation times,
// capped, snapped to the integration grid.
inline double warmup_years(double tau, double dt) {
    if (tau <= 0.0) return 0.0;
    return snap_to_grid(std::min(5.0 / tau, 2000.0), dt);
}

struct WindowMeasure {
    double rho = 0.0;
    IgeResult ige_fit;
};

// Cross-section times for `n_windows` consecutive delta-windows. In the
// stationary regime the first cross-section sits at the warm-up time; from
// the Dirac start it sits at delta, since the t=0 section is constant and
// rank correlation against it is undefined.
inline std::vector<double> window_record_times(const ModelParams& p, double delta,
                                               std::size_t n_windows) {
    uint64_t dsteps = step_of_time(delta, p.dt);
    if (dsteps == 0) throw std::invalid_argument("window_record_times: delta below dt");
    uint64_t first = p.tau > 0.0 ? step_of_time(warmup_years(p.tau, p.dt), p.dt) : dsteps;
    std::vector<double> times;
    times.reserve(n_windows + 1);
    for (std::size_t i = 0; i <= n_windows; ++i)
        times.push_back(static_cast<double>(first + i * dsteps) * p.dt);
    return times;
}

inline std::vector<WindowMeasure> measure_windows(const ModelParams& p, double delta,
                                                  std::size_t n_windows, unsigned workers = 1) {
    auto times = window_record_times(p, delta, n_windows);
    std::vector<WindowMeasure> out;
    out.reserve(n_windows);
    std::vector<double> prev;
    simulate_stream(
        p, times.back(), times,
        [&](const WealthState& s) {
            if (!prev.empty()) {
                CrossSectionPair pair{prev, s.x, delta};
                out.push_back({spearman(pair), ige(pair)});
            }
            prev = s.x;
        },
        {}, workers);
    return out;
}

struct BetaExperiment {
    BetaCurve curve; // times measured from the moment of subsample selection
    RelaxationFit fit;
    OnsetResult onset;
    std::vector<std::size_t> subsample;
};

// The empirical mixing procedure: warm the economy up, pick the k agents
// closest to mean wealth, then track the subsample's distance to the target
// at a fixed cadence.
inline BetaExperiment run_beta_experiment(const ModelParams& p, std::size_t k,
                                          double obs_interval, double track_horizon,
                                          const StationaryDistribution& target,
                                          const HistogramSpec& spec,
                                          std::size_t plateau_window = 10, double alpha = 0.05,
                                          unsigned workers = 1) {
    uint64_t osteps = step_of_time(obs_interval, p.dt);
    if (osteps == 0) throw std::invalid_argument("run_beta_experiment: obs interval below dt");
    uint64_t w0 = p.tau > 0.0 ? step_of_time(warmup_years(p.tau, p.dt), p.dt) : 0;
    auto n_obs = static_cast<std::size_t>(std::llround(track_horizon / obs_interval));
    if (n_obs < 1) throw std::invalid_argument("run_beta_experiment: horizon below cadence");

    std::vector<double> times;
    times.reserve(n_obs + 1);
    for (std::size_t j = 0; j <= n_obs; ++j)
        times.push_back(static_cast<double>(w0 + j * osteps) * p.dt);

    BetaExperiment ex;
    std::vector<std::vector<double>> sub_rescaled;
    sub_rescaled.reserve(times.size());
    simulate_stream(
        p, times.back(), times,
        [&](const WealthState& s) {
            if (ex.subsample.empty()) ex.subsample = select_typical_subsample(s.x, k);
            auto y = rescale(s.x);
            std::vector<double> sub;
            sub.reserve(k);
            for (std::size_t i : ex.subsample) sub.push_back(y[i]);
            sub_rescaled.push_back(std::move(sub));
        },
        {}, workers);

    ex.curve.k = k;
    ex.curve.times.reserve(times.size());
    ex.curve.beta.reserve(times.size());
    for (std::size_t j = 0; j < sub_rescaled.size(); ++j) {
        ex.curve.times.push_back(static_cast<double>(j * osteps) * p.dt);
        ex.curve.beta.push_back(tvd(sub_rescaled[j], target, spec));
    }
    ex.fit = fit_relaxation(ex.curve, plateau_window);
    ex.onset = significance_onset_samples(ex.curve.times, sub_rescaled, target, spec, alpha);
    return ex;
}

inline nlohmann::json relaxation_to_json(const RelaxationFit& fit, const OnsetResult& onset,
                                         double target_tau) {
    nlohmann::json j;
    j["status"] = fit.status == FitStatus::ok        ? "ok"
                  : fit.status == FitStatus::refused ? "refused"
                                                     : "no_mixing";
    auto put = [&](const char* key, double v) {
        if (std::isfinite(v)) j[key] = v;
    };
    put("rate", fit.rate);
    put("rate_se", fit.rate_se);
    if (fit.status == FitStatus::no_mixing)
        j["relaxation_time"] = "infinite";
    else
        put("relaxation_time", fit.relaxation_time);
    if (fit.status == FitStatus::ok) {
        j["fit_window"] = {fit.fit_t0, fit.fit_t1};
        j["n_fit"] = fit.n_fit;
        put("r_squared", fit.r_squared);
    }
    if (fit.plateau_found) {
        put("plateau_level", fit.plateau_level);
        put("plateau_onset", fit.plateau_onset);
    }
    if (fit.status == FitStatus::ok)
        j["mixing_index"] = mixing_index(fit.relaxation_time);
    else if (fit.status == FitStatus::no_mixing)
        j["mixing_index"] = 0.0;
    if (onset.attained)
        j["significance_onset"] = onset.t;
    else
        j["significance_onset"] = "not mixed within horizon";
    if (target_tau > 0.0) j["theoretical_relaxation_time"] = 1.0 / target_tau;
    return j;
}

inline void write_manifest(const std::filesystem::path& dir, const std::string& command,
                           const nlohmann::json& config, uint64_t seed,
                           const std::vector<std::string>& files) {
    nlohmann::json j;
    j["command"] = command;
    j["seed"] = seed;
    j["config"] = config;
    auto fh = nlohmann::json::object();
    for (const auto& f : files) fh[f] = "fnv1a64:" + fnv1a64_hex(read_file(dir / f));
    j["files"] = fh;
    write_file(dir / "manifest.json", j.dump(2) + "\n");
}

struct MobilityRow {
    double tau = 0.0;
    double sigma_sq = 0.0;
    double mean_rho = 0.0;
    double mean_ige = 0.0;
    double log_rho_over_delta = 0.0;
    double log_ige_over_delta = 0.0;
    std::vector<double> window_rho;
};

inline std::vector<MobilityRow> sweep_windows(const ExperimentConfig& cfg) {
    cfg.validate_sweep();
    std::vector<MobilityRow> rows;
    std::size_t idx = 0;
    for (double tau : cfg.tau_grid) {
        for (double s2 : cfg.sigma_sq_grid) {
            ModelParams p = cfg.params;
            p.tau = tau;
            p.sigma = std::sqrt(s2);
            p.seed = derive_seed(cfg.params.seed, idx++);
            auto wins = measure_windows(p, cfg.delta, cfg.repetitions, cfg.workers);
            MobilityRow row;
            row.tau = tau;
            row.sigma_sq = s2;
            std::vector<double> rhos, iges;
            for (const auto& w : wins) {
                rhos.push_back(w.rho);
                iges.push_back(w.ige_fit.slope);
            }
            row.window_rho = rhos;
            row.mean_rho = mean(rhos);
            row.mean_ige = mean(iges);
            row.log_rho_over_delta = std::log(row.mean_rho) / cfg.delta;
            row.log_ige_over_delta = std::log(row.mean_ige) / cfg.delta;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline std::string sweep_rows_to_csv(const std::vector<MobilityRow>& rows) {
    std::string out = "tau,sigma_sq,log_rho_over_delta,log_ige_over_delta\n";
    for (const auto& r : rows) {
        out += format_double(r.tau);
        out += ',';
        out += format_double(r.sigma_sq);
        out += ',';
        out += format_double(r.log_rho_over_delta);
        out += ',';
        out += format_double(r.log_ige_over_delta);
        out += '\n';
    }
    return out;
}

inline std::vector<MobilityRow> run_fig1(const ExperimentConfig& raw) {
    auto cfg = effective_config(raw);
    auto rows = sweep_windows(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    write_file(std::filesystem::path(cfg.out_dir) / "fig1_sweep.csv", sweep_rows_to_csv(rows));
    write_manifest(cfg.out_dir, "fig1", config_to_json(cfg), cfg.params.seed,
                   {"fig1_sweep.csv"});
    return rows;
}

struct Fig3Result {
    std::vector<MobilityRow> rows;
    TransitionMatrix matrix; // tau = -0.02, sigma^2 = 0.01
};

inline Fig3Result run_fig3(const ExperimentConfig& raw) {
    auto cfg = effective_config(raw);
    Fig3Result res;
    res.rows = sweep_windows(cfg);

    ModelParams p = cfg.params;
    p.tau = -0.02;
    p.sigma = std::sqrt(0.01);
    p.seed = derive_seed(cfg.params.seed, 10000);
    auto times = window_record_times(p, cfg.delta, 1);
    auto panel = simulate(p, times.back(), times, {}, cfg.workers);
    CrossSectionPair pair{panel.records[0], panel.records[1], cfg.delta};
    res.matrix = transition_matrix(pair, cfg.q);

    std::filesystem::create_directories(cfg.out_dir);
    auto dir = std::filesystem::path(cfg.out_dir);
    write_file(dir / "fig3_sweep.csv", sweep_rows_to_csv(res.rows));
    write_file(dir / "fig3_matrix.csv", res.matrix.to_csv());
    write_file(dir / "fig3_matrix.json", res.matrix.to_json().dump(2) + "\n");
    write_manifest(dir, "fig3", config_to_json(cfg), cfg.params.seed,
                   {"fig3_sweep.csv", "fig3_matrix.csv", "fig3_matrix.json"});
    return res;
}

struct Fig2Result {
    TransitionMatrix rgbm_matrix;
    TransitionMatrix copula_matrix;
    GumbelFit fitted;
    double rho = 0.0; // Spearman over the matrix window
    std::vector<std::array<double, 4>> sweep; // tau, sigma_sq, theta, rho
};

inline Fig2Result run_fig2(const ExperimentConfig& raw) {
    auto cfg = effective_config(raw);
    cfg.validate_sweep();
    Fig2Result res;

    auto matrix_pair = [&](const ModelParams& p) {
        auto times = window_record_times(p, cfg.delta, 1);
        auto panel = simulate(p, times.back(), times, {}, cfg.workers);
        return CrossSectionPair{panel.records[0], panel.records[1], cfg.delta};
    };

    ModelParams p0 = cfg.params;
    p0.seed = derive_seed(cfg.params.seed, 0);
    auto pair = matrix_pair(p0);
    res.rgbm_matrix = transition_matrix(pair, cfg.q);
    res.fitted = fit_theta(pair);
    res.rho = spearman(pair);
    if (res.fitted.comonotone)
        throw std::runtime_error("fig2: fitted dependence is comonotone, no finite theta");
    CounterStream stream(derive_seed(cfg.params.seed, 1), 0);
    res.copula_matrix =
        copula_transition_matrix(GumbelParam(res.fitted.theta), cfg.q, cfg.copula_samples, stream);

    std::size_t idx = 2;
    for (double tau : cfg.tau_grid) {
        for (double s2 : cfg.sigma_sq_grid) {
            ModelParams p = cfg.params;
            p.tau = tau;
            p.sigma = std::sqrt(s2);
            p.seed = derive_seed(cfg.params.seed, idx++);
            auto sweep_pair = matrix_pair(p);
            auto fit = fit_theta(sweep_pair);
            res.sweep.push_back({tau, s2, fit.theta, spearman(sweep_pair)});
        }
    }

    std::filesystem::create_directories(cfg.out_dir);
    auto dir = std::filesystem::path(cfg.out_dir);
    std::string sweep_csv = "tau,sigma_sq,theta,rho\n";
    for (const auto& r : res.sweep) {
        sweep_csv += format_double(r[0]);
        sweep_csv += ',';
        sweep_csv += format_double(r[1]);
        sweep_csv += ',';
        sweep_csv += format_double(r[2]);
        sweep_csv += ',';
        sweep_csv += format_double(r[3]);
        sweep_csv += '\n';
    }
    write_file(dir / "fig2_matrix_rgbm.csv", res.rgbm_matrix.to_csv());
    write_file(dir / "fig2_matrix_rgbm.json", res.rgbm_matrix.to_json().dump(2) + "\n");
    write_file(dir / "fig2_matrix_copula.csv", res.copula_matrix.to_csv());
    write_file(dir / "fig2_matrix_copula.json", res.copula_matrix.to_json().dump(2) + "\n");
    write_file(dir / "fig2_sweep.csv", sweep_csv);
    write_manifest(dir, "fig2", config_to_json(cfg), cfg.params.seed,
                   {"fig2_matrix_rgbm.csv", "fig2_matrix_rgbm.json", "fig2_matrix_copula.csv",
                    "fig2_matrix_copula.json", "fig2_sweep.csv"});
    return res;
}

struct FigA2Row {
    std::size_t k = 0;
    double sigma_sq = 0.0;
    double tau = 0.0;
    std::size_t rep = 0;
    RelaxationFit fit;
};

// Observation cadence and tracking horizon for a relaxation curve: about 20
// samples per relaxation time, tracked for 8 of them, so both the decay and
// the plateau are well populated.
inline double beta_obs_interval(double tau, double dt) {
    return std::max(dt, snap_to_grid(1.0 / (20.0 * tau), dt));
}

inline double beta_track_horizon(double tau, double dt) {
    return snap_to_grid(8.0 / tau, dt);
}

inline std::vector<FigA2Row> run_figA2(const ExperimentConfig& raw) {
    auto cfg = effective_config(raw);
    cfg.validate_sweep();
    if (cfg.subsample_sizes.empty())
        throw std::invalid_argument("figA2: subsample_sizes must be nonempty");
    auto spec = default_histogram();

    std::vector<FigA2Row> rows;
    std::filesystem::create_directories(cfg.out_dir);
    auto dir = std::filesystem::path(cfg.out_dir);
    std::vector<std::string> files;

    std::size_t combo = 0;
    for (std::size_t k : cfg.subsample_sizes) {
        for (double s2 : cfg.sigma_sq_grid) {
            for (double tau : cfg.tau_grid) {
                StationaryDistribution target(zeta_of(tau, s2));
                double obs = beta_obs_interval(tau, cfg.params.dt);
                double hor = beta_track_horizon(tau, cfg.params.dt);
                for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
                    ModelParams p = cfg.params;
                    p.tau = tau;
                    p.sigma = std::sqrt(s2);
                    p.seed = derive_seed(cfg.params.seed, combo * cfg.repetitions + rep);
                    auto ex = run_beta_experiment(p, k, obs, hor, target, spec,
                                                  cfg.plateau_window, cfg.alpha, cfg.workers);
                    if (rep == 0) {
                        std::string name = "figA2_curve_k" + std::to_string(k) + "_s" +
                                           format_double(s2) + "_tau" + format_double(tau) +
                                           ".csv";
                        write_file(dir / name, ex.curve.to_csv());
                        files.push_back(name);
                    }
                    FigA2Row row;
                    row.k = k;
                    row.sigma_sq = s2;
                    row.tau = tau;
                    row.rep = rep;
                    row.fit = ex.fit;
                    rows.push_back(row);
                }
                ++combo;
            }
        }
    }

    std::string summary = "k,sigma_sq,tau,beta_star\n";
    for (const auto& r : rows) {
        summary += std::to_string(r.k);
        summary += ',';
        summary += format_double(r.sigma_sq);
        summary += ',';
        summary += format_double(r.tau);
        summary += ',';
        summary += format_double(r.fit.plateau_level);
        summary += '\n';
    }
    write_file(dir / "figA2_summary.csv", summary);
    files.push_back("figA2_summary.csv");

    auto fits = nlohmann::json::array();
    for (const auto& r : rows) {
        auto j = relaxation_to_json(r.fit, OnsetResult{}, r.tau);
        j.erase("significance_onset");
        j["k"] = r.k;
        j["sigma_sq"] = r.sigma_sq;
        j["tau"] = r.tau;
        j["rep"] = r.rep;
        fits.push_back(j);
    }
    write_file(dir / "figA2_fits.json", fits.dump(2) + "\n");
    files.push_back("figA2_fits.json");
    write_manifest(dir, "figA2", config_to_json(cfg), cfg.params.seed, files);
    return rows;
}

inline WealthPanel run_simulate(const ExperimentConfig& raw) {
    auto cfg = effective_config(raw);
    cfg.params.validate();
    if (cfg.horizon < 0.0) throw std::invalid_argument("simulate: negative horizon");
    std::vector<double> times;
    if (cfg.record_every > 0.0) {
        uint64_t rsteps = step_of_time(cfg.record_every, cfg.params.dt);
        uint64_t total = step_of_time(cfg.horizon, cfg.params.dt);
        for (uint64_t s = 0; s <= total; s += rsteps)
            times.push_back(static_cast<double>(s) * cfg.params.dt);
        if (step_of_time(times.back(), cfg.params.dt) != total)
            times.push_back(static_cast<double>(total) * cfg.params.dt);
    } else {
        times.push_back(0.0);
        if (cfg.horizon > 0.0) times.push_back(cfg.horizon);
    }
    auto panel = simulate(cfg.params, cfg.horizon, times, {}, cfg.workers);
    std::filesystem::create_directories(cfg.out_dir);
    auto dir = std::filesystem::path(cfg.out_dir);
    write_file(dir / "panel.csv", panel_to_csv(panel));
    write_manifest(dir, "simulate", config_to_json(cfg), cfg.params.seed, {"panel.csv"});
    return panel;
}

inline void run_measure(const ExperimentConfig& raw) {
    auto cfg = effective_config(raw);
    if (cfg.panel_path.empty()) throw std::invalid_argument("measure: --panel is required");
    auto panel = panel_from_csv(read_file(cfg.panel_path));
    if (panel.times.size() < 2)
        throw std::invalid_argument("measure: panel needs at least two recorded times");

    // Rank measures are undefined against a constant cross-section (the
    // Dirac start, typically); such windows are skipped.
    auto degenerate = [](const std::vector<double>& r) {
        for (double v : r)
            if (v != r.front()) return false;
        return true;
    };

    std::string csv = "measure,value,delta,n_effective\n";
    std::size_t first_usable = panel.times.size();
    for (std::size_t i = 0; i + 1 < panel.times.size(); ++i) {
        if (degenerate(panel.records[i]) || degenerate(panel.records[i + 1])) continue;
        if (first_usable == panel.times.size()) first_usable = i;
        double delta = panel.times[i + 1] - panel.times[i];
        CrossSectionPair pair{panel.records[i], panel.records[i + 1], delta};
        auto n = pair.x_early.size();
        csv += "spearman," + format_double(spearman(pair)) + ',' + format_double(delta) + ',' +
               std::to_string(n) + '\n';
        auto ig = ige(pair);
        csv += "ige," + format_double(ig.slope) + ',' + format_double(delta) + ',' +
               std::to_string(ig.n_effective) + '\n';
        csv += "theta," + format_double(fit_theta(pair).theta) + ',' + format_double(delta) +
               ',' + std::to_string(n) + '\n';
    }
    if (first_usable == panel.times.size())
        throw std::invalid_argument("measure: no usable window (all cross-sections constant)");
    CrossSectionPair first{panel.records[first_usable], panel.records[first_usable + 1],
                           panel.times[first_usable + 1] - panel.times[first_usable]};
    auto matrix = transition_matrix(first, cfg.q);

    std::filesystem::create_directories(cfg.out_dir);
    auto dir = std::filesystem::path(cfg.out_dir);
    write_file(dir / "measures.csv", csv);
    write_file(dir / "matrix.csv", matrix.to_csv());
    write_file(dir / "matrix.json", matrix.to_json().dump(2) + "\n");
    write_manifest(dir, "measure", config_to_json(cfg), cfg.params.seed,
                   {"measures.csv", "matrix.csv", "matrix.json"});
}

inline void run_mix(const ExperimentConfig& raw) {
    auto cfg = effective_config(raw);
    if (cfg.panel_path.empty()) throw std::invalid_argument("mix: --panel is required");
    auto panel = panel_from_csv(read_file(cfg.panel_path));
    StationaryDistribution target(zeta_of(cfg.params.tau, cfg.params.sigma_sq()));
    auto spec = default_histogram();
    auto subsample = select_typical_subsample(panel.records.front(), cfg.mix_k);

    auto curve = beta_curve(panel, target, spec, subsample);
    double t0 = curve.times.front();
    for (auto& t : curve.times) t -= t0;
    auto fit = fit_relaxation(curve, cfg.plateau_window);
    auto onset = significance_onset(panel, target, spec, subsample, cfg.alpha);
    if (onset.attained) onset.t -= t0;

    std::filesystem::create_directories(cfg.out_dir);
    auto dir = std::filesystem::path(cfg.out_dir);
    write_file(dir / "beta_curve.csv", curve.to_csv());
    write_file(dir / "relaxation.json",
               relaxation_to_json(fit, onset, cfg.params.tau).dump(2) + "\n");
    write_manifest(dir, "mix", config_to_json(cfg), cfg.params.seed,
                   {"beta_curve.csv", "relaxation.json"});
}

} // namespace rgbm
