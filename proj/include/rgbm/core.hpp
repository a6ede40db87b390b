#pragma once
// The RGBM ensemble itself: parameter bundle, Euler-Maruyama stepping with
// mean-field reallocation, panel recording, and the analytic stationary
// distribution the rescaled process relaxes to.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgbm/io.hpp"
#include "rgbm/parallel.hpp"
#include "rgbm/rng.hpp"
#include "rgbm/stats.hpp"

namespace rgbm {

struct ModelParams {
    double mu = 0.02;       // drift, per year
    double sigma = 0.1;     // fluctuation amplitude, per sqrt-year
    double tau = 0.02;      // reallocation rate, per year; may be negative
    uint64_t n_agents = 10000;
    double dt = 0.1;        // integration step, years
    uint64_t seed = 0;

    void validate() const {
        if (!(sigma > 0.0)) throw std::invalid_argument("ModelParams: sigma must be > 0");
        if (!(dt > 0.0)) throw std::invalid_argument("ModelParams: dt must be > 0");
        if (n_agents < 2) throw std::invalid_argument("ModelParams: n_agents must be >= 2");
    }

    double sigma_sq() const { return sigma * sigma; }
};

inline void to_json(nlohmann::json& j, const ModelParams& p) {
    j = {{"mu", p.mu},       {"sigma", p.sigma}, {"tau", p.tau},
         {"n_agents", p.n_agents}, {"dt", p.dt},  {"seed", p.seed}};
}

inline void from_json(const nlohmann::json& j, ModelParams& p) {
    j.at("mu").get_to(p.mu);
    j.at("sigma").get_to(p.sigma);
    j.at("tau").get_to(p.tau);
    j.at("n_agents").get_to(p.n_agents);
    j.at("dt").get_to(p.dt);
    j.at("seed").get_to(p.seed);
}

struct WealthState {
    double t = 0.0;
    std::vector<double> x;
    double mean_x = 0.0;
    uint64_t step = 0; // integration steps taken, indexes the RNG

    void refresh_mean() { mean_x = mean(x); }
};

struct WealthPanel {
    ModelParams params;
    std::vector<double> times;
    std::vector<std::vector<double>> records;

    std::size_t find_time(double t) const {
        for (std::size_t i = 0; i < times.size(); ++i)
            if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return i;
        throw std::invalid_argument("panel has no record at t=" + std::to_string(t));
    }
};

// One Euler-Maruyama step of dx_i = x_i (mu dt + sigma dW_i) - tau (x_i - <x>) dt.
// The mean on the right-hand side is the pre-step mean. Draws are keyed by
// (seed, step, agent), so any chunking over agents gives identical results.
inline void em_step(WealthState& state, const ModelParams& p, unsigned workers = 1) {
    const double drift = p.mu * p.dt;
    const double vol = p.sigma * std::sqrt(p.dt);
    const double pull = p.tau * p.dt;
    const double m = state.mean_x;
    const uint64_t step = state.step;
    double* x = state.x.data();
    parallel_for(state.x.size(), workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double z = normal_at(p.seed, step, static_cast<uint32_t>(i));
            x[i] += x[i] * (drift + vol * z) - pull * (x[i] - m);
        }
    });
    state.step += 1;
    state.t = static_cast<double>(state.step) * p.dt;
    state.refresh_mean();
    if (!std::isfinite(state.mean_x))
        throw std::runtime_error("em_step: non-finite wealth at t=" + std::to_string(state.t) +
                                 " (dt too large for these parameters?)");
}

inline uint64_t step_of_time(double t, double dt) {
    auto s = static_cast<uint64_t>(std::llround(t / dt));
    if (std::abs(static_cast<double>(s) * dt - t) > 1e-9 * std::max(1.0, std::abs(t)))
        throw std::invalid_argument("time " + std::to_string(t) + " is not on the dt grid");
    return s;
}

// Integrate to `horizon` years, invoking `visit(state)` at each requested
// time. Empty x0 means the Dirac start: everyone at wealth 1.
template <typename Visitor>
void simulate_stream(const ModelParams& params, double horizon,
                     std::span<const double> record_times, Visitor&& visit,
                     std::span<const double> x0 = {}, unsigned workers = 1) {
    params.validate();
    if (horizon < 0.0) throw std::invalid_argument("simulate: negative horizon");

    std::vector<uint64_t> record_steps;
    record_steps.reserve(record_times.size());
    uint64_t last = 0;
    bool first = true;
    for (double t : record_times) {
        if (t < 0.0 || t > horizon + 1e-9)
            throw std::invalid_argument("simulate: record time outside [0, horizon]");
        uint64_t s = step_of_time(t, params.dt);
        if (!first && s <= last)
            throw std::invalid_argument("simulate: record times must be strictly increasing");
        record_steps.push_back(s);
        last = s;
        first = false;
    }

    WealthState state;
    if (x0.empty()) {
        state.x.assign(params.n_agents, 1.0);
    } else {
        if (x0.size() != params.n_agents)
            throw std::invalid_argument("simulate: x0 length != n_agents");
        state.x.assign(x0.begin(), x0.end());
    }
    state.refresh_mean();

    std::size_t next = 0;
    auto record_if_due = [&]() {
        while (next < record_steps.size() && record_steps[next] == state.step) {
            visit(const_cast<const WealthState&>(state));
            ++next;
        }
    };
    record_if_due();
    uint64_t total_steps = step_of_time(horizon, params.dt);
    while (state.step < total_steps) {
        em_step(state, params, workers);
        record_if_due();
    }
}

inline WealthPanel simulate(const ModelParams& params, double horizon,
                            std::span<const double> record_times,
                            std::span<const double> x0 = {}, unsigned workers = 1) {
    WealthPanel panel;
    panel.params = params;
    simulate_stream(
        params, horizon, record_times,
        [&](const WealthState& s) {
            panel.times.push_back(s.t);
            panel.records.push_back(s.x);
        },
        x0, workers);
    return panel;
}

// y_i = x_i / <x>, renormalized so the sample mean of y is exactly 1.
inline std::vector<double> rescale(std::span<const double> record) {
    double m = mean(record);
    if (m == 0.0) throw std::invalid_argument("rescale: zero mean");
    std::vector<double> y(record.size());
    for (std::size_t i = 0; i < record.size(); ++i) y[i] = record[i] / m;
    double m2 = mean(y);
    for (auto& v : y) v /= m2;
    return y;
}

inline std::string panel_to_csv(const WealthPanel& panel) {
    std::string out = "t,agent_id,x\n";
    for (std::size_t r = 0; r < panel.times.size(); ++r) {
        const std::string t = format_double(panel.times[r]);
        for (std::size_t i = 0; i < panel.records[r].size(); ++i) {
            out += t;
            out += ',';
            out += std::to_string(i);
            out += ',';
            out += format_double(panel.records[r][i]);
            out += '\n';
        }
    }
    return out;
}

inline WealthPanel panel_from_csv(const std::string& csv) {
    WealthPanel panel;
    std::istringstream ss(csv);
    std::string line;
    if (!std::getline(ss, line) || split(line, ',') != std::vector<std::string>{"t", "agent_id", "x"})
        throw std::runtime_error("panel_from_csv: bad header");
    double cur_t = 0.0;
    bool have_t = false;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 3) throw std::runtime_error("panel_from_csv: bad row '" + line + "'");
        double t = parse_double(f[0]);
        if (!have_t || t != cur_t) {
            panel.times.push_back(t);
            panel.records.emplace_back();
            cur_t = t;
            have_t = true;
        }
        panel.records.back().push_back(parse_double(f[2]));
    }
    if (panel.times.empty()) throw std::runtime_error("panel_from_csv: no rows");
    panel.params.n_agents = panel.records.front().size();
    return panel;
}

} // namespace rgbm
