// SPDX-License-Identifier: Apache-2.0
//
// nfmimo: near-field modular-array MIMO energy-efficiency toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#include "nfmimo/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace nfmimo {

using json = nlohmann::json;

double SimulationParams::noise_power_w() const
{
    return std::pow(10.0, (n0_dbw_per_hz + noise_figure_db) / 10.0) * bandwidth_hz;
}

PropagationParams SimulationParams::propagation() const
{
    PropagationParams p;
    p.beta0 = std::pow(10.0, beta0_db / 10.0);
    p.xi = xi;
    p.wavelength_m = wavelength_m();
    return p;
}

ArraySpec SimulationParams::reference_array() const
{
    ArraySpec a;
    a.n_side = kReferenceSide;
    a.wavelength_m = wavelength_m();
    a.spacing_m = reference_spacing_wavelengths * a.wavelength_m;
    return a;
}

Scenario SimulationParams::scenario() const
{
    Scenario s;
    s.array = reference_array();
    s.propagation = propagation();
    s.m_antennas = m_antennas;
    s.height_diff_m = height_diff_m;
    s.ue_spacing_m = ue_spacing_m;
    return s;
}

UeGeometry SimulationParams::sweep_geometry() const
{
    UeGeometry g;
    g.range_m = ue_range_m;
    g.azimuth_rad = ue_azimuth_rad;
    g.height_diff_m = height_diff_m;
    g.m_antennas = m_antennas;
    g.ue_spacing_m = ue_spacing_m;
    return g;
}

HardwareParams SimulationParams::hardware() const
{
    HardwareParams h = hw;
    h.bandwidth_hz = bandwidth_hz;
    return h;
}

void Config::set_seed(std::uint64_t seed)
{
    sim.seed = seed;
    dataset.seed = seed;
    train.seed = seed;
}

namespace {

/// Walks one JSON object, binding known keys and rejecting the rest.
class Section
{
public:
    Section(const json &obj, std::string path) : obj_(obj), path_(std::move(path))
    {
        if (!obj_.is_object())
            throw ConfigError(where("") + ": expected an object");
    }

    std::string where(const std::string &key) const
    {
        if (path_.empty())
            return key;
        return key.empty() ? path_ : path_ + "." + key;
    }

    template <typename T>
    void bind(const std::string &key, T &target, std::function<bool(const T &)> valid = {},
              const std::string &rule = "")
    {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end())
            return;
        if constexpr (std::is_unsigned_v<T>)
            if (it->is_number() && !it->is_number_unsigned())
                throw ConfigError(where(key) + ": must be a non-negative integer (got " + it->dump() + ")");
        T value;
        try
        {
            value = it->template get<T>();
        }
        catch (const json::exception &)
        {
            throw ConfigError(where(key) + ": wrong type (" + it->dump() + ")");
        }
        if constexpr (std::is_floating_point_v<T>)
            if (!std::isfinite(value))
                throw ConfigError(where(key) + ": must be finite");
        if (valid && !valid(value))
            throw ConfigError(where(key) + ": " + rule + " (got " + it->dump() + ")");
        target = value;
    }

    const json *child(const std::string &key)
    {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void reject_unknown() const
    {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError(where(it.key()) + ": unknown key \"" + it.key() + "\"");
    }

private:
    const json &obj_;
    std::string path_;
    std::set<std::string> seen_;
};

auto positive = [](const double &v) { return v > 0.0; };
auto non_negative = [](const double &v) { return v >= 0.0; };

void parse_simulation(const json &j, SimulationParams &s)
{
    Section sec(j, "simulation");
    sec.bind<double>("carrier_hz", s.carrier_hz, positive, "must be > 0");
    sec.bind<double>("bandwidth_hz", s.bandwidth_hz, positive, "must be > 0");
    sec.bind<double>("n0_dbw_per_hz", s.n0_dbw_per_hz);
    sec.bind<double>("noise_figure_db", s.noise_figure_db);
    sec.bind<double>("beta0_db", s.beta0_db);
    sec.bind<double>("xi", s.xi, positive, "must be > 0");
    sec.bind<double>("height_diff_m", s.height_diff_m);
    sec.bind<int>("m_antennas", s.m_antennas, [](const int &v) { return v >= 1 && v <= 6; }, "must be in [1, 6]");
    sec.bind<double>("ue_spacing_m", s.ue_spacing_m, non_negative, "must be >= 0");
    sec.bind<double>("reference_spacing_wavelengths", s.reference_spacing_wavelengths, positive, "must be > 0");
    sec.reject_unknown();
}

void parse_hardware(const json &j, HardwareParams &h)
{
    Section sec(j, "hardware");
    sec.bind<double>("kappa", h.kappa, [](const double &v) { return v > 0.0 && v <= 1.0; }, "must be in (0, 1]");
    sec.bind<double>("mu_w", h.mu_w, non_negative, "must be >= 0");
    sec.bind<double>("d0_w", h.d0_w, non_negative, "must be >= 0");
    sec.bind<double>("upsilon_j_per_sample", h.upsilon_j_per_sample, non_negative, "must be >= 0");
    sec.bind<double>("eta_j_per_bit", h.eta_j_per_bit, non_negative, "must be >= 0");
    sec.reject_unknown();
}

void parse_sweep(const json &j, SimulationParams &s)
{
    Section sec(j, "sweep");
    sec.bind<std::vector<double>>(
        "rho", s.rho,
        [](const std::vector<double> &v) {
            if (v.empty())
                return false;
            for (double r : v)
                if (!(r >= -0.5 && r <= 0.0))
                    return false;
            return true;
        },
        "must be a non-empty list of values in [-0.5, 0]");
    sec.bind<std::vector<int>>(
        "array_sizes", s.array_sizes,
        [](const std::vector<int> &v) {
            if (v.empty())
                return false;
            for (int n : v)
                if (n < 2)
                    return false;
            return true;
        },
        "must be a non-empty list of sides >= 2");
    sec.bind<double>("ue_range_m", s.ue_range_m, positive, "must be > 0");
    sec.bind<double>("ue_azimuth_rad", s.ue_azimuth_rad,
                     [](const double &v) { return v >= 0.0 && v <= kPi / 2.0; }, "must be in [0, pi/2]");
    sec.bind<double>("grid_min_dbw", s.grid_min_dbw);
    sec.bind<double>("grid_max_dbw", s.grid_max_dbw);
    sec.bind<double>("grid_step_db", s.grid_step_db, positive, "must be > 0");
    sec.reject_unknown();
    if (s.grid_max_dbw < s.grid_min_dbw)
        throw ConfigError("sweep.grid_max_dbw: must be >= sweep.grid_min_dbw");
}

void parse_dataset(const json &j, DatasetSpec &d)
{
    Section sec(j, "dataset");
    sec.bind<std::size_t>("n_train", d.n_train, [](const std::size_t &v) { return v >= 1; }, "must be >= 1");
    sec.bind<std::size_t>("n_val", d.n_val);
    sec.bind<double>("r_min_m", d.r_min_m, positive, "must be > 0");
    sec.bind<double>("r_max_m", d.r_max_m, positive, "must be > 0");
    std::string mode = d.sampling == SamplingMode::Uniform ? "uniform" : "disk";
    sec.bind<std::string>("sampling", mode, [](const std::string &v) { return v == "uniform" || v == "disk"; },
                          "must be \"uniform\" or \"disk\"");
    d.sampling = mode == "uniform" ? SamplingMode::Uniform : SamplingMode::Disk;
    sec.reject_unknown();
    if (!(d.r_max_m > d.r_min_m))
        throw ConfigError("dataset.r_max_m: must exceed dataset.r_min_m");
}

void parse_training(const json &j, Config &c)
{
    Section sec(j, "training");
    TrainConfig &t = c.train;
    sec.bind<double>("rho", c.train_rho, [](const double &v) { return v >= -0.5 && v <= 0.0; },
                     "must be in [-0.5, 0]");
    sec.bind<double>("lr", t.lr, positive, "must be > 0");
    sec.bind<double>("weight_decay", t.weight_decay, non_negative, "must be >= 0");
    sec.bind<double>("lr_min", t.lr_min, positive, "must be > 0");
    sec.bind<int>("epochs", t.epochs, [](const int &v) { return v >= 0; }, "must be >= 0");
    sec.bind<int>("batch_size", t.batch_size, [](const int &v) { return v >= 1; }, "must be >= 1");
    sec.bind<double>("alpha", t.alpha, [](const double &v) { return v > 0.0 && v < 1.0; }, "must be in (0, 1)");
    sec.bind<double>("p_max_w", t.p_max_w, positive, "must be > 0");
    sec.bind<double>("dropout", t.dropout, [](const double &v) { return v >= 0.0 && v < 1.0; },
                     "must be in [0, 1)");
    sec.bind<double>("fd_rel_step", t.fd_rel_step, positive, "must be > 0");
    sec.reject_unknown();
    if (t.lr_min > t.lr)
        throw ConfigError("training.lr_min: must not exceed training.lr");
}

void parse_evaluation(const json &j, DistanceBins &b)
{
    Section sec(j, "evaluation");
    sec.bind<int>("distance_bins", b.count, [](const int &v) { return v >= 1; }, "must be >= 1");
    sec.reject_unknown();
}

} // namespace

Config parse_config_text(const std::string &text)
{
    Config cfg;
    json root = json::object();
    try
    {
        if (text.find_first_not_of(" \t\r\n") != std::string::npos)
            root = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    Section top(root, "");
    std::uint64_t seed = cfg.sim.seed;
    top.bind<std::uint64_t>("seed", seed);
    top.bind<int>("threads", cfg.threads, [](const int &v) { return v >= 1; }, "must be >= 1");
    if (const json *s = top.child("simulation"))
        parse_simulation(*s, cfg.sim);
    if (const json *s = top.child("hardware"))
        parse_hardware(*s, cfg.sim.hw);
    if (const json *s = top.child("sweep"))
        parse_sweep(*s, cfg.sim);
    if (const json *s = top.child("dataset"))
        parse_dataset(*s, cfg.dataset);
    if (const json *s = top.child("training"))
        parse_training(*s, cfg);
    if (const json *s = top.child("evaluation"))
        parse_evaluation(*s, cfg.bins);
    top.reject_unknown();

    cfg.set_seed(seed);
    cfg.dataset.alpha = cfg.train.alpha;
    cfg.bins.lo_m = cfg.dataset.r_min_m;
    cfg.bins.hi_m = cfg.dataset.r_max_m;
    cfg.train.threads = cfg.threads;
    cfg.sim.hw.bandwidth_hz = cfg.sim.bandwidth_hz;
    return cfg;
}

Config parse_config(const std::filesystem::path &path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot read config file: " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_to_json(const Config &cfg)
{
    const SimulationParams &s = cfg.sim;
    const TrainConfig &t = cfg.train;
    json j;
    j["seed"] = s.seed;
    j["threads"] = cfg.threads;
    j["simulation"] = {{"carrier_hz", s.carrier_hz},
                       {"bandwidth_hz", s.bandwidth_hz},
                       {"n0_dbw_per_hz", s.n0_dbw_per_hz},
                       {"noise_figure_db", s.noise_figure_db},
                       {"beta0_db", s.beta0_db},
                       {"xi", s.xi},
                       {"height_diff_m", s.height_diff_m},
                       {"m_antennas", s.m_antennas},
                       {"ue_spacing_m", s.ue_spacing_m},
                       {"reference_spacing_wavelengths", s.reference_spacing_wavelengths}};
    j["hardware"] = {{"kappa", s.hw.kappa},
                     {"mu_w", s.hw.mu_w},
                     {"d0_w", s.hw.d0_w},
                     {"upsilon_j_per_sample", s.hw.upsilon_j_per_sample},
                     {"eta_j_per_bit", s.hw.eta_j_per_bit}};
    j["sweep"] = {{"rho", s.rho},
                  {"array_sizes", s.array_sizes},
                  {"ue_range_m", s.ue_range_m},
                  {"ue_azimuth_rad", s.ue_azimuth_rad},
                  {"grid_min_dbw", s.grid_min_dbw},
                  {"grid_max_dbw", s.grid_max_dbw},
                  {"grid_step_db", s.grid_step_db}};
    j["dataset"] = {{"n_train", cfg.dataset.n_train},
                    {"n_val", cfg.dataset.n_val},
                    {"r_min_m", cfg.dataset.r_min_m},
                    {"r_max_m", cfg.dataset.r_max_m},
                    {"sampling", cfg.dataset.sampling == SamplingMode::Uniform ? "uniform" : "disk"}};
    j["training"] = {{"rho", cfg.train_rho},
                     {"lr", t.lr},
                     {"weight_decay", t.weight_decay},
                     {"lr_min", t.lr_min},
                     {"epochs", t.epochs},
                     {"batch_size", t.batch_size},
                     {"alpha", t.alpha},
                     {"p_max_w", t.p_max_w},
                     {"dropout", t.dropout},
                     {"fd_rel_step", t.fd_rel_step}};
    j["evaluation"] = {{"distance_bins", cfg.bins.count}};
    return j.dump(2) + "\n";
}

} // namespace nfmimo
