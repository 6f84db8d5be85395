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


#pragma once

#include "nfmimo/channel.hpp"
#include "nfmimo/dataset.hpp"
#include "nfmimo/distortion.hpp"
#include "nfmimo/geometry.hpp"
#include "nfmimo/power_model.hpp"
#include "nfmimo/training.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfmimo {

/// Link-level simulation parameters shared by all experiments.
struct SimulationParams
{
    double carrier_hz = 15e9;
    double bandwidth_hz = 1e8;
    double n0_dbw_per_hz = -204.0;
    double noise_figure_db = 10.0;
    double beta0_db = -60.0;
    double xi = 2.5;
    double height_diff_m = 10.0;
    int m_antennas = 4;
    double ue_spacing_m = 0.0; ///< 0 = half wavelength
    double reference_spacing_wavelengths = 8.0;
    HardwareParams hw;

    // Density sweep.
    std::vector<double> rho = {-0.3, -0.25, -0.2, -0.15, -0.1, -0.05, 0.0};
    std::vector<int> array_sizes = {6, 12, 24, 48};
    double ue_range_m = 50.0;
    double ue_azimuth_rad = kPi / 4.0;
    double grid_min_dbw = -30.0;
    double grid_max_dbw = -10.0;
    double grid_step_db = 2.0;

    std::uint64_t seed = 2025;

    double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
    /// sigma^2 = N0 B F in watts.
    double noise_power_w() const;
    PropagationParams propagation() const;
    ArraySpec reference_array() const;
    Scenario scenario() const;
    UeGeometry sweep_geometry() const;
    HardwareParams hardware() const;
};

/// Every parameter object the harness needs, parsed from one config file.
struct Config
{
    SimulationParams sim;
    DatasetSpec dataset;
    TrainConfig train;
    double train_rho = -0.05;
    DistanceBins bins;
    int threads = 1;

    DistortionParams train_distortion() const { return {train_rho, sim.noise_power_w()}; }
    /// Applies a seed to every seeded component.
    void set_seed(std::uint64_t seed);
};

/// Config file problem; the message names the offending key path.
class ConfigError : public std::runtime_error
{
public:
    explicit ConfigError(const std::string &what) : std::runtime_error(what) {}
};

/// Parses JSON text. Empty or whitespace-only text yields all defaults.
/// Unknown keys, wrong types and out-of-range values raise ConfigError.
Config parse_config_text(const std::string &text);
Config parse_config(const std::filesystem::path &path);

/// Effective configuration as JSON, every key present.
std::string config_to_json(const Config &cfg);

} // namespace nfmimo
