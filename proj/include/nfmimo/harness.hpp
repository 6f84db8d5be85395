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

#include "nfmimo/checkpoint.hpp"
#include "nfmimo/config.hpp"
#include "nfmimo/power_model.hpp"
#include "nfmimo/training.hpp"

#include <array>
#include <string>
#include <vector>

namespace nfmimo {

/// Max-EE operating point of one equal-aperture array at one rho.
struct SweepRow
{
    int n_side = 0;
    double rho = 0.0;
    EvalRecord record;
};

/// EE-optimal WF operating points for every (array size, rho), full-array
/// activation, rows sorted by (array size, rho).
std::vector<SweepRow> run_density_sweep(const SimulationParams &params, const std::vector<int> &array_sizes,
                                        const std::vector<double> &rho_list, int threads = 1);

enum class BenchmarkScheme
{
    Dnn = 0,
    WfLearnedPowerAndAntennas = 1,
    WfAllLearnedPower = 2,
    WfLearnedAntennasFullPower = 3,
    WfAllFullPower = 4,
};

inline constexpr int kNumSchemes = 5;

const char *scheme_name(BenchmarkScheme scheme);

/// The five schemes evaluated on one sample, by BenchmarkScheme value.
std::array<EvalRecord, kNumSchemes> evaluate_schemes(const Checkpoint &ckpt, const Sample &sample,
                                                     const HardwareParams &hw, const DistortionParams &d);

struct BenchRow
{
    BenchmarkScheme scheme = BenchmarkScheme::Dnn;
    double bin_lo_m = 0.0;
    double bin_hi_m = 0.0;
    double mean_se = 0.0;
    double mean_ee = 0.0;
    std::size_t n = 0;
};

struct BenchmarkResult
{
    std::vector<BenchRow> rows; ///< scheme-major, then bin order; empty bins omitted
    std::vector<std::array<EvalRecord, kNumSchemes>> per_sample;
};

BenchmarkResult run_benchmarks(const Checkpoint &ckpt, const std::vector<Sample> &val_set, const HardwareParams &hw,
                               const DistortionParams &d, const DistanceBins &bins, int threads = 1);

} // namespace nfmimo
