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
#include "nfmimo/distortion.hpp"
#include "nfmimo/geometry.hpp"
#include "nfmimo/types.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace nfmimo {

/// Radio power consumption model parameters.
struct HardwareParams
{
    double kappa = 0.4;                  ///< PA efficiency
    double mu_w = 0.1;                   ///< fixed power
    double d0_w = 0.02;                  ///< per RF chain
    double upsilon_j_per_sample = 1e-10; ///< processing energy
    double eta_j_per_bit = 1e-11;        ///< coding energy
    double bandwidth_hz = 1e8;

    void validate() const;
};

/// One evaluated operating point.
struct EvalRecord
{
    double se_bps_hz = 0.0;
    double p_tot_w = 0.0;
    double ee_bits_per_joule = 0.0;
    int k_active = 0;
    std::optional<ModularConfig> config; ///< empty for a full (non-modular) array
    RVector power_vector_w;
    double total_input_power_w = 0.0;
    double radiated_power_w = 0.0;
};

/// P_tot = tr(Q)/kappa + mu + (D0 + upsilon B) K + eta B SE.
double total_power(double trace_q_w, int k_active, double se, const HardwareParams &hw);

/// B SE / P_tot.
double energy_efficiency(double se, double p_tot_w, const HardwareParams &hw);

/// Capacity-optimal allocation p_i = max(0, nu - sigma^2 / s_i^2) with
/// sum(p) = total_power, solved exactly over the sorted active set.
RVector water_filling(const RVector &singular_values, double noise_power, double total_power);

/// Water level nu of the allocation returned by water_filling.
double water_level(const RVector &singular_values, double noise_power, double total_power);

/// Evaluates WF precoding on `svd` with distortion at one total input power.
EvalRecord evaluate_wf_point(const SvdResult &svd, int k_active, double total_input_power_w,
                             const HardwareParams &hw, const DistortionParams &d);

/// Evaluates an arbitrary stream power vector precoded on the right singular vectors.
EvalRecord evaluate_precoded(const SvdResult &svd, int k_active, const RVector &p, const HardwareParams &hw,
                             const DistortionParams &d);

/// Max-EE operating point of WF precoding over a grid of total input powers
/// in dBW; ties go to the lower power.
EvalRecord ee_power_sweep(const ChannelMatrix &h, const HardwareParams &hw, const DistortionParams &d,
                          const std::vector<double> &grid_dbw);

/// Grid lo, lo + step, ..., up to and including hi.
std::vector<double> power_grid_dbw(double lo_dbw, double hi_dbw, double step_db);

inline double dbw_to_watts(double dbw) { return std::pow(10.0, dbw / 10.0); }
inline double watts_to_dbw(double w) { return 10.0 * std::log10(w); }

} // namespace nfmimo
