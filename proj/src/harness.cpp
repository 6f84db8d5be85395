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


#include "nfmimo/harness.hpp"

#include "nfmimo/parallel.hpp"

#include <algorithm>

namespace nfmimo {

std::vector<SweepRow> run_density_sweep(const SimulationParams &params, const std::vector<int> &array_sizes,
                                        const std::vector<double> &rho_list, int threads)
{
    const double lambda = params.wavelength_m();
    const ArraySpec reference = params.reference_array();
    const PropagationParams prop = params.propagation();
    const HardwareParams hw = params.hardware();
    const std::vector<double> grid = power_grid_dbw(params.grid_min_dbw, params.grid_max_dbw, params.grid_step_db);
    const auto rx = ue_positions(params.sweep_geometry(), lambda);

    std::vector<int> sizes = array_sizes;
    std::sort(sizes.begin(), sizes.end());
    std::vector<double> rhos = rho_list;
    std::sort(rhos.begin(), rhos.end());

    std::vector<SweepRow> rows(sizes.size() * rhos.size());
    parallel_for(sizes.size(), threads, [&](std::size_t a) {
        const ArraySpec spec = ArraySpec::equal_aperture(sizes[a], reference.aperture_side_m(), lambda);
        const ChannelMatrix h = build_channel(antenna_positions(spec), rx, prop);
        for (std::size_t r = 0; r < rhos.size(); ++r)
        {
            SweepRow &row = rows[a * rhos.size() + r];
            row.n_side = sizes[a];
            row.rho = rhos[r];
            row.record = ee_power_sweep(h, hw, DistortionParams{rhos[r], params.noise_power_w()}, grid);
        }
    });
    return rows;
}

const char *scheme_name(BenchmarkScheme scheme)
{
    switch (scheme)
    {
    case BenchmarkScheme::Dnn:
        return "DNN";
    case BenchmarkScheme::WfLearnedPowerAndAntennas:
        return "WF_learned_power_and_antennas";
    case BenchmarkScheme::WfAllLearnedPower:
        return "WF_all_learned_power";
    case BenchmarkScheme::WfLearnedAntennasFullPower:
        return "WF_learned_antennas_full_power";
    case BenchmarkScheme::WfAllFullPower:
        return "WF_all_full_power";
    }
    return "unknown";
}

std::array<EvalRecord, kNumSchemes> evaluate_schemes(const Checkpoint &ckpt, const Sample &sample,
                                                     const HardwareParams &hw, const DistortionParams &d)
{
    const PolicyOutcome policy = apply_policy(ckpt.params, ckpt.normalizer, sample, hw, d, ckpt.p_max_w);
    const ModularConfig &learned = policy.config;
    const ModularConfig all = modular_mask(3, 3);
    const SvdResult &learned_svd = sample.active_svds[static_cast<std::size_t>(learned.index())];
    const SvdResult &all_svd = sample.active_svds[static_cast<std::size_t>(all.index())];
    const double learned_power = ckpt.p_max_w * policy.scale;

    std::array<EvalRecord, kNumSchemes> out;
    out[0] = policy.record;
    out[1] = evaluate_wf_point(learned_svd, learned.active_count(), learned_power, hw, d);
    out[1].config = learned;
    out[2] = evaluate_wf_point(all_svd, all.active_count(), learned_power, hw, d);
    out[2].config = all;
    out[3] = evaluate_wf_point(learned_svd, learned.active_count(), ckpt.p_max_w, hw, d);
    out[3].config = learned;
    out[4] = evaluate_wf_point(all_svd, all.active_count(), ckpt.p_max_w, hw, d);
    out[4].config = all;
    return out;
}

BenchmarkResult run_benchmarks(const Checkpoint &ckpt, const std::vector<Sample> &val_set, const HardwareParams &hw,
                               const DistortionParams &d, const DistanceBins &bins, int threads)
{
    BenchmarkResult result;
    result.per_sample.resize(val_set.size());
    parallel_for(val_set.size(), threads,
                 [&](std::size_t i) { result.per_sample[i] = evaluate_schemes(ckpt, val_set[i], hw, d); });

    const auto n_bins = static_cast<std::size_t>(bins.count);
    for (int s = 0; s < kNumSchemes; ++s)
    {
        std::vector<double> se(n_bins, 0.0), ee(n_bins, 0.0);
        std::vector<std::size_t> count(n_bins, 0);
        for (std::size_t i = 0; i < val_set.size(); ++i)
        {
            const int b = bins.index_of(val_set[i].geometry.range_m);
            if (b < 0)
                continue;
            const EvalRecord &rec = result.per_sample[i][static_cast<std::size_t>(s)];
            se[static_cast<std::size_t>(b)] += rec.se_bps_hz;
            ee[static_cast<std::size_t>(b)] += rec.ee_bits_per_joule;
            ++count[static_cast<std::size_t>(b)];
        }
        for (std::size_t b = 0; b < n_bins; ++b)
        {
            if (count[b] == 0)
                continue;
            BenchRow row;
            row.scheme = static_cast<BenchmarkScheme>(s);
            row.bin_lo_m = bins.lower(static_cast<int>(b));
            row.bin_hi_m = bins.upper(static_cast<int>(b));
            row.mean_se = se[b] / static_cast<double>(count[b]);
            row.mean_ee = ee[b] / static_cast<double>(count[b]);
            row.n = count[b];
            result.rows.push_back(row);
        }
    }
    return result;
}

} // namespace nfmimo
