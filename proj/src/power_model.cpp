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


#include "nfmimo/power_model.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace nfmimo {

void HardwareParams::validate() const
{
    if (!(kappa > 0.0 && kappa <= 1.0))
        throw DomainError("HardwareParams: kappa must lie in (0, 1]");
    if (mu_w < 0.0 || d0_w < 0.0 || upsilon_j_per_sample < 0.0 || eta_j_per_bit < 0.0)
        throw DomainError("HardwareParams: power and energy coefficients must be non-negative");
    if (!(bandwidth_hz > 0.0))
        throw DomainError("HardwareParams: bandwidth_hz must be positive");
}

double total_power(double trace_q_w, int k_active, double se, const HardwareParams &hw)
{
    return trace_q_w / hw.kappa + hw.mu_w + (hw.d0_w + hw.upsilon_j_per_sample * hw.bandwidth_hz) * k_active +
           hw.eta_j_per_bit * hw.bandwidth_hz * se;
}

double energy_efficiency(double se, double p_tot_w, const HardwareParams &hw)
{
    if (!(p_tot_w > 0.0))
        throw DomainError("energy_efficiency: total power must be positive");
    return hw.bandwidth_hz * se / p_tot_w;
}

namespace {

struct WaterFillingSolution
{
    RVector powers;
    double level = 0.0;
};

WaterFillingSolution solve_water_filling(const RVector &s, double noise_power, double total)
{
    if (!(total > 0.0))
        throw DomainError("water_filling: total power must be positive");
    if (!(noise_power > 0.0))
        throw DomainError("water_filling: noise power must be positive");

    std::vector<Eigen::Index> order;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > 0.0)
            order.push_back(i);
    if (order.empty())
        throw DomainError("water_filling: all singular values are zero");

    // Ascending inverse gain sigma^2 / s_i^2; stable so equal gains keep index order.
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return s(a) > s(b); });
    std::vector<double> floor(order.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        floor[i] = noise_power / (s(order[i]) * s(order[i]));

    // Largest active set whose weakest member still sits below the water level.
    double level = 0.0;
    std::size_t active = 0;
    double acc = 0.0;
    for (std::size_t n = 1; n <= order.size(); ++n)
    {
        acc += floor[n - 1];
        const double candidate = (total + acc) / static_cast<double>(n);
        if (candidate > floor[n - 1])
        {
            level = candidate;
            active = n;
        }
        else
        {
            break;
        }
    }

    WaterFillingSolution out;
    out.level = level;
    out.powers = RVector::Zero(s.size());
    for (std::size_t i = 0; i < active; ++i)
        out.powers(order[i]) = level - floor[i];

    // level - floor cancels badly when the floors dwarf the budget; spread the
    // rounding residual over the active streams so the budget holds exactly.
    const double residual = (total - out.powers.sum()) / static_cast<double>(active);
    for (std::size_t i = 0; i < active; ++i)
        out.powers(order[i]) = std::max(0.0, out.powers(order[i]) + residual);
    out.level += residual;
    return out;
}

} // namespace

RVector water_filling(const RVector &singular_values, double noise_power, double total_power)
{
    return solve_water_filling(singular_values, noise_power, total_power).powers;
}

double water_level(const RVector &singular_values, double noise_power, double total_power)
{
    return solve_water_filling(singular_values, noise_power, total_power).level;
}

EvalRecord evaluate_precoded(const SvdResult &svd, int k_active, const RVector &p, const HardwareParams &hw,
                             const DistortionParams &d)
{
    EvalRecord rec;
    rec.k_active = k_active;
    rec.power_vector_w = p;
    rec.total_input_power_w = p.sum();
    rec.se_bps_hz = precoded_spectral_efficiency(svd, p, d);
    rec.p_tot_w = total_power(rec.total_input_power_w, k_active, rec.se_bps_hz, hw);
    rec.ee_bits_per_joule = energy_efficiency(rec.se_bps_hz, rec.p_tot_w, hw);
    const double g = bussgang_gain(d.rho);
    // tr(C_eta) only needs the diagonal of Q.
    const RVector q_diag = (svd.right * p.cast<Complex>().asDiagonal()).cwiseProduct(svd.right.conjugate())
                               .rowwise()
                               .sum()
                               .real();
    const double eps = 1e-18 * std::max(1.0, rec.total_input_power_w);
    double distortion = 0.0;
    for (Eigen::Index k = 0; k < q_diag.size(); ++k)
        distortion += q_diag(k) < eps ? 0.0 : 2.0 * d.rho * d.rho * q_diag(k);
    rec.radiated_power_w = g * g * rec.total_input_power_w + distortion;
    return rec;
}

EvalRecord evaluate_wf_point(const SvdResult &svd, int k_active, double total_input_power_w,
                             const HardwareParams &hw, const DistortionParams &d)
{
    const RVector p = water_filling(svd.singular_values, d.noise_power_w, total_input_power_w);
    return evaluate_precoded(svd, k_active, p, hw, d);
}

EvalRecord ee_power_sweep(const ChannelMatrix &h, const HardwareParams &hw, const DistortionParams &d,
                          const std::vector<double> &grid_dbw)
{
    if (grid_dbw.empty())
        throw DomainError("ee_power_sweep: empty power grid");
    hw.validate();
    d.validate();

    const SvdResult svd = compact_svd(h);
    const int k_active = static_cast<int>(h.cols());

    std::optional<EvalRecord> best;
    for (double dbw : grid_dbw)
    {
        EvalRecord rec = evaluate_wf_point(svd, k_active, dbw_to_watts(dbw), hw, d);
        rec.config = h.active;
        if (!best || rec.ee_bits_per_joule > best->ee_bits_per_joule ||
            (rec.ee_bits_per_joule == best->ee_bits_per_joule && rec.total_input_power_w < best->total_input_power_w))
            best = std::move(rec);
    }
    return *best;
}

std::vector<double> power_grid_dbw(double lo_dbw, double hi_dbw, double step_db)
{
    if (!(step_db > 0.0) || hi_dbw < lo_dbw)
        throw DomainError("power_grid_dbw: need step > 0 and hi >= lo");
    std::vector<double> grid;
    for (int i = 0;; ++i)
    {
        const double v = lo_dbw + i * step_db;
        if (v > hi_dbw + 1e-9 * step_db)
            break;
        grid.push_back(v);
    }
    return grid;
}

} // namespace nfmimo
