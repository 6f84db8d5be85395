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
#include "nfmimo/outputs.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nfmimo;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string &text)
{
    std::vector<std::vector<std::string>> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
    {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        out.push_back(cells);
    }
    return out;
}

SimulationParams small_sweep()
{
    SimulationParams sim;
    sim.array_sizes = {12, 6};
    sim.rho = {0.0, -0.2, -0.05};
    return sim;
}

Sample sample_at(const Scenario &scenario, double range_m, double azimuth_rad)
{
    UeGeometry g;
    g.range_m = range_m;
    g.azimuth_rad = azimuth_rad;
    return make_sample(scenario, g, 0.6);
}

/// Checkpoint whose policy is fixed: full array, full power, stream split
/// given by the power-head bias.
Checkpoint fixed_policy(const RVector &power_bias, double p_max_w)
{
    Checkpoint ckpt;
    ckpt.p_max_w = p_max_w;
    ckpt.params = init_network(NetworkShape{}, 5).zeros_like();
    ckpt.normalizer = FeatureNormalizer::identity(static_cast<std::size_t>(ckpt.params.shape.input));
    ckpt.params.head(NetworkParams::ScaleHead).bias(0) = 800.0;
    ckpt.params.head(NetworkParams::CxHead).bias(2) = 1.0;
    ckpt.params.head(NetworkParams::CyHead).bias(2) = 1.0;
    ckpt.params.head(NetworkParams::PowerHead).bias = power_bias;
    return ckpt;
}

} // namespace

TEST_CASE("number formatting", "[outputs]")
{
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-0.05) == "-0.05");
    CHECK(format_number(1.0 / 3.0) == "0.333333333");
    CHECK(format_number(1.6666666666e9) == "1.66666667e+09");
    CHECK(format_number(48) == "48");
}

TEST_CASE("csv writers emit a header for empty input", "[outputs]")
{
    CHECK(sweep_csv({}) == "array,rho,se_bpshz,ee_bits_per_joule,p_opt_dbw,k_active\n");
    CHECK(bench_csv({}) == "scheme,bin_lo_m,bin_hi_m,mean_se,mean_ee,n\n");
    DistanceBins bins;
    bins.count = 2;
    CHECK(history_csv({}, bins) == "epoch,step,lr,train_loss,val_weighted_ee,val_ee_bin_10_105,val_ee_bin_105_200\n");
}

TEST_CASE("density sweep rows", "[harness]")
{
    const SimulationParams sim = small_sweep();
    const auto rows = run_density_sweep(sim, sim.array_sizes, sim.rho);
    REQUIRE(rows.size() == 6);
    const HardwareParams hw = sim.hardware();
    const auto grid = power_grid_dbw(sim.grid_min_dbw, sim.grid_max_dbw, sim.grid_step_db);
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        const SweepRow &row = rows[i];
        CHECK(row.n_side == (i < 3 ? 6 : 12));
        CHECK(row.rho == std::vector<double>{-0.2, -0.05, 0.0}[i % 3]);
        const EvalRecord &rec = row.record;
        CHECK(rec.k_active == row.n_side * row.n_side);
        const double p_tot = rec.total_input_power_w / hw.kappa + hw.mu_w +
                             (hw.d0_w + hw.upsilon_j_per_sample * hw.bandwidth_hz) * rec.k_active +
                             hw.eta_j_per_bit * hw.bandwidth_hz * rec.se_bps_hz;
        CHECK(std::abs(rec.p_tot_w - p_tot) <= 1e-12 * p_tot);
        CHECK(std::abs(rec.ee_bits_per_joule - hw.bandwidth_hz * rec.se_bps_hz / rec.p_tot_w) <=
              1e-9 * rec.ee_bits_per_joule);
        bool on_grid = false;
        for (double g : grid)
            on_grid = on_grid || std::abs(dbw_to_watts(g) - rec.total_input_power_w) <= 1e-12 * rec.total_input_power_w;
        CHECK(on_grid);
    }
}

TEST_CASE("sweep csv is reproducible and consistent", "[harness][outputs]")
{
    const SimulationParams sim = small_sweep();
    const std::string a = sweep_csv(run_density_sweep(sim, sim.array_sizes, sim.rho, 1));
    const std::string b = sweep_csv(run_density_sweep(sim, sim.array_sizes, sim.rho, 1));
    const std::string c = sweep_csv(run_density_sweep(sim, sim.array_sizes, sim.rho, 2));
    CHECK(a == b);
    CHECK(a == c);

    // EE recomputed from the printed columns; each carries up to 5e-9 relative rounding.
    const HardwareParams hw = sim.hardware();
    const auto table = parse_csv(a);
    REQUIRE(table.size() == 7);
    CHECK(table[1][0] == "6x6");
    for (std::size_t r = 1; r < table.size(); ++r)
    {
        REQUIRE(table[r].size() == 6);
        const double se = std::stod(table[r][2]);
        const double ee = std::stod(table[r][3]);
        const double p = dbw_to_watts(std::stod(table[r][4]));
        const int k = std::stoi(table[r][5]);
        const double p_tot = total_power(p, k, se, hw);
        CHECK(std::abs(ee - hw.bandwidth_hz * se / p_tot) <= 2e-8 * ee);
    }
}

TEST_CASE("benchmark schemes on one sample", "[harness]")
{
    const SimulationParams sim;
    const Scenario scenario = sim.scenario();
    const HardwareParams hw = sim.hardware();
    const DistortionParams d{-0.05, sim.noise_power_w()};
    const Sample sample = sample_at(scenario, 37.0, 0.4);

    Checkpoint ckpt;
    ckpt.params = init_network(NetworkShape{}, 21);
    ckpt.normalizer = FeatureNormalizer::identity(294);
    const auto rec = evaluate_schemes(ckpt, sample, hw, d);
    const PolicyOutcome policy = apply_policy(ckpt.params, ckpt.normalizer, sample, hw, d, ckpt.p_max_w);

    CHECK(rec[0].ee_bits_per_joule == policy.record.ee_bits_per_joule);
    CHECK(rec[1].config->index() == policy.config.index());
    CHECK(rec[3].config->index() == policy.config.index());
    CHECK(rec[2].k_active == 36);
    CHECK(rec[4].k_active == 36);
    CHECK(rec[2].config->index() == 8);
    CHECK(std::abs(rec[1].total_input_power_w - ckpt.p_max_w * policy.scale) <= 1e-12);
    CHECK(std::abs(rec[2].total_input_power_w - ckpt.p_max_w * policy.scale) <= 1e-12);
    CHECK(std::abs(rec[3].total_input_power_w - ckpt.p_max_w) <= 1e-12);
    CHECK(std::abs(rec[4].total_input_power_w - ckpt.p_max_w) <= 1e-12);
    for (const auto &r : rec)
        CHECK(std::abs(r.ee_bits_per_joule - hw.bandwidth_hz * r.se_bps_hz / r.p_tot_w) <= 1e-9 * r.ee_bits_per_joule);
}

TEST_CASE("fixed full-array full-power policy collapses the benchmarks", "[harness]")
{
    const SimulationParams sim;
    const Scenario scenario = sim.scenario();
    const HardwareParams hw = sim.hardware();
    const DistortionParams d{-0.05, sim.noise_power_w()};
    const Sample sample = sample_at(scenario, 80.0, 0.9);
    const double p_max = 0.25;

    const SvdResult &all = sample.active_svds[8];
    const EvalRecord wf = evaluate_wf_point(all, 36, p_max, hw, d);
    RVector bias(4);
    for (int i = 0; i < 4; ++i)
        bias(i) = wf.power_vector_w(i) > 0.0 ? std::log(wf.power_vector_w(i)) : -1000.0;

    const auto rec = evaluate_schemes(fixed_policy(bias, p_max), sample, hw, d);
    for (int s = 1; s < kNumSchemes; ++s)
    {
        CHECK(rec[static_cast<std::size_t>(s)].config->index() == 8);
        CHECK(rec[static_cast<std::size_t>(s)].ee_bits_per_joule == rec[1].ee_bits_per_joule);
    }
    CHECK(rec[0].config->index() == 8);
    CHECK(std::abs(rec[0].ee_bits_per_joule - wf.ee_bits_per_joule) <= 1e-9 * wf.ee_bits_per_joule);
    CHECK(std::abs(rec[0].se_bps_hz - wf.se_bps_hz) <= 1e-9 * wf.se_bps_hz);
    CHECK((rec[0].power_vector_w - wf.power_vector_w).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("benchmark aggregation by distance bin", "[harness][outputs]")
{
    const SimulationParams sim;
    const Scenario scenario = sim.scenario();
    const HardwareParams hw = sim.hardware();
    const DistortionParams d{-0.05, sim.noise_power_w()};
    const std::vector<Sample> val = {sample_at(scenario, 20.0, 0.3), sample_at(scenario, 25.0, 1.1),
                                     sample_at(scenario, 150.0, 0.7)};
    Checkpoint ckpt;
    ckpt.params = init_network(NetworkShape{}, 3);
    ckpt.normalizer = FeatureNormalizer::identity(294);
    const DistanceBins bins;

    const BenchmarkResult serial = run_benchmarks(ckpt, val, hw, d, bins, 1);
    const BenchmarkResult threaded = run_benchmarks(ckpt, val, hw, d, bins, 3);
    CHECK(bench_csv(serial.rows) == bench_csv(threaded.rows));

    // Two occupied bins, so two rows per scheme.
    REQUIRE(serial.rows.size() == 2 * kNumSchemes);
    for (int s = 0; s < kNumSchemes; ++s)
    {
        const BenchRow &near = serial.rows[static_cast<std::size_t>(2 * s)];
        const BenchRow &far = serial.rows[static_cast<std::size_t>(2 * s + 1)];
        CHECK(near.scheme == static_cast<BenchmarkScheme>(s));
        CHECK(near.bin_lo_m == 10.0);
        CHECK(near.bin_hi_m == 29.0);
        CHECK(near.n == 2);
        CHECK(far.bin_lo_m == 143.0);
        CHECK(far.n == 1);
        const auto &ps = serial.per_sample;
        const auto si = static_cast<std::size_t>(s);
        CHECK(std::abs(near.mean_ee - 0.5 * (ps[0][si].ee_bits_per_joule + ps[1][si].ee_bits_per_joule)) <=
              1e-12 * near.mean_ee);
        CHECK(far.mean_se == ps[2][si].se_bps_hz);
    }

    const auto table = parse_csv(bench_csv(serial.rows));
    CHECK(table[1][0] == "DNN");
    CHECK(table.back()[0] == "WF_all_full_power");
}

TEST_CASE("svg plots", "[outputs]")
{
    const SimulationParams sim = small_sweep();
    const auto plots = sweep_plots(run_density_sweep(sim, sim.array_sizes, sim.rho));
    REQUIRE(plots.size() == 2);
    CHECK(plots[0].first == "sweep_se.svg");
    CHECK(plots[1].first == "sweep_ee.svg");
    for (const auto &[name, svg] : plots)
    {
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(svg.find("</svg>") != std::string::npos);
        CHECK(svg.find("12x12") != std::string::npos);
    }

    const std::string empty = line_plot_svg("a < b & c", "x", "y", {});
    CHECK(empty.find("a &lt; b &amp; c") != std::string::npos);
}

TEST_CASE("write_text_file creates the directory", "[outputs]")
{
    const auto dir = std::filesystem::temp_directory_path() / "nfmimo_test_outputs" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    write_text_file(dir, "a.txt", "hello\n");
    std::ifstream is(dir / "a.txt");
    std::string line;
    std::getline(is, line);
    CHECK(line == "hello");
    std::filesystem::remove_all(dir.parent_path());
}
