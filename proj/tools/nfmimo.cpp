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


// nfmimo: density sweeps, policy training/evaluation and distortion checks.
//
//   nfmimo sweep    --config cfg.json --out results/
//   nfmimo train    --config cfg.json --out results/
//   nfmimo eval     --config cfg.json --checkpoint results/checkpoint.json --out results/
//   nfmimo mc-check --rho -0.1 --k 4 --samples 1000000 --seed 7
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include "nfmimo/checkpoint.hpp"
#include "nfmimo/config.hpp"
#include "nfmimo/dataset.hpp"
#include "nfmimo/harness.hpp"
#include "nfmimo/outputs.hpp"
#include "nfmimo/parallel.hpp"
#include "nfmimo/rng.hpp"
#include "nfmimo/training.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>

namespace {

using namespace nfmimo;

struct CommonOptions
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    bool no_plots = false;
    bool deterministic = false;
    std::optional<int> threads;
};

void add_common(CLI::App *cmd, CommonOptions &opt)
{
    cmd->add_option("--config", opt.config_path, "JSON configuration file (defaults apply when omitted)");
    cmd->add_option("--seed", opt.seed, "Override the configured seed");
    cmd->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    cmd->add_flag("--no-plots", opt.no_plots, "Skip SVG plots");
    cmd->add_flag("--deterministic", opt.deterministic, "Force serial evaluation");
    cmd->add_option("--threads", opt.threads, "Worker threads (overrides the config)");
}

Config load_config(const CommonOptions &opt)
{
    Config cfg = opt.config_path.empty() ? parse_config_text("") : parse_config(opt.config_path);
    if (opt.seed)
        cfg.set_seed(*opt.seed);
    if (opt.threads)
        cfg.threads = std::max(1, *opt.threads);
    if (opt.deterministic)
        cfg.threads = 1;
    cfg.train.threads = cfg.threads;
    write_text_file(opt.out_dir, "config.effective.json", config_to_json(cfg));
    return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_sweep(const CommonOptions &opt)
{
    const Config cfg = load_config(opt);
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = run_density_sweep(cfg.sim, cfg.sim.array_sizes, cfg.sim.rho, cfg.threads);
    write_text_file(opt.out_dir, "sweep.csv", sweep_csv(rows));
    if (!opt.no_plots)
        for (const auto &[name, svg] : sweep_plots(rows))
            write_text_file(opt.out_dir, name, svg);
    std::cerr << "sweep: " << rows.size() << " operating points in " << seconds_since(t0) << " s\n";
    return 0;
}

Dataset load_dataset(const Config &cfg, const std::string &cache)
{
    const Scenario scenario = cfg.sim.scenario();
    if (!cache.empty())
        return cached_dataset(cache, scenario, cfg.dataset, cfg.threads);
    return generate_dataset(scenario, cfg.dataset, cfg.threads);
}

void write_benchmarks(const CommonOptions &opt, const Config &cfg, const Checkpoint &ckpt, const Dataset &ds)
{
    const auto bench =
        run_benchmarks(ckpt, ds.val, cfg.sim.hardware(), cfg.train_distortion(), cfg.bins, cfg.threads);
    write_text_file(opt.out_dir, "bench.csv", bench_csv(bench.rows));
    if (!opt.no_plots)
        for (const auto &[name, svg] : bench_plots(bench.rows))
            write_text_file(opt.out_dir, name, svg);
}

int run_train(const CommonOptions &opt, const std::string &cache)
{
    const Config cfg = load_config(opt);
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset ds = load_dataset(cfg, cache);
    std::cerr << "train: dataset ready (" << ds.train.size() << " train, " << ds.val.size() << " val) after "
              << seconds_since(t0) << " s\n";

    Checkpoint ckpt;
    ckpt.seed = cfg.train.seed;
    ckpt.p_max_w = cfg.train.p_max_w;
    ckpt.normalizer = FeatureNormalizer::fit(ds.train);
    NetworkShape shape;
    shape.m_streams = cfg.sim.m_antennas;
    shape.input = static_cast<int>(feature_length(shape.m_streams, kReferenceAntennas));
    NetworkParams init = init_network(shape, derive_seed(cfg.train.seed, {0x1417u}));

    TrainResult result;
    try
    {
        result = train(std::move(init), ds.train, ds.val, ckpt.normalizer, cfg.train, cfg.sim.hardware(),
                       cfg.train_distortion(), cfg.bins);
    }
    catch (const TrainingDiverged &e)
    {
        write_text_file(opt.out_dir, "history.csv", history_csv(e.history(), cfg.bins));
        throw;
    }
    ckpt.params = std::move(result.params);
    write_text_file(opt.out_dir, "history.csv", history_csv(result.history, cfg.bins));
    save_checkpoint(std::filesystem::path(opt.out_dir) / "checkpoint.json", ckpt);
    write_benchmarks(opt, cfg, ckpt, ds);
    std::cerr << "train: finished " << result.history.epochs.size() << " epochs in " << seconds_since(t0) << " s\n";
    return 0;
}

int run_eval(const CommonOptions &opt, const std::string &checkpoint_path, const std::string &cache)
{
    const Config cfg = load_config(opt);
    if (checkpoint_path.empty())
        throw std::runtime_error("eval: --checkpoint is required");
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    const Dataset ds = load_dataset(cfg, cache);
    write_benchmarks(opt, cfg, ckpt, ds);
    return 0;
}

struct McOptions
{
    double rho = -0.1;
    int k = 2;
    std::size_t samples = 1000000;
    std::uint64_t seed = 1;
};

/// Random PSD covariance A A^H / K + 0.1 I with unit-scale diagonal.
CMatrix random_covariance(int k, std::uint64_t seed)
{
    std::mt19937_64 rng(derive_seed(seed, {0xC0u}));
    std::normal_distribution<double> n(0.0, 1.0);
    CMatrix a(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            a(i, j) = Complex(n(rng), n(rng));
    return a * a.adjoint() / static_cast<double>(k) + 0.1 * CMatrix::Identity(k, k);
}

int run_mc_check(const McOptions &mc)
{
    if (mc.k < 1)
        throw ConfigError("mc-check: --k must be >= 1");
    if (!(mc.rho >= -0.5 && mc.rho <= 0.0))
        throw ConfigError("mc-check: --rho must lie in [-0.5, 0]");
    const TransmitCovariance q = TransmitCovariance::from_matrix(random_covariance(mc.k, mc.seed));
    const auto t0 = std::chrono::steady_clock::now();
    const MonteCarloDistortion emp = monte_carlo_distortion(q, mc.rho, mc.samples, mc.seed);
    const double elapsed = seconds_since(t0);

    const double g = bussgang_gain(mc.rho);
    const CMatrix analytic = distortion_covariance(q, mc.rho);
    const CMatrix g_ref = g * CMatrix::Identity(mc.k, mc.k);
    const double gain_err = (emp.gain - g_ref).norm() / g_ref.norm();
    const double cov_norm = analytic.norm();
    const double cov_err = cov_norm > 0.0 ? (emp.distortion_cov - analytic).norm() / cov_norm
                                          : emp.distortion_cov.norm();

    std::printf("quantity,analytic,empirical,rel_error\n");
    std::printf("bussgang_gain,%s,%s,%s\n", format_number(g).c_str(),
                format_number(emp.gain.diagonal().real().mean()).c_str(), format_number(gain_err).c_str());
    std::printf("distortion_power,%s,%s,%s\n", format_number(analytic.diagonal().real().sum()).c_str(),
                format_number(emp.distortion_cov.diagonal().real().sum()).c_str(),
                format_number(std::abs(emp.distortion_cov.diagonal().real().sum() -
                                       analytic.diagonal().real().sum()) /
                              std::max(analytic.diagonal().real().sum(), 1e-300))
                    .c_str());
    std::printf("distortion_cov_fro,%s,%s,%s\n", format_number(cov_norm).c_str(),
                format_number(emp.distortion_cov.norm()).c_str(), format_number(cov_err).c_str());
    std::fprintf(stderr, "mc-check: rho=%g K=%d samples=%zu in %.2f s\n", mc.rho, mc.k, mc.samples, elapsed);
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"nfmimo: near-field modular-array MIMO energy-efficiency toolkit"};
    app.require_subcommand(1);

    CommonOptions sweep_opt, train_opt, eval_opt;
    std::string train_cache, eval_cache, checkpoint_path;

    auto *sweep = app.add_subcommand("sweep", "EE-optimal WF operating points versus rho for equal-aperture arrays");
    add_common(sweep, sweep_opt);

    auto *train_cmd = app.add_subcommand("train", "Train the power/activation policy and benchmark it");
    add_common(train_cmd, train_opt);
    train_cmd->add_option("--dataset-cache", train_cache, "Binary dataset cache file (created if stale)");

    auto *eval = app.add_subcommand("eval", "Benchmark a trained checkpoint on the validation set");
    add_common(eval, eval_opt);
    eval->add_option("--checkpoint", checkpoint_path, "Checkpoint written by train")->required();
    eval->add_option("--dataset-cache", eval_cache, "Binary dataset cache file (created if stale)");

    McOptions mc;
    auto *mc_cmd = app.add_subcommand("mc-check", "Monte-Carlo check of the Bussgang gain and distortion covariance");
    mc_cmd->add_option("--rho", mc.rho, "Compression parameter in [-0.5, 0]")->capture_default_str();
    mc_cmd->add_option("--k", mc.k, "Number of antennas")->capture_default_str();
    mc_cmd->add_option("--samples", mc.samples, "Gaussian draws (>= 10^4)")->capture_default_str();
    mc_cmd->add_option("--seed", mc.seed, "Seed for the covariance and the draws")->capture_default_str();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try
    {
        if (*sweep)
            return run_sweep(sweep_opt);
        if (*train_cmd)
            return run_train(train_opt, train_cache);
        if (*eval)
            return run_eval(eval_opt, checkpoint_path, eval_cache);
        if (*mc_cmd)
            return run_mc_check(mc);
    }
    catch (const ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
