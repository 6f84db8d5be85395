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

#include "nfmimo/dataset.hpp"
#include "nfmimo/distortion.hpp"
#include "nfmimo/network.hpp"
#include "nfmimo/power_model.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace nfmimo {

struct TrainConfig
{
    double lr = 1e-3;
    double weight_decay = 2e-4;
    double lr_min = 1e-5;
    int epochs = 10;
    int batch_size = 64;
    double alpha = 0.6;
    double p_max_w = 0.25;
    std::uint64_t seed = 2025;
    double dropout = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    /// Relative central-difference step on the continuous head outputs.
    double fd_rel_step = 1e-4;
    int threads = 1;

    void validate() const;
};

/// Equal-width distance bins over [lo, hi].
struct DistanceBins
{
    double lo_m = 10.0;
    double hi_m = 200.0;
    int count = 10;

    int index_of(double range_m) const;
    double lower(int i) const { return lo_m + (hi_m - lo_m) * i / count; }
    double upper(int i) const { return lo_m + (hi_m - lo_m) * (i + 1) / count; }
};

/// EE of stream powers p on modular config `config_index` of a sample.
double config_energy_efficiency(const Sample &sample, int config_index, const RVector &p, const HardwareParams &hw,
                                const DistortionParams &d);

struct SampleLoss
{
    double loss = 0.0;                   ///< -w * sum_ab Px[a] Py[b] EE(a, b)
    RVector head_grad;                   ///< d loss / d raw head outputs
    std::array<double, kNumConfigs> ee{}; ///< by ModularConfig::index()
    double expected_ee = 0.0;
    bool finite = true;
};

/// Expected-EE loss over the 9 configs. Gradients w.r.t. the power logits and
/// scaling logit use central differences; the config logits are exact.
SampleLoss sample_loss(const HeadOutputs &heads, const Sample &sample, const HardwareParams &hw,
                       const DistortionParams &d, double p_max_w, double fd_rel_step = 1e-4);

/// Same, running the network in eval mode on already-normalized features.
SampleLoss sample_loss(const NetworkParams &params, const RVector &normalized_features, const Sample &sample,
                       const HardwareParams &hw, const DistortionParams &d, double p_max_w,
                       double fd_rel_step = 1e-4);

/// Cosine annealing lr_min + (lr - lr_min)(1 + cos(pi t / T)) / 2.
double cosine_lr(std::size_t step, std::size_t total_steps, double lr, double lr_min);

/// AdamW with decoupled weight decay: w <- w (1 - lr wd) - lr m_hat / (sqrt(v_hat) + eps).
class AdamW
{
public:
    AdamW(const NetworkParams &like, double beta1, double beta2, double eps, double weight_decay);

    void step(NetworkParams &params, const NetworkParams &grad, double lr);
    std::size_t steps_taken() const { return t_; }

private:
    NetworkParams m_;
    NetworkParams v_;
    double beta1_;
    double beta2_;
    double eps_;
    double weight_decay_;
    std::size_t t_ = 0;
};

/// Deployed policy on one sample: argmax config, p from the power heads.
struct PolicyOutcome
{
    ModularConfig config;
    RVector power_w;
    double scale = 0.0; ///< sigmoid(u)
    EvalRecord record;
};

PolicyOutcome apply_policy(const NetworkParams &params, const FeatureNormalizer &normalizer, const Sample &sample,
                           const HardwareParams &hw, const DistortionParams &d, double p_max_w);

struct ValidationMetrics
{
    double weighted_ee = 0.0; ///< mean EE / r^alpha
    double mean_ee = 0.0;
    double mean_se = 0.0;
    std::vector<double> bin_ee; ///< NaN for empty bins
};

ValidationMetrics validate_policy(const NetworkParams &params, const FeatureNormalizer &normalizer,
                                  const std::vector<Sample> &val, const HardwareParams &hw, const DistortionParams &d,
                                  double p_max_w, const DistanceBins &bins = {}, int threads = 1);

struct EpochRecord
{
    int epoch = 0;
    std::size_t step = 0; ///< global steps completed
    double lr = 0.0;      ///< last learning rate used
    double train_loss = 0.0;
    double val_weighted_ee = 0.0;
    std::vector<double> val_bin_ee;
    std::size_t skipped = 0;
};

struct TrainHistory
{
    double initial_batch_loss = 0.0;
    std::vector<EpochRecord> epochs;
};

struct TrainResult
{
    NetworkParams params;
    TrainHistory history;
};

/// Non-finite loss during training; carries the history up to that point.
class TrainingDiverged : public std::runtime_error
{
public:
    TrainingDiverged(const std::string &what, TrainHistory history)
        : std::runtime_error(what), history_(std::move(history))
    {
    }
    const TrainHistory &history() const { return history_; }

private:
    TrainHistory history_;
};

TrainResult train(NetworkParams params, const std::vector<Sample> &train_set, const std::vector<Sample> &val_set,
                  const FeatureNormalizer &normalizer, const TrainConfig &cfg, const HardwareParams &hw,
                  const DistortionParams &d, const DistanceBins &bins = {});

struct GradientCheckReport
{
    double max_rel_error = 0.0;
    std::vector<double> per_layer_max; ///< by NetworkParams::layers index, 0 when unsampled
    std::size_t n_checked = 0;
};

/// End-to-end check: head gradients from sample_loss chained through backprop
/// versus central differences of the exact loss on sampled parameters.
/// Relative error is |a - b| / max(|a|, |b|, 1e-8 * max gradient magnitude).
GradientCheckReport gradient_check(const NetworkParams &params, const RVector &normalized_features,
                                   const Sample &sample, const HardwareParams &hw, const DistortionParams &d,
                                   double p_max_w, std::size_t n_params, std::uint64_t seed);

/// Backprop-only check with the surrogate loss 0.5 ||raw heads - target||^2.
GradientCheckReport mlp_gradient_check(const NetworkParams &params, const RVector &features, const RVector &target,
                                       std::size_t n_params, std::uint64_t seed);

} // namespace nfmimo
