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


#include "nfmimo/training.hpp"

#include "nfmimo/parallel.hpp"
#include "nfmimo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace nfmimo {

void TrainConfig::validate() const
{
    if (!(lr > 0.0 && lr_min > 0.0 && lr_min <= lr))
        throw DomainError("TrainConfig: need 0 < lr_min <= lr");
    if (weight_decay < 0.0)
        throw DomainError("TrainConfig: weight_decay must be non-negative");
    if (epochs < 0 || batch_size < 1)
        throw DomainError("TrainConfig: epochs must be >= 0 and batch_size >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("TrainConfig: alpha must lie in (0, 1)");
    if (!(p_max_w > 0.0))
        throw DomainError("TrainConfig: p_max_w must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0))
        throw DomainError("TrainConfig: dropout must lie in [0, 1)");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && adam_eps > 0.0))
        throw DomainError("TrainConfig: invalid AdamW moments");
    if (!(fd_rel_step > 0.0))
        throw DomainError("TrainConfig: fd_rel_step must be positive");
}

int DistanceBins::index_of(double range_m) const
{
    if (range_m < lo_m || range_m > hi_m)
        return -1;
    const int i = static_cast<int>(std::floor((range_m - lo_m) / (hi_m - lo_m) * count));
    return std::clamp(i, 0, count - 1);
}

double config_energy_efficiency(const Sample &sample, int config_index, const RVector &p, const HardwareParams &hw,
                                const DistortionParams &d)
{
    const SvdResult &svd = sample.active_svds[static_cast<std::size_t>(config_index)];
    const int k = static_cast<int>(svd.right.rows());
    const double se = precoded_spectral_efficiency(svd, p, d);
    return energy_efficiency(se, total_power(p.sum(), k, se, hw), hw);
}

namespace {

double pair_weight(const HeadOutputs &heads, int config_index)
{
    return heads.cx_probs(config_index / 3) * heads.cy_probs(config_index % 3);
}

std::array<double, kNumConfigs> ee_all_configs(const Sample &sample, const RVector &p, const HardwareParams &hw,
                                               const DistortionParams &d)
{
    std::array<double, kNumConfigs> ee{};
    for (int c = 0; c < kNumConfigs; ++c)
        ee[static_cast<std::size_t>(c)] = config_energy_efficiency(sample, c, p, hw, d);
    return ee;
}

double expected_ee(const HeadOutputs &heads, const std::array<double, kNumConfigs> &ee)
{
    double acc = 0.0;
    for (int c = 0; c < kNumConfigs; ++c)
        acc += pair_weight(heads, c) * ee[static_cast<std::size_t>(c)];
    return acc;
}

double loss_only(const HeadOutputs &heads, const Sample &sample, const HardwareParams &hw, const DistortionParams &d,
                 double p_max_w)
{
    const RVector p = power_from_heads(heads, p_max_w);
    return -sample.weight * expected_ee(heads, ee_all_configs(sample, p, hw, d));
}

} // namespace

SampleLoss sample_loss(const HeadOutputs &heads, const Sample &sample, const HardwareParams &hw,
                       const DistortionParams &d, double p_max_w, double fd_rel_step)
{
    const int m = static_cast<int>(heads.power_logits.size());
    SampleLoss out;
    out.head_grad = RVector::Zero(m + 7);

    try
    {
        const RVector p = power_from_heads(heads, p_max_w);
        out.ee = ee_all_configs(sample, p, hw, d);
        out.expected_ee = expected_ee(heads, out.ee);
        out.loss = -sample.weight * out.expected_ee;

        // Continuous heads: power logits then the scaling logit.
        for (int j = 0; j <= m; ++j)
        {
            HeadOutputs plus = heads;
            HeadOutputs minus = heads;
            double &xp = j < m ? plus.power_logits(j) : plus.scaling_logit;
            double &xm = j < m ? minus.power_logits(j) : minus.scaling_logit;
            const double x0 = xp;
            const double h = fd_rel_step * std::max(1.0, std::abs(x0));
            xp = x0 + h;
            xm = x0 - h;
            const double e_plus = expected_ee(heads, ee_all_configs(sample, power_from_heads(plus, p_max_w), hw, d));
            const double e_minus =
                expected_ee(heads, ee_all_configs(sample, power_from_heads(minus, p_max_w), hw, d));
            out.head_grad(j) = -sample.weight * (e_plus - e_minus) / ((x0 + h) - (x0 - h));
        }

        // The loss is bilinear in (Px, Py); chain through each softmax.
        RVector g_px = RVector::Zero(3);
        RVector g_py = RVector::Zero(3);
        for (int c = 0; c < kNumConfigs; ++c)
        {
            const double e = out.ee[static_cast<std::size_t>(c)];
            g_px(c / 3) += -sample.weight * heads.cy_probs(c % 3) * e;
            g_py(c % 3) += -sample.weight * heads.cx_probs(c / 3) * e;
        }
        out.head_grad.segment(m + 1, 3) = heads.cx_probs.cwiseProduct(g_px.array().matrix() -
                                                                      RVector::Constant(3, heads.cx_probs.dot(g_px)));
        out.head_grad.segment(m + 4, 3) = heads.cy_probs.cwiseProduct(g_py.array().matrix() -
                                                                      RVector::Constant(3, heads.cy_probs.dot(g_py)));
    }
    catch (const DomainError &)
    {
        out.finite = false;
        return out;
    }

    out.finite = std::isfinite(out.loss) && out.head_grad.allFinite();
    for (double e : out.ee)
        out.finite = out.finite && std::isfinite(e);
    return out;
}

SampleLoss sample_loss(const NetworkParams &params, const RVector &normalized_features, const Sample &sample,
                       const HardwareParams &hw, const DistortionParams &d, double p_max_w, double fd_rel_step)
{
    return sample_loss(forward(params, normalized_features, DropoutMode::eval()), sample, hw, d, p_max_w,
                       fd_rel_step);
}

double cosine_lr(std::size_t step, std::size_t total_steps, double lr, double lr_min)
{
    if (total_steps == 0)
        return lr;
    const double frac = static_cast<double>(std::min(step, total_steps)) / static_cast<double>(total_steps);
    return lr_min + 0.5 * (lr - lr_min) * (1.0 + std::cos(kPi * frac));
}

AdamW::AdamW(const NetworkParams &like, double beta1, double beta2, double eps, double weight_decay)
    : m_(like.zeros_like()), v_(like.zeros_like()), beta1_(beta1), beta2_(beta2), eps_(eps),
      weight_decay_(weight_decay)
{
}

void AdamW::step(NetworkParams &params, const NetworkParams &grad, double lr)
{
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const double decay = 1.0 - lr * weight_decay_;

    auto update = [&](auto &w, const auto &g, auto &m, auto &v) {
        m = beta1_ * m + (1.0 - beta1_) * g;
        v = beta2_ * v + (1.0 - beta2_) * g.cwiseAbs2();
        w *= decay;
        w.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps_);
    };
    for (std::size_t l = 0; l < params.layers.size(); ++l)
    {
        update(params.layers[l].weight, grad.layers[l].weight, m_.layers[l].weight, v_.layers[l].weight);
        update(params.layers[l].bias, grad.layers[l].bias, m_.layers[l].bias, v_.layers[l].bias);
    }
}

PolicyOutcome apply_policy(const NetworkParams &params, const FeatureNormalizer &normalizer, const Sample &sample,
                           const HardwareParams &hw, const DistortionParams &d, double p_max_w)
{
    const HeadOutputs heads = forward(params, normalizer.apply(sample.features), DropoutMode::eval());
    PolicyOutcome out;
    out.config = config_from_heads(heads);
    out.power_w = power_from_heads(heads, p_max_w);
    out.scale = sigmoid(heads.scaling_logit);
    const SvdResult &svd = sample.active_svds[static_cast<std::size_t>(out.config.index())];
    out.record = evaluate_precoded(svd, out.config.active_count(), out.power_w, hw, d);
    out.record.config = out.config;
    return out;
}

ValidationMetrics validate_policy(const NetworkParams &params, const FeatureNormalizer &normalizer,
                                  const std::vector<Sample> &val, const HardwareParams &hw, const DistortionParams &d,
                                  double p_max_w, const DistanceBins &bins, int threads)
{
    std::vector<EvalRecord> records(val.size());
    parallel_for(val.size(), threads,
                 [&](std::size_t i) { records[i] = apply_policy(params, normalizer, val[i], hw, d, p_max_w).record; });

    ValidationMetrics out;
    std::vector<double> sum(static_cast<std::size_t>(bins.count), 0.0);
    std::vector<std::size_t> n(static_cast<std::size_t>(bins.count), 0);
    for (std::size_t i = 0; i < val.size(); ++i)
    {
        out.weighted_ee += val[i].weight * records[i].ee_bits_per_joule;
        out.mean_ee += records[i].ee_bits_per_joule;
        out.mean_se += records[i].se_bps_hz;
        const int b = bins.index_of(val[i].geometry.range_m);
        if (b >= 0)
        {
            sum[static_cast<std::size_t>(b)] += records[i].ee_bits_per_joule;
            ++n[static_cast<std::size_t>(b)];
        }
    }
    if (!val.empty())
    {
        const double inv = 1.0 / static_cast<double>(val.size());
        out.weighted_ee *= inv;
        out.mean_ee *= inv;
        out.mean_se *= inv;
    }
    for (std::size_t b = 0; b < sum.size(); ++b)
        out.bin_ee.push_back(n[b] ? sum[b] / static_cast<double>(n[b]) : std::numeric_limits<double>::quiet_NaN());
    return out;
}

TrainResult train(NetworkParams params, const std::vector<Sample> &train_set, const std::vector<Sample> &val_set,
                  const FeatureNormalizer &normalizer, const TrainConfig &cfg, const HardwareParams &hw,
                  const DistortionParams &d, const DistanceBins &bins)
{
    cfg.validate();
    hw.validate();
    d.validate();
    TrainResult result;
    if (cfg.epochs == 0)
    {
        result.params = std::move(params);
        return result;
    }
    if (train_set.empty())
        throw DomainError("train: empty training set");

    const std::size_t n = train_set.size();
    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    const std::size_t steps_per_epoch = (n + batch - 1) / batch;
    const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(cfg.epochs);
    const int m = params.shape.m_streams;

    RMatrix features(params.shape.input, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        features.col(static_cast<Eigen::Index>(i)) = normalizer.apply(train_set[i].features);

    AdamW opt(params, cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.weight_decay);
    std::vector<std::size_t> order(n);
    std::size_t step = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch)
    {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, {0x5u, static_cast<std::uint64_t>(epoch)}));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        EpochRecord rec;
        rec.epoch = epoch + 1;
        double loss_sum = 0.0;
        std::size_t loss_batches = 0;

        for (std::size_t start = 0; start < n; start += batch)
        {
            const std::size_t count = std::min(batch, n - start);
            RMatrix x(params.shape.input, static_cast<Eigen::Index>(count));
            for (std::size_t j = 0; j < count; ++j)
                x.col(static_cast<Eigen::Index>(j)) = features.col(static_cast<Eigen::Index>(order[start + j]));

            const ForwardCache cache =
                forward_batch(params, x, DropoutMode::training(derive_seed(cfg.seed, {0xD0u, step}), cfg.dropout));

            std::vector<SampleLoss> losses(count);
            parallel_for(count, cfg.threads, [&](std::size_t j) {
                const HeadOutputs heads = HeadOutputs::from_raw(cache.raw_heads.col(static_cast<Eigen::Index>(j)), m);
                losses[j] = sample_loss(heads, train_set[order[start + j]], hw, d, cfg.p_max_w, cfg.fd_rel_step);
            });

            std::size_t valid = 0;
            for (std::size_t j = 0; j < count; ++j)
            {
                if (losses[j].finite)
                    ++valid;
                else
                {
                    ++rec.skipped;
                    std::clog << "train: skipping sample " << order[start + j] << " with non-finite EE\n";
                }
            }
            if (valid == 0)
                throw TrainingDiverged("train: every sample in batch at step " + std::to_string(step) +
                                           " produced a non-finite loss",
                                       result.history);

            RMatrix head_grad = RMatrix::Zero(params.shape.head_width(), static_cast<Eigen::Index>(count));
            double batch_loss = 0.0;
            const double inv = 1.0 / static_cast<double>(valid);
            for (std::size_t j = 0; j < count; ++j)
            {
                if (!losses[j].finite)
                    continue;
                batch_loss += losses[j].loss * inv;
                head_grad.col(static_cast<Eigen::Index>(j)) = losses[j].head_grad * inv;
            }
            if (!std::isfinite(batch_loss))
                throw TrainingDiverged("train: non-finite batch loss at step " + std::to_string(step), result.history);
            if (step == 0)
                result.history.initial_batch_loss = batch_loss;

            const NetworkParams grad = backward(params, cache, head_grad);
            const double lr = cosine_lr(step, total_steps, cfg.lr, cfg.lr_min);
            opt.step(params, grad, lr);
            if (!params.all_finite())
                throw TrainingDiverged("train: parameters became non-finite at step " + std::to_string(step),
                                       result.history);

            rec.lr = lr;
            loss_sum += batch_loss;
            ++loss_batches;
            ++step;
        }

        rec.step = step;
        rec.train_loss = loss_sum / static_cast<double>(loss_batches);
        if (!val_set.empty())
        {
            const ValidationMetrics vm =
                validate_policy(params, normalizer, val_set, hw, d, cfg.p_max_w, bins, cfg.threads);
            rec.val_weighted_ee = vm.weighted_ee;
            rec.val_bin_ee = vm.bin_ee;
        }
        result.history.epochs.push_back(std::move(rec));
    }

    result.params = std::move(params);
    return result;
}

namespace {

std::vector<std::size_t> pick_parameters(std::size_t total, std::size_t n, std::uint64_t seed)
{
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (n < total)
    {
        std::mt19937_64 rng(seed);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(n);
        std::sort(idx.begin(), idx.end());
    }
    return idx;
}

template <typename LossFn>
GradientCheckReport compare_gradients(NetworkParams params, const NetworkParams &analytic, LossFn &&loss,
                                      std::size_t n_params, std::uint64_t seed, double rel_step)
{
    const std::vector<std::size_t> idx = pick_parameters(params.num_parameters(), n_params, seed);
    std::vector<double> fd(idx.size());
    std::vector<double> an(idx.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i)
    {
        double &theta = params.at(idx[i]);
        const double x0 = theta;
        const double h = rel_step * std::max(1.0, std::abs(x0));
        auto at = [&](double v) {
            theta = v;
            return loss(params);
        };
        // Fourth-order central stencil; lets h stay large enough that
        // cancellation does not swamp gradients near 1e-8.
        const double near = at(x0 + h) - at(x0 - h);
        const double far = at(x0 + 2.0 * h) - at(x0 - 2.0 * h);
        fd[i] = (8.0 * near - far) / (12.0 * h);
        theta = x0;
        an[i] = analytic.at(idx[i]);
        peak = std::max({peak, std::abs(fd[i]), std::abs(an[i])});
    }

    GradientCheckReport report;
    report.n_checked = idx.size();
    report.per_layer_max.assign(params.layers.size(), 0.0);
    const double floor = std::max(1e-8 * peak, std::numeric_limits<double>::min());
    for (std::size_t i = 0; i < idx.size(); ++i)
    {
        const double err = std::abs(an[i] - fd[i]) / std::max({std::abs(an[i]), std::abs(fd[i]), floor});
        const std::size_t layer = params.layer_of(idx[i]);
        report.per_layer_max[layer] = std::max(report.per_layer_max[layer], err);
        report.max_rel_error = std::max(report.max_rel_error, err);
    }
    return report;
}

} // namespace

GradientCheckReport gradient_check(const NetworkParams &params, const RVector &normalized_features,
                                   const Sample &sample, const HardwareParams &hw, const DistortionParams &d,
                                   double p_max_w, std::size_t n_params, std::uint64_t seed)
{
    const ForwardCache cache = forward_batch(params, normalized_features, DropoutMode::eval());
    const HeadOutputs heads = HeadOutputs::from_raw(cache.raw_heads.col(0), params.shape.m_streams);
    const SampleLoss sl = sample_loss(heads, sample, hw, d, p_max_w);
    if (!sl.finite)
        throw DomainError("gradient_check: loss is not finite at the check point");
    const NetworkParams analytic = backward(params, cache, sl.head_grad);

    auto loss = [&](const NetworkParams &p) {
        return loss_only(forward(p, normalized_features, DropoutMode::eval()), sample, hw, d, p_max_w);
    };
    return compare_gradients(params, analytic, loss, n_params, seed, 1e-5);
}

GradientCheckReport mlp_gradient_check(const NetworkParams &params, const RVector &features, const RVector &target,
                                       std::size_t n_params, std::uint64_t seed)
{
    if (target.size() != params.shape.head_width())
        throw DomainError("mlp_gradient_check: target length must equal the head width");
    const ForwardCache cache = forward_batch(params, features, DropoutMode::eval());
    const NetworkParams analytic = backward(params, cache, cache.raw_heads - target);

    auto loss = [&](const NetworkParams &p) {
        const RMatrix raw = forward_batch(p, features, DropoutMode::eval()).raw_heads;
        return 0.5 * (raw - target).squaredNorm();
    };
    return compare_gradients(params, analytic, loss, n_params, seed, 1e-3);
}

} // namespace nfmimo
