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


#include "nfmimo/network.hpp"

#include "nfmimo/rng.hpp"

#include <random>
#include <string>

namespace nfmimo {

RVector softmax(const RVector &logits)
{
    const double peak = logits.maxCoeff();
    RVector e = (logits.array() - peak).exp().matrix();
    return e / e.sum();
}

std::size_t NetworkParams::num_parameters() const
{
    std::size_t n = 0;
    for (const auto &l : layers)
        n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

namespace {

template <typename Params>
auto &locate(Params &params, std::size_t flat_index)
{
    std::size_t offset = flat_index;
    for (auto &l : params.layers)
    {
        const auto nw = static_cast<std::size_t>(l.weight.size());
        if (offset < nw)
        {
            const auto cols = static_cast<std::size_t>(l.weight.cols());
            return l.weight(static_cast<Eigen::Index>(offset / cols), static_cast<Eigen::Index>(offset % cols));
        }
        offset -= nw;
        const auto nb = static_cast<std::size_t>(l.bias.size());
        if (offset < nb)
            return l.bias(static_cast<Eigen::Index>(offset));
        offset -= nb;
    }
    throw DomainError("NetworkParams: flat index " + std::to_string(flat_index) + " out of range");
}

} // namespace

double &NetworkParams::at(std::size_t flat_index) { return locate(*this, flat_index); }

double NetworkParams::at(std::size_t flat_index) const { return locate(*this, flat_index); }

std::size_t NetworkParams::layer_of(std::size_t flat_index) const
{
    std::size_t offset = flat_index;
    for (std::size_t i = 0; i < layers.size(); ++i)
    {
        const auto n = static_cast<std::size_t>(layers[i].weight.size() + layers[i].bias.size());
        if (offset < n)
            return i;
        offset -= n;
    }
    throw DomainError("NetworkParams: flat index " + std::to_string(flat_index) + " out of range");
}

NetworkParams NetworkParams::zeros_like() const
{
    NetworkParams z;
    z.shape = shape;
    z.layers.reserve(layers.size());
    for (const auto &l : layers)
        z.layers.push_back({RMatrix::Zero(l.weight.rows(), l.weight.cols()), RVector::Zero(l.bias.size())});
    return z;
}

bool NetworkParams::all_finite() const
{
    for (const auto &l : layers)
        if (!l.weight.allFinite() || !l.bias.allFinite())
            return false;
    return true;
}

NetworkParams init_network(const NetworkShape &shape, std::uint64_t seed)
{
    if (shape.input < 1 || shape.m_streams < 1)
        throw DomainError("init_network: invalid shape");

    std::mt19937_64 rng(seed);
    auto make = [&](int out, int in) {
        const double bound = std::sqrt(1.0 / in);
        std::uniform_real_distribution<double> dist(-bound, bound);
        DenseLayer l{RMatrix(out, in), RVector::Zero(out)};
        // Row-major fill order so the draw sequence matches the flat layout.
        for (Eigen::Index r = 0; r < out; ++r)
            for (Eigen::Index c = 0; c < in; ++c)
                l.weight(r, c) = dist(rng);
        return l;
    };

    NetworkParams p;
    p.shape = shape;
    int in = shape.input;
    for (int width : shape.trunk)
    {
        if (width < 1)
            throw DomainError("init_network: trunk widths must be positive");
        p.layers.push_back(make(width, in));
        in = width;
    }
    p.layers.push_back(make(shape.m_streams, in));
    p.layers.push_back(make(1, in));
    p.layers.push_back(make(3, in));
    p.layers.push_back(make(3, in));
    return p;
}

HeadOutputs HeadOutputs::from_raw(const RVector &raw, int m_streams)
{
    if (raw.size() != m_streams + 7)
        throw DomainError("HeadOutputs: raw head vector has wrong length");
    HeadOutputs h;
    h.power_logits = raw.head(m_streams);
    h.scaling_logit = raw(m_streams);
    h.cx_logits = raw.segment(m_streams + 1, 3);
    h.cy_logits = raw.segment(m_streams + 4, 3);
    h.cx_probs = softmax(h.cx_logits);
    h.cy_probs = softmax(h.cy_logits);
    return h;
}

ForwardCache forward_batch(const NetworkParams &params, const RMatrix &features, const DropoutMode &mode)
{
    if (features.rows() != params.shape.input)
        throw DomainError("forward: expected " + std::to_string(params.shape.input) + " features, got " +
                          std::to_string(features.rows()));
    if (mode.train && !(mode.rate >= 0.0 && mode.rate < 1.0))
        throw DomainError("forward: dropout rate must lie in [0, 1)");

    const std::size_t depth = params.trunk_depth();
    ForwardCache cache;
    cache.inputs.reserve(depth);
    cache.pre_activation.reserve(depth);

    RMatrix x = features;
    for (std::size_t l = 0; l < depth; ++l)
    {
        const DenseLayer &layer = params.layers[l];
        RMatrix z = layer.weight * x;
        z.colwise() += layer.bias;
        RMatrix a = z.unaryExpr([](double v) { return silu(v); });
        if (mode.train && mode.rate > 0.0)
        {
            std::mt19937_64 rng(derive_seed(mode.seed, {static_cast<std::uint64_t>(l)}));
            const double keep_scale = 1.0 / (1.0 - mode.rate);
            RMatrix mask(a.rows(), a.cols());
            for (Eigen::Index c = 0; c < a.cols(); ++c)
                for (Eigen::Index r = 0; r < a.rows(); ++r)
                    mask(r, c) = unit_interval(rng()) < mode.rate ? 0.0 : keep_scale;
            a = a.cwiseProduct(mask);
            cache.dropout_mask.push_back(std::move(mask));
        }
        cache.inputs.push_back(std::move(x));
        cache.pre_activation.push_back(std::move(z));
        x = std::move(a);
    }
    cache.trunk_output = std::move(x);

    const int m = params.shape.m_streams;
    cache.raw_heads.resize(params.shape.head_width(), features.cols());
    const Eigen::Index rows[4] = {m, 1, 3, 3};
    Eigen::Index row = 0;
    for (std::size_t h = 0; h < 4; ++h)
    {
        const DenseLayer &head = params.layers[depth + h];
        RMatrix out = head.weight * cache.trunk_output;
        out.colwise() += head.bias;
        cache.raw_heads.middleRows(row, rows[h]) = out;
        row += rows[h];
    }
    return cache;
}

HeadOutputs forward(const NetworkParams &params, const RVector &features, const DropoutMode &mode)
{
    const ForwardCache cache = forward_batch(params, features, mode);
    return HeadOutputs::from_raw(cache.raw_heads.col(0), params.shape.m_streams);
}

NetworkParams backward(const NetworkParams &params, const ForwardCache &cache, const RMatrix &head_grad)
{
    if (head_grad.rows() != params.shape.head_width() || head_grad.cols() != cache.raw_heads.cols())
        throw DomainError("backward: head gradient shape mismatch");

    const std::size_t depth = params.trunk_depth();
    NetworkParams grad = params.zeros_like();

    const int m = params.shape.m_streams;
    const Eigen::Index rows[4] = {m, 1, 3, 3};
    RMatrix d_trunk = RMatrix::Zero(cache.trunk_output.rows(), cache.trunk_output.cols());
    Eigen::Index row = 0;
    for (std::size_t h = 0; h < 4; ++h)
    {
        const auto g = head_grad.middleRows(row, rows[h]);
        grad.layers[depth + h].weight.noalias() = g * cache.trunk_output.transpose();
        grad.layers[depth + h].bias = g.rowwise().sum();
        d_trunk.noalias() += params.layers[depth + h].weight.transpose() * g;
        row += rows[h];
    }

    RMatrix d_out = std::move(d_trunk);
    for (std::size_t l = depth; l-- > 0;)
    {
        if (!cache.dropout_mask.empty())
            d_out = d_out.cwiseProduct(cache.dropout_mask[l]);
        const RMatrix d_z =
            d_out.cwiseProduct(cache.pre_activation[l].unaryExpr([](double v) { return silu_derivative(v); }));
        grad.layers[l].weight.noalias() = d_z * cache.inputs[l].transpose();
        grad.layers[l].bias = d_z.rowwise().sum();
        if (l > 0)
            d_out.noalias() = params.layers[l].weight.transpose() * d_z;
    }
    return grad;
}

RVector power_from_heads(const HeadOutputs &outputs, double p_max_w)
{
    if (!(p_max_w > 0.0))
        throw DomainError("power_from_heads: p_max_w must be positive");
    return (p_max_w * sigmoid(outputs.scaling_logit)) * softmax(outputs.power_logits);
}

namespace {

int argmax_last(const RVector &v)
{
    int best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v(i) >= v(best))
            best = static_cast<int>(i);
    return best;
}

} // namespace

ModularConfig config_from_heads(const HeadOutputs &outputs)
{
    return modular_mask(argmax_last(outputs.cx_probs) + 1, argmax_last(outputs.cy_probs) + 1);
}

TransmitCovariance transmit_covariance(const SvdResult &active_svd, const RVector &p)
{
    return TransmitCovariance::from_precoder(active_svd.right, p);
}

} // namespace nfmimo
