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
#include <cstdint>
#include <vector>

namespace nfmimo {

inline double sigmoid(double x)
{
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// x * sigmoid(x).
inline double silu(double x) { return x * sigmoid(x); }

inline double silu_derivative(double x)
{
    const double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
}

/// Max-subtracted softmax.
RVector softmax(const RVector &logits);

struct NetworkShape
{
    int input = 294;
    std::vector<int> trunk = {64, 128, 128, 128, 128, 64, 64};
    int m_streams = 4;

    /// Width of the stacked head output: M power logits, 1 scaling logit, 3 + 3 config logits.
    int head_width() const { return m_streams + 1 + 3 + 3; }
    bool operator==(const NetworkShape &) const = default;
};

struct DenseLayer
{
    RMatrix weight; ///< out x in
    RVector bias;
};

/// Trunk layers followed by the power, scaling, C_x and C_y head projections,
/// each attached to the last trunk layer (or to the input when the trunk is
/// empty, which gives a linear model).
struct NetworkParams
{
    NetworkShape shape;
    std::vector<DenseLayer> layers;

    enum Head : std::size_t
    {
        PowerHead = 0,
        ScaleHead = 1,
        CxHead = 2,
        CyHead = 3,
    };

    std::size_t trunk_depth() const { return shape.trunk.size(); }
    const DenseLayer &head(Head h) const { return layers[trunk_depth() + h]; }
    DenseLayer &head(Head h) { return layers[trunk_depth() + h]; }

    std::size_t num_parameters() const;
    /// Flat addressing: layer by layer, weight (row-major) then bias.
    double &at(std::size_t flat_index);
    double at(std::size_t flat_index) const;
    /// Index of the layer holding a flat parameter.
    std::size_t layer_of(std::size_t flat_index) const;

    /// Same-shaped parameters filled with zeros.
    NetworkParams zeros_like() const;
    bool all_finite() const;
};

/// Uniform(-sqrt(1/fan_in), sqrt(1/fan_in)) weights, zero biases.
NetworkParams init_network(const NetworkShape &shape, std::uint64_t seed);

struct DropoutMode
{
    bool train = false;
    std::uint64_t seed = 0;
    double rate = 0.1;

    static DropoutMode eval() { return {}; }
    static DropoutMode training(std::uint64_t seed, double rate = 0.1) { return {true, seed, rate}; }
};

/// The four head outputs for one sample.
struct HeadOutputs
{
    RVector power_logits;
    double scaling_logit = 0.0;
    RVector cx_logits;
    RVector cy_logits;
    RVector cx_probs;
    RVector cy_probs;

    /// Builds outputs from one column of the stacked raw head vector.
    static HeadOutputs from_raw(const RVector &raw, int m_streams);
};

/// Activations retained for backprop over a batch (columns are samples).
struct ForwardCache
{
    std::vector<RMatrix> inputs;       ///< input to each trunk layer
    std::vector<RMatrix> pre_activation;
    std::vector<RMatrix> dropout_mask; ///< inverted-scaled masks, empty in eval mode
    RMatrix trunk_output;
    RMatrix raw_heads;                 ///< head_width x batch
};

ForwardCache forward_batch(const NetworkParams &params, const RMatrix &features, const DropoutMode &mode);

HeadOutputs forward(const NetworkParams &params, const RVector &features, const DropoutMode &mode);

/// Parameter gradient (summed over the batch) for a loss gradient w.r.t.
/// the raw head outputs, laid out like ForwardCache::raw_heads.
NetworkParams backward(const NetworkParams &params, const ForwardCache &cache, const RMatrix &head_grad);

/// p = P_max sigmoid(u) softmax(p_logits).
RVector power_from_heads(const HeadOutputs &outputs, double p_max_w);

/// (argmax cx + 1, argmax cy + 1), ties toward the larger index.
ModularConfig config_from_heads(const HeadOutputs &outputs);

/// Q = V diag(p) V^H from the SVD of the active channel.
TransmitCovariance transmit_covariance(const SvdResult &active_svd, const RVector &p);

} // namespace nfmimo
