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


#include "nfmimo/channel.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace nfmimo {

void PropagationParams::validate() const
{
    if (!(beta0 > 0.0))
        throw DomainError("PropagationParams: beta0 must be positive");
    if (!(xi > 0.0))
        throw DomainError("PropagationParams: xi must be positive");
    if (!(wavelength_m > 0.0))
        throw DomainError("PropagationParams: wavelength_m must be positive");
}

ChannelMatrix build_channel(const std::vector<Vec3> &tx_positions, const std::vector<Vec3> &rx_positions,
                            const PropagationParams &params)
{
    params.validate();
    const auto n_rx = static_cast<Eigen::Index>(rx_positions.size());
    const auto n_tx = static_cast<Eigen::Index>(tx_positions.size());
    const double amp0 = std::sqrt(params.beta0);

    ChannelMatrix h;
    h.entries.resize(n_rx, n_tx);
    for (Eigen::Index k = 0; k < n_tx; ++k)
    {
        for (Eigen::Index m = 0; m < n_rx; ++m)
        {
            const double d = (rx_positions[static_cast<std::size_t>(m)] - tx_positions[static_cast<std::size_t>(k)]).norm();
            if (!(d > 0.0))
                throw DomainError("build_channel: coincident transmit/receive positions (tx " + std::to_string(k) +
                                  ", rx " + std::to_string(m) + ")");
            // Reduce the phase modulo 2*pi in wavelengths before scaling so long
            // ranges keep full phase precision.
            const double cycles = d / params.wavelength_m;
            const double phase = -2.0 * kPi * (cycles - std::floor(cycles));
            h.entries(m, k) = std::polar(amp0 * std::pow(d, -0.5 * params.xi), phase);
        }
    }
    return h;
}

SvdResult compact_svd(const CMatrix &h)
{
    const Eigen::Index m = h.rows();
    const Eigen::Index k = h.cols();
    if (m > k)
        throw ShapeError("compact_svd: requires rows <= cols, got " + std::to_string(m) + "x" + std::to_string(k));

    Eigen::JacobiSVD<CMatrix, Eigen::ColPivHouseholderQRPreconditioner> svd(h, Eigen::ComputeThinU |
                                                                                   Eigen::ComputeThinV);
    SvdResult out;
    out.left = svd.matrixU();
    out.singular_values = svd.singularValues();
    out.right = svd.matrixV();

    for (Eigen::Index c = 0; c < out.right.cols(); ++c)
    {
        const double scale = out.right.col(c).cwiseAbs().maxCoeff();
        if (!(scale > 0.0))
            continue;
        for (Eigen::Index r = 0; r < out.right.rows(); ++r)
        {
            const Complex v = out.right(r, c);
            if (std::abs(v) > 1e-8 * scale)
            {
                const Complex rot = std::conj(v) / std::abs(v);
                out.right.col(c) *= rot;
                out.left.col(c) *= rot;
                out.right(r, c) = Complex(std::abs(out.right(r, c)), 0.0);
                break;
            }
        }
    }
    return out;
}

ChannelMatrix subselect(const ChannelMatrix &full, const ModularConfig &config)
{
    if (static_cast<Eigen::Index>(config.mask.size()) != full.cols())
        throw DomainError("subselect: mask length " + std::to_string(config.mask.size()) +
                          " does not match channel columns " + std::to_string(full.cols()));

    ChannelMatrix out;
    out.entries.resize(full.rows(), config.active_count());
    Eigen::Index dst = 0;
    for (std::size_t k = 0; k < config.mask.size(); ++k)
        if (config.mask[k])
            out.entries.col(dst++) = full.entries.col(static_cast<Eigen::Index>(k));
    out.active = config;
    return out;
}

} // namespace nfmimo
