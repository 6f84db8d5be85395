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

#include "nfmimo/geometry.hpp"
#include "nfmimo/types.hpp"

#include <optional>
#include <vector>

namespace nfmimo {

struct PropagationParams
{
    double beta0 = 1e-6; ///< linear gain at 1 m
    double xi = 2.5;     ///< path-loss exponent
    double wavelength_m = 0.02;

    void validate() const;
};

/// M x K line-of-sight channel. `active` is empty for a full-array channel.
struct ChannelMatrix
{
    CMatrix entries;
    std::optional<ModularConfig> active;

    Eigen::Index rows() const { return entries.rows(); }
    Eigen::Index cols() const { return entries.cols(); }
};

/// Compact SVD H = U diag(s) V^H with V of size K x M.
struct SvdResult
{
    CMatrix left;
    RVector singular_values;
    CMatrix right;
};

/// [H]_{m,k} = sqrt(beta0) d_mk^(-xi/2) exp(-j 2 pi d_mk / lambda), exact spherical distances.
ChannelMatrix build_channel(const std::vector<Vec3> &tx_positions, const std::vector<Vec3> &rx_positions,
                            const PropagationParams &params);

/// Singular values descending; each right-singular column is rotated so its
/// first non-negligible entry is real and non-negative (U is co-rotated).
SvdResult compact_svd(const CMatrix &h);
inline SvdResult compact_svd(const ChannelMatrix &h) { return compact_svd(h.entries); }

/// Columns of the full reference-array channel selected by `config.mask`.
ChannelMatrix subselect(const ChannelMatrix &full, const ModularConfig &config);

} // namespace nfmimo
