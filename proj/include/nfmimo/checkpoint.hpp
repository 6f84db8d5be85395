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
#include "nfmimo/network.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace nfmimo {

/// A trained policy: network weights plus the feature normalization it was
/// trained with.
struct Checkpoint
{
    NetworkParams params;
    FeatureNormalizer normalizer;
    std::uint64_t seed = 0;
    double p_max_w = 0.25;
};

inline constexpr int kCheckpointVersion = 1;

/// JSON text: {"format", "version", "seed", "p_max_w", "shape", "layers":
/// [{"rows", "cols", "weight" (row-major), "bias"}...], "normalization":
/// {"mean", "scale"}}. Doubles are written in shortest round-trip form.
std::string checkpoint_to_string(const Checkpoint &ckpt);
Checkpoint checkpoint_from_string(const std::string &text);

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace nfmimo
