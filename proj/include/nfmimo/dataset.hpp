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
#include "nfmimo/geometry.hpp"
#include "nfmimo/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nfmimo {

enum class SamplingMode
{
    Uniform, ///< r and phi independently uniform
    Disk,    ///< uniform over the first-quadrant annulus r_min <= r <= r_max
};

struct DatasetSpec
{
    std::size_t n_train = 5000;
    std::size_t n_val = 2000;
    double r_min_m = 10.0;
    double r_max_m = 200.0;
    double phi_min_rad = 0.0;
    double phi_max_rad = kPi / 2.0;
    double alpha = 0.6;
    SamplingMode sampling = SamplingMode::Uniform;
    std::uint64_t seed = 2025;

    void validate() const;
};

/// Everything needed to turn a UE geometry into a channel.
struct Scenario
{
    ArraySpec array = ArraySpec::reference(0.02);
    PropagationParams propagation;
    int m_antennas = 4;
    double height_diff_m = 10.0;
    double ue_spacing_m = 0.0;
};

/// Normalization applied to the range feature.
inline constexpr double kRangeFeatureScale = 200.0;

/// Independent sample streams: geometries of stream s, index i are drawn from
/// a generator seeded by (seed, s, i), so any subset can be built in parallel.
enum class SampleStream : std::uint64_t
{
    Train = 0,
    Validation = 1,
};

std::vector<UeGeometry> sample_geometries(const DatasetSpec &spec, std::size_t count, SampleStream stream,
                                          int m_antennas = 4, double height_diff_m = 10.0);

/// Feature vector [ln(1+s_1..M), r/200, phi, Re vec(V), Im vec(V)] with V
/// from the full-array SVD, vectorized column-major.
RVector build_features(const UeGeometry &geometry, const ChannelMatrix &full_channel, const SvdResult &svd);

inline std::size_t feature_length(int m_antennas, int k_full)
{
    return static_cast<std::size_t>(m_antennas + 2 + 2 * m_antennas * k_full);
}

/// Loss weight 1 / r^alpha with r in meters.
double sample_weight(double range_m, double alpha);

struct Sample
{
    UeGeometry geometry;
    ChannelMatrix full_channel;
    RVector features;
    double weight = 1.0;
    /// SVD of the active channel of each modular config, by ModularConfig::index().
    std::array<SvdResult, kNumConfigs> active_svds;
    SvdResult full_svd;
};

Sample make_sample(const Scenario &scenario, const UeGeometry &geometry, double alpha);

std::vector<Sample> build_samples(const Scenario &scenario, const std::vector<UeGeometry> &geometries, double alpha,
                                  int threads = 1);

/// Per-feature affine normalization (x - mean) / scale.
struct FeatureNormalizer
{
    RVector mean;
    RVector scale;

    static FeatureNormalizer fit(const std::vector<Sample> &samples);
    static FeatureNormalizer identity(std::size_t length);
    RVector apply(const RVector &features) const;
};

struct Dataset
{
    std::vector<Sample> train;
    std::vector<Sample> val;
};

Dataset generate_dataset(const Scenario &scenario, const DatasetSpec &spec, int threads = 1);

/// 64-bit FNV-1a over a canonical text rendering of (spec, scenario).
std::uint64_t dataset_hash(const Scenario &scenario, const DatasetSpec &spec);

/// Binary cache of the sampled geometries and features. Layout, little-endian:
///   "NFDS" | u32 version | u64 seed | u64 hash | u64 n_train | u64 n_val |
///   u64 feature_length | per sample: f64 r, f64 phi, f64 weight, f64 features[...]
void save_dataset_cache(const std::filesystem::path &path, const Scenario &scenario, const DatasetSpec &spec,
                        const Dataset &dataset);

/// Loads a cache written for the same (seed, hash); channels and SVDs are
/// rebuilt from the stored geometries. Returns nullopt on key mismatch.
std::optional<Dataset> load_dataset_cache(const std::filesystem::path &path, const Scenario &scenario,
                                          const DatasetSpec &spec, int threads = 1);

/// Loads the cache if it matches, otherwise generates and rewrites it.
Dataset cached_dataset(const std::filesystem::path &path, const Scenario &scenario, const DatasetSpec &spec,
                       int threads = 1);

} // namespace nfmimo
