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


#include "nfmimo/dataset.hpp"

#include "nfmimo/parallel.hpp"
#include "nfmimo/rng.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace nfmimo {

void DatasetSpec::validate() const
{
    if (!(r_min_m > 0.0 && r_max_m > r_min_m))
        throw DomainError("DatasetSpec: need 0 < r_min_m < r_max_m");
    if (!(phi_min_rad >= 0.0 && phi_max_rad <= kPi / 2.0 && phi_min_rad <= phi_max_rad))
        throw DomainError("DatasetSpec: azimuth range must lie within [0, pi/2]");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("DatasetSpec: alpha must lie in (0, 1)");
}

std::vector<UeGeometry> sample_geometries(const DatasetSpec &spec, std::size_t count, SampleStream stream,
                                          int m_antennas, double height_diff_m)
{
    spec.validate();
    std::vector<UeGeometry> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
    {
        std::mt19937_64 rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(stream), i}));
        const double u_r = unit_interval(rng());
        const double u_phi = unit_interval(rng());

        UeGeometry g;
        g.m_antennas = m_antennas;
        g.height_diff_m = height_diff_m;
        if (spec.sampling == SamplingMode::Uniform)
        {
            g.range_m = spec.r_min_m + u_r * (spec.r_max_m - spec.r_min_m);
        }
        else
        {
            const double lo2 = spec.r_min_m * spec.r_min_m;
            const double hi2 = spec.r_max_m * spec.r_max_m;
            g.range_m = std::sqrt(lo2 + u_r * (hi2 - lo2));
        }
        g.azimuth_rad = spec.phi_min_rad + u_phi * (spec.phi_max_rad - spec.phi_min_rad);
        out.push_back(g);
    }
    return out;
}

RVector build_features(const UeGeometry &geometry, const ChannelMatrix &full_channel, const SvdResult &svd)
{
    const Eigen::Index m = full_channel.rows();
    const Eigen::Index k = full_channel.cols();
    if (svd.singular_values.size() != m || svd.right.rows() != k || svd.right.cols() != m)
        throw DomainError("build_features: SVD dimensions do not match the " + std::to_string(m) + "x" +
                          std::to_string(k) + " channel");

    RVector f(static_cast<Eigen::Index>(feature_length(static_cast<int>(m), static_cast<int>(k))));
    Eigen::Index pos = 0;
    for (Eigen::Index i = 0; i < m; ++i)
        f(pos++) = std::log1p(svd.singular_values(i));
    f(pos++) = geometry.range_m / kRangeFeatureScale;
    f(pos++) = geometry.azimuth_rad;
    // Eigen storage is column-major, so the flat view is vec(V).
    const Eigen::Map<const CVector> vec_v(svd.right.data(), k * m);
    f.segment(pos, k * m) = vec_v.real();
    pos += k * m;
    f.segment(pos, k * m) = vec_v.imag();
    return f;
}

double sample_weight(double range_m, double alpha)
{
    if (!(range_m > 0.0))
        throw DomainError("sample_weight: range must be positive");
    return std::pow(range_m, -alpha);
}

Sample make_sample(const Scenario &scenario, const UeGeometry &geometry, double alpha)
{
    if (scenario.array.n_side != kReferenceSide)
        throw DomainError("make_sample: modular activation requires the 6x6 reference array");

    Sample s;
    s.geometry = geometry;
    s.geometry.ue_spacing_m = scenario.ue_spacing_m;
    s.full_channel = build_channel(antenna_positions(scenario.array),
                                   ue_positions(s.geometry, scenario.array.wavelength_m), scenario.propagation);
    s.full_svd = compact_svd(s.full_channel);
    s.features = build_features(s.geometry, s.full_channel, s.full_svd);
    s.weight = sample_weight(geometry.range_m, alpha);
    for (const auto &cfg : all_modular_configs())
        s.active_svds[static_cast<std::size_t>(cfg.index())] = compact_svd(subselect(s.full_channel, cfg));
    return s;
}

std::vector<Sample> build_samples(const Scenario &scenario, const std::vector<UeGeometry> &geometries, double alpha,
                                  int threads)
{
    std::vector<Sample> out(geometries.size());
    parallel_for(geometries.size(), threads, [&](std::size_t i) { out[i] = make_sample(scenario, geometries[i], alpha); });
    return out;
}

FeatureNormalizer FeatureNormalizer::fit(const std::vector<Sample> &samples)
{
    if (samples.empty())
        throw DomainError("FeatureNormalizer::fit: no samples");
    const Eigen::Index n = samples.front().features.size();
    RVector mean = RVector::Zero(n);
    for (const auto &s : samples)
        mean += s.features;
    mean /= static_cast<double>(samples.size());

    RVector var = RVector::Zero(n);
    RVector peak = RVector::Zero(n);
    for (const auto &s : samples)
    {
        var += (s.features - mean).array().square().matrix();
        peak = peak.cwiseMax(s.features.cwiseAbs());
    }
    var /= static_cast<double>(samples.size());

    FeatureNormalizer norm;
    norm.mean = mean;
    norm.scale = RVector::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const double sd = std::sqrt(var(i));
        // Constant features (e.g. the phase-fixed first entry of each column) keep unit scale.
        if (sd > 1e-9 * peak(i))
            norm.scale(i) = sd;
    }
    return norm;
}

FeatureNormalizer FeatureNormalizer::identity(std::size_t length)
{
    FeatureNormalizer norm;
    norm.mean = RVector::Zero(static_cast<Eigen::Index>(length));
    norm.scale = RVector::Ones(static_cast<Eigen::Index>(length));
    return norm;
}

RVector FeatureNormalizer::apply(const RVector &features) const
{
    if (features.size() != mean.size())
        throw DomainError("FeatureNormalizer: feature length " + std::to_string(features.size()) + " != " +
                          std::to_string(mean.size()));
    return ((features - mean).array() / scale.array()).matrix();
}

Dataset generate_dataset(const Scenario &scenario, const DatasetSpec &spec, int threads)
{
    Dataset ds;
    ds.train = build_samples(scenario,
                             sample_geometries(spec, spec.n_train, SampleStream::Train, scenario.m_antennas,
                                               scenario.height_diff_m),
                             spec.alpha, threads);
    ds.val = build_samples(scenario,
                           sample_geometries(spec, spec.n_val, SampleStream::Validation, scenario.m_antennas,
                                             scenario.height_diff_m),
                           spec.alpha, threads);
    return ds;
}

std::uint64_t dataset_hash(const Scenario &scenario, const DatasetSpec &spec)
{
    std::ostringstream os;
    os.precision(17);
    os << "nfds-v1|" << spec.n_train << '|' << spec.n_val << '|' << spec.r_min_m << '|' << spec.r_max_m << '|'
       << spec.phi_min_rad << '|' << spec.phi_max_rad << '|' << spec.alpha << '|'
       << static_cast<int>(spec.sampling) << '|' << scenario.array.n_side << '|' << scenario.array.spacing_m << '|'
       << scenario.array.wavelength_m << '|' << scenario.array.center.transpose() << '|'
       << scenario.propagation.beta0 << '|' << scenario.propagation.xi << '|' << scenario.propagation.wavelength_m
       << '|' << scenario.m_antennas << '|' << scenario.height_diff_m << '|' << scenario.ue_spacing_m;
    const std::string text = os.str();

    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

constexpr char kCacheMagic[4] = {'N', 'F', 'D', 'S'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void put(std::ostream &os, T value)
{
    os.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
bool get(std::istream &is, T &value)
{
    return static_cast<bool>(is.read(reinterpret_cast<char *>(&value), sizeof(T)));
}

void write_samples(std::ostream &os, const std::vector<Sample> &samples)
{
    for (const auto &s : samples)
    {
        put(os, s.geometry.range_m);
        put(os, s.geometry.azimuth_rad);
        put(os, s.weight);
        os.write(reinterpret_cast<const char *>(s.features.data()),
                 static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(s.features.size())));
    }
}

std::optional<std::vector<Sample>> read_samples(std::istream &is, std::size_t count, std::uint64_t flen,
                                                const Scenario &scenario, double alpha, int threads)
{
    std::vector<UeGeometry> geoms(count);
    std::vector<RVector> features(count);
    for (std::size_t i = 0; i < count; ++i)
    {
        double w = 0.0;
        geoms[i].m_antennas = scenario.m_antennas;
        geoms[i].height_diff_m = scenario.height_diff_m;
        if (!get(is, geoms[i].range_m) || !get(is, geoms[i].azimuth_rad) || !get(is, w))
            return std::nullopt;
        features[i].resize(static_cast<Eigen::Index>(flen));
        if (!is.read(reinterpret_cast<char *>(features[i].data()), static_cast<std::streamsize>(sizeof(double) * flen)))
            return std::nullopt;
    }
    auto samples = build_samples(scenario, geoms, alpha, threads);
    for (std::size_t i = 0; i < count; ++i)
        samples[i].features = std::move(features[i]);
    return samples;
}

} // namespace

void save_dataset_cache(const std::filesystem::path &path, const Scenario &scenario, const DatasetSpec &spec,
                        const Dataset &dataset)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw std::runtime_error("save_dataset_cache: cannot open " + path.string());
    const std::uint64_t flen = feature_length(scenario.m_antennas, scenario.array.num_antennas());
    os.write(kCacheMagic, 4);
    put(os, kCacheVersion);
    put(os, spec.seed);
    put(os, dataset_hash(scenario, spec));
    put(os, static_cast<std::uint64_t>(dataset.train.size()));
    put(os, static_cast<std::uint64_t>(dataset.val.size()));
    put(os, flen);
    write_samples(os, dataset.train);
    write_samples(os, dataset.val);
    if (!os)
        throw std::runtime_error("save_dataset_cache: write failed for " + path.string());
}

std::optional<Dataset> load_dataset_cache(const std::filesystem::path &path, const Scenario &scenario,
                                          const DatasetSpec &spec, int threads)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        return std::nullopt;
    char magic[4] = {};
    std::uint32_t version = 0;
    std::uint64_t seed = 0, hash = 0, n_train = 0, n_val = 0, flen = 0;
    if (!is.read(magic, 4) || std::memcmp(magic, kCacheMagic, 4) != 0 || !get(is, version) ||
        version != kCacheVersion || !get(is, seed) || !get(is, hash) || !get(is, n_train) || !get(is, n_val) ||
        !get(is, flen))
        return std::nullopt;
    if (seed != spec.seed || hash != dataset_hash(scenario, spec) || n_train != spec.n_train || n_val != spec.n_val ||
        flen != feature_length(scenario.m_antennas, scenario.array.num_antennas()))
        return std::nullopt;

    auto train = read_samples(is, n_train, flen, scenario, spec.alpha, threads);
    if (!train)
        return std::nullopt;
    auto val = read_samples(is, n_val, flen, scenario, spec.alpha, threads);
    if (!val)
        return std::nullopt;
    return Dataset{std::move(*train), std::move(*val)};
}

Dataset cached_dataset(const std::filesystem::path &path, const Scenario &scenario, const DatasetSpec &spec,
                       int threads)
{
    if (auto cached = load_dataset_cache(path, scenario, spec, threads))
        return std::move(*cached);
    Dataset ds = generate_dataset(scenario, spec, threads);
    save_dataset_cache(path, scenario, spec, ds);
    return ds;
}

} // namespace nfmimo
