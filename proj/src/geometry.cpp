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


#include "nfmimo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nfmimo {

void ArraySpec::validate() const
{
    if (n_side < 2)
        throw DomainError("ArraySpec: n_side must be >= 2, got " + std::to_string(n_side));
    if (!(spacing_m > 0.0))
        throw DomainError("ArraySpec: spacing_m must be positive");
    if (!(wavelength_m > 0.0))
        throw DomainError("ArraySpec: wavelength_m must be positive");
}

ArraySpec ArraySpec::reference(double wavelength_m)
{
    ArraySpec spec;
    spec.n_side = kReferenceSide;
    spec.spacing_m = 8.0 * wavelength_m;
    spec.wavelength_m = wavelength_m;
    spec.validate();
    return spec;
}

ArraySpec ArraySpec::equal_aperture(int n_side, double aperture_side_m, double wavelength_m)
{
    if (n_side < 2)
        throw DomainError("ArraySpec: n_side must be >= 2, got " + std::to_string(n_side));
    ArraySpec spec;
    spec.n_side = n_side;
    spec.spacing_m = aperture_side_m / (n_side - 1);
    spec.wavelength_m = wavelength_m;
    spec.validate();
    return spec;
}

std::vector<Vec3> antenna_positions(const ArraySpec &spec)
{
    spec.validate();
    const double half = 0.5 * (spec.n_side - 1);
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(spec.num_antennas()));
    for (int row = 0; row < spec.n_side; ++row)
        for (int col = 0; col < spec.n_side; ++col)
            out.push_back(spec.center + Vec3(0.0, (col - half) * spec.spacing_m, (half - row) * spec.spacing_m));
    return out;
}

int ModularConfig::active_count() const
{
    int k = 0;
    for (bool b : mask)
        k += b ? 1 : 0;
    return k;
}

ModularConfig modular_mask(int c_x, int c_y)
{
    if (c_x < 1 || c_x > 3 || c_y < 1 || c_y > 3)
        throw DomainError("modular_mask: c_x and c_y must be in {1,2,3}, got (" + std::to_string(c_x) + "," +
                          std::to_string(c_y) + ")");

    constexpr int n = kReferenceSide;
    ModularConfig cfg;
    cfg.c_x = c_x;
    cfg.c_y = c_y;
    cfg.mask.assign(kReferenceAntennas, false);

    // Distance from the nearest outer edge: column j lies within c_x of the
    // left or right edge, row i within c_y of the top or bottom edge.
    for (int row = 0; row < n; ++row)
    {
        const int from_edge_row = std::min(row, n - 1 - row);
        for (int col = 0; col < n; ++col)
        {
            const int from_edge_col = std::min(col, n - 1 - col);
            cfg.mask[static_cast<std::size_t>(row * n + col)] = from_edge_row < c_y && from_edge_col < c_x;
        }
    }
    return cfg;
}

ModularConfig modular_mask_from_index(int index)
{
    if (index < 0 || index >= kNumConfigs)
        throw DomainError("modular_mask_from_index: index out of range: " + std::to_string(index));
    return modular_mask(index / 3 + 1, index % 3 + 1);
}

const std::array<ModularConfig, kNumConfigs> &all_modular_configs()
{
    static const std::array<ModularConfig, kNumConfigs> configs = [] {
        std::array<ModularConfig, kNumConfigs> out;
        for (int i = 0; i < kNumConfigs; ++i)
            out[static_cast<std::size_t>(i)] = modular_mask_from_index(i);
        return out;
    }();
    return configs;
}

void UeGeometry::validate() const
{
    if (!(range_m > 0.0))
        throw DomainError("UeGeometry: range_m must be positive");
    if (!(azimuth_rad >= 0.0 && azimuth_rad <= kPi / 2.0))
        throw DomainError("UeGeometry: azimuth_rad must lie in [0, pi/2]");
    if (m_antennas < 1)
        throw DomainError("UeGeometry: m_antennas must be >= 1");
    if (ue_spacing_m < 0.0)
        throw DomainError("UeGeometry: ue_spacing_m must be >= 0");
}

std::vector<Vec3> ue_positions(const UeGeometry &geom, double wavelength_m)
{
    geom.validate();
    if (!(wavelength_m > 0.0))
        throw DomainError("ue_positions: wavelength_m must be positive");

    const double spacing = geom.ue_spacing_m > 0.0 ? geom.ue_spacing_m : 0.5 * wavelength_m;
    const Vec3 centre(geom.range_m * std::cos(geom.azimuth_rad), geom.range_m * std::sin(geom.azimuth_rad),
                      -geom.height_diff_m);
    const double half = 0.5 * (geom.m_antennas - 1);

    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(geom.m_antennas));
    for (int m = 0; m < geom.m_antennas; ++m)
        out.push_back(centre + Vec3(0.0, (m - half) * spacing, 0.0));
    return out;
}

} // namespace nfmimo
