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

#include "nfmimo/types.hpp"

#include <array>
#include <vector>

namespace nfmimo {

/// Square uniform planar array in the y-z plane, broadside along +x.
struct ArraySpec
{
    int n_side = 6;
    double spacing_m = 0.16;
    double wavelength_m = 0.02;
    Vec3 center = Vec3::Zero();

    int num_antennas() const { return n_side * n_side; }
    double aperture_side_m() const { return (n_side - 1) * spacing_m; }

    void validate() const;

    /// The 6x6 reference array with 8-lambda spacing.
    static ArraySpec reference(double wavelength_m);

    /// An n_side x n_side array with the given aperture side length.
    static ArraySpec equal_aperture(int n_side, double aperture_side_m, double wavelength_m);
};

/// Grid positions in row-major order: row index grows with decreasing z,
/// column index grows with increasing y.
std::vector<Vec3> antenna_positions(const ArraySpec &spec);

inline constexpr int kReferenceSide = 6;
inline constexpr int kReferenceAntennas = kReferenceSide * kReferenceSide;
inline constexpr int kNumConfigs = 9;

/// Modular activation of the 6x6 reference array: four 3x3 corner sub-arrays,
/// each with a c_y-tall, c_x-wide block anchored at the outer corner.
struct ModularConfig
{
    int c_x = 3;
    int c_y = 3;
    std::vector<bool> mask;

    int active_count() const;
    /// Index in [0, 9): (c_x - 1) * 3 + (c_y - 1).
    int index() const { return (c_x - 1) * 3 + (c_y - 1); }
};

ModularConfig modular_mask(int c_x, int c_y);

/// Config for a flat index in [0, 9), inverse of ModularConfig::index().
ModularConfig modular_mask_from_index(int index);

/// All 9 configs ordered by index().
const std::array<ModularConfig, kNumConfigs> &all_modular_configs();

struct UeGeometry
{
    double range_m = 50.0;
    double azimuth_rad = kPi / 4.0;
    double height_diff_m = 10.0;
    int m_antennas = 4;
    /// 0 selects half-wavelength spacing.
    double ue_spacing_m = 0.0;

    void validate() const;
};

/// ULA along y centred at (r cos phi, r sin phi, -dh), half-wavelength spaced
/// unless geom.ue_spacing_m is positive.
std::vector<Vec3> ue_positions(const UeGeometry &geom, double wavelength_m);

} // namespace nfmimo
