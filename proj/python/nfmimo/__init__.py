# SPDX-License-Identifier: Apache-2.0
#
# nfmimo: near-field modular-array MIMO energy-efficiency toolkit
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------


"""Python bindings for the nfmimo C++ core."""

from ._nfmimo import (
    ConfigError,
    DomainError,
    HardwareParams,
    ShapeError,
    build_channel,
    bussgang_gain,
    compact_svd,
    default_config_json,
    density_sweep,
    distortion_covariance,
    energy_efficiency,
    modular_mask,
    monte_carlo_distortion,
    noise_power_w,
    reference_positions,
    spectral_efficiency,
    total_power,
    validate_config,
    water_filling,
    water_level,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "HardwareParams",
    "ShapeError",
    "build_channel",
    "bussgang_gain",
    "compact_svd",
    "default_config_json",
    "density_sweep",
    "distortion_covariance",
    "energy_efficiency",
    "modular_mask",
    "monte_carlo_distortion",
    "noise_power_w",
    "reference_positions",
    "spectral_efficiency",
    "total_power",
    "validate_config",
    "water_filling",
    "water_level",
]
