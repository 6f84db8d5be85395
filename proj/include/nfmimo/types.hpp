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

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace nfmimo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

/// Raised when an input violates a documented precondition.
class DomainError : public std::domain_error
{
public:
    explicit DomainError(const std::string &what) : std::domain_error(what) {}
};

/// Raised when an operation is asked for a matrix shape it does not support.
class ShapeError : public std::invalid_argument
{
public:
    explicit ShapeError(const std::string &what) : std::invalid_argument(what) {}
};

inline constexpr double kPi = 3.14159265358979323846;
// Rounded value; gives lambda = 0.02 m at 15 GHz.
inline constexpr double kSpeedOfLight = 3.0e8;

} // namespace nfmimo
