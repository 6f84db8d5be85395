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
#include "nfmimo/types.hpp"

#include <cstddef>
#include <cstdint>

namespace nfmimo {

/// Third-order PA compression and receiver noise.
struct DistortionParams
{
    double rho = -0.05;             ///< compression parameter, in [-0.5, 0]
    double noise_power_w = 3.98e-12; ///< sigma^2

    void validate() const;
};

/// Hermitian PSD transmit covariance Q with its diagonal cached.
class TransmitCovariance
{
public:
    /// Symmetrizes (Q + Q^H)/2 and rejects min eigenvalue < -1e-10 tr(Q).
    static TransmitCovariance from_matrix(const CMatrix &q);

    /// Q = V diag(p) V^H; PSD by construction. Throws on negative p_i.
    static TransmitCovariance from_precoder(const CMatrix &v, const RVector &p);

    const CMatrix &matrix() const { return q_; }
    const RVector &diagonal() const { return diag_; }
    double trace() const { return diag_.sum(); }
    Eigen::Index size() const { return q_.rows(); }

private:
    explicit TransmitCovariance(CMatrix q);

    CMatrix q_;
    RVector diag_;
};

/// Scalar Bussgang gain 1 + 2 rho of the third-order model.
double bussgang_gain(double rho);

/// C_eta = 2 rho^2 Qbar^-1 (Q .* conj(Q) .* Q) Qbar^-1. Rows/columns whose
/// q_kk falls below 1e-18 max(1, tr Q) are zero.
CMatrix distortion_covariance(const TransmitCovariance &q, double rho);

/// tr(C_z) = (1 + 2 rho)^2 tr(Q) + tr(C_eta).
double radiated_power(const TransmitCovariance &q, double rho);

/// log2 det(I + (1+2rho)^2 C_nbar^-1 H Q H^H) with C_nbar = H C_eta H^H + sigma^2 I.
double spectral_efficiency(const CMatrix &h, const TransmitCovariance &q, const DistortionParams &d);
inline double spectral_efficiency(const ChannelMatrix &h, const TransmitCovariance &q, const DistortionParams &d)
{
    return spectral_efficiency(h.entries, q, d);
}

/// Same quantity as spectral_efficiency for Q = V diag(p) V^H, where V is the
/// right singular matrix of the channel described by `svd`. Works in the
/// M-dimensional stream domain and never forms the K x K covariance.
double precoded_spectral_efficiency(const SvdResult &svd, const RVector &p, const DistortionParams &d);

struct MonteCarloDistortion
{
    CMatrix gain;            ///< E{z x^H} E{x x^H}^-1
    CMatrix distortion_cov;  ///< E{eta eta^H} with eta = z - gain x
    std::size_t n_samples = 0;
};

/// Draws x ~ CN(0, Q), applies the per-antenna cubic model and estimates the
/// Bussgang gain and distortion covariance from sample moments.
MonteCarloDistortion monte_carlo_distortion(const TransmitCovariance &q, double rho, std::size_t n_samples,
                                            std::uint64_t seed);

} // namespace nfmimo
