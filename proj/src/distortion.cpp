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


#include "nfmimo/distortion.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace nfmimo {

namespace {

double zero_power_threshold(double trace) { return 1e-18 * std::max(1.0, trace); }

RVector inverse_power(const RVector &diag, double trace)
{
    const double eps = zero_power_threshold(trace);
    RVector inv(diag.size());
    for (Eigen::Index k = 0; k < diag.size(); ++k)
        inv(k) = diag(k) < eps ? 0.0 : 1.0 / diag(k);
    return inv;
}

/// 2 rho^2 * q_kl |q_kl|^2 * inv_row(k) * inv_col(l), elementwise.
CMatrix cubic_moment(const CMatrix &q, const RVector &inv_row, const RVector &inv_col, double rho)
{
    const double scale = 2.0 * rho * rho;
    CMatrix c = q.cwiseProduct(q.cwiseAbs2().cast<Complex>());
    c = (scale * inv_row).asDiagonal() * c * inv_col.asDiagonal();
    return c;
}

/// log2 det(I + L^-1 B L^-H) where A = L L^H.
double whitened_log2det(const CMatrix &a, const CMatrix &b)
{
    const Eigen::Index m = a.rows();
    if (!a.allFinite() || !b.allFinite())
        throw DomainError("spectral_efficiency: non-finite channel or covariance");
    Eigen::LLT<CMatrix> chol_a(a);
    if (chol_a.info() != Eigen::Success)
        throw DomainError("spectral_efficiency: effective noise covariance is not positive definite");

    CMatrix x = chol_a.matrixL().solve(b);
    x = chol_a.matrixL().solve(x.adjoint().eval()).adjoint();
    CMatrix composite = CMatrix::Identity(m, m) + 0.5 * (x + x.adjoint());

    Eigen::LLT<CMatrix> chol(composite);
    if (chol.info() != Eigen::Success)
        throw DomainError("spectral_efficiency: composite matrix is not positive definite");

    double acc = 0.0;
    const CMatrix &l = chol.matrixLLT();
    for (Eigen::Index i = 0; i < m; ++i)
        acc += std::log(l(i, i).real());
    return std::max(0.0, 2.0 * acc / std::log(2.0));
}

} // namespace

void DistortionParams::validate() const
{
    if (!(rho >= -0.5 && rho <= 0.0))
        throw DomainError("DistortionParams: rho must lie in [-0.5, 0], got " + std::to_string(rho));
    if (!(noise_power_w > 0.0))
        throw DomainError("DistortionParams: noise_power_w must be positive");
}

TransmitCovariance::TransmitCovariance(CMatrix q) : q_(std::move(q)), diag_(q_.diagonal().real())
{
}

TransmitCovariance TransmitCovariance::from_matrix(const CMatrix &q)
{
    if (q.rows() != q.cols())
        throw ShapeError("TransmitCovariance: matrix must be square");
    CMatrix sym = 0.5 * (q + q.adjoint());
    if (!sym.allFinite())
        throw DomainError("TransmitCovariance: non-finite entries");

    const double trace = sym.diagonal().real().sum();
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(sym, Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().size() > 0 ? eig.eigenvalues().minCoeff() : 0.0;
    if (min_eig < -1e-10 * std::abs(trace))
        throw DomainError("TransmitCovariance: matrix is not positive semidefinite (min eigenvalue " +
                          std::to_string(min_eig) + ")");
    return TransmitCovariance(std::move(sym));
}

TransmitCovariance TransmitCovariance::from_precoder(const CMatrix &v, const RVector &p)
{
    if (v.cols() != p.size())
        throw ShapeError("TransmitCovariance: precoder has " + std::to_string(v.cols()) + " columns but " +
                         std::to_string(p.size()) + " powers");
    if ((p.array() < 0.0).any() || !p.allFinite())
        throw DomainError("TransmitCovariance: stream powers must be finite and non-negative");
    CMatrix q = v * p.cast<Complex>().asDiagonal() * v.adjoint();
    q = 0.5 * (q + q.adjoint());
    return TransmitCovariance(std::move(q));
}

double bussgang_gain(double rho)
{
    if (!(rho >= -0.5 && rho <= 0.0))
        throw DomainError("bussgang_gain: rho must lie in [-0.5, 0], got " + std::to_string(rho));
    return 1.0 + 2.0 * rho;
}

CMatrix distortion_covariance(const TransmitCovariance &q, double rho)
{
    if (rho > 0.0)
        throw DomainError("distortion_covariance: rho must be <= 0");
    const RVector inv = inverse_power(q.diagonal(), q.trace());
    CMatrix c = cubic_moment(q.matrix(), inv, inv, rho);
    return 0.5 * (c + c.adjoint());
}

double radiated_power(const TransmitCovariance &q, double rho)
{
    const double g = bussgang_gain(rho);
    return g * g * q.trace() + distortion_covariance(q, rho).diagonal().real().sum();
}

double spectral_efficiency(const CMatrix &h, const TransmitCovariance &q, const DistortionParams &d)
{
    d.validate();
    if (h.cols() != q.size())
        throw ShapeError("spectral_efficiency: channel has " + std::to_string(h.cols()) + " columns but Q is " +
                         std::to_string(q.size()) + "x" + std::to_string(q.size()));
    const double g = bussgang_gain(d.rho);
    if (g == 0.0)
        return 0.0;

    const Eigen::Index m = h.rows();
    CMatrix a = d.noise_power_w * CMatrix::Identity(m, m);
    if (d.rho != 0.0)
        a.noalias() += h * distortion_covariance(q, d.rho) * h.adjoint();
    a = 0.5 * (a + a.adjoint()).eval();

    CMatrix b = (g * g) * (h * q.matrix() * h.adjoint());
    return whitened_log2det(a, b);
}

double precoded_spectral_efficiency(const SvdResult &svd, const RVector &p, const DistortionParams &d)
{
    d.validate();
    const CMatrix &v = svd.right;
    const Eigen::Index k = v.rows();
    const Eigen::Index m = v.cols();
    if (p.size() != m || svd.singular_values.size() != m)
        throw ShapeError("precoded_spectral_efficiency: expected " + std::to_string(m) + " stream powers");
    if ((p.array() < 0.0).any())
        throw DomainError("precoded_spectral_efficiency: stream powers must be non-negative");

    const double g = bussgang_gain(d.rho);
    if (g == 0.0)
        return 0.0;

    const RVector &s = svd.singular_values;
    CMatrix a = d.noise_power_w * CMatrix::Identity(m, m);

    if (d.rho != 0.0)
    {
        const CMatrix vp = v * p.cast<Complex>().asDiagonal();
        const RVector q_diag = (vp.cwiseProduct(v.conjugate())).rowwise().sum().real();
        const RVector inv = inverse_power(q_diag, p.sum());

        // V^H C_eta V accumulated over row blocks of C_eta.
        constexpr Eigen::Index block = 256;
        CMatrix stream_cov = CMatrix::Zero(m, m);
        for (Eigen::Index r0 = 0; r0 < k; r0 += block)
        {
            const Eigen::Index rows = std::min(block, k - r0);
            const CMatrix q_rows = vp.middleRows(r0, rows) * v.adjoint();
            const CMatrix c_rows = cubic_moment(q_rows, inv.segment(r0, rows), inv, d.rho);
            stream_cov.noalias() += v.middleRows(r0, rows).adjoint() * (c_rows * v);
        }
        a.noalias() += s.cast<Complex>().asDiagonal() * stream_cov * s.cast<Complex>().asDiagonal();
        a = 0.5 * (a + a.adjoint()).eval();
    }

    CMatrix b = CMatrix::Zero(m, m);
    b.diagonal() = ((g * g) * s.array().square() * p.array()).cast<Complex>().matrix();
    return whitened_log2det(a, b);
}

MonteCarloDistortion monte_carlo_distortion(const TransmitCovariance &q, double rho, std::size_t n_samples,
                                            std::uint64_t seed)
{
    if (n_samples < 10000)
        throw DomainError("monte_carlo_distortion: n_samples must be >= 10^4");
    if (!(rho >= -0.5 && rho <= 0.0))
        throw DomainError("monte_carlo_distortion: rho must lie in [-0.5, 0]");

    const Eigen::Index k = q.size();
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(q.matrix());
    const RVector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const CMatrix colour = eig.eigenvectors() * root.cast<Complex>().asDiagonal();

    const RVector &q_diag = q.diagonal();
    const RVector inv = inverse_power(q_diag, q.trace());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));

    CMatrix r_xx = CMatrix::Zero(k, k);
    CMatrix r_zx = CMatrix::Zero(k, k);
    CMatrix r_zz = CMatrix::Zero(k, k);
    CVector w(k), x(k), z(k);
    for (std::size_t n = 0; n < n_samples; ++n)
    {
        for (Eigen::Index i = 0; i < k; ++i)
            w(i) = Complex(normal(rng), normal(rng));
        x.noalias() = colour * w;
        for (Eigen::Index i = 0; i < k; ++i)
            z(i) = x(i) + rho * inv(i) * std::norm(x(i)) * x(i);
        r_xx.noalias() += x * x.adjoint();
        r_zx.noalias() += z * x.adjoint();
        r_zz.noalias() += z * z.adjoint();
    }
    const double norm = 1.0 / static_cast<double>(n_samples);
    r_xx *= norm;
    r_zx *= norm;
    r_zz *= norm;

    CMatrix loaded = r_xx;
    const double trace = r_xx.diagonal().real().sum();
    Eigen::LDLT<CMatrix> ldlt(loaded);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().real().minCoeff() <= 1e-12 * trace)
        loaded += (1e-15 * trace / static_cast<double>(k)) * CMatrix::Identity(k, k);

    MonteCarloDistortion out;
    out.n_samples = n_samples;
    // gain = R_zx R_xx^-1, via the Hermitian solve R_xx gain^H = R_zx^H.
    out.gain = loaded.ldlt().solve(r_zx.adjoint()).adjoint();
    const CMatrix cross = out.gain * r_zx.adjoint();
    CMatrix c = r_zz - cross - cross.adjoint() + out.gain * r_xx * out.gain.adjoint();
    out.distortion_cov = 0.5 * (c + c.adjoint());
    return out;
}

} // namespace nfmimo
