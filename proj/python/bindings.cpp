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


#include "nfmimo/channel.hpp"
#include "nfmimo/config.hpp"
#include "nfmimo/distortion.hpp"
#include "nfmimo/geometry.hpp"
#include "nfmimo/harness.hpp"
#include "nfmimo/power_model.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace nfmimo;

namespace {

RMatrix positions_to_matrix(const std::vector<Vec3> &pos)
{
    RMatrix out(static_cast<Eigen::Index>(pos.size()), 3);
    for (std::size_t i = 0; i < pos.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = pos[i].transpose();
    return out;
}

std::vector<Vec3> matrix_to_positions(const RMatrix &m)
{
    if (m.cols() != 3)
        throw ShapeError("positions must have shape (n, 3)");
    std::vector<Vec3> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        out[static_cast<std::size_t>(i)] = m.row(i).transpose();
    return out;
}

py::dict record_to_dict(const EvalRecord &r)
{
    py::dict d;
    d["se_bps_hz"] = r.se_bps_hz;
    d["ee_bits_per_joule"] = r.ee_bits_per_joule;
    d["p_tot_w"] = r.p_tot_w;
    d["k_active"] = r.k_active;
    d["total_input_power_w"] = r.total_input_power_w;
    d["radiated_power_w"] = r.radiated_power_w;
    d["power_vector_w"] = r.power_vector_w;
    return d;
}

} // namespace

PYBIND11_MODULE(_nfmimo, m)
{
    m.doc() = "Near-field modular-array MIMO energy-efficiency toolkit";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<HardwareParams>(m, "HardwareParams")
        .def(py::init<>())
        .def_readwrite("kappa", &HardwareParams::kappa)
        .def_readwrite("mu_w", &HardwareParams::mu_w)
        .def_readwrite("d0_w", &HardwareParams::d0_w)
        .def_readwrite("upsilon_j_per_sample", &HardwareParams::upsilon_j_per_sample)
        .def_readwrite("eta_j_per_bit", &HardwareParams::eta_j_per_bit)
        .def_readwrite("bandwidth_hz", &HardwareParams::bandwidth_hz);

    m.def("default_config_json", [] { return config_to_json(parse_config_text("")); },
          "Effective default configuration as JSON text.");
    m.def("validate_config", [](const std::string &text) { return config_to_json(parse_config_text(text)); },
          py::arg("text"), "Parses a JSON config and returns the effective configuration; raises ConfigError.");
    m.def("noise_power_w", [](const std::string &text) { return parse_config_text(text).sim.noise_power_w(); },
          py::arg("config_text") = "");

    m.def("reference_positions", [](double wavelength_m) {
        return positions_to_matrix(antenna_positions(ArraySpec::reference(wavelength_m)));
    }, py::arg("wavelength_m") = 0.02, "Antenna positions (36 x 3) of the 6x6 reference array.");
    m.def("modular_mask", [](int c_x, int c_y) { return modular_mask(c_x, c_y).mask; }, py::arg("c_x"),
          py::arg("c_y"));

    m.def("build_channel",
          [](const RMatrix &tx, const RMatrix &rx, double beta0, double xi, double wavelength_m) {
              PropagationParams p;
              p.beta0 = beta0;
              p.xi = xi;
              p.wavelength_m = wavelength_m;
              return build_channel(matrix_to_positions(tx), matrix_to_positions(rx), p).entries;
          },
          py::arg("tx_positions"), py::arg("rx_positions"), py::arg("beta0") = 1e-6, py::arg("xi") = 2.5,
          py::arg("wavelength_m") = 0.02);
    m.def("compact_svd", [](const CMatrix &h) {
        const SvdResult s = compact_svd(h);
        return py::make_tuple(s.left, s.singular_values, s.right);
    }, py::arg("h"), "Returns (U, s, V) with H = U diag(s) V^H.");

    m.def("bussgang_gain", &bussgang_gain, py::arg("rho"));
    m.def("distortion_covariance",
          [](const CMatrix &q, double rho) { return distortion_covariance(TransmitCovariance::from_matrix(q), rho); },
          py::arg("q"), py::arg("rho"));
    m.def("spectral_efficiency",
          [](const CMatrix &h, const CMatrix &q, double rho, double noise_power_w) {
              return spectral_efficiency(h, TransmitCovariance::from_matrix(q), DistortionParams{rho, noise_power_w});
          },
          py::arg("h"), py::arg("q"), py::arg("rho"), py::arg("noise_power_w"));
    m.def("monte_carlo_distortion",
          [](const CMatrix &q, double rho, std::size_t n_samples, std::uint64_t seed) {
              const MonteCarloDistortion mc =
                  monte_carlo_distortion(TransmitCovariance::from_matrix(q), rho, n_samples, seed);
              return py::make_tuple(mc.gain, mc.distortion_cov);
          },
          py::arg("q"), py::arg("rho"), py::arg("n_samples"), py::arg("seed"),
          "Returns (gain, distortion covariance) sample estimates.");

    m.def("water_filling", &water_filling, py::arg("singular_values"), py::arg("noise_power"), py::arg("total_power"));
    m.def("water_level", &water_level, py::arg("singular_values"), py::arg("noise_power"), py::arg("total_power"));
    m.def("total_power", &total_power, py::arg("trace_q_w"), py::arg("k_active"), py::arg("se"),
          py::arg("hw") = HardwareParams{});
    m.def("energy_efficiency", &energy_efficiency, py::arg("se"), py::arg("p_tot_w"),
          py::arg("hw") = HardwareParams{});

    m.def("density_sweep",
          [](const std::string &config_text, int threads) {
              const Config cfg = parse_config_text(config_text);
              py::list out;
              for (const SweepRow &row : run_density_sweep(cfg.sim, cfg.sim.array_sizes, cfg.sim.rho, threads))
              {
                  py::dict d = record_to_dict(row.record);
                  d["n_side"] = row.n_side;
                  d["rho"] = row.rho;
                  out.append(d);
              }
              return out;
          },
          py::arg("config_text") = "", py::arg("threads") = 1,
          "EE-optimal operating points of the density sweep, one dict per (array size, rho).");
}
