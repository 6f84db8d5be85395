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

#include "nfmimo/harness.hpp"
#include "nfmimo/training.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nfmimo {

/// Numbers in CSV and SVG output use this rendering (9 significant digits).
std::string format_number(double v);

/// array,rho,se_bpshz,ee_bits_per_joule,p_opt_dbw,k_active
std::string sweep_csv(const std::vector<SweepRow> &rows);
/// scheme,bin_lo_m,bin_hi_m,mean_se,mean_ee,n
std::string bench_csv(const std::vector<BenchRow> &rows);
/// epoch,step,lr,train_loss,val_weighted_ee,val_ee_bin_<lo>_<hi>...
std::string history_csv(const TrainHistory &history, const DistanceBins &bins);

struct PlotSeries
{
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Static SVG line chart with linear axes and a legend.
std::string line_plot_svg(const std::string &title, const std::string &x_label, const std::string &y_label,
                          const std::vector<PlotSeries> &series);

/// SE-vs-rho and EE-vs-rho charts, one series per array size.
std::vector<std::pair<std::string, std::string>> sweep_plots(const std::vector<SweepRow> &rows);
/// EE-vs-distance and SE-vs-distance charts, one series per scheme.
std::vector<std::pair<std::string, std::string>> bench_plots(const std::vector<BenchRow> &rows);

/// Writes text to out_dir/name, creating out_dir. I/O errors propagate with the path.
void write_text_file(const std::filesystem::path &out_dir, const std::string &name, const std::string &text);

} // namespace nfmimo
