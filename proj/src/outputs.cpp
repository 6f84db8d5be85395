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


#include "nfmimo/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace nfmimo {

std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string sweep_csv(const std::vector<SweepRow> &rows)
{
    std::ostringstream os;
    os << "array,rho,se_bpshz,ee_bits_per_joule,p_opt_dbw,k_active\n";
    for (const auto &r : rows)
        os << r.n_side << 'x' << r.n_side << ',' << format_number(r.rho) << ',' << format_number(r.record.se_bps_hz)
           << ',' << format_number(r.record.ee_bits_per_joule) << ','
           << format_number(watts_to_dbw(r.record.total_input_power_w)) << ',' << r.record.k_active << '\n';
    return os.str();
}

std::string bench_csv(const std::vector<BenchRow> &rows)
{
    std::ostringstream os;
    os << "scheme,bin_lo_m,bin_hi_m,mean_se,mean_ee,n\n";
    for (const auto &r : rows)
        os << scheme_name(r.scheme) << ',' << format_number(r.bin_lo_m) << ',' << format_number(r.bin_hi_m) << ','
           << format_number(r.mean_se) << ',' << format_number(r.mean_ee) << ',' << r.n << '\n';
    return os.str();
}

std::string history_csv(const TrainHistory &history, const DistanceBins &bins)
{
    std::ostringstream os;
    os << "epoch,step,lr,train_loss,val_weighted_ee";
    for (int b = 0; b < bins.count; ++b)
        os << ",val_ee_bin_" << format_number(bins.lower(b)) << '_' << format_number(bins.upper(b));
    os << '\n';
    for (const auto &e : history.epochs)
    {
        os << e.epoch << ',' << e.step << ',' << format_number(e.lr) << ',' << format_number(e.train_loss) << ','
           << format_number(e.val_weighted_ee);
        for (int b = 0; b < bins.count; ++b)
            os << ','
               << (static_cast<std::size_t>(b) < e.val_bin_ee.size() ? format_number(e.val_bin_ee[static_cast<std::size_t>(b)])
                                                                      : std::string("nan"));
        os << '\n';
    }
    return os.str();
}

namespace {

std::string escape_xml(const std::string &s)
{
    std::string out;
    for (char c : s)
    {
        switch (c)
        {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

const char *kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};

} // namespace

std::string line_plot_svg(const std::string &title, const std::string &x_label, const std::string &y_label,
                          const std::vector<PlotSeries> &series)
{
    constexpr double width = 640, height = 420, left = 80, right = 220, top = 40, bottom = 60;
    const double pw = width - left - right;
    const double ph = height - top - bottom;

    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    bool first = true;
    for (const auto &s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
        {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                continue;
            if (first)
            {
                x0 = x1 = s.x[i];
                y0 = y1 = s.y[i];
                first = false;
            }
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (x1 == x0)
        x1 = x0 + 1.0;
    if (y1 == y0)
        y1 = y0 + 1.0;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title)
       << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t)
    {
        const double xv = x0 + (x1 - x0) * t / 4.0;
        const double yv = y0 + (y1 - y0) * t / 4.0;
        os << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
           << format_number(std::round(xv * 1e4) / 1e4) << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
           << escape_xml(format_number(yv).substr(0, 9)) << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">"
       << escape_xml(x_label) << "</text>\n";
    os << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << escape_xml(y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k)
    {
        const auto &s = series[k];
        const char *colour = kPalette[k % (sizeof(kPalette) / sizeof(kPalette[0]))];
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
                os << format_number(px(s.x[i])) << ',' << format_number(py(s.y[i])) << ' ';
        os << "\"/>\n";
        const double ly = top + 14 + 18 * static_cast<double>(k);
        os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 32 << "\" y2=\""
           << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly << "\">" << escape_xml(s.name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::vector<std::pair<std::string, std::string>> sweep_plots(const std::vector<SweepRow> &rows)
{
    std::map<int, PlotSeries> se, ee;
    for (const auto &r : rows)
    {
        const std::string name = std::to_string(r.n_side) + "x" + std::to_string(r.n_side);
        se[r.n_side].name = name;
        se[r.n_side].x.push_back(r.rho);
        se[r.n_side].y.push_back(r.record.se_bps_hz);
        ee[r.n_side].name = name;
        ee[r.n_side].x.push_back(r.rho);
        ee[r.n_side].y.push_back(r.record.ee_bits_per_joule / 1e6);
    }
    std::vector<PlotSeries> se_v, ee_v;
    for (auto &[k, v] : se)
        se_v.push_back(v);
    for (auto &[k, v] : ee)
        ee_v.push_back(v);
    return {{"sweep_se.svg", line_plot_svg("SE at the EE-optimal point", "rho", "SE [bit/s/Hz]", se_v)},
            {"sweep_ee.svg", line_plot_svg("Maximum EE", "rho", "EE [Mbit/J]", ee_v)}};
}

std::vector<std::pair<std::string, std::string>> bench_plots(const std::vector<BenchRow> &rows)
{
    std::map<int, PlotSeries> se, ee;
    for (const auto &r : rows)
    {
        const int key = static_cast<int>(r.scheme);
        const double mid = 0.5 * (r.bin_lo_m + r.bin_hi_m);
        se[key].name = scheme_name(r.scheme);
        se[key].x.push_back(mid);
        se[key].y.push_back(r.mean_se);
        ee[key].name = scheme_name(r.scheme);
        ee[key].x.push_back(mid);
        ee[key].y.push_back(r.mean_ee / 1e6);
    }
    std::vector<PlotSeries> se_v, ee_v;
    for (auto &[k, v] : se)
        se_v.push_back(v);
    for (auto &[k, v] : ee)
        ee_v.push_back(v);
    return {{"bench_ee.svg", line_plot_svg("EE versus UE distance", "distance [m]", "EE [Mbit/J]", ee_v)},
            {"bench_se.svg", line_plot_svg("SE versus UE distance", "distance [m]", "SE [bit/s/Hz]", se_v)}};
}

void write_text_file(const std::filesystem::path &out_dir, const std::string &name, const std::string &text)
{
    std::filesystem::create_directories(out_dir);
    const auto path = out_dir / name;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw std::runtime_error("cannot open " + path.string() + " for writing: " + std::strerror(errno));
    os << text;
    os.flush();
    if (!os)
        throw std::runtime_error("failed writing " + path.string() + ": " + std::strerror(errno));
}

} // namespace nfmimo
