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


#include "nfmimo/checkpoint.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nfmimo {

using json = nlohmann::json;

namespace {

json to_array(const double *data, Eigen::Index n)
{
    json arr = json::array();
    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (!std::isfinite(data[i]))
            throw DomainError("checkpoint: refusing to serialize a non-finite value");
        arr.push_back(data[i]);
    }
    return arr;
}

RVector vector_from(const json &arr, Eigen::Index expected, const std::string &what)
{
    if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != expected)
        throw std::runtime_error("checkpoint: '" + what + "' must be an array of " + std::to_string(expected) +
                                 " numbers");
    RVector v(expected);
    for (Eigen::Index i = 0; i < expected; ++i)
        v(i) = arr[static_cast<std::size_t>(i)].get<double>();
    return v;
}

} // namespace

std::string checkpoint_to_string(const Checkpoint &ckpt)
{
    const NetworkParams &p = ckpt.params;
    json j;
    j["format"] = "nfmimo-checkpoint";
    j["version"] = kCheckpointVersion;
    j["seed"] = ckpt.seed;
    j["p_max_w"] = ckpt.p_max_w;
    j["shape"] = {{"input", p.shape.input}, {"trunk", p.shape.trunk}, {"m_streams", p.shape.m_streams}};

    json layers = json::array();
    for (const auto &l : p.layers)
    {
        const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = l.weight;
        layers.push_back({{"rows", l.weight.rows()},
                          {"cols", l.weight.cols()},
                          {"weight", to_array(row_major.data(), row_major.size())},
                          {"bias", to_array(l.bias.data(), l.bias.size())}});
    }
    j["layers"] = std::move(layers);
    j["normalization"] = {{"mean", to_array(ckpt.normalizer.mean.data(), ckpt.normalizer.mean.size())},
                          {"scale", to_array(ckpt.normalizer.scale.data(), ckpt.normalizer.scale.size())}};
    return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string &text)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw std::runtime_error(std::string("checkpoint: malformed JSON: ") + e.what());
    }

    try
    {
        if (j.at("format").get<std::string>() != "nfmimo-checkpoint")
            throw std::runtime_error("checkpoint: unexpected format tag");
        if (j.at("version").get<int>() != kCheckpointVersion)
            throw std::runtime_error("checkpoint: unsupported version " + j.at("version").dump());

        Checkpoint ckpt;
        ckpt.seed = j.at("seed").get<std::uint64_t>();
        ckpt.p_max_w = j.at("p_max_w").get<double>();
        const json &shape = j.at("shape");
        ckpt.params.shape.input = shape.at("input").get<int>();
        ckpt.params.shape.trunk = shape.at("trunk").get<std::vector<int>>();
        ckpt.params.shape.m_streams = shape.at("m_streams").get<int>();

        // Validate layer shapes against a freshly initialised network of the same shape.
        const NetworkParams expected = init_network(ckpt.params.shape, 0).zeros_like();
        const json &layers = j.at("layers");
        if (!layers.is_array() || layers.size() != expected.layers.size())
            throw std::runtime_error("checkpoint: layer count does not match shape");
        for (std::size_t i = 0; i < layers.size(); ++i)
        {
            const auto rows = layers[i].at("rows").get<Eigen::Index>();
            const auto cols = layers[i].at("cols").get<Eigen::Index>();
            if (rows != expected.layers[i].weight.rows() || cols != expected.layers[i].weight.cols())
                throw std::runtime_error("checkpoint: layer " + std::to_string(i) + " has shape " +
                                         std::to_string(rows) + "x" + std::to_string(cols));
            const RVector flat = vector_from(layers[i].at("weight"), rows * cols, "layers[].weight");
            DenseLayer l;
            l.weight = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                flat.data(), rows, cols);
            l.bias = vector_from(layers[i].at("bias"), rows, "layers[].bias");
            ckpt.params.layers.push_back(std::move(l));
        }
        const json &norm = j.at("normalization");
        ckpt.normalizer.mean = vector_from(norm.at("mean"), ckpt.params.shape.input, "normalization.mean");
        ckpt.normalizer.scale = vector_from(norm.at("scale"), ckpt.params.shape.input, "normalization.scale");
        return ckpt;
    }
    catch (const json::exception &e)
    {
        throw std::runtime_error(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt)
{
    const std::string text = checkpoint_to_string(ckpt);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
    os << text;
    if (!os)
        throw std::runtime_error("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("checkpoint not found or unreadable: " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return checkpoint_from_string(ss.str());
}

} // namespace nfmimo
