#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifd/common.hpp"
#include "ifd/geometry.hpp"
#include "ifd/nn.hpp"
#include "ifd/unet.hpp"

namespace ifd {

// Checkpoint container: u32 manifest length, JSON manifest, then raw
// little-endian float32 blocks in manifest order. The manifest carries
// everything needed to rebuild the model and resume training.

struct AdamMeta {
    std::int64_t step = 0;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct CheckpointMeta {
    std::string schedule_kind = "cosine";
    int schedule_T = 1000;
    DescriptorKind descriptor_kind = DescriptorKind::height;
    int descriptor_dim = 1;
    std::vector<double> norm_min, norm_max;
    std::string image_scale = "x = 2p - 1";
    std::string guidance = "eps_u + s*(eps_c - eps_u); s=1 reduces to conditional";
    int epoch = 0;
    std::uint64_t seed = 0;
    UNetConfig unet;
    ContextEmbedConfig context;
    AdamMeta adam;
};

struct CheckpointData {
    CheckpointMeta meta;
    std::map<std::string, std::pair<std::vector<int>, std::vector<float>>> blocks;
};

namespace detail {

inline nlohmann::json meta_to_json(const CheckpointMeta& m) {
    nlohmann::json j;
    j["format"] = "ifd-checkpoint";
    j["version"] = 1;
    j["schedule"] = {{"kind", m.schedule_kind}, {"T", m.schedule_T}};
    j["descriptor"] = {{"kind", descriptor_kind_name(m.descriptor_kind)},
                       {"dim", m.descriptor_dim}};
    j["norm"] = {{"min", m.norm_min}, {"max", m.norm_max}};
    j["image_scale"] = m.image_scale;
    j["guidance"] = m.guidance;
    j["epoch"] = m.epoch;
    j["seed"] = m.seed;
    j["unet"] = {{"in_channels", m.unet.in_channels}, {"width1", m.unet.width1},
                 {"width2", m.unet.width2},           {"width3", m.unet.width3},
                 {"context_dim", m.unet.context_dim}, {"groups", m.unet.groups}};
    j["context"] = {{"input_dim", m.context.input_dim},
                    {"hidden", m.context.hidden},
                    {"output_dim", m.context.output_dim}};
    j["adam"] = {{"step", m.adam.step}, {"lr", m.adam.lr},   {"beta1", m.adam.beta1},
                 {"beta2", m.adam.beta2}, {"eps", m.adam.eps}};
    return j;
}

inline CheckpointMeta meta_from_json(const nlohmann::json& j) {
    require(j.value("format", "") == "ifd-checkpoint", Errc::corrupt_container,
            "not an ifd checkpoint");
    CheckpointMeta m;
    m.schedule_kind = j.at("schedule").at("kind").get<std::string>();
    m.schedule_T = j.at("schedule").at("T").get<int>();
    m.descriptor_kind = descriptor_kind_from_name(j.at("descriptor").at("kind").get<std::string>());
    m.descriptor_dim = j.at("descriptor").at("dim").get<int>();
    m.norm_min = j.at("norm").at("min").get<std::vector<double>>();
    m.norm_max = j.at("norm").at("max").get<std::vector<double>>();
    m.image_scale = j.at("image_scale").get<std::string>();
    m.guidance = j.at("guidance").get<std::string>();
    m.epoch = j.at("epoch").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.unet.in_channels = j.at("unet").at("in_channels").get<int>();
    m.unet.width1 = j.at("unet").at("width1").get<int>();
    m.unet.width2 = j.at("unet").at("width2").get<int>();
    m.unet.width3 = j.at("unet").at("width3").get<int>();
    m.unet.context_dim = j.at("unet").at("context_dim").get<int>();
    m.unet.groups = j.at("unet").at("groups").get<int>();
    m.context.input_dim = j.at("context").at("input_dim").get<int>();
    m.context.hidden = j.at("context").at("hidden").get<int>();
    m.context.output_dim = j.at("context").at("output_dim").get<int>();
    m.adam.step = j.at("adam").at("step").get<std::int64_t>();
    m.adam.lr = j.at("adam").at("lr").get<double>();
    m.adam.beta1 = j.at("adam").at("beta1").get<double>();
    m.adam.beta2 = j.at("adam").at("beta2").get<double>();
    m.adam.eps = j.at("adam").at("eps").get<double>();
    return m;
}

}  // namespace detail

// named_blocks: (name, shape, data) triples written verbatim
inline void save_checkpoint(
    const std::string& path, const CheckpointMeta& meta,
    const std::vector<std::tuple<std::string, std::vector<int>, const std::vector<float>*>>&
        named_blocks) {
    nlohmann::json j = detail::meta_to_json(meta);
    j["blocks"] = nlohmann::json::array();
    for (const auto& [name, shape, data] : named_blocks) {
        size_t n = 1;
        for (int d : shape) n *= static_cast<size_t>(d);
        require(n == data->size(), Errc::shape_mismatch, "block size mismatch: " + name);
        j["blocks"].push_back({{"name", name}, {"shape", shape}});
    }
    const std::string manifest = j.dump();

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    require(f.good(), Errc::io_error, "cannot open for write: " + path);
    const std::uint32_t len = static_cast<std::uint32_t>(manifest.size());
    char lenb[4];
    for (int i = 0; i < 4; ++i) lenb[i] = static_cast<char>((len >> (8 * i)) & 0xff);
    f.write(lenb, 4);
    f.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
    for (const auto& [name, shape, data] : named_blocks)
        f.write(reinterpret_cast<const char*>(data->data()),
                static_cast<std::streamsize>(data->size() * sizeof(float)));
    require(f.good(), Errc::io_error, "checkpoint write failed: " + path);
}

inline CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), Errc::io_error, "cannot open: " + path);
    char lenb[4];
    f.read(lenb, 4);
    require(f.gcount() == 4, Errc::corrupt_container, "checkpoint header truncated");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i)
        len |= static_cast<std::uint32_t>(static_cast<unsigned char>(lenb[i])) << (8 * i);
    std::string manifest(len, '\0');
    f.read(manifest.data(), len);
    require(f.gcount() == static_cast<std::streamsize>(len), Errc::corrupt_container,
            "checkpoint manifest truncated");

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(manifest);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::corrupt_container, std::string("manifest parse: ") + e.what());
    }

    CheckpointData data;
    data.meta = detail::meta_from_json(j);
    for (const auto& bj : j.at("blocks")) {
        const std::string name = bj.at("name").get<std::string>();
        const std::vector<int> shape = bj.at("shape").get<std::vector<int>>();
        size_t n = 1;
        for (int d : shape) n *= static_cast<size_t>(d);
        std::vector<float> buf(n);
        f.read(reinterpret_cast<char*>(buf.data()),
               static_cast<std::streamsize>(n * sizeof(float)));
        require(f.gcount() == static_cast<std::streamsize>(n * sizeof(float)),
                Errc::corrupt_container, "checkpoint block truncated: " + name);
        data.blocks.emplace(name, std::make_pair(shape, std::move(buf)));
    }
    return data;
}

// Copy stored blocks into a live parameter list; shapes must match exactly.
inline void restore_params(const CheckpointData& data, const ParamRefs<float>& params) {
    for (Param<float>* p : params) {
        const auto it = data.blocks.find(p->name);
        require(it != data.blocks.end(), Errc::corrupt_container, "missing block: " + p->name);
        require(it->second.first == p->shape, Errc::shape_mismatch,
                "shape mismatch for block: " + p->name);
        p->value = it->second.second;
    }
}

}  // namespace ifd
