#include "pdpha/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace pdpha {

namespace {

void put_u64le(std::ostream& out, uint64_t x) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xff);
    out.write(b, 8);
}

uint64_t get_u64le(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<uint64_t>(b[i]) << (8 * i);
    return x;
}

}  // namespace

void write_checkpoint(const std::string& path, const nlohmann::json& hyper, const ParamStore& params) {
    nlohmann::json header;
    header["format"] = "PDPHA1";
    header["hyper"] = hyper;
    nlohmann::json manifest = nlohmann::json::array();
    for (const Parameter& p : params) {
        manifest.push_back({{"name", p.name}, {"shape", p.value.shape}});
    }
    header["tensors"] = std::move(manifest);
    const std::string hs = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
    put_u64le(out, hs.size());
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const Parameter& p : params) {
        for (double x : p.value.v) put_u64le(out, std::bit_cast<uint64_t>(x));
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

LoadedCheckpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    char magic[sizeof(kCheckpointMagic) - 1];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw std::runtime_error(path + ": not a PDPHA1 checkpoint (bad magic)");
    }
    const uint64_t hlen = get_u64le(in);
    std::string hs(hlen, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw std::runtime_error(path + ": truncated checkpoint header");

    LoadedCheckpoint ck;
    nlohmann::json header = nlohmann::json::parse(hs);
    ck.hyper = header.at("hyper");
    for (const nlohmann::json& entry : header.at("tensors")) {
        Tensor t(entry.at("shape").get<std::vector<size_t>>());
        for (double& x : t.v) x = std::bit_cast<double>(get_u64le(in));
        if (!in) throw std::runtime_error(path + ": truncated payload for tensor " +
                                          entry.at("name").get<std::string>());
        ck.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(t));
    }
    return ck;
}

}  // namespace pdpha
