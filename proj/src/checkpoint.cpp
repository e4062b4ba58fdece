#include "riskball/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace riskball::nn {

namespace {

constexpr char kMagic[4] = {'R', 'B', 'C', 'P'};
constexpr std::uint8_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
    if (!out) throw std::runtime_error("checkpoint: write failed");
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamSet& params) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("checkpoint: cannot open " + tmp);
        out.write(kMagic, sizeof(kMagic));
        write_le<std::uint8_t>(out, kVersion);
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
        for (const auto& [name, t] : params) {
            write_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
            out.write(name.data(), static_cast<std::streamsize>(name.size()));
            write_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
            for (std::size_t d : t.shape) write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
            for (double v : t.data) write_le<double>(out, v);
        }
        if (!out) throw std::runtime_error("checkpoint: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);

    const std::string manifest_tmp = path + ".manifest.txt.tmp";
    {
        std::ofstream mf(manifest_tmp, std::ios::trunc);
        if (!mf) throw std::runtime_error("checkpoint: cannot open " + manifest_tmp);
        for (const auto& [name, t] : params) {
            mf << name;
            for (std::size_t d : t.shape) mf << ' ' << d;
            mf << '\n';
        }
    }
    std::filesystem::rename(manifest_tmp, path + ".manifest.txt");
}

ParamSet load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("checkpoint: bad magic in " + path);
    }
    const auto version = read_le<std::uint8_t>(in);
    if (version != kVersion) {
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    }
    const auto count = read_le<std::uint32_t>(in);
    ParamSet params;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = read_le<std::uint16_t>(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in) throw std::runtime_error("checkpoint: truncated name");
        const auto rank = read_le<std::uint8_t>(in);
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = read_le<std::uint32_t>(in);
        Tensor t(shape);
        for (double& v : t.data) v = read_le<double>(in);
        params.emplace(std::move(name), std::move(t));
    }
    return params;
}

}  // namespace riskball::nn
