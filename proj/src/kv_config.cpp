#include "riskball/kv_config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace riskball::util {

std::string kv_to_string(const KvMap& kv) {
    std::string out;
    for (const auto& [k, v] : kv) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

void save_kv(const std::string& path, const KvMap& kv) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("kv: cannot open " + tmp);
        out << kv_to_string(kv);
    }
    std::filesystem::rename(tmp, path);
}

KvMap load_kv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("kv: cannot open " + path);
    KvMap kv;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#' || line[0] == '[') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("kv: " + path + " line " + std::to_string(row) +
                                     ": expected key=value");
        }
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string config_hash_hex(const KvMap& kv) {
    KvMap filtered;
    for (const auto& [k, v] : kv) {
        if (k == "out" || k == "jobs" || k == "config") continue;
        filtered[k] = v;
    }
    const std::uint64_t h = fnv1a(kv_to_string(filtered));
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 0; i < 16; ++i) buf[15 - i] = digits[(h >> (4 * i)) & 0xF];
    buf[16] = '\0';
    return std::string(buf, 8);  // 8 hex chars are plenty for file names
}

std::string artifact_name(const std::string& stem, std::uint64_t seed, const std::string& hash,
                          const std::string& ext) {
    return stem + "_s" + std::to_string(seed) + "_h" + hash + "." + ext;
}

const std::string& get_or_throw(const KvMap& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("kv: missing key '" + key + "'");
    return it->second;
}

double kv_double(const KvMap& kv, const std::string& key) {
    const std::string& s = get_or_throw(kv, key);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("kv: key '" + key + "' is not a number: " + s);
    }
    return v;
}

std::int64_t kv_int(const KvMap& kv, const std::string& key) {
    const std::string& s = get_or_throw(kv, key);
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("kv: key '" + key + "' is not an integer: " + s);
    }
    return v;
}

}  // namespace riskball::util
