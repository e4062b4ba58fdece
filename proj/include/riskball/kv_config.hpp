#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace riskball::util {

// Plain-text key=value files: one pair per line, keys sorted on write,
// '#' starts a comment. Used for config snapshots and model metadata.
using KvMap = std::map<std::string, std::string>;

void save_kv(const std::string& path, const KvMap& kv);
KvMap load_kv(const std::string& path);

std::string kv_to_string(const KvMap& kv);

std::uint64_t fnv1a(const std::string& s);

// Hash of the resolved configuration, excluding output-location and
// parallelism keys so re-runs into other directories keep the same identity.
std::string config_hash_hex(const KvMap& kv);

// "<stem>_s<seed>_h<hash>.<ext>"
std::string artifact_name(const std::string& stem, std::uint64_t seed, const std::string& hash,
                          const std::string& ext);

const std::string& get_or_throw(const KvMap& kv, const std::string& key);
double kv_double(const KvMap& kv, const std::string& key);
std::int64_t kv_int(const KvMap& kv, const std::string& key);

}  // namespace riskball::util
