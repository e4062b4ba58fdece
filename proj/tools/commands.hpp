#pragma once

#include <string>

#include "CLI11.hpp"
#include "riskball/kv_config.hpp"

namespace riskball::cli {

// Exit codes: 0 success, 1 runtime failure, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

void register_generate(CLI::App& app);
void register_train(CLI::App& app);
void register_eval(CLI::App& app);
void register_ablate(CLI::App& app);
void register_rl(CLI::App& app);

// Resolved-option snapshot written before any work happens; returns the
// config hash used in artifact file names.
std::string write_snapshot(const CLI::App& sub, const std::string& out_dir,
                           const std::string& name);

util::KvMap options_as_kv(const CLI::App& sub);

std::string default_output_root();

}  // namespace riskball::cli
