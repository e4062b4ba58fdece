#pragma once

#include <string>

#include "riskball/tape.hpp"

namespace riskball::nn {

// Binary checkpoint container: magic "RBCP", one version byte, then a flat
// list of (name, shape, float64 row-major values), all little-endian.
// A plain-text manifest listing tensor names and shapes is written next to
// the binary as <path>.manifest.txt. Writes go to a temp file first and are
// renamed into place.
void save_checkpoint(const std::string& path, const ParamSet& params);

ParamSet load_checkpoint(const std::string& path);

}  // namespace riskball::nn
