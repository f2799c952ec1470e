#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "riskflow/engine/statistics.hpp"

namespace riskflow::cli {

/// Sorted keys, numbers as %.17g, non-finite numbers as null.
std::string canonical_dump(const nlohmann::json& j, int indent = 2);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

/// Hash of the canonical form without "timestamp", "wall_time_s" and the output directory.
std::string determinism_hash(const nlohmann::json& result);

/// {value, se, ci: [lo, hi]}; a non-finite value becomes null with the given reason.
nlohmann::json metric(const Estimate& e, const std::string& reason = "non-finite estimate");
nlohmann::json metric(double value, const std::string& reason = "non-finite value");

}  // namespace riskflow::cli
