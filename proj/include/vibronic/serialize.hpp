#pragma once

#include "vibronic/sweep.hpp"

#include <json.hpp>

namespace vibronic {

void to_json(nlohmann::json& j, const ChainParams& p);
void from_json(const nlohmann::json& j, ChainParams& p);
void to_json(nlohmann::json& j, const PropagatorConfig& c);
void from_json(const nlohmann::json& j, PropagatorConfig& c);
void to_json(nlohmann::json& j, const KernelParams& k);
void from_json(const nlohmann::json& j, KernelParams& k);
void to_json(nlohmann::json& j, const SweepPlan& p);
void from_json(const nlohmann::json& j, SweepPlan& p);

/// Plan fields that determine the results (everything except workers and
/// output location).
nlohmann::json plan_identity(const SweepPlan& p);

/// Writes `doc` to `path` through a temporary file and rename.
void write_json_file(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json_file(const std::string& path);

} // namespace vibronic
