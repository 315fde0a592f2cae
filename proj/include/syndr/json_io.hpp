#pragma once

#include "syndr/bound.hpp"
#include "syndr/ddcup.hpp"
#include "syndr/drcdown.hpp"
#include "syndr/syngen.hpp"

#include <json.hpp>

#include <filesystem>

namespace syndr {

using ojson = nlohmann::ordered_json;

ojson to_json(const ddcup::SelectionResult& result);
ojson to_json(const drcdown::DrcDownReport& report);
ojson to_json(const bound::ClusterStats& stats, bool include_sizes = false);
ojson to_json(const bound::BoundReport& report);
ojson to_json(const bound::TrendReport& report);
ojson to_json(const syngen::NeighborAssignment& assignment);

bound::ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

/// Pretty-printed, newline-terminated.
void write_json(const std::filesystem::path& path, const ojson& value);
nlohmann::json read_json(const std::filesystem::path& path);

} // namespace syndr
