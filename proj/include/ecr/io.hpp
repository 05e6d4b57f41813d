#pragma once

// Canonical documents: JSON for config, device state and results; CSV summaries; SVG
// plots (budget bars, cumulative EPG, leakage phase sweeps).

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ecr/device.hpp"

namespace ecr {

using Json = nlohmann::ordered_json;

Json to_json(const DeviceConfig& c);
DeviceConfig config_from_json(const Json& j);

Json to_json(const DeviceState& s);
DeviceState state_from_json(const Json& j);

Json to_json(const ResultsDocument& r);
ResultsDocument results_from_json(const Json& j);

/// Content hash (FNV-1a, 64 bit, hex) used as the calibration snapshot id.
std::string content_hash(const std::string& text);
/// Snapshot of a calibration run: hash over the config and calibrations, not timestamps.
std::string snapshot_of(const DeviceConfig& config, const std::vector<PairCalibration>& pairs);

std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary file and a rename.
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// Columns: pair, component, epg_before, epg_after, irb_before, irb_after. One row per
/// pair and budget component; "after" columns are empty without a suppressed run.
std::string budget_csv(const ResultsDocument& r);
/// Per-length survival means of every reference and interleaved curve.
std::string survival_csv(const ResultsDocument& r);

/// Stacked budget components per pair, before and after side by side.
std::string budget_svg(const ResultsDocument& r);
/// Empirical CDF of IRB EPG before and after, with dashed means.
std::string cdf_svg(const ResultsDocument& r);
/// Amplification scans for one pair: |0> and |1> preparations, dashed before and solid after.
std::string leakage_svg(const ResultsDocument& r, const std::string& label);

}  // namespace ecr
