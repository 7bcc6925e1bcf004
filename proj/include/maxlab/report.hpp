#pragma once

#include <string>

#include <json.hpp>

#include "maxlab/continuity.hpp"
#include "maxlab/corpus.hpp"
#include "maxlab/verify.hpp"

namespace maxlab {

inline constexpr const char* kVersion = "maxlab 1.0.0";

using ojson = nlohmann::ordered_json;

ojson to_json(const CheckReport& rep);
ojson to_json(const StabilityEntry& st);
ojson to_json(const SuiteResult& res);
ojson to_json(const ContinuityRun& run);

// Report envelope: {"version", "config", ...payload}. Key order is fixed, so
// identical runs serialize to identical bytes.
void write_report(const std::string& path, const ojson& config, const ojson& payload);
std::string report_string(const ojson& config, const ojson& payload);

// Flat curve CSV: j, w11_gap, e_j, modulus_gap, tail_j.
void write_continuity_csv(const ContinuityRun& run, const std::string& path);

}  // namespace maxlab
