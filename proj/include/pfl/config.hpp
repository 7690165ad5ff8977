#pragma once

#include "pfl/classify.hpp"
#include "pfl/labeling.hpp"
#include "pfl/mesh.hpp"
#include "pfl/timestepper.hpp"
#include "pfl/uq.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace pfl {

using Json = nlohmann::json;

/// The shipped cases.json, compiled into the library.
const char* default_config_text();
Json default_config();

/// Reads a JSON file and merge-patches it onto the defaults, so partial
/// files only need the fields they change.
Json load_config(const std::filesystem::path& path);
/// Sets a field by dotted path ("stop.t_max"); throws ConfigError on unknown keys.
void override_field(Json& cfg, const std::string& dotted, const Json& value);

std::string config_hash(const Json& cfg);

/// case_id 1..6 picks the row of the cases table; throws ConfigError otherwise.
CaseConfig case_config(const Json& cfg, int case_id);
SpecimenParams specimen_params(const Json& cfg);
double mesh_target_edge(const Json& cfg, bool desk = false);
SensorGrid sensor_grid(const Json& cfg);
LabelSettings label_settings(const Json& cfg);
SplitSpec split_spec(const Json& cfg, std::uint64_t seed);
AnnSettings ann_settings(const Json& cfg);
UqSpec uq_spec(const Json& cfg, std::uint64_t seed);

} // namespace pfl
