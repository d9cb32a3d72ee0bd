#pragma once

#include <string>

#include "json.hpp"
#include "perfora/analysis.hpp"
#include "perfora/capacity.hpp"
#include "perfora/geometry.hpp"
#include "perfora/solver.hpp"

namespace perfora {

/// Strict parsers for the versioned domain schema: unknown keys are errors
/// (std::invalid_argument naming the offending key), not warnings.
PerforatedDomain domain_from_json(const nlohmann::json& j);
PerforatedDomain domain_from_file(const std::string& path);

nlohmann::json domain_to_json(const PerforatedDomain& domain);
nlohmann::json hole_to_json(const HoleShape& hole);
HoleShape hole_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const SolveReport& rep, const SolveConfig& cfg);
nlohmann::json report_to_json(const ExperimentReport& rep);
nlohmann::json report_to_json(const CapacityResult& rep);

/// Version string embedded in every report.
extern const char* const kArtifactVersion;

}  // namespace perfora
