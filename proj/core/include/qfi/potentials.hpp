#pragma once

// Registry of named potential families with parameter schemas and defaults.

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qfi/potential.hpp"

namespace qfi {

struct ParamInfo {
  enum class Kind { Real, Function };
  std::string name;
  Kind kind = Kind::Real;
  double default_real = 0.0;
  std::string default_function;  // JSON text for function parameters
  std::string constraint;        // human-readable admissibility rule, empty if none
};

struct PotentialFamily {
  std::string name;
  std::string formula;
  std::vector<ParamInfo> schema;
  std::function<PotentialSpec(const ParamValues&)> build;
};

/// Every family known to the library: the catalog potentials plus the test
/// potentials "free" (V = 0), "generic" (no symmetry) and "V21b".
const std::vector<PotentialFamily>& potential_families();

/// Throws UnknownName.
const PotentialFamily& potential_family(const std::string& name);

/// Defaults overlaid with the given JSON object; unknown keys and ill-typed
/// values throw BadParams.
ParamValues resolve_params(const PotentialFamily& family, const nlohmann::json& params);

nlohmann::json params_to_json(const ParamValues& params);

PotentialSpec make_potential(const std::string& name, const nlohmann::json& params);
PotentialSpec make_potential(const std::string& name);

/// {"name": ..., "params": {...}}; "params" is required (it may be empty).
PotentialSpec potential_from_json(const nlohmann::json& j);

/// A potential given directly as code; used for user-supplied potentials.
PotentialSpec potential_from_closure(std::string name, PotentialSpec::Field field,
                                     PotentialSpec::Distance singular_distance = {});

}  // namespace qfi
