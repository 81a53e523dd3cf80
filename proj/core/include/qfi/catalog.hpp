#pragma once

// Registry of the known integrable and superintegrable potentials together
// with their first integrals, bracket identities and reference orbits.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qfi/dynamics.hpp"
#include "qfi/first_integral.hpp"
#include "qfi/potential.hpp"
#include "qfi/potentials.hpp"

namespace qfi {

enum class Classification { Integrable, Superintegrable, LFIOnly };

std::string to_string(Classification c);

/// {F, G} = constant + sum_i coef_i * FI_i, with the FIs named from the entry.
struct BracketIdentity {
  std::string f, g;
  double constant = 0.0;
  std::vector<std::pair<double, std::string>> terms;

  std::string describe() const;
};

struct CatalogEntry {
  std::string name;
  std::string reference;  // table reference, e.g. "Class II superintegrable: S1"
  PotentialSpec potential;
  std::vector<FirstIntegral> fis;  // H first whenever the energy is single-valued
  std::vector<BracketIdentity> bracket_identities;
  Classification classification = Classification::Integrable;
  /// Three FIs with independent gradients (superintegrable entries).
  std::vector<std::string> independent_set;
  /// (H, Q) in involution (integrable entries).
  std::optional<std::pair<std::string, std::string>> commuting_pair;
  State reference_ics;
  bool has_closed_form = false;

  /// Throws UnknownName.
  const FirstIntegral& fi(const std::string& name) const;
  std::vector<FirstIntegral> select(const std::vector<std::string>& names) const;
};

struct EntryInfo {
  std::string name;
  Classification classification;
  std::string reference;
  std::string formula;
  std::vector<ParamInfo> schema;
  std::vector<std::string> fi_names;
};

/// The 24 catalog entries with default parameters, in registry order.
std::vector<EntryInfo> list_entries();
const std::vector<std::string>& entry_names();

/// Throws UnknownName, BadParams.
CatalogEntry instantiate(const std::string& name, const nlohmann::json& params);
CatalogEntry instantiate(const std::string& name);

/// Residual {F, G} - expected at s.
double identity_residual(const CatalogEntry& entry, const BracketIdentity& id, const State& s);

/// Relative drift of an FI along a trajectory: max |I(t) - I(0)| divided by
/// max(1, max_t term_magnitude), so cancelling sums of growing exponentials
/// are measured against the size of their parts.
double relative_drift(const FirstIntegral& fi, const Trajectory& traj);

/// Catalog manifest: name, class, reference, formula, schema, FI names.
nlohmann::json catalog_manifest();

}  // namespace qfi
