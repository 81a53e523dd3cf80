#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qfi/catalog.hpp"
#include "qfi/closed_form.hpp"
#include "qfi/discovery.hpp"
#include "qfi/potentials.hpp"
#include "qfi/sampling.hpp"

namespace qfi::cli {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;
constexpr double kVerletDriftTol = 1e-6;
constexpr double kRK4DriftTol = 1e-8;
constexpr double kBracketTol = 1e-9;
constexpr double kSolveTol = 1e-4;
constexpr std::size_t kBracketStates = 20;

class UsageError : public Error {
 public:
  using Error::Error;
};

json parse_params(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("--params is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("--params must be a JSON object");
  return j;
}

void check_config(const RunConfig& c) {
  if (c.command != "list" && c.potential.empty()) throw UsageError(c.command + ": --potential is required");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw UsageError("--dt must be positive");
  if (!(c.t_end > c.dt) || !std::isfinite(c.t_end)) throw UsageError("--t-end must exceed --dt");
  if (c.format != "json" && c.format != "csv") throw UsageError("--format must be json or csv");
}

int step_count(const RunConfig& c) { return static_cast<int>(std::lround(c.t_end / c.dt)); }

json config_json(const RunConfig& c) {
  return {{"integrator", c.integrator}, {"dt", c.dt}, {"t_end", c.t_end}, {"seed", c.seed}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Report {
  std::string text;
  int code = kOk;
};

Report cmd_list(const RunConfig& c) {
  const json manifest = catalog_manifest();
  if (c.format == "json") return {manifest.dump(2) + "\n"};
  std::ostringstream os;
  os << "name,class,reference,first_integrals\n";
  for (const auto& e : manifest["entries"]) {
    std::string fis;
    for (const auto& f : e["first_integrals"]) fis += (fis.empty() ? "" : ";") + f.get<std::string>();
    os << csv_field(e["name"]) << ',' << e["class"].get<std::string>() << ','
       << csv_field(e["reference"]) << ',' << csv_field(fis) << '\n';
  }
  return {os.str()};
}

Report cmd_verify(const RunConfig& c) {
  const CatalogEntry entry = instantiate(c.potential, parse_params(c.params));
  const Integrator integ = parse_integrator(c.integrator);
  const double drift_tol = integ == Integrator::Verlet ? kVerletDriftTol : kRK4DriftTol;
  const Trajectory traj = integrate(entry.potential, entry.reference_ics, c.dt, step_count(c), integ);
  bool pass = true;

  json fis = json::array();
  for (const auto& fi : entry.fis) {
    const double d = relative_drift(fi, traj);
    const bool ok = d <= drift_tol;
    pass = pass && ok;
    fis.push_back({{"name", fi.name()},
                   {"kind", to_string(fi.kind())},
                   {"time_dependence", to_string(fi.time_dependence())},
                   {"reference", entry.reference},
                   {"max_drift", d},
                   {"tolerance", drift_tol},
                   {"pass", ok}});
  }

  const auto states = random_states(entry.potential, kBracketStates, c.seed);
  json ids = json::array();
  for (const auto& id : entry.bracket_identities) {
    double worst = 0.0;
    for (const auto& s : states) worst = std::max(worst, std::abs(identity_residual(entry, id, s)));
    const bool ok = worst <= kBracketTol;
    pass = pass && ok;
    ids.push_back({{"identity", id.describe()}, {"max_residual", worst}, {"tolerance", kBracketTol}, {"pass", ok}});
  }

  json indep;
  if (!entry.independent_set.empty()) {
    const int rank = independence_rank(entry.select(entry.independent_set), states);
    const bool ok = rank >= 3;
    pass = pass && ok;
    indep = {{"fis", entry.independent_set}, {"rank", rank}, {"required", 3}, {"pass", ok}};
  } else if (entry.commuting_pair) {
    const auto& [f, g] = *entry.commuting_pair;
    const auto pair = entry.select({f, g});
    double worst = 0.0;
    for (const auto& s : states) worst = std::max(worst, std::abs(poisson_bracket(pair[0], pair[1], s)));
    const int rank = independence_rank(pair, states);
    const bool ok = rank >= 2 && worst <= kBracketTol;
    pass = pass && ok;
    indep = {{"fis", {f, g}}, {"rank", rank}, {"required", 2}, {"max_bracket", worst},
             {"tolerance", kBracketTol}, {"pass", ok}};
  } else {
    std::vector<FirstIntegral> autonomous;
    std::vector<std::string> names;
    for (const auto& fi : entry.fis)
      if (fi.autonomous()) {
        autonomous.push_back(fi);
        names.push_back(fi.name());
      }
    indep = {{"fis", names}, {"rank", autonomous.empty() ? 0 : independence_rank(autonomous, states)},
             {"required", 0}, {"pass", true}};
  }

  if (c.format == "csv") {
    std::ostringstream os;
    os << "section,name,value,tolerance,pass\n";
    for (const auto& f : fis)
      os << "drift," << csv_field(f["name"]) << ',' << num(f["max_drift"]) << ',' << num(drift_tol) << ','
         << f["pass"] << '\n';
    for (const auto& i : ids)
      os << "bracket," << csv_field(i["identity"]) << ',' << num(i["max_residual"]) << ',' << num(kBracketTol)
         << ',' << i["pass"] << '\n';
    os << "rank,independence," << indep["rank"] << ',' << indep["required"] << ',' << indep["pass"] << '\n';
    return {os.str(), pass ? kOk : kBreach};
  }
  json report{{"schema_version", kSchemaVersion},
              {"command", "verify"},
              {"potential", entry.name},
              {"params", params_to_json(entry.potential.params())},
              {"classification", to_string(entry.classification)},
              {"reference", entry.reference},
              {"config", config_json(c)},
              {"first_integrals", fis},
              {"bracket_identities", ids},
              {"independence", indep},
              {"pass", pass}};
  return {report.dump(2) + "\n", pass ? kOk : kBreach};
}

Report cmd_brackets(const RunConfig& c) {
  const CatalogEntry entry = instantiate(c.potential, parse_params(c.params));
  const auto states = random_states(entry.potential, kBracketStates, c.seed);
  const std::size_t n = entry.fis.size();
  bool pass = true;

  // values[k][i][j] = {F_i, F_j} at state k, for i < j
  std::vector<std::vector<std::vector<double>>> values(states.size(),
                                                       std::vector<std::vector<double>>(n, std::vector<double>(n)));
  for (std::size_t k = 0; k < states.size(); ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) values[k][i][j] = poisson_bracket(entry.fis[i], entry.fis[j], states[k]);

  json pairs = json::array();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& f = entry.fis[i].name();
      const auto& g = entry.fis[j].name();
      double max_abs = 0.0;
      for (const auto& v : values) max_abs = std::max(max_abs, std::abs(v[i][j]));
      json p{{"f", f}, {"g", g}, {"max_abs", max_abs}};
      for (const auto& id : entry.bracket_identities) {
        if (!(id.f == f && id.g == g)) continue;
        double worst = 0.0;
        for (const auto& s : states) worst = std::max(worst, std::abs(identity_residual(entry, id, s)));
        const bool ok = worst <= kBracketTol;
        pass = pass && ok;
        p["identity"] = id.describe();
        p["identity_residual"] = worst;
        p["pass"] = ok;
      }
      pairs.push_back(p);
    }

  if (c.format == "csv") {
    std::ostringstream os;
    os << "state,t,x,y,vx,vy,f,g,bracket\n";
    for (std::size_t k = 0; k < states.size(); ++k) {
      const auto& s = states[k];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          os << k << ',' << num(s.t) << ',' << num(s.x) << ',' << num(s.y) << ',' << num(s.vx) << ','
             << num(s.vy) << ',' << csv_field(entry.fis[i].name()) << ',' << csv_field(entry.fis[j].name())
             << ',' << num(values[k][i][j]) << '\n';
    }
    return {os.str(), pass ? kOk : kBreach};
  }

  json table = json::array();
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& s = states[k];
    json row{{"state", {s.t, s.x, s.y, s.vx, s.vy}}};
    json brackets = json::array();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) brackets.push_back(values[k][i][j]);
    row["brackets"] = brackets;
    table.push_back(row);
  }
  std::vector<std::string> names;
  for (const auto& fi : entry.fis) names.push_back(fi.name());
  json report{{"schema_version", kSchemaVersion},
              {"command", "brackets"},
              {"potential", entry.name},
              {"params", params_to_json(entry.potential.params())},
              {"reference", entry.reference},
              {"seed", c.seed},
              {"first_integrals", names},
              {"pairs", pairs},
              {"table", table},
              {"pass", pass}};
  return {report.dump(2) + "\n", pass ? kOk : kBreach};
}

Report cmd_discover(const RunConfig& c) {
  const PotentialSpec spec = make_potential(c.potential, parse_params(c.params));
  DiscoveryOptions opts;
  opts.seed = c.seed;
  opts.scan_integral3 = c.integral3;
  const DiscoveryReport r = assemble_report(spec, opts);
  const bool pass = r.errors.empty() &&
                    std::all_of(r.reconstructed.begin(), r.reconstructed.end(), [](const auto& d) { return d.validated; });
  if (c.format == "csv") {
    std::ostringstream os;
    os << "section,index,values\n";
    auto rows = [&os](const std::string& section, const auto& basis, auto to_vec) {
      for (std::size_t i = 0; i < basis.size(); ++i) {
        os << section << ',' << i << ',';
        std::string joined;
        for (double v : to_vec(basis[i])) joined += (joined.empty() ? "" : " ") + num(v);
        os << joined << '\n';
      }
    };
    rows("lfi", r.lfi_basis, [](const KVParams& p) { return p.to_array(); });
    rows("bd", r.kt_basis, [](const KTParams& p) { return p.to_array(); });
    if (r.integral3)
      for (const auto& h : r.integral3->hits)
        rows("integral3@" + num(h.lambda), h.basis, [](const LVecParams& p) { return p.coefficients(); });
    os << "verdict,0," << r.verdict << '\n';
    return {os.str(), pass ? kOk : kBreach};
  }
  json j = to_json(r);
  j["params"] = params_to_json(spec.params());
  j["seed"] = c.seed;
  return {j.dump(2) + "\n", pass ? kOk : kBreach};
}

Report cmd_solve(const RunConfig& c) {
  const CatalogEntry entry = instantiate(c.potential, parse_params(c.params));
  if (!entry.has_closed_form) throw UsageError("solve: no closed-form solution for " + entry.name);
  const Integrator integ = parse_integrator(c.integrator);
  const ClosedFormSolution sol = closed_form_solution(entry, entry.reference_ics);
  const Trajectory traj = integrate(entry.potential, entry.reference_ics, c.dt, step_count(c), integ);
  const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.1 / c.dt)));

  double worst = 0.0;
  json rows = json::array();
  std::ostringstream csv;
  csv << "t,x_closed,y_closed,x_numeric,y_numeric,error\n";
  for (std::size_t i = 0; i < traj.states.size(); i += stride) {
    const State& s = traj.states[i];
    const Vec2 q = sol.position(s.t);
    // relative to the orbit size, absolute near the origin
    const double err = std::hypot(q[0] - s.x, q[1] - s.y) / std::max(1.0, std::hypot(s.x, s.y));
    worst = std::max(worst, err);
    rows.push_back({s.t, q[0], q[1], s.x, s.y, err});
    csv << num(s.t) << ',' << num(q[0]) << ',' << num(q[1]) << ',' << num(s.x) << ',' << num(s.y) << ','
        << num(err) << '\n';
  }
  const bool pass = worst <= kSolveTol;
  if (c.format == "csv") return {csv.str(), pass ? kOk : kBreach};
  json report{{"schema_version", kSchemaVersion},
              {"command", "solve"},
              {"potential", entry.name},
              {"params", params_to_json(entry.potential.params())},
              {"reference", entry.reference},
              {"config", config_json(c)},
              {"initial_state", {entry.reference_ics.t, entry.reference_ics.x, entry.reference_ics.y,
                                 entry.reference_ics.vx, entry.reference_ics.vy}},
              {"method", sol.method},
              {"constants", sol.constants},
              {"columns", {"t", "x_closed", "y_closed", "x_numeric", "y_numeric", "error"}},
              {"rows", rows},
              {"max_error", worst},
              {"tolerance", kSolveTol},
              {"pass", pass}};
  return {report.dump(2) + "\n", pass ? kOk : kBreach};
}

void add_run_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--potential", c.potential, "Potential or catalog entry name");
  sub->add_option("--params", c.params, "Parameters as a JSON object");
  sub->add_option("--integrator", c.integrator, "Integrator")->check(CLI::IsMember({"verlet", "rk4"}));
  sub->add_option("--dt", c.dt, "Time step");
  sub->add_option("--t-end", c.t_end, "Final time");
  sub->add_option("--seed", c.seed, "Seed of the sampled validation states");
}

void add_output_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--out", c.out, "Output file (default: standard output)");
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  check_config(config);
  Report r;
  if (config.command == "list") r = cmd_list(config);
  else if (config.command == "verify") r = cmd_verify(config);
  else if (config.command == "brackets") r = cmd_brackets(config);
  else if (config.command == "discover") r = cmd_discover(config);
  else if (config.command == "solve") r = cmd_solve(config);
  else throw UsageError("unknown command '" + config.command + "'");

  if (config.out.empty()) {
    out << r.text;
  } else {
    std::ofstream f(config.out, std::ios::binary);
    if (!(f << r.text)) throw UsageError("cannot write " + config.out);
  }
  if (r.code == kBreach) err << config.command << ": tolerance breach\n";
  return r.code;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Verification and discovery of first integrals of planar potentials", "qfi_lab"};
  app.require_subcommand(1);
  RunConfig config;

  auto* list = app.add_subcommand("list", "Print the catalog manifest");
  add_output_options(list, config);
  auto* verify = app.add_subcommand("verify", "Check drift, bracket identities and independence of a catalog entry");
  auto* brackets = app.add_subcommand("brackets", "Pairwise Poisson brackets of a catalog entry at sampled states");
  auto* discover = app.add_subcommand("discover", "Discover linear and quadratic integrals of a potential");
  auto* solve = app.add_subcommand("solve", "Compare a closed-form solution with numerical integration");
  for (auto* sub : {verify, brackets, discover, solve}) {
    add_run_options(sub, config);
    add_output_options(sub, config);
  }
  discover->add_flag("--integral3", config.integral3, "Also scan lambda for exponential integrals");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  config.command = app.get_subcommands().front()->get_name();

  try {
    return run(config, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const BadParams& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UnknownName& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kBreach;
  }
}

}  // namespace qfi::cli
