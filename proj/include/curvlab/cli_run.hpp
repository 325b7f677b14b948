#ifndef CURVLAB_CLI_RUN_HPP
#define CURVLAB_CLI_RUN_HPP

// Config loading, batch execution and report writing. Included from cli_ops.hpp.

#include <iostream>
#include <optional>

#include <CLI11.hpp>

namespace curvlab::cli {

struct Scenario {
  std::string id, op;
  Json spec;
  double tolerance = -1.0;  // negative: use the run default
};

struct Config {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> jobs;
  std::vector<Scenario> scenarios;
};

inline const std::set<std::string>& op_names() {
  static const std::set<std::string> ops = {"curvature", "focal", "index", "compare", "frankel", "lift"};
  return ops;
}

inline Config parse_config(const Json& j, const std::string& where = "config") {
  const Fields top(j, where);
  top.allow({"schema_version", "description", "seed", "tol", "jobs", "scenarios"});
  if (!top.has("schema_version")) fail(ErrorKind::config, where + ": missing 'schema_version'");
  if (top.raw("schema_version") != 1) fail(ErrorKind::config, where + ": unsupported schema_version (expected 1)");
  Config cfg;
  if (top.has("seed")) {
    if (!top.raw("seed").is_number_unsigned()) fail(ErrorKind::config, where + ": 'seed' must be a non-negative integer");
    cfg.seed = top.raw("seed").get<std::uint64_t>();
  }
  if (top.has("tol")) {
    cfg.tol = top.num("tol");
    if (!(*cfg.tol > 0.0)) fail(ErrorKind::config, where + ": 'tol' must be positive");
  }
  if (top.has("jobs")) cfg.jobs = positive(top, "jobs", 1);
  if (!top.has("scenarios") || !top.raw("scenarios").is_array())
    fail(ErrorKind::config, where + ": 'scenarios' must be an array");
  std::set<std::string> seen;
  size_t index = 0;
  for (const Json& s : top.raw("scenarios")) {
    const Fields f(s, where + ": scenario #" + std::to_string(index++));
    Scenario sc;
    sc.id = f.str("id");
    if (sc.id.empty()) fail(ErrorKind::config, f.where() + ": empty id");
    if (!seen.insert(sc.id).second) fail(ErrorKind::config, where + ": duplicate scenario id '" + sc.id + "'");
    sc.op = f.str("op");
    if (!op_names().count(sc.op)) {
      std::string list;
      for (const auto& o : op_names()) list += (list.empty() ? "" : ", ") + o;
      fail(ErrorKind::config, f.where() + ": unknown op '" + sc.op + "' (known: " + list + ")");
    }
    if (f.has("tolerance")) {
      sc.tolerance = f.num("tolerance");
      if (!(sc.tolerance > 0.0)) fail(ErrorKind::config, f.where() + ": 'tolerance' must be positive");
    }
    if (f.has("expect") && !f.raw("expect").is_object())
      fail(ErrorKind::config, f.where() + ": 'expect' must be an object");
    if (!f.boolean("enabled", true)) continue;
    sc.spec = s;
    cfg.scenarios.push_back(std::move(sc));
  }
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot open config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::config, path + ": " + e.what());
  }
  return parse_config(j, path);
}

// ---------------------------------------------------------------------------
// Running one scenario
// ---------------------------------------------------------------------------

struct Expectation {
  std::string paper;
  double value = 0.0;
  bool is_bool = false;
  double tolerance = 0.0;
};

inline std::map<std::string, Expectation> expectations_of(const Fields& f, double dflt_tol) {
  std::map<std::string, Expectation> out;
  if (!f.has("expect")) return out;
  for (const auto& [name, v] : f.raw("expect").items()) {
    Expectation e;
    e.tolerance = dflt_tol;
    const Json* val = &v;
    if (v.is_object()) {
      const Fields ef(v, f.where() + ": expect '" + name + "'");
      ef.allow({"value", "tolerance"});
      if (!ef.has("value")) fail(ErrorKind::config, ef.where() + ": missing 'value'");
      if (ef.has("tolerance")) e.tolerance = ef.num("tolerance");
      val = &ef.raw("value");
    }
    if (val->is_boolean()) {
      e.is_bool = true;
      e.value = val->get<bool>() ? 1.0 : 0.0;
      e.paper = val->get<bool>() ? "true" : "false";
    } else {
      e.value = f.to_num(*val, name);
      e.paper = val->is_string() ? val->get<std::string>() : fmt(e.value);
    }
    out[name] = e;
  }
  return out;
}

inline void dispatch(const std::string& op, OpContext& cx) {
  if (op == "curvature") op_curvature(cx);
  else if (op == "focal") op_focal(cx);
  else if (op == "index") op_index(cx);
  else if (op == "compare") op_compare(cx);
  else if (op == "frankel") op_frankel(cx);
  else op_lift(cx);
}

inline Row compare_row(const ScenarioResult& res, const Quantity& q, const Expectation& e) {
  Row r{res.id, res.op, q.name, e.paper, q.value};
  if (e.is_bool || q.is_bool || q.is_check) {
    if (q.is_check) r.margin = q.margin;
    r.status = (e.value != 0.0) == (q.value != 0.0) ? "pass" : "fail";
    if (q.is_check && !q.applicable && e.value != 0.0) r.status = "inapplicable";
    return r;
  }
  r.tolerance = e.tolerance;
  if (std::isinf(e.value) || std::isinf(q.value)) {
    r.status = e.value == q.value ? "pass" : "fail";
    return r;
  }
  r.margin = q.value - e.value;
  r.status = std::abs(r.margin) <= e.tolerance ? "pass" : "fail";
  return r;
}

inline ScenarioResult run_scenario(const Scenario& sc, const RunSettings& rs) {
  ScenarioResult res;
  res.id = sc.id;
  res.op = sc.op;
  Emitter em;
  try {
    const Fields f(sc.spec, "scenario '" + sc.id + "'");
    const auto expect = expectations_of(f, sc.tolerance > 0.0 ? sc.tolerance : rs.tol);
    OpContext cx{f, sc.id, scenario_seed(rs.seed, sc.id), rs, em};
    dispatch(sc.op, cx);
    std::set<std::string> used;
    for (const Quantity& q : em.quantities()) {
      const auto it = expect.find(q.name);
      if (it != expect.end()) {
        used.insert(q.name);
        res.rows.push_back(compare_row(res, q, it->second));
        continue;
      }
      Row r{res.id, res.op, q.name, "", q.value};
      if (q.is_check) {
        r.margin = q.margin;
        r.status = !q.applicable ? "inapplicable" : q.ok ? "pass" : "fail";
      } else {
        r.status = "info";
      }
      res.rows.push_back(r);
    }
    for (const auto& [name, e] : expect)
      if (!used.count(name)) {
        Row r{res.id, res.op, name, e.paper, std::numeric_limits<double>::quiet_NaN()};
        r.tolerance = e.tolerance;
        r.status = "fail";
        res.rows.push_back(r);
        res.message += (res.message.empty() ? "" : "; ") + ("'" + name + "' was not computed");
      }
    res.status = "pass";
    for (const Row& r : res.rows)
      if (r.status == "fail") res.status = "fail";
  } catch (const Error& e) {
    res.status = "error";
    res.error_code = exit_code_for(e.kind());
    res.message = e.what();
    res.rows.clear();
  } catch (const std::exception& e) {
    res.status = "error";
    res.error_code = kBadParameter;
    res.message = e.what();
    res.rows.clear();
  }
  res.details = std::move(em.details);
  res.trace = std::move(em.traces());
  return res;
}

inline std::vector<ScenarioResult> run_all(const std::vector<Scenario>& scenarios, const RunSettings& rs) {
  std::vector<ScenarioResult> out(scenarios.size());
  parallel_for(scenarios.size(), rs.jobs, [&](std::size_t i) { out[i] = run_scenario(scenarios[i], rs); });
  return out;
}

/// 0 when every check passes; otherwise the code of the first error, or 1.
inline int exit_status(const std::vector<ScenarioResult>& results) {
  for (const auto& r : results)
    if (r.status == "error") return r.error_code;
  for (const auto& r : results)
    if (r.status == "fail") return kCheckFailed;
  return kOk;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

inline std::string summary_csv(const std::vector<ScenarioResult>& results) {
  std::ostringstream os;
  os << "scenario,op,quantity,paper,computed,margin,tolerance,status\n";
  for (const auto& res : results) {
    if (res.status == "error") {
      os << csv_field(res.id) << ',' << res.op << ",error,,,,," << "error\n";
      continue;
    }
    for (const Row& r : res.rows)
      os << csv_field(r.scenario) << ',' << r.op << ',' << csv_field(r.quantity) << ',' << csv_field(r.paper) << ','
         << fmt(r.computed) << ',' << fmt(r.margin) << ',' << fmt(r.tolerance) << ',' << r.status << '\n';
  }
  return os.str();
}

inline Json report_json(const std::vector<ScenarioResult>& results, const RunSettings& rs) {
  Json j;
  j["schema_version"] = 1;
  j["seed"] = rs.seed;
  j["tol"] = num_json(rs.tol);
  std::map<std::string, int> totals;
  Json arr = Json::array();
  for (const auto& res : results) {
    ++totals[res.status];
    Json s;
    s["id"] = res.id;
    s["op"] = res.op;
    s["status"] = res.status;
    if (!res.message.empty()) s["message"] = res.message;
    if (res.status == "error") s["exit_code"] = res.error_code;
    Json rows = Json::array();
    for (const Row& r : res.rows) {
      Json row;
      row["quantity"] = r.quantity;
      if (!r.paper.empty()) row["paper"] = r.paper;
      row["computed"] = num_json(r.computed);
      row["margin"] = num_json(r.margin);
      row["tolerance"] = num_json(r.tolerance);
      row["status"] = r.status;
      rows.push_back(row);
    }
    s["rows"] = rows;
    s["details"] = res.details;
    arr.push_back(s);
  }
  Json t = Json::object();
  for (const char* k : {"pass", "fail", "error"}) t[k] = totals[k];
  j["totals"] = t;
  j["scenarios"] = arr;
  return j;
}

inline std::string trace_csv(const std::vector<ScenarioResult>& results) {
  std::ostringstream os;
  os << "scenario,t,lhs,rhs,margin,dim_h\n";
  for (const auto& res : results)
    for (const auto& s : res.trace)
      os << csv_field(s.scenario) << ',' << fmt(s.t) << ',' << fmt(s.lhs) << ',' << fmt(s.rhs) << ','
         << fmt(s.margin) << ',' << s.dim_h << '\n';
  return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorKind::config, "cannot write '" + p.string() + "'");
  out << text;
}

inline void write_reports(const std::filesystem::path& dir, const std::vector<ScenarioResult>& results,
                          const RunSettings& rs) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::config, "cannot create output directory '" + dir.string() + "': " + ec.message());
  write_file(dir / "summary.csv", summary_csv(results));
  write_file(dir / "report.json", report_json(results, rs).dump(2) + "\n");
  bool any_trace = false;
  for (const auto& r : results) any_trace = any_trace || !r.trace.empty();
  if (any_trace) write_file(dir / "trace_vs_bound.csv", trace_csv(results));
}

inline void print_results(std::ostream& os, const std::vector<ScenarioResult>& results) {
  for (const auto& res : results) {
    os << res.status << "  " << res.id << " (" << res.op << ")";
    if (!res.message.empty()) os << ": " << res.message;
    os << '\n';
    for (const Row& r : res.rows) {
      if (r.status == "info") continue;
      os << "    " << r.status << "  " << r.quantity << " = " << fmt(r.computed);
      if (!r.paper.empty()) os << "  (expected " << r.paper << ")";
      if (!std::isnan(r.margin)) os << "  margin " << fmt(r.margin);
      os << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Zoo listing
// ---------------------------------------------------------------------------

inline void print_zoo_entry(std::ostream& os, const ZooEntry& e) {
  os << e.name << "  [" << e.kind << (e.ambient.empty() ? "" : " in " + e.ambient) << ", dim " << e.dim << "]  "
     << e.description << '\n';
  for (const auto& c : e.constants) os << "    " << c.quantity << " = " << c.value << "  (" << c.source << ")\n";
}

inline int zoo_command(std::ostream& os, std::ostream& err, const std::string& name) {
  if (name.empty()) {
    for (const auto& e : zoo_entries()) print_zoo_entry(os, e);
    return kOk;
  }
  for (const auto& e : zoo_entries())
    if (e.name == name) {
      print_zoo_entry(os, e);
      return kOk;
    }
  err << "unknown zoo name '" << name << "'\n  charts: " << suggestion_list("chart")
      << "\n  patches: " << suggestion_list("patch") << '\n';
  return kUnknownName;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Runs the command line. `default_config` is the JSON used when no --config is
/// given.
inline int run_cli(int argc, char** argv, const std::string& default_config, std::ostream& os = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Curvature, focal radius and index computations on model manifolds"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir = "out", zoo_name;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> jobs;
  app.add_option("--config", config_path, "scenario file (JSON, schema_version 1)");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_option("--tol", tol, "default tolerance of expected values")->check(CLI::PositiveNumber);
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  for (const auto& op : op_names()) app.add_subcommand(op, "run the " + op + " scenarios");
  app.add_subcommand("run", "run every scenario");
  auto* zoo = app.add_subcommand("zoo", "list the registry, or one entry");
  zoo->add_option("name", zoo_name, "registry name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, os, err);
    return code == 0 ? kOk : kUsage;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  if (sub == "zoo") return zoo_command(os, err, zoo_name);

  try {
    Config cfg = config_path.empty() ? parse_config(Json::parse(default_config, nullptr, true, true), "built-in config")
                                     : load_config(config_path);
    RunSettings rs;
    if (cfg.seed) rs.seed = *cfg.seed;
    if (cfg.tol) rs.tol = *cfg.tol;
    if (cfg.jobs) rs.jobs = *cfg.jobs;
    if (seed) rs.seed = *seed;
    if (tol) rs.tol = *tol;
    if (jobs) rs.jobs = *jobs;
    std::vector<Scenario> chosen;
    for (const auto& sc : cfg.scenarios)
      if (sub == "run" || sc.op == sub) chosen.push_back(sc);
    if (chosen.empty()) {
      err << "no enabled " << (sub == "run" ? std::string("scenarios") : sub + " scenarios") << " in the config\n";
      return kConfigError;
    }
    const auto results = run_all(chosen, rs);
    write_reports(out_dir, results, rs);
    print_results(os, results);
    const int code = exit_status(results);
    for (const auto& r : results)
      if (r.status == "error") err << "error in " << r.id << ": " << r.message << '\n';
    return code;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const nlohmann::json::exception& e) {
    err << "config: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace curvlab::cli

#endif  // CURVLAB_CLI_RUN_HPP
