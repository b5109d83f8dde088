#include "mhd/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mhd/manufactured.hpp"
#include "mhd/mesh.hpp"
#include "mhd/operators.hpp"
#include "mhd/verify.hpp"

namespace mhd {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

const json& object_at(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return v;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

json params_json(const MhdParams& p) {
  return {{"Re", p.Re}, {"Rm", p.Rm}, {"s", p.s}, {"bc_family", to_string(p.bc_family)},
          {"variant", to_string(p.variant)}};
}

json diagnostics_json(const Diagnostics& d) {
  return {{"energy_residual", d.energy_residual}, {"energy_lhs", d.energy_lhs},
          {"energy_rhs", d.energy_rhs},           {"divB_max", d.divB_max},
          {"divB_scale", d.divB_scale},           {"r_norm", d.r_norm},
          {"curlE_norm", d.curlE_norm},           {"curlE_scale", d.curlE_scale},
          {"j_norm", d.j_norm},                   {"hcurlB_norm", d.hcurlB_norm},
          {"grad_u_norm", d.grad_u_norm},         {"E_norm", d.E_norm},
          {"B_norm_d", d.B_norm_d},               {"f_dual_norm", d.f_dual_norm},
          {"energy2_ratio", d.energy2_ratio},     {"energy4_ratio", d.energy4_ratio},
          {"energy5_ratio", d.energy5_ratio}};
}

json row_json(const ErrorRow& r) {
  return {{"n", r.n},
          {"h", r.h},
          {"err_u_h1", r.err_u_h1},
          {"err_u_proj_h1", r.err_u_proj_h1},
          {"err_B_l2", r.err_B_l2},
          {"err_B_hcurl_h", r.err_B_hcurl_h},
          {"err_B_l3", r.err_B_l3},
          {"err_E_l2", r.err_E_l2},
          {"err_p_l2", r.err_p_l2},
          {"measure_drift", r.measure_drift},
          {"converged", r.converged},
          {"iterations", r.iterations}};
}

json mesh_json(const RunConfig& c, const Mesh& mesh) {
  json m{{"vertices", mesh.num_vertices()}, {"cells", mesh.num_cells()}};
  if (c.mesh_builtin) m["builtin"] = *c.mesh_builtin;
  if (c.mesh_msh2) m["msh2"] = *c.mesh_msh2;
  return m;
}

std::filesystem::path output_path(const std::string& out_dir, const std::string& configured,
                                  const std::string& fallback) {
  std::filesystem::path p = configured.empty() ? std::filesystem::path(fallback) : std::filesystem::path(configured);
  if (p.is_relative()) p = std::filesystem::path(out_dir) / p;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  return p;
}

void write_json(const json& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << report.dump(2) << '\n';
}

Mesh config_mesh(const RunConfig& c) {
  if (c.mesh_builtin) return unit_cube_mesh(*c.mesh_builtin);
  return read_gmsh_msh2_file(*c.mesh_msh2);
}

/// Gauss law, multiplier, curl-free and energy checks of one iterate.
bool invariants_hold(const Diagnostics& d) {
  return d.divB_max <= 1e-10 * d.divB_scale && d.r_norm <= 1e-10 * std::max(1.0, d.B_norm_d) &&
         d.curlE_norm <= 1e-10 * d.curlE_scale && d.energy_residual <= 1e-9;
}

const std::vector<std::string>& asserted_rate_columns() {
  static const std::vector<std::string> cols{"u_h1", "B_l2", "B_hcurl_h", "B_l3"};
  return cols;
}

constexpr double kRateThreshold = 0.9;

}  // namespace

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j, {"mesh", "params", "variant", "bc_family", "picard", "case", "levels", "samples", "outputs", "quad", "seed"},
             "config");
  RunConfig c;
  try {
    if (j.contains("mesh")) {
      const json& m = object_at(j, "mesh");
      check_keys(m, {"builtin", "msh2"}, "mesh");
      if (m.contains("builtin") == m.contains("msh2")) throw ConfigError("mesh needs exactly one of 'builtin', 'msh2'");
      if (m.contains("builtin")) {
        c.mesh_builtin = m.at("builtin").get<int>();
        if (*c.mesh_builtin < 1) throw ConfigError("mesh.builtin must be >= 1");
      } else {
        c.mesh_msh2 = m.at("msh2").get<std::string>();
      }
    } else {
      c.mesh_builtin = 2;
    }
    if (j.contains("params")) {
      const json& p = object_at(j, "params");
      check_keys(p, {"Re", "Rm", "s"}, "params");
      c.params.Re = get_or(p, "Re", 1.0);
      c.params.Rm = get_or(p, "Rm", 1.0);
      c.params.s = get_or(p, "s", 1.0);
    }
    c.params.variant = parse_variant(get_or<std::string>(j, "variant", "multiplier"));
    c.params.bc_family = parse_bc_family(get_or<std::string>(j, "bc_family", "normal_B"));
    try {
      c.params.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (j.contains("picard")) {
      const json& p = object_at(j, "picard");
      check_keys(p, {"tol", "maxit"}, "picard");
      c.tol = get_or(p, "tol", c.tol);
      c.maxit = get_or(p, "maxit", c.maxit);
    }
    if (!(c.tol > 0.0 && c.tol < 1.0)) throw ConfigError("picard.tol must lie in (0, 1)");
    if (c.maxit < 1) throw ConfigError("picard.maxit must be >= 1");
    if (j.contains("case")) {
      const json& k = j.at("case");
      if (k.is_string()) {
        if (k.get<std::string>() != "zero_source") throw ConfigError("case must be 'zero_source' or {\"builtin\": lambda}");
      } else if (k.is_object()) {
        check_keys(k, {"builtin", "zero_source"}, "case");
        const bool builtin = k.contains("builtin");
        const bool zero = k.contains("zero_source") && k.at("zero_source").get<bool>();
        if (builtin == zero) throw ConfigError("case needs exactly one of 'builtin', 'zero_source'");
        if (builtin) {
          c.case_lambda = k.at("builtin").get<double>();
          if (!std::isfinite(*c.case_lambda)) throw ConfigError("case.builtin must be finite");
        }
      } else {
        throw ConfigError("case must be 'zero_source' or an object");
      }
    } else {
      c.case_lambda = 0.1;
    }
    if (j.contains("levels")) c.levels = j.at("levels").get<std::vector<int>>();
    for (int n : c.levels)
      if (n < 1) throw ConfigError("levels must be >= 1");
    c.samples = get_or(j, "samples", c.samples);
    if (c.samples < 1) throw ConfigError("samples must be >= 1");
    if (j.contains("outputs")) {
      const json& o = object_at(j, "outputs");
      check_keys(o, {"csv", "json"}, "outputs");
      c.csv_path = get_or<std::string>(o, "csv", "");
      c.json_path = get_or<std::string>(o, "json", "");
    }
    if (j.contains("quad")) {
      const json& q = object_at(j, "quad");
      check_keys(q, {"fluid", "pairing", "convection", "cross", "load", "measure"}, "quad");
      c.quad.fluid = get_or(q, "fluid", c.quad.fluid);
      c.quad.pairing = get_or(q, "pairing", c.quad.pairing);
      c.quad.convection = get_or(q, "convection", c.quad.convection);
      c.quad.cross = get_or(q, "cross", c.quad.cross);
      c.quad.load = get_or(q, "load", c.quad.load);
      c.quad.measure = get_or(q, "measure", c.quad.measure);
      for (int d : {c.quad.fluid, c.quad.pairing, c.quad.convection, c.quad.cross, c.quad.load, c.quad.measure})
        if (d < 1 || d > 8) throw ConfigError("quad degrees must lie in [1, 8]");
    }
    c.seed = get_or<std::uint64_t>(j, "seed", 42);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error in ") + path + ": " + e.what());
  }
  return parse_config(j);
}

int cmd_solve(const RunConfig& c, const std::string& out_dir, std::ostream& log) {
  const Mesh mesh = config_mesh(c);
  const auto domain = make_domain(mesh);
  const MhdSpaces spaces = MhdSpaces::build(domain, c.params.bc_family);
  SourceData sources;
  std::optional<ManufacturedCase> mc;
  if (c.case_lambda) {
    mc = builtin_case(c.params.bc_family, *c.case_lambda, c.params);
    sources = mc->sources();
  }
  const MhdDriver driver(spaces, c.params, sources, c.quad);
  const auto [state, report] = driver.picard_solve(c.tol, c.maxit);

  bool invariants = true;
  json history = json::array();
  for (const Diagnostics& d : report.history) {
    invariants = invariants && invariants_hold(d);
    history.push_back(diagnostics_json(d));
  }
  const Diagnostics final_diag = driver.diagnostics(state);
  invariants = invariants && invariants_hold(final_diag);

  json norms{{"u_h1", h1_norm(state.u, c.quad.fluid)},
             {"E_l2", l2_norm(state.E, c.quad.measure)},
             {"B_div", std::sqrt(std::pow(l2_norm(state.B, c.quad.measure), 2) + std::pow(div_l2_norm(state.B), 2))},
             {"B_d", norm_d(state.B, driver.curl())},
             {"p_l2", l2_norm(state.p, c.quad.measure)}};
  json report_json{{"params", params_json(c.params)},
                   {"mesh", mesh_json(c, mesh)},
                   {"iterations", report.iterations},
                   {"converged", report.converged},
                   {"increments", report.increments},
                   {"increments_E", report.increments_E},
                   {"linear_residuals", report.linear_residuals},
                   {"diagnostics", diagnostics_json(final_diag)},
                   {"history", history},
                   {"norms", norms}};
  if (mc) {
    ErrorRow row = error_norms(state, *mc, driver, c.quad.measure);
    row.converged = report.converged;
    row.iterations = report.iterations;
    if (c.mesh_builtin) {
      row.n = *c.mesh_builtin;
      row.h = 1.0 / row.n;
    }
    report_json["errors"] = row_json(row);
  }
  const bool pass = report.converged && invariants;
  report_json["pass"] = pass;
  const auto path = output_path(out_dir, c.json_path, "solve.json");
  write_json(report_json, path);
  log << "solve: " << report.iterations << " iterations, converged=" << report.converged
      << ", divB_max=" << final_diag.divB_max << ", energy_residual=" << final_diag.energy_residual << '\n';
  log << (pass ? "PASS" : "FAIL") << " report " << path.string() << '\n';
  return pass ? kExitPass : kExitFail;
}

int cmd_convergence(const RunConfig& c, const std::string& out_dir, std::ostream& log) {
  if (c.levels.size() < 3) throw ConfigError("convergence needs at least 3 levels");
  if (!c.case_lambda) throw ConfigError("convergence needs a builtin case");
  StudyOptions o;
  o.family = c.params.bc_family;
  o.variant = c.params.variant;
  o.params = c.params;
  o.lambda = *c.case_lambda;
  o.levels = c.levels;
  o.tol = c.tol;
  o.maxit = c.maxit;
  o.measure_degree = c.quad.measure;
  o.quad = c.quad;
  const ErrorTable table = convergence_study(o);

  bool pass = table.all_converged && table.rows.size() == c.levels.size();
  json rates = json::array();
  for (const auto& r : table.rates) {
    json entry = json::object();
    for (std::size_t k = 0; k < error_columns().size(); ++k) entry[error_columns()[k]] = r[k];
    rates.push_back(entry);
  }
  json asserted = json::object();
  for (const std::string& col : asserted_rate_columns()) {
    const double m = table.rows.size() >= 2 ? table.min_rate(col) : 0.0;
    asserted[col] = m;
    pass = pass && m >= kRateThreshold;
  }
  json rows = json::array();
  for (const ErrorRow& r : table.rows) rows.push_back(row_json(r));
  json iterations = json::array(), increments = json::array();
  for (const PicardReport& r : table.reports) {
    iterations.push_back(r.iterations);
    increments.push_back(r.increments);
  }
  json report{{"params", params_json(c.params)},
              {"mesh", {{"levels", c.levels}}},
              {"case", {{"builtin", *c.case_lambda}}},
              {"iterations", iterations},
              {"increments", increments},
              {"errors", rows},
              {"rates", rates},
              {"min_rates", asserted},
              {"rate_threshold", kRateThreshold},
              {"failure", table.failure},
              {"pass", pass}};
  const auto csv = output_path(out_dir, c.csv_path, "errors.csv");
  {
    std::ofstream out(csv);
    if (!out) throw std::runtime_error("cannot write " + csv.string());
    write_error_csv(table, out);
  }
  const auto path = output_path(out_dir, c.json_path, "convergence.json");
  write_json(report, path);
  write_error_csv(table, log);
  if (!table.failure.empty()) log << "failure: " << table.failure << '\n';
  log << (pass ? "PASS" : "FAIL") << " report " << path.string() << '\n';
  return pass ? kExitPass : kExitFail;
}

int cmd_complex_check(const RunConfig& c, const std::string& out_dir, std::ostream& log) {
  const Mesh mesh = config_mesh(c);
  const ComplexReport r = complex_check(mesh);
  auto dims = [](const ComplexDimensions& d) {
    return json{{"vertices", d.vertices},       {"edges", d.edges},           {"faces", d.faces},
                {"cells", d.cells},             {"rank_grad", d.rank_grad},   {"rank_curl", d.rank_curl},
                {"rank_div", d.rank_div},       {"kernel_grad", d.kernel_grad}, {"kernel_curl", d.kernel_curl},
                {"kernel_div", d.kernel_div},   {"exact", d.exact}};
  };
  const bool pass = r.pass();
  json report{{"mesh", mesh_json(c, mesh)},
              {"diagnostics",
               {{"div_curl_max", r.div_curl_max},
                {"curl_grad_max", r.curl_grad_max},
                {"commuting_grad", r.commuting_grad},
                {"commuting_curl", r.commuting_curl},
                {"commuting_div", r.commuting_div},
                {"commuting_smooth", r.commuting_smooth}}},
              {"dimensions", {{"no_bc", dims(r.no_bc)}, {"essential", dims(r.essential)}}},
              {"pass", pass}};
  const auto path = output_path(out_dir, c.json_path, "complex_check.json");
  write_json(report, path);
  log << "div_curl_max=" << r.div_curl_max << " curl_grad_max=" << r.curl_grad_max
      << " commuting=" << std::max({r.commuting_grad, r.commuting_curl, r.commuting_div}) << '\n';
  log << (pass ? "PASS" : "FAIL") << " report " << path.string() << '\n';
  return pass ? kExitPass : kExitFail;
}

int cmd_l3_study(const RunConfig& c, const std::string& out_dir, std::ostream& log) {
  if (c.levels.size() < 2) throw ConfigError("l3-study needs at least 2 levels");
  const L3Table t = l3_study(c.levels, c.samples, c.params.bc_family, c.seed);
  json rows = json::array();
  for (const L3Row& r : t.rows)
    rows.push_back({{"n", r.n},
                    {"h", r.h},
                    {"samples", r.samples},
                    {"max_ratio_l3", r.max_ratio_l3},
                    {"min_ratio_l3", r.min_ratio_l3},
                    {"max_ratio_poincare", r.max_ratio_poincare}});
  json report{{"params", params_json(c.params)},
              {"mesh", {{"levels", c.levels}}},
              {"errors", rows},
              {"rates", {{"growth", t.growth}, {"growth_poincare", t.growth_poincare}}},
              {"seed", c.seed},
              {"pass", t.pass}};
  const auto path = output_path(out_dir, c.json_path, "l3_study.json");
  write_json(report, path);
  for (const L3Row& r : t.rows) log << "n=" << r.n << " max_ratio_l3=" << r.max_ratio_l3 << '\n';
  log << (t.pass ? "PASS" : "FAIL") << " report " << path.string() << '\n';
  return t.pass ? kExitPass : kExitFail;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stationary MHD finite element solver"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  std::string chosen;
  for (const char* name : {"solve", "convergence", "complex-check", "l3-study"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration")->required();
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const RunConfig config = load_config(config_path);
    if (chosen == "solve") return cmd_solve(config, out_dir, out);
    if (chosen == "convergence") return cmd_convergence(config, out_dir, out);
    if (chosen == "complex-check") return cmd_complex_check(config, out_dir, out);
    return cmd_l3_study(config, out_dir, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const MeshError& e) {
    err << "mesh error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFail;
  }
}

}  // namespace mhd
