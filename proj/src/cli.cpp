#include "nhscope/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nhscope/analysis.hpp"
#include "nhscope/io.hpp"

namespace nhscope::cli {

using json = nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

const std::vector<std::string> kTopKeys = {"command", "preset", "model",  "grid",    "detector", "output",
                                           "format",  "blocks", "sizes",  "matrix",  "state",    "threads"};
const std::vector<std::string> kGridKeys = {"axis", "lo", "hi", "steps"};
const std::vector<std::string> kDetectorKeys = {"w", "kappa", "floor", "eta_kappa", "deta_kappa", "deta_floor"};
const std::vector<std::string> kModelFixedKeys = {"variant", "size", "cells", "sites", "boundary"};

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (const auto& it : items) s += (s.empty() ? "" : ", ") + it;
  return s;
}

void check_keys(const json& obj, const std::vector<std::string>& valid, const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (std::find(valid.begin(), valid.end(), key) == valid.end())
      config_error("unknown key '" + where + key + "'; valid keys: " + join(valid));
}

// Named runs. fig1b and fig3 lower the detector factor to 5: at the default of 10 neither the small
// edge-state eta jump at L=150 nor the quasicrystal derivative kink gets flagged.
const std::map<std::string, std::string, std::less<>>& preset_table() {
  static const std::map<std::string, std::string, std::less<>> table = {
      {"fig1b", R"({"command":"sweep",
                    "model":{"variant":"nonreciprocal_ssh","t1":0.5,"t2":1,"g":0.1,"cells":150,"boundary":"open"},
                    "grid":{"axis":"t1","lo":0.05,"hi":1.5,"steps":300},
                    "detector":{"eta_kappa":5,"floor":1e-5}})"},
      {"fig2", R"({"command":"sweep","model":{"variant":"two_level","gamma":1},
                   "grid":{"axis":"gamma","lo":0.01,"hi":3,"steps":300}})"},
      {"fig3", R"({"command":"sweep",
                   "model":{"variant":"quasicrystal","JR":1,"JL":0.5,"V":0.5,"alpha_num":239,"alpha_den":169,
                            "sites":169,"boundary":"periodic"},
                   "grid":{"axis":"V","lo":0.2,"hi":1.8,"steps":161},
                   "detector":{"deta_kappa":5}})"},
      {"fig4", R"({"command":"bloch","model":{"variant":"pt_ssh_bloch","u":0.5,"v":0.8,"w":0.7,"k":0},
                   "grid":{"axis":"k","lo":-3.141592653589793,"hi":3.141592653589793,"steps":400}})"},
      {"fig5", R"({"command":"sweep","model":{"variant":"sturm_liouville","t0":1,"g":1.5,"cells":50,"boundary":"open"},
                   "grid":{"axis":"g","lo":0.5,"hi":2,"steps":151}})"},
      {"fig-sm-finite-size", R"({"command":"finite-size",
                   "model":{"variant":"nonreciprocal_ssh","t1":0.5,"t2":1,"g":0.1,"boundary":"open"},
                   "grid":{"axis":"t1","lo":0.2,"hi":0.9,"steps":71},
                   "sizes":[50,100,150,200,300,400],
                   "detector":{"eta_kappa":5,"floor":0}})"},
  };
  return table;
}

json preset_json(std::string_view name) {
  const auto& table = preset_table();
  const auto it = table.find(name);
  if (it == table.end()) config_error("preset: unknown preset '" + std::string(name) + "'; valid: " + join(presets()));
  return json::parse(it->second);
}

/// Overlays `patch` onto `base`. Objects merge key by key, except that a model whose variant changes
/// replaces the lower layer's model entirely.
void merge_into(json& base, const json& patch) {
  for (const auto& [key, value] : patch.items()) {
    if (key == "model" && value.is_object() && base.contains("model") && base["model"].is_object()) {
      auto& m = base["model"];
      if (value.contains("variant") && m.contains("variant") && value["variant"] != m["variant"]) {
        const auto a = parse_variant(value["variant"].is_string() ? value["variant"].get<std::string>() : "");
        const auto b = parse_variant(m["variant"].is_string() ? m["variant"].get<std::string>() : "");
        if (a != b) {
          m = value;
          continue;
        }
      }
      m.update(value);
    } else if (value.is_object() && base.contains(key) && base[key].is_object()) {
      base[key].update(value);
    } else {
      base[key] = value;
    }
  }
}

/// Expands "preset" (if any) underneath the document.
json resolve_preset(const json& doc) {
  if (!doc.is_object()) config_error("config must be a JSON object");
  if (!doc.contains("preset")) return doc;
  if (!doc["preset"].is_string()) config_error("field 'preset' must be a string");
  json base = preset_json(doc["preset"].get<std::string>());
  json rest = doc;
  rest.erase("preset");
  merge_into(base, rest);
  return base;
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) config_error("field '" + field + "' must be a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) config_error("field '" + field + "' must be finite");
  return x;
}

int get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer() && !(j.is_number() && j.get<double>() == std::round(j.get<double>())))
    config_error("field '" + field + "' must be an integer");
  const double x = j.get<double>();
  if (std::abs(x) > 1e9) config_error("field '" + field + "' is out of range");
  return static_cast<int>(x);
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) config_error("field '" + field + "' must be a string");
  return j.get<std::string>();
}

std::vector<int> get_int_list(const json& j, const std::string& field) {
  if (!j.is_array()) config_error("field '" + field + "' must be a list of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_int(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

ModelSpec parse_model(const json& m) {
  if (!m.is_object()) config_error("field 'model' must be an object");
  if (!m.contains("variant")) config_error("field 'model.variant' is required");
  const auto name = get_string(m["variant"], "model.variant");
  const auto variant = parse_variant(name);
  if (!variant) config_error("field 'model.variant': unknown model '" + name + "'");

  std::vector<std::string> valid = kModelFixedKeys;
  const auto& names = variant == ModelVariant::External ? std::vector<std::string>{} : parameter_names(*variant);
  valid.insert(valid.end(), names.begin(), names.end());
  check_keys(m, valid, "model.");

  ModelSpec spec = *variant == ModelVariant::External ? ModelSpec{ModelVariant::External, {}, {}, {}}
                                                      : default_spec(*variant);
  for (const auto& p : names)
    if (m.contains(p)) spec.params[p] = get_number(m[p], "model." + p);
  int size_keys = 0;
  for (const char* key : {"size", "cells", "sites"}) {
    if (!m.contains(key)) continue;
    ++size_keys;
    const int n = get_int(m[key], std::string("model.") + key);
    if (n < 2) config_error(std::string("field 'model.") + key + "' must be >= 2");
    spec.size = n;
  }
  if (size_keys > 1) config_error("field 'model.size': give only one of size, cells, sites");
  if (m.contains("boundary")) {
    const auto b = parse_boundary(get_string(m["boundary"], "model.boundary"));
    if (!b) config_error("field 'model.boundary' must be open or periodic");
    spec.boundary = *b;
  }
  return spec;
}

const std::set<std::string>& grid_commands() {
  static const std::set<std::string> s = {"sweep", "bloch", "finite-size", "verify-sl"};
  return s;
}

RunConfig from_json(const json& raw) {
  const json doc = resolve_preset(raw);
  check_keys(doc, kTopKeys, "");

  RunConfig c;
  if (!doc.contains("command")) config_error("field 'command' is required; valid: " + join(commands()));
  c.command = get_string(doc["command"], "command");
  if (std::find(commands().begin(), commands().end(), c.command) == commands().end())
    config_error("field 'command': unknown command '" + c.command + "'; valid: " + join(commands()));

  if (doc.contains("model")) c.model = parse_model(doc["model"]);

  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    if (!g.is_object()) config_error("field 'grid' must be an object");
    check_keys(g, kGridKeys, "grid.");
    GridConfig grid;
    if (g.contains("axis")) grid.axis = get_string(g["axis"], "grid.axis");
    for (const char* key : {"lo", "hi", "steps"})
      if (!g.contains(key)) config_error(std::string("field 'grid.") + key + "' is required");
    grid.lo = get_number(g["lo"], "grid.lo");
    grid.hi = get_number(g["hi"], "grid.hi");
    grid.steps = get_int(g["steps"], "grid.steps");
    if (grid.steps < 3) config_error("field 'grid.steps' must be >= 3, got " + std::to_string(grid.steps));
    if (!(grid.lo < grid.hi)) config_error("field 'grid.lo' must be smaller than 'grid.hi'");
    c.grid = grid;
  }

  if (doc.contains("detector")) {
    const auto& d = doc["detector"];
    if (!d.is_object()) config_error("field 'detector' must be an object");
    check_keys(d, kDetectorKeys, "detector.");
    if (d.contains("w")) c.detector.w = get_int(d["w"], "detector.w");
    if (d.contains("kappa")) c.detector.eta_kappa = c.detector.deta_kappa = get_number(d["kappa"], "detector.kappa");
    if (d.contains("eta_kappa")) c.detector.eta_kappa = get_number(d["eta_kappa"], "detector.eta_kappa");
    if (d.contains("deta_kappa")) c.detector.deta_kappa = get_number(d["deta_kappa"], "detector.deta_kappa");
    if (d.contains("floor")) c.detector.eta_floor = get_number(d["floor"], "detector.floor");
    if (d.contains("deta_floor")) c.detector.deta_floor = get_number(d["deta_floor"], "detector.deta_floor");
    if (c.detector.w < 1) config_error("field 'detector.w' must be >= 1");
    if (c.detector.eta_kappa <= 0 || c.detector.deta_kappa <= 0) config_error("field 'detector.kappa' must be > 0");
    if (c.detector.eta_floor < 0 || c.detector.deta_floor.value_or(0.0) < 0)
      config_error("field 'detector.floor' must be >= 0");
  }

  if (doc.contains("output")) c.output = get_string(doc["output"], "output");
  if (doc.contains("format")) c.format = get_string(doc["format"], "format");
  if (c.format != "csv" && c.format != "json") config_error("field 'format' must be csv or json");
  if (doc.contains("blocks")) c.blocks = get_int_list(doc["blocks"], "blocks");
  if (doc.contains("sizes")) c.sizes = get_int_list(doc["sizes"], "sizes");
  if (doc.contains("matrix")) c.matrix = get_string(doc["matrix"], "matrix");
  if (doc.contains("state")) c.state = get_int(doc["state"], "state");
  if (doc.contains("threads")) c.threads = get_int(doc["threads"], "threads");
  if (c.threads < 0) config_error("field 'threads' must be >= 0");

  // Command-specific defaults and consistency.
  auto require_variant = [&](ModelVariant v) {
    if (!c.model) c.model = default_spec(v);
    if (c.model->variant != v)
      config_error("field 'model.variant' must be " + std::string(to_string(v)) + " for command " + c.command);
  };
  if (c.command == "edge" || c.command == "finite-size") require_variant(ModelVariant::NonReciprocalSSH);
  if (c.command == "bloch") require_variant(ModelVariant::PTSSHBloch);
  if (c.command == "verify-sl") require_variant(ModelVariant::SturmLiouvilleChain);
  if (c.command == "bloch" && !c.grid) c.grid = GridConfig{"k", -std::numbers::pi, std::numbers::pi, 400};
  if (c.command == "verify-sl" && !c.grid) c.grid = GridConfig{"g", 0.5, 2.0, 20};
  if (c.command == "finite-size" && !c.grid) c.grid = GridConfig{"t1", 0.2, 0.9, 71};
  if (c.command == "finite-size" && c.sizes.empty()) c.sizes = {50, 100, 150, 200, 300, 400};

  if (c.grid) {
    if (!grid_commands().count(c.command) && c.command != "edge")
      config_error("field 'grid' is not used by command " + c.command);
    const std::string fixed = c.command == "bloch"         ? "k"
                              : c.command == "verify-sl"   ? "g"
                              : c.command == "finite-size" ? "t1"
                              : c.command == "edge"        ? "t1"
                                                           : "";
    if (c.grid->axis.empty()) c.grid->axis = fixed;
    if (!fixed.empty() && c.grid->axis != fixed)
      config_error("field 'grid.axis' must be " + fixed + " for command " + c.command);
  }

  if (c.command == "sweep") {
    if (!c.model || c.model->variant == ModelVariant::External)
      config_error("field 'model' is required for command sweep");
    if (!c.grid) config_error("field 'grid' is required for command sweep");
    if (c.grid->axis.empty()) config_error("field 'grid.axis' is required");
    const auto& names = parameter_names(c.model->variant);
    if (std::find(names.begin(), names.end(), c.grid->axis) == names.end())
      config_error("field 'grid.axis': model " + std::string(to_string(c.model->variant)) + " has no parameter '" +
                   c.grid->axis + "'; valid: " + join(names));
  }
  if ((c.command == "spectrum" || c.command == "check") && !c.model && !c.matrix)
    config_error("field 'model' or 'matrix' is required for command " + c.command);
  if (c.matrix && c.command != "spectrum" && c.command != "check")
    config_error("field 'matrix' is only used by commands spectrum and check");
  if (c.command == "bound") {
    if (c.blocks.empty()) config_error("field 'blocks' is required for command bound");
    for (int b : c.blocks)
      if (b < 1) config_error("field 'blocks' entries must be >= 1");
  }
  if (c.command == "finite-size") {
    for (int s : c.sizes)
      if (s < 2) config_error("field 'sizes' entries must be >= 2");
    for (std::size_t i = 1; i < c.sizes.size(); ++i)
      if (c.sizes[i] <= c.sizes[i - 1]) config_error("field 'sizes' must be strictly increasing");
  }
  if (c.grid && (c.command == "sweep" || c.command == "bloch") && c.grid->steps < 2 * c.detector.w + 2)
    config_error("field 'grid.steps' must be >= " + std::to_string(2 * c.detector.w + 2) +
                 " for detector window " + std::to_string(c.detector.w));
  if (c.state && c.command != "spectrum") config_error("field 'state' is only used by command spectrum");
  const bool json_ok = c.command == "sweep" || c.command == "bloch" || c.command == "check";
  if (c.format == "json" && !json_ok) config_error("field 'format': json is not available for command " + c.command);
  return c;
}

// ---------------------------------------------------------------------------
// Command implementations. Each writes its artifact to `art` and returns the summary line.
// ---------------------------------------------------------------------------

std::string real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string locations_text(const DiscontinuityReport& r) {
  std::string s = "[";
  for (std::size_t i = 0; i < r.locations.size(); ++i)
    s += (i ? " " : "") + real(r.locations[i].param_left) + ".." + real(r.locations[i].param_right);
  return s + "]";
}

std::string cmd_sweep(const RunConfig& c, std::ostream& art) {
  SweepResult sw = sweep(*c.model, c.grid->axis, c.grid->lo, c.grid->hi, c.grid->steps, {1e-10, c.threads});
  const auto reports = annotate(sw, c.detector);
  if (c.format == "json")
    art << discontinuity_json(reports) << '\n';
  else
    write_sweep_csv(art, sw);
  const auto& s = sw.samples;
  const std::size_t imax = argmax_eta(sw), imin = argmin_eta(sw);
  return "sweep " + std::string(to_string(c.model->variant)) + " " + c.grid->axis + " points=" +
         std::to_string(s.size()) + " eta_max=" + real(s[imax].eta) + "@" + real(s[imax].param) +
         " eta_min=" + real(s[imin].eta) + "@" + real(s[imin].param) + " eta_jumps=" + locations_text(reports.eta) +
         " deta_jumps=" + locations_text(reports.deta);
}

std::string cmd_bloch(const RunConfig& c, std::ostream& art) {
  const ModelSpec& m = *c.model;
  SweepResult sw = sweep(m, "k", c.grid->lo, c.grid->hi, c.grid->steps, {1e-10, c.threads});
  const auto reports = annotate(sw, c.detector);
  const auto eps = pt_ep_momenta(m.param("u"), m.param("v"), m.param("w"));
  if (c.format == "json")
    art << ep_report_json(eps) << '\n';
  else
    write_sweep_csv(art, sw);
  std::size_t real_points = 0;
  for (const auto& s : sw.samples) real_points += s.spectrum.is_real;
  return "bloch points=" + std::to_string(sw.samples.size()) + " k_ep=" +
         (eps ? "+-" + real(eps->first) : std::string("none")) + " deta_jumps=" + locations_text(reports.deta) +
         " real_points=" + std::to_string(real_points);
}

Hamiltonian config_hamiltonian(const RunConfig& c) {
  if (c.matrix) return load_hamiltonian(*c.matrix);
  return build(*c.model);
}

std::string cmd_spectrum(const RunConfig& c, std::ostream& art) {
  const auto h = config_hamiltonian(c);
  const auto es = eig_right(h);
  if (c.state) {
    if (*c.state < 0 || *c.state >= es.dim())
      config_error("field 'state' must lie in [0, " + std::to_string(es.dim() - 1) + "]");
    write_eigenvector_csv(art, es.right.col(*c.state));
  } else {
    write_spectrum_csv(art, es);
  }
  const auto sum = spectrum_summary(es);
  std::string line = "spectrum dim=" + std::to_string(es.dim());
  if (es.dim() >= 2) line += " eta=" + real(eta(es));
  return line + " max_imag=" + real(sum.max_imag) + " is_real=" + (sum.is_real ? "true" : "false") +
         " min_gap=" + real(sum.min_gap) + " residual=" + real(es.residual_right);
}

std::string cmd_edge(const RunConfig& c, std::ostream& art) {
  const ModelSpec& m = *c.model;
  const int cells = m.size.value_or(150);
  if (c.grid) {
    const auto grid = uniform_grid(c.grid->lo, c.grid->hi, c.grid->steps);
    const auto scan = edge_transition_scan(m.param("t2"), m.param("g"), cells, grid, {std::nullopt, c.threads});
    write_edge_scan_csv(art, scan);
    const auto at = overlap_transition(scan);
    return "edge scan cells=" + std::to_string(cells) + " points=" + std::to_string(scan.size()) + " transition=" +
           (at && *at > 0 ? real(scan[*at - 1].t1) + ".." + real(scan[*at].t1) : std::string("none"));
  }
  ModelSpec open = m;
  open.boundary = Boundary::Open;
  open.size = cells;
  const auto es = eig_right(build(open));
  const auto pair = extract_zero_modes(es);
  write_edge_csv(art, pair);
  return "edge t1=" + real(m.param("t1")) + " overlap=" + real(pair.overlap) + " |E|=" +
         real(std::abs(pair.energies[0])) + "," + real(std::abs(pair.energies[1])) + " left_weight=" +
         real(pair.left_weight[0]) + "," + real(pair.left_weight[1]) + " right_weight=" + real(pair.right_weight[0]) +
         "," + real(pair.right_weight[1]);
}

std::string cmd_finite_size(const RunConfig& c, std::ostream& art) {
  const ModelSpec& m = *c.model;
  const auto grid = uniform_grid(c.grid->lo, c.grid->hi, c.grid->steps);
  FiniteSizeOptions opt;
  opt.detector = c.detector.eta_detector();
  opt.threads = c.threads;
  const auto points = finite_size_scan(m.param("t2"), m.param("g"), c.sizes, grid, opt);
  write_finite_size_csv(art, points);
  std::string line = "finite-size";
  for (const auto& p : points)
    line += " L=" + std::to_string(p.L) + ":" + real(p.t1_star) + "(" + std::string(to_string(p.source)) + ")";
  return line;
}

std::string cmd_bound(const RunConfig& c, std::ostream& art) {
  const double v = eta_bound(JordanProfile{c.blocks});
  std::string text = format_real(v);
  if (text.find_first_of(".en") == std::string::npos) text += ".0";
  art << text << '\n';
  std::string blocks;
  for (int b : c.blocks) blocks += (blocks.empty() ? "" : ",") + std::to_string(b);
  return "bound blocks=[" + blocks + "] eta_c=" + text;
}

std::string cmd_verify_sl(const RunConfig& c, std::ostream& art) {
  const ModelSpec& m = *c.model;
  const auto grid = uniform_grid(c.grid->lo, c.grid->hi, c.grid->steps);
  art << "g,spectrum_real,max_imag,completeness_residual,raw_completeness_residual,eigen_residual\n";
  double worst = 0.0;
  bool all_real = true;
  for (double g : grid) {
    const auto h = build(with_param(m, "g", g));
    SturmLiouvilleReport r;
    try {
      r = sturm_liouville_verify(h, m.param("t0"), g);
    } catch (const Error& e) {
      throw Error(e.kind(), "at g=" + format_real(g) + ": " + e.what());
    }
    art << format_real(g) << ',' << (r.spectrum_real ? "true" : "false") << ',' << format_real(r.max_imag) << ','
        << format_real(r.completeness_residual) << ',' << format_real(r.raw_completeness_residual) << ','
        << format_real(r.eigen_residual) << '\n';
    worst = std::max(worst, r.completeness_residual);
    all_real = all_real && r.spectrum_real;
  }
  return "verify-sl points=" + std::to_string(grid.size()) + " spectrum_real=" + (all_real ? "true" : "false") +
         " max_completeness_residual=" + real(worst);
}

std::string cmd_check(const RunConfig& c, std::ostream& art) {
  const auto h = config_hamiltonian(c);
  const auto es = eig_right(h);
  const auto sum = spectrum_summary(es);
  std::vector<std::pair<std::string, json>> rows;
  rows.emplace_back("dim", es.dim());
  if (es.dim() >= 2) {
    rows.emplace_back("eta", eta(es));
    rows.emplace_back("eta_pairwise", eta_pairwise(es.right));
  }
  rows.emplace_back("residual_right", es.residual_right);
  rows.emplace_back("max_imag", sum.max_imag);
  rows.emplace_back("is_real", sum.is_real);
  rows.emplace_back("min_gap", sum.min_gap);
  try {
    rows.emplace_back("biorth_residual", *eig_biorthogonal(h).biorth_residual);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::PairingFailure) throw;
    rows.emplace_back("biorth_residual", "pairing_failure");
  }
  if (h.spec && h.spec->variant == ModelVariant::NonReciprocalSSH && h.spec->boundary != Boundary::Periodic &&
      std::abs(h.spec->param("g")) < h.spec->param("t2")) {
    const auto& s = *h.spec;
    rows.emplace_back("similarity_residual", similarity_check(s.param("t1"), s.param("t2"), s.param("g"), *s.size));
    rows.emplace_back("bulk_biorth_residual",
                      bulk_biorthogonality_check(s.param("t1"), s.param("t2"), s.param("g"), *s.size).biorth_residual);
  }
  if (h.spec && h.spec->variant == ModelVariant::SturmLiouvilleChain) {
    const auto r = sturm_liouville_verify(h, h.spec->param("t0"), h.spec->param("g"));
    rows.emplace_back("sl_completeness_residual", r.completeness_residual);
  }

  if (c.format == "json") {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : rows) j[k] = v;
    art << j.dump(2) << '\n';
  } else {
    art << "quantity,value\n";
    for (const auto& [k, v] : rows)
      art << k << ',' << (v.is_number_float() ? format_real(v.get<double>()) : v.is_string() ? v.get<std::string>() : v.dump())
          << '\n';
  }
  std::string line = "check";
  for (const auto& [k, v] : rows)
    line += " " + k + "=" + (v.is_number_float() ? real(v.get<double>()) : v.is_string() ? v.get<std::string>() : v.dump());
  return line;
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::InvalidSpec:
    case ErrorKind::InvalidInput:
    case ErrorKind::Ingestion:
    case ErrorKind::InvalidRegime:
      return kConfigError;
    default:
      return kNumericalError;
  }
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"sweep", "spectrum", "edge",      "finite-size",
                                             "bloch", "bound",    "verify-sl", "check"};
  return c;
}

const std::vector<std::string>& presets() {
  static const std::vector<std::string> p = [] {
    std::vector<std::string> names;
    for (const auto& [k, _] : preset_table()) names.push_back(k);
    return names;
  }();
  return p;
}

RunConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  std::ofstream file;
  if (c.output) {
    file.open(*c.output, std::ios::binary);
    if (!file) config_error("output: cannot write " + *c.output);
  }
  std::ostream& art = c.output ? static_cast<std::ostream&>(file) : out;

  std::string summary;
  if (c.command == "sweep") summary = cmd_sweep(c, art);
  else if (c.command == "bloch") summary = cmd_bloch(c, art);
  else if (c.command == "spectrum") summary = cmd_spectrum(c, art);
  else if (c.command == "edge") summary = cmd_edge(c, art);
  else if (c.command == "finite-size") summary = cmd_finite_size(c, art);
  else if (c.command == "bound") summary = cmd_bound(c, art);
  else if (c.command == "verify-sl") summary = cmd_verify_sl(c, art);
  else if (c.command == "check") summary = cmd_check(c, art);
  else config_error("unknown command " + c.command);

  if (c.output) {
    file.close();
    if (!file) throw Error(ErrorKind::Config, "output: failed writing " + *c.output);
  }
  (c.output ? out : err) << summary << '\n';
  return kOk;
}

namespace {

struct FlagSet {
  std::string command, preset, config, model, boundary, axis, output, format, matrix, blocks, sizes;
  int size = 0, cells = 0, sites = 0, steps = 0, window = 0, state = 0, threads = 0;
  double lo = 0, hi = 0, kappa = 0, eta_kappa = 0, deta_kappa = 0, floor = 0, deta_floor = 0;
  std::map<std::string, double> params;
};

std::vector<int> parse_int_list(const std::string& text, const std::string& field) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      config_error("--" + field + ": '" + item + "' is not an integer");
    }
  }
  return out;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized Petermann factor of non-Hermitian lattice models"};
  app.name("nhscope");
  FlagSet f;

  app.add_option("command", f.command, "one of: " + join(commands()));
  auto* o_preset = app.add_option("--preset", f.preset, "named preset: " + join(presets()));
  auto* o_config = app.add_option("--config", f.config, "JSON config file; flags override its values");
  auto* o_model = app.add_option("--model", f.model, "ssh, two_level, quasicrystal, pt_ssh_bloch, sturm_liouville");
  auto* o_size = app.add_option("--size", f.size, "unit cells or sites");
  auto* o_cells = app.add_option("--cells", f.cells, "unit cells (Models I and V)");
  auto* o_sites = app.add_option("--sites", f.sites, "sites (Model III)");
  auto* o_boundary = app.add_option("--boundary", f.boundary, "open or periodic");

  // One flag per model parameter across all variants.
  const std::vector<std::pair<std::string, std::string>> param_flags = {
      {"t1", "--t1"},       {"t2", "--t2"}, {"g", "--g"},   {"gamma", "--gamma"}, {"JR", "--JR"},
      {"JL", "--JL"},       {"V", "--V"},   {"u", "--u"},   {"v", "--v"},         {"w", "--w"},
      {"k", "--k"},         {"t0", "--t0"}, {"alpha_num", "--alpha-num"},       {"alpha_den", "--alpha-den"}};
  std::map<std::string, double> param_values;
  std::map<std::string, CLI::Option*> param_opts;
  for (const auto& [name, flag] : param_flags) {
    param_values[name] = 0.0;
    param_opts[name] = app.add_option(flag, param_values[name], "model parameter " + name);
  }

  auto* o_axis = app.add_option("--axis", f.axis, "swept parameter");
  auto* o_lo = app.add_option("--lo", f.lo, "grid start");
  auto* o_hi = app.add_option("--hi", f.hi, "grid end");
  auto* o_steps = app.add_option("--steps", f.steps, "grid points, endpoints included");
  auto* o_window = app.add_option("--window", f.window, "detector window w");
  auto* o_kappa = app.add_option("--kappa", f.kappa, "detector factor for both eta and deta");
  auto* o_eta_kappa = app.add_option("--eta-kappa", f.eta_kappa, "detector factor for eta");
  auto* o_deta_kappa = app.add_option("--deta-kappa", f.deta_kappa, "detector factor for deta");
  auto* o_floor = app.add_option("--floor", f.floor, "absolute eta jump floor");
  auto* o_deta_floor = app.add_option("--deta-floor", f.deta_floor, "absolute deta jump floor");
  auto* o_output = app.add_option("-o,--output", f.output, "artifact file (default: standard output)");
  auto* o_format = app.add_option("--format", f.format, "csv or json");
  auto* o_blocks = app.add_option("--blocks", f.blocks, "Jordan block sizes, comma separated");
  auto* o_sizes = app.add_option("--sizes", f.sizes, "chain lengths for finite-size, comma separated");
  auto* o_matrix = app.add_option("--matrix", f.matrix, "matrix file for spectrum or check");
  auto* o_state = app.add_option("--state", f.state, "export this eigenvector instead of the spectrum");
  auto* o_threads = app.add_option("--threads", f.threads, "worker threads (default: NHSCOPE_THREADS or all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  try {
    json doc = json::object();
    if (*o_preset) doc = preset_json(f.preset);
    if (*o_config) {
      std::ifstream in(f.config);
      if (!in) config_error("--config: cannot open " + f.config);
      json file_doc;
      try {
        file_doc = json::parse(in);
      } catch (const json::parse_error& e) {
        config_error("--config: " + f.config + " is not valid JSON: " + e.what());
      }
      merge_into(doc, resolve_preset(file_doc));
    }

    json flags = json::object();
    if (!f.command.empty()) flags["command"] = f.command;
    json model = json::object();
    if (*o_model) model["variant"] = f.model;
    if (*o_size) model["size"] = f.size;
    if (*o_cells) model["cells"] = f.cells;
    if (*o_sites) model["sites"] = f.sites;
    if (*o_boundary) model["boundary"] = f.boundary;
    for (const auto& [name, opt] : param_opts)
      if (*opt) model[name] = param_values[name];
    if (!model.empty()) {
      // Size aliases from a lower layer would clash with a flag given under another name.
      if (doc.contains("model") && (model.contains("size") || model.contains("cells") || model.contains("sites")))
        for (const char* key : {"size", "cells", "sites"}) doc["model"].erase(key);
      // Parameter flags without --model refine whatever model the lower layers chose.
      if (!model.contains("variant")) {
        if (doc.contains("model") && doc["model"].contains("variant")) {
          model["variant"] = doc["model"]["variant"];
        } else {
          const std::string cmd = flags.value("command", doc.value("command", std::string()));
          const char* implied = cmd == "edge" || cmd == "finite-size" ? "nonreciprocal_ssh"
                                : cmd == "bloch"                     ? "pt_ssh_bloch"
                                : cmd == "verify-sl"                 ? "sturm_liouville"
                                                                     : nullptr;
          if (!implied) config_error("--model is required when model parameters are given");
          model["variant"] = implied;
        }
      }
      flags["model"] = model;
    }
    json grid = json::object();
    if (*o_axis) grid["axis"] = f.axis;
    if (*o_lo) grid["lo"] = f.lo;
    if (*o_hi) grid["hi"] = f.hi;
    if (*o_steps) grid["steps"] = f.steps;
    if (!grid.empty()) {
      // A partial grid on the command line completes the per-command default.
      const std::string cmd = flags.value("command", doc.value("command", std::string()));
      if (!doc.contains("grid")) {
        if (cmd == "bloch") doc["grid"] = {{"lo", -std::numbers::pi}, {"hi", std::numbers::pi}, {"steps", 400}};
        if (cmd == "verify-sl") doc["grid"] = {{"lo", 0.5}, {"hi", 2.0}, {"steps", 20}};
        if (cmd == "finite-size") doc["grid"] = {{"lo", 0.2}, {"hi", 0.9}, {"steps", 71}};
      }
      flags["grid"] = grid;
    }
    json det = json::object();
    if (*o_window) det["w"] = f.window;
    if (*o_kappa) det["kappa"] = f.kappa;
    if (*o_eta_kappa) det["eta_kappa"] = f.eta_kappa;
    if (*o_deta_kappa) det["deta_kappa"] = f.deta_kappa;
    if (*o_floor) det["floor"] = f.floor;
    if (*o_deta_floor) det["deta_floor"] = f.deta_floor;
    if (!det.empty()) flags["detector"] = det;
    if (*o_output) flags["output"] = f.output;
    if (*o_format) flags["format"] = f.format;
    if (*o_blocks) flags["blocks"] = parse_int_list(f.blocks, "blocks");
    if (*o_sizes) flags["sizes"] = parse_int_list(f.sizes, "sizes");
    if (*o_matrix) flags["matrix"] = f.matrix;
    if (*o_state) flags["state"] = f.state;
    if (*o_threads) flags["threads"] = f.threads;

    merge_into(doc, flags);
    const RunConfig config = from_json(doc);
    return run(config, out, err);
  } catch (const Error& e) {
    err << "nhscope: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "nhscope: " << e.what() << '\n';
    return kNumericalError;
  }
}

}  // namespace nhscope::cli
