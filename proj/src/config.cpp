#include "prescurv/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "prescurv/field_io.hpp"

namespace prescurv {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw ConfigError("config: " + where + ": " + msg);
}

void check_object(const json& j, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(where, "unknown key '" + it.key() + "'");
  }
}

const json& need(const json& j, const std::string& where, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

double need_real(const json& j, const std::string& where, const char* key) {
  const json& v = need(j, where, key);
  if (!v.is_number()) fail(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

int need_int(const json& j, const std::string& where, const char* key) {
  const json& v = need(j, where, key);
  if (!v.is_number_integer())
    fail(where, std::string("'") + key + "' must be an integer");
  return v.get<int>();
}

std::string need_string(const json& j, const std::string& where,
                        const char* key) {
  const json& v = need(j, where, key);
  if (!v.is_string()) fail(where, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

double opt_real(const json& j, const std::string& where, const char* key,
                double fallback) {
  return j.contains(key) ? need_real(j, where, key) : fallback;
}

int opt_int(const json& j, const std::string& where, const char* key,
            int fallback) {
  return j.contains(key) ? need_int(j, where, key) : fallback;
}

bool opt_bool(const json& j, const std::string& where, const char* key,
              bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean())
    fail(where, std::string("'") + key + "' must be a boolean");
  return v.get<bool>();
}

std::uint64_t opt_u64(const json& j, const std::string& where, const char* key,
                      std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() ||
      (!v.is_number_unsigned() && v.get<long long>() < 0))
    fail(where, std::string("'") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string resolve_path(const std::filesystem::path& base,
                         const std::string& raw, const std::string& where) {
  if (raw.empty()) fail(where, "'path' must not be empty");
  std::filesystem::path p(raw);
  if (p.is_relative() && !base.empty()) p = base / p;
  return std::filesystem::absolute(p).lexically_normal().string();
}

DomainConfig parse_domain(const json& j) {
  DomainConfig d;
  const std::string where = "domain";
  if (!j.is_object()) fail(where, "expected an object");
  const std::string kind = need_string(j, where, "kind");
  if (kind == "annulus") {
    check_object(j, where, {"kind", "r_in", "r_out", "n_r", "n_theta"});
    d.kind = GridKind::annulus;
    d.r_in = need_real(j, where, "r_in");
    d.r_out = need_real(j, where, "r_out");
    d.n1 = need_int(j, where, "n_r");
    d.n2 = need_int(j, where, "n_theta");
  } else if (kind == "rectangle") {
    check_object(j, where, {"kind", "lx", "ly", "nx", "ny"});
    d.kind = GridKind::rectangle;
    d.lx = need_real(j, where, "lx");
    d.ly = need_real(j, where, "ly");
    d.n1 = need_int(j, where, "nx");
    d.n2 = need_int(j, where, "ny");
  } else {
    fail(where, "unknown kind '" + kind + "'");
  }
  return d;
}

CutoffConfig parse_cutoff(const json& j, const std::string& where) {
  check_object(j, where, {"a", "b", "decreasing"});
  CutoffConfig c;
  c.a = need_real(j, where, "a");
  c.b = need_real(j, where, "b");
  if (!(c.b > c.a)) fail(where, "'b' must exceed 'a'");
  const json& dec = need(j, where, "decreasing");
  if (!dec.is_boolean()) fail(where, "'decreasing' must be a boolean");
  c.decreasing = dec.get<bool>();
  return c;
}

BlendPieceConfig parse_piece(const json& j, const std::filesystem::path& base,
                             const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  BlendPieceConfig p;
  p.factor = need_string(j, where, "factor");
  if (p.factor == "file") {
    check_object(j, where, {"factor", "path", "cutoff"});
    p.path = resolve_path(base, need_string(j, where, "path"), where);
  } else if (p.factor == "flat" || p.factor == "cusp" ||
             p.factor == "poincare" || p.factor == "log4") {
    check_object(j, where, {"factor", "cutoff"});
  } else {
    fail(where, "unknown factor '" + p.factor + "'");
  }
  p.cutoff = parse_cutoff(need(j, where, "cutoff"), where + ".cutoff");
  return p;
}

MetricConfig parse_metric(const json& j, const std::filesystem::path& base) {
  const std::string where = "metric";
  if (!j.is_object()) fail(where, "expected an object");
  MetricConfig m;
  m.kind = need_string(j, where, "kind");
  if (m.kind == "flat" || m.kind == "cusp" || m.kind == "poincare" ||
      m.kind == "log4") {
    check_object(j, where, {"kind"});
  } else if (m.kind == "file") {
    check_object(j, where, {"kind", "path"});
    m.path = resolve_path(base, need_string(j, where, "path"), where);
  } else if (m.kind == "blend") {
    check_object(j, where, {"kind", "pieces", "background"});
    const json& pieces = need(j, where, "pieces");
    if (!pieces.is_array() || pieces.empty())
      fail(where, "'pieces' must be a non-empty array");
    for (std::size_t i = 0; i < pieces.size(); ++i)
      m.pieces.push_back(parse_piece(
          pieces[i], base, where + ".pieces[" + std::to_string(i) + "]"));
    m.background =
        parse_piece(need(j, where, "background"), base, where + ".background");
  } else {
    fail(where, "unknown kind '" + m.kind + "'");
  }
  return m;
}

TargetConfig parse_target(const json& j, const std::filesystem::path& base) {
  const std::string where = "target";
  if (!j.is_object()) fail(where, "expected an object");
  TargetConfig t;
  t.kind = need_string(j, where, "kind");
  if (t.kind == "scale" || t.kind == "offset") {
    check_object(j, where, {"kind", "value", "collar_width"});
    t.value = need_real(j, where, "value");
  } else if (t.kind == "file") {
    check_object(j, where, {"kind", "path", "collar_width"});
    t.path = resolve_path(base, need_string(j, where, "path"), where);
  } else {
    fail(where, "unknown kind '" + t.kind + "'");
  }
  t.collar_width = opt_real(j, where, "collar_width", 0.0);
  return t;
}

SolverConfig parse_solver(const json& j) {
  const std::string where = "solver";
  check_object(j, where,
               {"method", "tol_b", "max_iter", "cg_tol", "cg_max_iter",
                "history_stride"});
  SolverConfig s;
  if (j.contains("method")) {
    const std::string m = need_string(j, where, "method");
    if (m == "newton")
      s.method = SolveMethod::newton;
    else if (m == "gradient")
      s.method = SolveMethod::gradient;
    else
      fail(where, "unknown method '" + m + "'");
  }
  s.tol_b = opt_real(j, where, "tol_b", s.tol_b);
  s.max_iter = opt_int(j, where, "max_iter", s.max_iter);
  s.cg_tol = opt_real(j, where, "cg_tol", s.cg_tol);
  s.cg_max_iter = opt_int(j, where, "cg_max_iter", s.cg_max_iter);
  s.history_stride = opt_int(j, where, "history_stride", s.history_stride);
  if (!(s.tol_b > 0)) fail(where, "'tol_b' must be positive");
  if (s.max_iter < 0) fail(where, "'max_iter' must be non-negative");
  if (!(s.cg_tol > 0)) fail(where, "'cg_tol' must be positive");
  if (s.cg_max_iter < 1) fail(where, "'cg_max_iter' must be positive");
  if (s.history_stride < 1) fail(where, "'history_stride' must be positive");
  return s;
}

OutputConfig parse_output(const json& j) {
  const std::string where = "output";
  check_object(j, where,
               {"directory", "dump_fields", "estimate_every", "seed",
                "spectrum_k"});
  OutputConfig o;
  if (j.contains("directory")) o.directory = need_string(j, where, "directory");
  if (o.directory.empty()) fail(where, "'directory' must not be empty");
  o.dump_fields = opt_bool(j, where, "dump_fields", o.dump_fields);
  o.estimate_every = opt_int(j, where, "estimate_every", o.estimate_every);
  o.seed = opt_u64(j, where, "seed", o.seed);
  o.spectrum_k = opt_int(j, where, "spectrum_k", o.spectrum_k);
  if (o.estimate_every < 0) fail(where, "'estimate_every' must be non-negative");
  if (o.spectrum_k < 0) fail(where, "'spectrum_k' must be non-negative");
  return o;
}

ScalarField ones_field(const GridPtr& g) {
  ScalarField f(g);
  std::fill(f.v.begin(), f.v.end(), 1.0);
  return f;
}

ScalarField named_factor(const std::string& name, const GridPtr& g) {
  if (name == "flat") return ones_field(g);
  if (name == "cusp") return cusp_factor(g);
  if (name == "poincare") return poincare_factor(g);
  return log4_factor(g);
}

ScalarField load_field_on(const std::string& path, const GridPtr& g,
                          const std::string& where) {
  ScalarField f = read_field(path);
  if (!f.g->same_layout(*g))
    fail(where, "field file '" + path + "' does not match the configured domain");
  f.g = g;
  return f;
}

}  // namespace

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.parent_path());
}

RunConfig parse_config_text(const std::string& text,
                            const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  check_object(j, "config", {"domain", "metric", "target", "solver", "output"});

  RunConfig cfg;
  cfg.base_dir = base_dir;
  cfg.domain = parse_domain(need(j, "config", "domain"));
  cfg.metric = parse_metric(need(j, "config", "metric"), base_dir);
  if (j.contains("target")) cfg.target = parse_target(j.at("target"), base_dir);
  if (j.contains("solver")) cfg.solver = parse_solver(j.at("solver"));
  if (j.contains("output")) cfg.output = parse_output(j.at("output"));
  cfg.solver.seed = cfg.output.seed;
  return cfg;
}

std::string config_echo_json(const RunConfig& cfg) {
  json j;
  json& d = j["domain"];
  if (cfg.domain.kind == GridKind::annulus) {
    d = {{"kind", "annulus"},
         {"r_in", cfg.domain.r_in},
         {"r_out", cfg.domain.r_out},
         {"n_r", cfg.domain.n1},
         {"n_theta", cfg.domain.n2}};
  } else {
    d = {{"kind", "rectangle"},
         {"lx", cfg.domain.lx},
         {"ly", cfg.domain.ly},
         {"nx", cfg.domain.n1},
         {"ny", cfg.domain.n2}};
  }

  auto piece_json = [](const BlendPieceConfig& p) {
    json pj = {{"factor", p.factor},
               {"cutoff",
                {{"a", p.cutoff.a},
                 {"b", p.cutoff.b},
                 {"decreasing", p.cutoff.decreasing}}}};
    if (p.factor == "file") pj["path"] = p.path;
    return pj;
  };

  json& m = j["metric"];
  m["kind"] = cfg.metric.kind;
  if (cfg.metric.kind == "file") m["path"] = cfg.metric.path;
  if (cfg.metric.kind == "blend") {
    m["pieces"] = json::array();
    for (const auto& p : cfg.metric.pieces) m["pieces"].push_back(piece_json(p));
    m["background"] = piece_json(*cfg.metric.background);
  }

  if (cfg.target) {
    json& t = j["target"];
    t["kind"] = cfg.target->kind;
    if (cfg.target->kind == "file")
      t["path"] = cfg.target->path;
    else
      t["value"] = cfg.target->value;
    t["collar_width"] = cfg.target->collar_width;
  }

  j["solver"] = {
      {"method",
       cfg.solver.method == SolveMethod::newton ? "newton" : "gradient"},
      {"tol_b", cfg.solver.tol_b},
      {"max_iter", cfg.solver.max_iter},
      {"cg_tol", cfg.solver.cg_tol},
      {"cg_max_iter", cfg.solver.cg_max_iter},
      {"history_stride", cfg.solver.history_stride}};

  j["output"] = {{"directory", cfg.output.directory},
                 {"dump_fields", cfg.output.dump_fields},
                 {"estimate_every", cfg.output.estimate_every},
                 {"seed", cfg.output.seed},
                 {"spectrum_k", cfg.output.spectrum_k}};
  return j.dump(2);
}

GridPtr build_grid(const DomainConfig& d) {
  if (d.kind == GridKind::annulus)
    return build_annulus(d.r_in, d.r_out, d.n1, d.n2);
  return build_rectangle(d.lx, d.ly, d.n1, d.n2);
}

ConformalMetric build_metric(const MetricConfig& m, const GridPtr& g) {
  if (m.kind == "flat") return flat_metric(g);
  if (m.kind == "cusp") return cusp_metric(g);
  if (m.kind == "poincare") return poincare_metric(g);
  if (m.kind == "log4") return log4_metric(g);
  if (m.kind == "file") return from_factor(load_field_on(m.path, g, "metric"));

  auto make_piece = [&](const BlendPieceConfig& pc,
                        const std::string& where) -> BlendPiece {
    ScalarField f = pc.factor == "file" ? load_field_on(pc.path, g, where)
                                        : named_factor(pc.factor, g);
    return BlendPiece{std::move(f),
                      Cutoff{pc.cutoff.a, pc.cutoff.b, pc.cutoff.decreasing}};
  };
  std::vector<BlendPiece> pieces;
  pieces.reserve(m.pieces.size());
  for (std::size_t i = 0; i < m.pieces.size(); ++i)
    pieces.push_back(
        make_piece(m.pieces[i], "metric.pieces[" + std::to_string(i) + "]"));
  BlendPiece background = make_piece(*m.background, "metric.background");
  return blend_metrics(pieces, background);
}

ScalarField build_target(const TargetConfig& t, const ConformalMetric& m) {
  TargetSpec spec;
  if (t.kind == "scale") {
    spec.kind = TargetKind::scale;
    spec.value = t.value;
  } else if (t.kind == "offset") {
    spec.kind = TargetKind::offset;
    spec.value = t.value;
  } else {
    spec.kind = TargetKind::field;
    spec.field = load_field_on(t.path, m.g, "target");
  }
  return blend_target(m, spec, t.collar_width);
}

CurvatureProblem build_problem(const RunConfig& cfg) {
  if (!cfg.target)
    throw ConfigError("config: target block required for this command");
  GridPtr g = build_grid(cfg.domain);
  ConformalMetric metric = build_metric(cfg.metric, g);
  ScalarField K = build_target(*cfg.target, metric);
  return make_problem(std::move(metric), std::move(K),
                      cfg.target->collar_width);
}

}  // namespace prescurv
