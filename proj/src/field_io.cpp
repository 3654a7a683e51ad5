#include "prescurv/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace prescurv {

namespace {

using nlohmann::json;

json grid_to_json(const Grid& g) {
  json j;
  if (g.kind == GridKind::annulus) {
    j["kind"] = "annulus";
    j["r_in"] = g.r_in;
    j["r_out"] = g.r_out;
    j["n_r"] = g.n1;
    j["n_theta"] = g.n2;
  } else {
    j["kind"] = "rectangle";
    j["lx"] = g.lx;
    j["ly"] = g.ly;
    j["nx"] = g.n1;
    j["ny"] = g.n2;
  }
  return j;
}

GridPtr grid_from_json(const json& j, const std::string& what) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "annulus")
    return build_annulus(j.at("r_in").get<double>(),
                         j.at("r_out").get<double>(), j.at("n_r").get<int>(),
                         j.at("n_theta").get<int>());
  if (kind == "rectangle")
    return build_rectangle(j.at("lx").get<double>(), j.at("ly").get<double>(),
                           j.at("nx").get<int>(), j.at("ny").get<int>());
  throw std::runtime_error(what + ": unknown grid kind '" + kind + "'");
}

std::string header_line(const Grid& g, const std::string& name) {
  std::ostringstream os;
  if (g.kind == GridKind::annulus)
    os << "# kind=annulus r_in=" << format_real(g.r_in)
       << " r_out=" << format_real(g.r_out) << " n_r=" << g.n1
       << " n_theta=" << g.n2;
  else
    os << "# kind=rectangle lx=" << format_real(g.lx)
       << " ly=" << format_real(g.ly) << " nx=" << g.n1 << " ny=" << g.n2;
  os << " field=" << name;
  return os.str();
}

// "key=value" tokens after "# "
json parse_header(const std::string& line, const std::filesystem::path& path) {
  if (line.rfind("# ", 0) != 0)
    throw std::runtime_error("read_field: missing header line in " +
                             path.string());
  json j;
  std::istringstream is(line.substr(2));
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("read_field: malformed header token '" + tok +
                               "' in " + path.string());
    j[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return j;
}

double parse_real(const std::string& s, const std::filesystem::path& path) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size())
    throw std::runtime_error("read_field: bad numeric token '" + s + "' in " +
                             path.string());
  return v;
}

}  // namespace

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_field(const std::filesystem::path& dir, const std::string& name,
                 const ScalarField& f) {
  std::filesystem::create_directories(dir);
  const Grid& g = *f.g;
  const auto meta_path = dir / "meta.json";
  const json mine = grid_to_json(g);
  if (std::filesystem::exists(meta_path)) {
    std::ifstream in(meta_path);
    json existing;
    in >> existing;
    if (existing.at("grid") != mine)
      throw std::runtime_error(
          "write_field: meta.json in " + dir.string() +
          " describes a different grid");
  } else {
    json meta;
    meta["grid"] = mine;
    std::ofstream out(meta_path);
    out << meta.dump(2) << "\n";
  }

  for (int n = 0; n < f.size(); ++n)
    if (!std::isfinite(f.v[n]))
      throw std::runtime_error("write_field: non-finite value in field " +
                               name);

  std::ofstream out(dir / (name + ".csv"));
  if (!out)
    throw std::runtime_error("write_field: cannot open " +
                             (dir / (name + ".csv")).string());
  out << header_line(g, name) << "\n";
  out << "i,j,coord1,coord2,value\n";
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j)
      out << i << "," << j << "," << format_real(g.c1[i]) << ","
          << format_real(g.c2[j]) << "," << format_real(f.v[g.index(i, j)])
          << "\n";
  if (!out)
    throw std::runtime_error("write_field: write failed for " + name);
}

ScalarField read_field(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in)
    throw std::runtime_error("read_field: cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_field: empty file " + csv_path.string());
  const json hdr = parse_header(line, csv_path);

  const auto meta_path = csv_path.parent_path() / "meta.json";
  if (!std::filesystem::exists(meta_path))
    throw std::runtime_error("read_field: missing sidecar " +
                             meta_path.string());
  json meta;
  {
    std::ifstream min(meta_path);
    min >> meta;
  }
  const std::string kind = hdr.at("kind").get<std::string>();
  GridPtr g;
  if (kind == "annulus")
    g = build_annulus(parse_real(hdr.at("r_in").get<std::string>(), csv_path),
                      parse_real(hdr.at("r_out").get<std::string>(), csv_path),
                      std::stoi(hdr.at("n_r").get<std::string>()),
                      std::stoi(hdr.at("n_theta").get<std::string>()));
  else if (kind == "rectangle")
    g = build_rectangle(parse_real(hdr.at("lx").get<std::string>(), csv_path),
                        parse_real(hdr.at("ly").get<std::string>(), csv_path),
                        std::stoi(hdr.at("nx").get<std::string>()),
                        std::stoi(hdr.at("ny").get<std::string>()));
  else
    throw std::runtime_error("read_field: unknown grid kind '" + kind + "'");
  const GridPtr from_meta = grid_from_json(meta.at("grid"), "read_field");
  if (!g->same_layout(*from_meta))
    throw std::runtime_error("read_field: header/meta.json grid mismatch for " +
                             csv_path.string());

  if (!std::getline(in, line) || line.rfind("i,j,", 0) != 0)
    throw std::runtime_error("read_field: missing column line in " +
                             csv_path.string());
  ScalarField f(g);
  std::vector<char> seen(g->size(), 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string tok;
    int col = 0, i = 0, j = 0;
    double value = 0.0;
    while (std::getline(is, tok, ',')) {
      switch (col) {
        case 0: i = std::stoi(tok); break;
        case 1: j = std::stoi(tok); break;
        case 2: break;  // coordinates are derivable; values win
        case 3: break;
        case 4: value = parse_real(tok, csv_path); break;
        default:
          throw std::runtime_error("read_field: too many columns in " +
                                   csv_path.string());
      }
      ++col;
    }
    if (col != 5)
      throw std::runtime_error("read_field: short row in " +
                               csv_path.string());
    if (i < 0 || i >= g->n1 || j < 0 || j >= g->n2)
      throw std::runtime_error("read_field: node index out of range in " +
                               csv_path.string());
    if (std::isnan(value))
      throw std::runtime_error("read_field: NaN value at node (" +
                               std::to_string(i) + "," + std::to_string(j) +
                               ") in " + csv_path.string());
    f(i, j) = value;
    seen[g->index(i, j)] = 1;
  }
  for (int n = 0; n < g->size(); ++n)
    if (!seen[n])
      throw std::runtime_error("read_field: missing node rows in " +
                               csv_path.string());
  return f;
}

GridPtr grid_from_meta(const std::filesystem::path& meta_path) {
  std::ifstream in(meta_path);
  if (!in)
    throw std::runtime_error("grid_from_meta: cannot open " +
                             meta_path.string());
  json meta;
  in >> meta;
  return grid_from_json(meta.at("grid"), "grid_from_meta");
}

void write_history(const std::filesystem::path& path,
                   const std::vector<IterationRecord>& history) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("write_history: cannot open " + path.string());
  out << "iter,S,b_l2,grad_norm,step,lap_sigma_l2\n";
  for (const auto& r : history)
    out << r.iter << "," << format_real(r.S) << "," << format_real(r.b_l2)
        << "," << format_real(r.grad_norm) << "," << format_real(r.step_size)
        << "," << format_real(r.lap_sigma_l2) << "\n";
}

std::vector<IterationRecord> read_history(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("read_history: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("iter,", 0) != 0)
    throw std::runtime_error("read_history: missing column line in " +
                             path.string());
  std::vector<IterationRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    IterationRecord r;
    std::istringstream is(line);
    std::string tok;
    int col = 0;
    while (std::getline(is, tok, ',')) {
      switch (col) {
        case 0: r.iter = std::stoi(tok); break;
        case 1: r.S = parse_real(tok, path); break;
        case 2: r.b_l2 = parse_real(tok, path); break;
        case 3: r.grad_norm = parse_real(tok, path); break;
        case 4: r.step_size = parse_real(tok, path); break;
        case 5: r.lap_sigma_l2 = parse_real(tok, path); break;
        default:
          throw std::runtime_error("read_history: too many columns in " +
                                   path.string());
      }
      ++col;
    }
    if (col != 6)
      throw std::runtime_error("read_history: short row in " + path.string());
    out.push_back(r);
  }
  return out;
}

}  // namespace prescurv
