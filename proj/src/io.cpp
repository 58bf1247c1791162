#include "dbar/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace dbar::io {
namespace {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

// line/column of a byte offset, for parse diagnostics
std::pair<std::size_t, std::size_t> line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_file(const std::string& path) {
  std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_of(text, e.byte > 0 ? e.byte - 1 : 0);
    fail(path, "invalid JSON at line " + std::to_string(line) + ", column " +
                   std::to_string(col));
  }
}

double number_at(const json& j, const std::string& path, const std::string& where) {
  if (!j.is_number()) fail(path, where + ": expected a number");
  return j.get<double>();
}

cplx pair_at(const json& j, const std::string& path, const std::string& where) {
  if (!j.is_array() || j.size() != 2)
    fail(path, where + ": expected a [re, im] pair");
  return {number_at(j[0], path, where + "[0]"), number_at(j[1], path, where + "[1]")};
}

std::vector<DiskPoint> points_at(const json& j, const std::string& path,
                                 const std::string& where) {
  if (!j.is_array()) fail(path, where + ": expected an array of [re, im] pairs");
  std::vector<DiskPoint> pts;
  pts.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string slot = where + "[" + std::to_string(i) + "]";
    cplx v = pair_at(j[i], path, slot);
    if (std::abs(v) >= 1.0 - kBoundaryMargin)
      fail(path, slot + ": point lies outside the open unit disk");
    pts.emplace_back(v);
  }
  return pts;
}

ordered seq_json(const FiniteSequence& seq) {
  ordered out = ordered::array();
  for (const DiskPoint& p : seq.points())
    out.push_back({p.value().real(), p.value().imag()});
  return out;
}

void append_row(std::string& out, const std::vector<double>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += format_double(cols[i]);
  }
  out += '\n';
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open file for writing");
  out << text;
  if (!out) fail(path, "write failed");
}

FiniteSequence load_sequence(const std::string& path) {
  json j = parse_file(path);
  if (!j.is_array()) fail(path, "top level: expected a JSON array of [re, im] pairs");
  if (j.empty()) fail(path, "top level: sequence is empty");
  std::vector<DiskPoint> pts = points_at(j, path, "sequence");
  try {
    return FiniteSequence(std::move(pts));
  } catch (const std::invalid_argument& e) {
    fail(path, std::string("sequence: ") + e.what());
  }
}

void save_sequence(const std::string& path, const FiniteSequence& seq) {
  write_text_file(path, seq_json(seq).dump(2) + "\n");
}

RegionSpec load_region(const std::string& path) {
  json j = parse_file(path);
  if (!j.is_object()) fail(path, "top level: expected an object");
  if (!j.contains("anchors")) fail(path, "missing field \"anchors\"");
  std::vector<DiskPoint> anchors = points_at(j["anchors"], path, "anchors");
  if (anchors.empty()) fail(path, "anchors: region needs at least one anchor");
  const bool has_radius = j.contains("radius");
  const bool has_radii = j.contains("radii");
  if (has_radius == has_radii)
    fail(path, "expected exactly one of \"radius\" or \"radii\"");
  for (const auto& [key, _] : j.items())
    if (key != "anchors" && key != "radius" && key != "radii")
      fail(path, "unknown field \"" + key + "\"");
  try {
    FiniteSequence seq{std::move(anchors)};
    if (has_radius) return RegionSpec(std::move(seq), number_at(j["radius"], path, "radius"));
    const json& jr = j["radii"];
    if (!jr.is_array()) fail(path, "radii: expected an array");
    std::vector<double> radii;
    radii.reserve(jr.size());
    for (std::size_t i = 0; i < jr.size(); ++i)
      radii.push_back(number_at(jr[i], path, "radii[" + std::to_string(i) + "]"));
    return RegionSpec(std::move(seq), std::move(radii));
  } catch (const std::invalid_argument& e) {
    fail(path, std::string("region: ") + e.what());
  }
}

void save_region(const std::string& path, const RegionSpec& region) {
  ordered j;
  j["anchors"] = seq_json(region.anchors());
  j["radii"] = region.radii();
  write_text_file(path, j.dump(2) + "\n");
}

Density zero_density(int dim) {
  return Density{dim, [dim](cplx, cplx* out) {
                   for (int c = 0; c < dim; ++c) out[c] = 0.0;
                 }};
}

Density load_density(const std::string& path) {
  json j = parse_file(path);
  if (!j.is_object()) fail(path, "top level: expected an object");
  if (!j.contains("kind") || !j["kind"].is_string())
    fail(path, "missing string field \"kind\"");
  const std::string kind = j["kind"].get<std::string>();
  int dim = 1;
  if (j.contains("dim")) {
    if (!j["dim"].is_number_integer() || j["dim"].get<int>() < 1)
      fail(path, "dim: expected a positive integer");
    dim = j["dim"].get<int>();
  }

  if (kind == "zero") return zero_density(dim);

  if (kind == "constant") {
    if (!j.contains("value")) fail(path, "constant density: missing field \"value\"");
    const json& jv = j["value"];
    if (!jv.is_array() || jv.size() != static_cast<std::size_t>(dim))
      fail(path, "value: expected " + std::to_string(dim) + " [re, im] pairs");
    std::vector<cplx> value(static_cast<std::size_t>(dim));
    for (int c = 0; c < dim; ++c)
      value[static_cast<std::size_t>(c)] =
          pair_at(jv[static_cast<std::size_t>(c)], path, "value[" + std::to_string(c) + "]");
    return Density{dim, [value, dim](cplx, cplx* out) {
                     for (int c = 0; c < dim; ++c) out[c] = value[static_cast<std::size_t>(c)];
                   }};
  }

  if (kind == "bumps") {
    struct Term {
      int component;
      cplx center;
      double radius;
      cplx amplitude;
      int power;
    };
    if (!j.contains("terms") || !j["terms"].is_array())
      fail(path, "bumps density: missing array field \"terms\"");
    std::vector<Term> terms;
    for (std::size_t i = 0; i < j["terms"].size(); ++i) {
      const std::string slot = "terms[" + std::to_string(i) + "]";
      const json& jt = j["terms"][i];
      if (!jt.is_object()) fail(path, slot + ": expected an object");
      Term t{};
      t.component = 0;
      if (jt.contains("component")) {
        if (!jt["component"].is_number_integer()) fail(path, slot + ".component: expected an integer");
        t.component = jt["component"].get<int>();
      }
      if (t.component < 0 || t.component >= dim)
        fail(path, slot + ".component: out of range for dim " + std::to_string(dim));
      if (!jt.contains("center")) fail(path, slot + ": missing field \"center\"");
      t.center = pair_at(jt["center"], path, slot + ".center");
      if (!jt.contains("radius")) fail(path, slot + ": missing field \"radius\"");
      t.radius = number_at(jt["radius"], path, slot + ".radius");
      if (!(t.radius > 0.0)) fail(path, slot + ".radius: expected a positive number");
      t.amplitude = jt.contains("amplitude") ? pair_at(jt["amplitude"], path, slot + ".amplitude")
                                             : cplx(1.0, 0.0);
      t.power = 3;
      if (jt.contains("power")) {
        if (!jt["power"].is_number_integer() || jt["power"].get<int>() < 1)
          fail(path, slot + ".power: expected an integer >= 1");
        t.power = jt["power"].get<int>();
      }
      terms.push_back(t);
    }
    return Density{dim, [terms, dim](cplx z, cplx* out) {
                     for (int c = 0; c < dim; ++c) out[c] = 0.0;
                     for (const auto& t : terms) {
                       const double q = std::norm(z - t.center) / (t.radius * t.radius);
                       if (q >= 1.0) continue;
                       out[t.component] += t.amplitude * std::pow(1.0 - q, t.power);
                     }
                   }};
  }

  fail(path, "unknown density kind \"" + kind + "\"");
}

void save_grid_field(const std::string& path, const GridField& f) {
  const PolarGrid& g = f.grid();
  ordered j;
  j["format"] = "dbar-gridfield";
  j["nr"] = g.nr;
  j["ntheta"] = g.ntheta;
  j["s"] = g.s;
  j["dim"] = f.dim();
  ordered values = ordered::array();
  for (const cplx& v : f.raw_values()) {
    values.push_back(v.real());
    values.push_back(v.imag());
  }
  j["values"] = std::move(values);
  ordered mask = ordered::array();
  for (std::uint8_t m : f.raw_mask()) mask.push_back(static_cast<int>(m));
  j["mask"] = std::move(mask);
  write_text_file(path, j.dump() + "\n");
}

GridField load_grid_field(const std::string& path) {
  json j = parse_file(path);
  if (!j.is_object() || !j.contains("format") || j["format"] != "dbar-gridfield")
    fail(path, "not a dbar-gridfield file");
  for (const char* key : {"nr", "ntheta", "s", "dim", "values", "mask"})
    if (!j.contains(key)) fail(path, std::string("missing field \"") + key + "\"");
  std::size_t nr = 0, ntheta = 0;
  double s = 0.0;
  int dim = 0;
  try {
    nr = j["nr"].get<std::size_t>();
    ntheta = j["ntheta"].get<std::size_t>();
    s = number_at(j["s"], path, "s");
    dim = j["dim"].get<int>();
  } catch (const json::exception&) {
    fail(path, "grid header: wrong field type");
  }
  if (nr == 0 || ntheta == 0 || dim < 1 || !(s > 0.0) || s >= 1.0)
    fail(path, "grid header out of range");
  GridField f{PolarGrid(nr, ntheta, s), dim};
  const json& jv = j["values"];
  const json& jm = j["mask"];
  if (!jv.is_array() || jv.size() != f.raw_values().size() * 2)
    fail(path, "values: expected " + std::to_string(f.raw_values().size() * 2) + " numbers");
  if (!jm.is_array() || jm.size() != f.raw_mask().size())
    fail(path, "mask: expected " + std::to_string(f.raw_mask().size()) + " entries");
  for (std::size_t i = 0; i < f.raw_values().size(); ++i)
    f.raw_values()[i] = {number_at(jv[2 * i], path, "values"),
                         number_at(jv[2 * i + 1], path, "values")};
  for (std::size_t i = 0; i < f.raw_mask().size(); ++i) {
    if (!jm[i].is_number_integer()) fail(path, "mask: entries must be 0 or 1");
    const int m = jm[i].get<int>();
    if (m != 0 && m != 1) fail(path, "mask: entries must be 0 or 1");
    f.raw_mask()[i] = static_cast<std::uint8_t>(m);
  }
  return f;
}

std::string config_text(const RunConfig& c) {
  ordered j;
  j["grid_nr"] = c.grid_nr;
  j["grid_ntheta"] = c.grid_ntheta;
  j["contour_q"] = c.contour_q;
  j["n_max"] = c.n_max;
  j["tail_tol"] = c.tail_tol;
  j["agree_tol"] = c.agree_tol;
  j["eps"] = c.eps;
  j["nu"] = c.nu;
  j["delta"] = c.delta;
  j["tol"] = c.tol;
  j["seed"] = c.seed;
  j["dim"] = c.dim;
  j["parallel"] = c.parallel;
  j["sabotage"] = c.sabotage;
  j["verify_fields"] = c.verify_fields;
  j["verify_pairs"] = c.verify_pairs;
  j["verify_samples"] = c.verify_samples;
  j["sample_nr"] = c.sample_nr;
  j["sample_ntheta"] = c.sample_ntheta;
  j["sample_radius"] = c.sample_radius;
  j["sequence_path"] = c.sequence_path;
  j["region_path"] = c.region_path;
  j["density_path"] = c.density_path;
  j["out_dir"] = c.out_dir;
  return j.dump(2) + "\n";
}

void save_config(const std::string& path, const RunConfig& cfg) {
  write_text_file(path, config_text(cfg));
}

RunConfig load_config(const std::string& path) {
  json j = parse_file(path);
  if (!j.is_object()) fail(path, "top level: expected an object");
  RunConfig c;
  for (const auto& [key, val] : j.items()) {
    try {
      if (key == "grid_nr") c.grid_nr = val.get<std::size_t>();
      else if (key == "grid_ntheta") c.grid_ntheta = val.get<std::size_t>();
      else if (key == "contour_q") c.contour_q = val.get<std::size_t>();
      else if (key == "n_max") c.n_max = val.get<int>();
      else if (key == "tail_tol") c.tail_tol = val.get<double>();
      else if (key == "agree_tol") c.agree_tol = val.get<double>();
      else if (key == "eps") c.eps = val.get<double>();
      else if (key == "nu") c.nu = val.get<double>();
      else if (key == "delta") c.delta = val.get<double>();
      else if (key == "tol") c.tol = val.get<double>();
      else if (key == "seed") c.seed = val.get<std::uint64_t>();
      else if (key == "dim") c.dim = val.get<int>();
      else if (key == "parallel") c.parallel = val.get<bool>();
      else if (key == "sabotage") c.sabotage = val.get<bool>();
      else if (key == "verify_fields") c.verify_fields = val.get<std::size_t>();
      else if (key == "verify_pairs") c.verify_pairs = val.get<std::size_t>();
      else if (key == "verify_samples") c.verify_samples = val.get<std::size_t>();
      else if (key == "sample_nr") c.sample_nr = val.get<std::size_t>();
      else if (key == "sample_ntheta") c.sample_ntheta = val.get<std::size_t>();
      else if (key == "sample_radius") c.sample_radius = val.get<double>();
      else if (key == "sequence_path") c.sequence_path = val.get<std::string>();
      else if (key == "region_path") c.region_path = val.get<std::string>();
      else if (key == "density_path") c.density_path = val.get<std::string>();
      else if (key == "out_dir") c.out_dir = val.get<std::string>();
      else fail(path, "unknown field \"" + key + "\"");
    } catch (const json::exception&) {
      fail(path, "field \"" + key + "\": wrong type");
    }
  }
  if (!(c.tail_tol > 0.0) || !(c.agree_tol > 0.0) || !(c.tol > 0.0))
    fail(path, "tolerances must be positive");
  if (c.grid_nr < 4 || c.grid_ntheta < 4 || c.contour_q < 8 || c.n_max < 1)
    fail(path, "grid_nr/grid_ntheta >= 4, contour_q >= 8, n_max >= 1 required");
  if (!(c.eps > 0.0) || c.eps >= 1.0) fail(path, "eps must lie in (0, 1)");
  if (!(c.nu > 0.0) || c.nu > kNuMax * (1.0 + 1e-12))
    fail(path, "nu must lie in (0, " + format_double(kNuMax) + "]");
  if (!(c.delta > 0.0) || c.delta >= 1.0) fail(path, "delta must lie in (0, 1)");
  if (c.dim < 1) fail(path, "dim must be >= 1");
  if (!(c.sample_radius > 0.0) || c.sample_radius >= 1.0)
    fail(path, "sample_radius must lie in (0, 1)");
  if (c.sample_nr == 0 || c.sample_ntheta == 0)
    fail(path, "sample_nr and sample_ntheta must be positive");
  return c;
}

SmallWidthConfig small_config(const RunConfig& c) {
  SmallWidthConfig s;
  s.grid_nr = c.grid_nr;
  s.grid_ntheta = c.grid_ntheta;
  s.contour_q = c.contour_q;
  s.n_max = c.n_max;
  s.tail_tol = c.tail_tol;
  s.agree_tol = c.agree_tol;
  s.quad.sabotage = c.sabotage;
  return s;
}

AssemblyConfig assembly_config(const RunConfig& c) {
  AssemblyConfig a;
  a.small = small_config(c);
  a.nu = c.nu;
  return a;
}

std::string manifest_text(const AssembledOperator& op) {
  ordered j;
  j["format"] = "dbar-operator-manifest";
  j["version"] = 1;
  j["path"] = op.general_path() ? "general" : "refined";
  j["eps"] = op.eps();
  j["nu"] = op.nu();
  j["eps_nu"] = op.eps_nu();
  j["delta_floor"] = op.delta();
  j["split_depth"] = op.split_depth_used();
  j["region"] = ordered{{"anchors", seq_json(op.region().anchors())},
                        {"radii", op.region().radii()}};
  j["zeta"] = seq_json(op.zeta());
  j["certificates"] = ordered{{"norm", op.certificate()},
                              {"summed", op.summed_certificate()},
                              {"part_count", op.part_count_certificate()}};
  const SmallWidthConfig& sc = op.config().small;
  j["config"] = ordered{{"grid_nr", sc.grid_nr},
                        {"grid_ntheta", sc.grid_ntheta},
                        {"contour_q", sc.contour_q},
                        {"n_max", sc.n_max},
                        {"tail_tol", sc.tail_tol},
                        {"agree_tol", sc.agree_tol},
                        {"net_factor", op.config().net_factor},
                        {"chain_factor", op.config().chain_factor}};
  ordered groups = ordered::array();
  for (const auto& g : op.groups()) {
    ordered jg;
    jg["zeta"] = seq_json(g.zeta);
    jg["zeta_nu"] = seq_json(g.zeta_nu);
    jg["labels"] = g.labels;
    ordered parts = ordered::array();
    for (const auto& p : g.parts) {
      ordered jp;
      jp["chain"] = seq_json(p.chain);
      jp["lambda"] = p.geometry.lambda;
      jp["r"] = p.geometry.r;
      jp["M"] = p.op.M();
      jp["eps_nu"] = p.op.inner_radius();
      jp["c"] = p.op.c_eps();
      jp["radii"] = ordered{{"inner", p.op.inner_radius()},
                            {"contour", p.op.contour_radius()},
                            {"mid", p.op.mid_radius()},
                            {"outer", p.op.outer_radius()}};
      jp["contour_q"] = p.op.contour_count();
      jp["n_max"] = p.op.config().n_max;
      jp["ek_certificate"] = p.op.ek_certificate();
      jp["norm_certificate"] = p.op.norm_certificate();
      parts.push_back(std::move(jp));
    }
    jg["parts"] = std::move(parts);
    groups.push_back(std::move(jg));
  }
  j["groups"] = std::move(groups);
  return j.dump(2) + "\n";
}

void save_manifest(const std::string& path, const AssembledOperator& op) {
  write_text_file(path, manifest_text(op));
}

std::string solution_csv(const std::vector<cplx>& points, const std::vector<cplx>& values,
                         int dim) {
  if (dim < 1 || values.size() != points.size() * static_cast<std::size_t>(dim))
    throw std::invalid_argument("solution_csv: values size must be points * dim");
  std::string out = "re,im";
  for (int c = 0; c < dim; ++c) {
    out += ",f" + std::to_string(c) + "_re,f" + std::to_string(c) + "_im";
  }
  out += '\n';
  std::vector<double> cols;
  for (std::size_t i = 0; i < points.size(); ++i) {
    cols.clear();
    cols.push_back(points[i].real());
    cols.push_back(points[i].imag());
    for (int c = 0; c < dim; ++c) {
      const cplx v = values[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)];
      cols.push_back(v.real());
      cols.push_back(v.imag());
    }
    append_row(out, cols);
  }
  return out;
}

void save_solution_csv(const std::string& path, const std::vector<cplx>& points,
                       const std::vector<cplx>& values, int dim) {
  write_text_file(path, solution_csv(points, values, dim));
}

std::string level_contour_csv(const LevelComponents& levels,
                              const std::vector<double>& level_values, std::size_t samples) {
  if (samples < 4) throw std::invalid_argument("level_contour_csv: samples must be >= 4");
  std::string out = "re,im,absB\n";
  constexpr double kTau = 6.283185307179586476925286766559;
  for (double t : level_values) {
    if (!(t > 0.0) || t >= levels.r())
      throw std::invalid_argument("level_contour_csv: level values must lie in (0, r)");
    for (std::size_t n = 0; n < levels.product().degree(); ++n) {
      for (std::size_t k = 0; k < samples; ++k) {
        const double theta = kTau * static_cast<double>(k) / static_cast<double>(samples);
        const cplx w = std::polar(t, theta);
        const cplx z = levels.local_inverse(n, w);
        append_row(out, {z.real(), z.imag(), std::abs(levels.product().eval(z))});
      }
    }
  }
  return out;
}

}  // namespace dbar::io
