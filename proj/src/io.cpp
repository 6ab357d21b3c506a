#include "flexilab/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "flexilab/errors.hpp"
#include "json.hpp"

namespace flexilab {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& origin, const std::string& field, const std::string& what) {
  throw ValidationError(origin + ": " + field + ": " + what);
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset to line/column.
    size_t line = 1;
    size_t column = 1;
    const size_t end = std::min(text.size(), static_cast<size_t>(e.byte > 0 ? e.byte - 1 : 0));
    for (size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + e.what());
  }
}

double number_at(const json& j, const std::string& origin, const std::string& field) {
  if (!j.is_number()) invalid(origin, field, "expected a number");
  return j.get<double>();
}

Vec vector_at(const json& j, const std::string& origin, const std::string& field) {
  if (!j.is_array()) invalid(origin, field, "expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number_at(j[i], origin, field + "[" + std::to_string(i) + "]");
  }
  return v;
}

Mat matrix_at(const json& j, const std::string& origin, const std::string& field) {
  if (!j.is_array() || j.empty()) invalid(origin, field, "expected a nonempty array of rows");
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < j.size(); ++r) {
    const std::string row = field + "[" + std::to_string(r) + "]";
    const Vec v = vector_at(j[r], origin, row);
    if (static_cast<size_t>(v.size()) != cols) invalid(origin, row, "ragged row");
    m.row(static_cast<Eigen::Index>(r)) = v.transpose();
  }
  return m;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
  return a;
}

json mesh_json(const PseudoManifold& k) {
  json out;
  out["dim"] = k.dim();
  out["vertices"] = k.vertex_names();
  json facets = json::array();
  for (const Simplex& f : k.facets()) {
    json row = json::array();
    for (int v : f) row.push_back(k.vertex_names()[static_cast<size_t>(v)]);
    facets.push_back(row);
  }
  out["facets"] = facets;
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::shared_ptr<const PseudoManifold> complex_from(const json& j, const std::string& origin,
                                                   std::map<std::string, int>* ids) {
  if (!j.is_object()) invalid(origin, "<root>", "expected an object");
  if (!j.contains("vertices") || !j["vertices"].is_array()) invalid(origin, "vertices", "missing array");
  if (!j.contains("facets") || !j["facets"].is_array()) invalid(origin, "facets", "missing array");
  std::vector<std::string> names;
  for (size_t i = 0; i < j["vertices"].size(); ++i) {
    const json& v = j["vertices"][i];
    const std::string name = v.is_string() ? v.get<std::string>() : v.dump();
    if (ids->count(name)) invalid(origin, "vertices[" + std::to_string(i) + "]", "duplicate vertex " + name);
    (*ids)[name] = static_cast<int>(i);
    names.push_back(name);
  }
  std::vector<Simplex> facets;
  for (size_t f = 0; f < j["facets"].size(); ++f) {
    const json& row = j["facets"][f];
    const std::string field = "facets[" + std::to_string(f) + "]";
    if (!row.is_array()) invalid(origin, field, "expected an array of vertex names");
    Simplex s;
    for (const json& v : row) {
      const std::string name = v.is_string() ? v.get<std::string>() : v.dump();
      const auto it = ids->find(name);
      if (it == ids->end()) invalid(origin, field, "unknown vertex " + name);
      s.push_back(it->second);
    }
    facets.push_back(s);
  }
  if (j.contains("dim")) {
    const int dim = static_cast<int>(number_at(j["dim"], origin, "dim"));
    for (size_t f = 0; f < facets.size(); ++f) {
      if (static_cast<int>(facets[f].size()) != dim + 1) {
        invalid(origin, "facets[" + std::to_string(f) + "]", "facet size does not match dim");
      }
    }
  }
  try {
    return std::make_shared<const PseudoManifold>(PseudoManifold::build(facets, names));
  } catch (const Error& e) {
    invalid(origin, "facets", e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ModelSpace space_from_string(const std::string& name, int dim) {
  if (name == "euclid" || name == "euclidean") return ModelSpace::euclidean(dim);
  if (name == "sphere" || name == "spherical") return ModelSpace::sphere(dim);
  if (name == "hyperbolic") return ModelSpace::hyperbolic(dim);
  throw ValidationError("unknown space '" + name + "' (expected euclid, sphere or hyperbolic)");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Polyhedron MeshInput::polyhedron(const ModelSpace& fallback) const {
  if (!coordinates) throw ValidationError("mesh has no coordinates");
  const ModelSpace s = space ? *space : fallback;
  if (coordinates->cols() != s.ambient_dim()) {
    throw ValidationError("coordinates have " + std::to_string(coordinates->cols()) + " columns; " +
                          s.name() + " needs " + std::to_string(s.ambient_dim()));
  }
  return Polyhedron{complex, s, *coordinates};
}

Vec MeshInput::edge_lengths_or_measured(const ModelSpace& fallback) const {
  if (lengths) return *lengths;
  return edge_lengths(polyhedron(fallback));
}

MeshInput parse_mesh(const std::string& text, const std::string& origin) {
  const json j = parse_json(text, origin);
  MeshInput out;
  std::map<std::string, int> ids;
  out.complex = complex_from(j, origin, &ids);
  const PseudoManifold& k = *out.complex;
  const int dim = k.dim() + 1;
  if (j.contains("space")) {
    if (!j["space"].is_string()) invalid(origin, "space", "expected a string");
    try {
      out.space = space_from_string(j["space"].get<std::string>(), dim);
    } catch (const ValidationError& e) {
      invalid(origin, "space", e.what());
    }
  }
  if (j.contains("coordinates")) {
    const json& c = j["coordinates"];
    if (c.is_object()) {
      std::optional<Mat> m;
      for (auto it = c.begin(); it != c.end(); ++it) {
        const auto id = ids.find(it.key());
        if (id == ids.end()) invalid(origin, "coordinates." + it.key(), "unknown vertex");
        const Vec v = vector_at(it.value(), origin, "coordinates." + it.key());
        if (!m) m = Mat::Constant(k.vertex_count(), v.size(), std::numeric_limits<double>::quiet_NaN());
        if (v.size() != m->cols()) invalid(origin, "coordinates." + it.key(), "wrong dimension");
        m->row(id->second) = v.transpose();
      }
      if (!m || !m->allFinite()) invalid(origin, "coordinates", "every vertex needs coordinates");
      out.coordinates = *m;
    } else {
      out.coordinates = matrix_at(c, origin, "coordinates");
      if (out.coordinates->rows() != k.vertex_count()) {
        invalid(origin, "coordinates", "expected one row per vertex");
      }
    }
  }
  if (j.contains("lengths")) {
    const json& l = j["lengths"];
    if (!l.is_object()) invalid(origin, "lengths", "expected an object {\"u-v\": value}");
    Vec lengths = Vec::Constant(k.edge_count(), std::numeric_limits<double>::quiet_NaN());
    for (auto it = l.begin(); it != l.end(); ++it) {
      const std::string& key = it.key();
      const size_t dash = key.find('-');
      const std::string field = "lengths." + key;
      if (dash == std::string::npos) invalid(origin, field, "key must be \"u-v\"");
      const auto u = ids.find(key.substr(0, dash));
      const auto v = ids.find(key.substr(dash + 1));
      if (u == ids.end() || v == ids.end()) invalid(origin, field, "unknown vertex");
      const int e = k.edge_index(u->second, v->second);
      if (e < 0) invalid(origin, field, "not an edge of the complex");
      lengths(e) = number_at(it.value(), origin, field);
    }
    for (int e = 0; e < k.edge_count(); ++e) {
      if (!std::isfinite(lengths(e))) {
        const Edge& edge = k.edges()[static_cast<size_t>(e)];
        invalid(origin, "lengths", "missing length for " + k.vertex_names()[static_cast<size_t>(edge.first)] +
                                       "-" + k.vertex_names()[static_cast<size_t>(edge.second)]);
      }
    }
    out.lengths = lengths;
  }
  if (j.contains("involution")) {
    const json& inv = j["involution"];
    Involution phi;
    phi.perm.resize(static_cast<size_t>(k.vertex_count()));
    for (int v = 0; v < k.vertex_count(); ++v) phi.perm[static_cast<size_t>(v)] = v;
    const std::string kind = inv.value("kind", "line");
    if (kind == "line") {
      phi.kind = SymmetryKind::Line;
    } else if (kind == "plane") {
      phi.kind = SymmetryKind::Plane;
    } else {
      invalid(origin, "involution.kind", "expected line or plane");
    }
    if (!inv.contains("pairs") || !inv["pairs"].is_array()) invalid(origin, "involution.pairs", "missing");
    for (const json& pair : inv["pairs"]) {
      if (!pair.is_array() || pair.size() != 2) invalid(origin, "involution.pairs", "expected name pairs");
      const auto a = ids.find(pair[0].get<std::string>());
      const auto b = ids.find(pair[1].get<std::string>());
      if (a == ids.end() || b == ids.end()) invalid(origin, "involution.pairs", "unknown vertex");
      phi.perm[static_cast<size_t>(a->second)] = b->second;
      phi.perm[static_cast<size_t>(b->second)] = a->second;
    }
    try {
      validate_involution(k, phi);
    } catch (const InvolutionError& e) {
      invalid(origin, "involution", e.what());
    }
    out.involution = phi;
  }
  return out;
}

FamilySpec parse_family_spec(const std::string& text, const std::string& origin) {
  const json j = parse_json(text, origin);
  if (!j.is_object()) invalid(origin, "<root>", "expected an object");
  FamilySpec spec;
  if (!j.contains("kind") || !j["kind"].is_string()) invalid(origin, "kind", "missing string");
  spec.kind = j["kind"].get<std::string>();
  try {
    if (spec.kind == "rational") {
      if (!j.contains("lambda")) invalid(origin, "lambda", "missing");
      if (!j.contains("frame") || !j["frame"].contains("vertices")) invalid(origin, "frame.vertices", "missing");
      RationalFlexSpec r;
      r.lambda = vector_at(j["lambda"], origin, "lambda");
      const Mat v = matrix_at(j["frame"]["vertices"], origin, "frame.vertices");
      if (j.contains("n") && number_at(j["n"], origin, "n") != static_cast<double>(v.rows())) {
        invalid(origin, "n", "does not match the frame");
      }
      try {
        r.frame = simplex_frame(v);
      } catch (const DegenerateSimplexError& e) {
        invalid(origin, "frame.vertices", e.what());
      }
      try {
        validate(r);
      } catch (const SpecError& e) {
        invalid(origin, "lambda", e.what());
      }
      spec.lower = j.contains("from") ? number_at(j["from"], origin, "from") : -3.0;
      spec.upper = j.contains("to") ? number_at(j["to"], origin, "to") : 3.0;
      spec.rational = r;
    } else if (spec.kind == "elliptic") {
      EllipticFlexSpec e;
      if (!j.contains("k")) invalid(origin, "k", "missing");
      e.k = number_at(j["k"], origin, "k");
      e.sigma = vector_at(j.value("sigma", json::array()), origin, "sigma");
      e.lambda = vector_at(j.value("lambda", json::array()), origin, "lambda");
      if (j.contains("n") && number_at(j["n"], origin, "n") != static_cast<double>(e.sigma.size())) {
        invalid(origin, "n", "does not match sigma");
      }
      try {
        validate(e);
        elliptic_frame(e);
      } catch (const Error& err) {
        invalid(origin, "lambda/sigma/k", err.what());
      }
      spec.lower = j.contains("from") ? number_at(j["from"], origin, "from") : 0.0;
      spec.upper = j.contains("to") ? number_at(j["to"], origin, "to") : 4.0 * quarter_period(e.k);
      spec.elliptic = e;
    } else if (spec.kind == "bipyramid") {
      spec.sides = vector_at(j.value("sides", json::array()), origin, "sides");
      try {
        const auto [lo, hi] = quadrilateral_diagonal_range(spec.sides);
        const double margin = 0.1 * (hi - lo);
        spec.lower = j.contains("from") ? number_at(j["from"], origin, "from") : lo + margin;
        spec.upper = j.contains("to") ? number_at(j["to"], origin, "to") : hi - margin;
      } catch (const Error& err) {
        invalid(origin, "sides", err.what());
      }
    } else {
      invalid(origin, "kind", "expected rational, elliptic or bipyramid");
    }
  } catch (const json::exception& e) {
    invalid(origin, "<spec>", e.what());
  }
  if (!(spec.lower < spec.upper)) invalid(origin, "from/to", "empty parameter range");
  return spec;
}

MeshInput load_mesh(const std::string& path) { return parse_mesh(read_text(path), path); }
FamilySpec load_family_spec(const std::string& path) { return parse_family_spec(read_text(path), path); }

FlexFamily make_family(const FamilySpec& spec) {
  if (spec.rational) return make_rational_family(*spec.rational, spec.lower, spec.upper);
  if (spec.elliptic) {
    const FlexFamily f = make_elliptic_family(*spec.elliptic);
    return FlexFamily(f.kind(), f.complex(), spec.lower, spec.upper, [f](double u) { return f(u); });
  }
  if (spec.kind == "bipyramid") return bipyramid_family(spec.sides, spec.lower, spec.upper);
  throw ValidationError("family spec has no parameters");
}

std::string family_spec_to_json(const FamilySpec& spec) {
  json j;
  j["kind"] = spec.kind;
  if (spec.rational) {
    j["n"] = spec.rational->frame.n();
    j["lambda"] = vec_json(spec.rational->lambda);
    j["frame"]["vertices"] = mat_json(spec.rational->frame.vertices);
  } else if (spec.elliptic) {
    j["n"] = spec.elliptic->sigma.size();
    j["k"] = spec.elliptic->k;
    j["sigma"] = vec_json(spec.elliptic->sigma);
    j["lambda"] = vec_json(spec.elliptic->lambda);
  } else {
    j["sides"] = vec_json(spec.sides);
  }
  j["from"] = spec.lower;
  j["to"] = spec.upper;
  return dump(j);
}

std::string polyhedron_to_json(const Polyhedron& p) {
  json j = mesh_json(*p.complex);
  j["space"] = p.space.name();
  j["coordinates"] = mat_json(p.coords);
  json lengths = json::object();
  const Vec l = edge_lengths(p);
  for (size_t e = 0; e < p.complex->edges().size(); ++e) {
    const Edge& edge = p.complex->edges()[e];
    lengths[p.complex->vertex_names()[static_cast<size_t>(edge.first)] + "-" +
            p.complex->vertex_names()[static_cast<size_t>(edge.second)]] = l(static_cast<Eigen::Index>(e));
  }
  j["lengths"] = lengths;
  return dump(j);
}

std::string trajectory_to_json(const std::string& kind, const std::vector<double>& sweep,
                               const std::vector<Polyhedron>& samples) {
  if (samples.empty()) throw ValidationError("empty trajectory");
  json j;
  j["kind"] = kind;
  j["space"] = samples.front().space.name();
  j["mesh"] = mesh_json(*samples.front().complex);
  j["sweep"] = sweep;
  json coords = json::array();
  for (const Polyhedron& p : samples) coords.push_back(mat_json(p.coords));
  j["coordinates"] = coords;
  return dump(j);
}

std::string trajectory_to_csv(const std::vector<double>& sweep, const std::vector<Polyhedron>& samples,
                              const char* parameter) {
  if (samples.empty()) throw ValidationError("empty trajectory");
  std::ostringstream os;
  const auto& names = samples.front().complex->vertex_names();
  os << "step," << parameter;
  for (size_t v = 0; v < names.size(); ++v) {
    for (Eigen::Index c = 0; c < samples.front().coords.cols(); ++c) os << "," << names[v] << "_x" << c;
  }
  os << "\n";
  for (size_t s = 0; s < samples.size(); ++s) {
    os << s << "," << format_double(sweep[s]);
    const Mat& m = samples[s].coords;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) os << "," << format_double(m(r, c));
    }
    os << "\n";
  }
  return os.str();
}

std::vector<Polyhedron> parse_trajectory(const std::string& text, std::vector<double>* sweep) {
  const json j = parse_json(text, "<trajectory>");
  std::map<std::string, int> ids;
  const auto complex = complex_from(j.at("mesh"), "<trajectory>", &ids);
  const ModelSpace space = space_from_string(j.at("space").get<std::string>(), complex->dim() + 1);
  std::vector<Polyhedron> out;
  for (const json& c : j.at("coordinates")) out.push_back({complex, space, matrix_at(c, "<trajectory>", "coordinates")});
  if (sweep) *sweep = j.at("sweep").get<std::vector<double>>();
  return out;
}

std::string path_to_csv(const ConstraintSystem& system, const TrackedPath& path) {
  std::vector<Polyhedron> samples;
  for (const Vec& x : path.points) samples.push_back(system.polyhedron(x));
  return trajectory_to_csv(path.arclength, samples, "arclength");
}

std::string path_to_json(const ConstraintSystem& system, const TrackedPath& path) {
  std::vector<Polyhedron> samples;
  for (const Vec& x : path.points) samples.push_back(system.polyhedron(x));
  json j = json::parse(trajectory_to_json("tracked", path.arclength, samples));
  j["residuals"] = path.residuals;
  j["degenerate"] = path.degenerate;
  j["rejected_steps"] = path.rejected_steps;
  return dump(j);
}

std::string report_to_json(const VolumeReport& r) {
  json j;
  j["sweep"] = r.sweep;
  j["volumes"] = r.volumes;
  if (!r.std_errors.empty()) j["std_errors"] = r.std_errors;
  j["edge_dev"] = r.edge_dev;
  j["max_deviation"] = r.max_deviation;
  j["verdict"] = r.constant ? "constant" : "non-constant";
  j["tolerance"] = r.tolerance;
  j["method"] = to_string(r.method);
  return dump(j);
}

std::string report_to_csv(const VolumeReport& r) {
  std::ostringstream os;
  os << "u,V,edge_dev" << (r.std_errors.empty() ? "" : ",std_error") << "\n";
  for (size_t i = 0; i < r.sweep.size(); ++i) {
    os << format_double(r.sweep[i]) << "," << format_double(r.volumes[i]) << "," << format_double(r.edge_dev[i]);
    if (!r.std_errors.empty()) os << "," << format_double(r.std_errors[i]);
    os << "\n";
  }
  return os.str();
}

}  // namespace flexilab
