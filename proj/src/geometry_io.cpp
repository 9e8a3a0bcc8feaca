#include "qdesign/geometry_io.hpp"

#include <fstream>
#include <set>

#include "qdesign/errors.hpp"

namespace qdesign::magnetics {

using nlohmann::json;

const NamedPolyline& GeometrySet::find(const std::string& name) const {
  for (const auto& p : polylines)
    if (p.name == name) return p;
  throw ParseError("geometry: no polyline named '" + name + "'");
}

GradiometricLoop GeometrySet::qubit() const {
  const auto& a = find("qubit.loop1");
  const auto& b = find("qubit.loop2");
  GradiometricLoop q{a.polyline, b.polyline, {a.winding, b.winding}};
  q.validate();
  return q;
}

Polyline GeometrySet::bias_line() const { return find("bias_line").polyline; }

GeometrySet reference_geometry(const ReferenceDimensions& dims) {
  const auto q = reference_qubit(dims);
  GeometrySet g;
  g.footprint_radius = dims.ring_outer_radius;
  g.polylines.push_back({"qubit.loop1", q.loop1, q.orientation[0]});
  g.polylines.push_back({"qubit.loop2", q.loop2, q.orientation[1]});
  g.polylines.push_back({"bias_line", reference_bias_line(dims), 1});
  return g;
}

json to_json(const GeometrySet& g) {
  json lines = json::array();
  for (const auto& p : g.polylines) {
    json verts = json::array();
    for (const auto& v : p.polyline.vertices) verts.push_back({v.x, v.y, v.z});
    lines.push_back({{"name", p.name},
                     {"closed", p.polyline.closed},
                     {"winding", p.winding},
                     {"vertices", std::move(verts)}});
  }
  return {{"format", "qdesign-geometry"},
          {"version", 1},
          {"units", "um"},
          {"footprint_radius", g.footprint_radius},
          {"polylines", std::move(lines)}};
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ParseError(where + "." + key + ": unknown key");
}

}  // namespace

GeometrySet geometry_from_json(const json& j) {
  check_keys(j, {"format", "version", "units", "footprint_radius", "polylines"}, "geometry");
  try {
    if (j.at("format") != "qdesign-geometry") throw ParseError("geometry.format: unsupported");
    if (j.at("version") != 1) throw ParseError("geometry.version: unsupported");
    if (j.at("units") != "um") throw ParseError("geometry.units: only \"um\" is supported");
    GeometrySet g;
    g.footprint_radius = j.value("footprint_radius", 0.0);
    std::set<std::string> names;
    const auto& lines = j.at("polylines");
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto& l = lines[i];
      const std::string where = "geometry.polylines[" + std::to_string(i) + "]";
      check_keys(l, {"name", "closed", "winding", "vertices"}, where);
      NamedPolyline p;
      p.name = l.at("name").get<std::string>();
      if (!names.insert(p.name).second) throw ParseError(where + ".name: duplicate");
      p.polyline.closed = l.value("closed", true);
      p.winding = l.value("winding", 1);
      if (p.winding != 1 && p.winding != -1) throw ParseError(where + ".winding: must be 1 or -1");
      for (const auto& v : l.at("vertices")) {
        if (!v.is_array() || v.size() != 3)
          throw ParseError(where + ".vertices: each vertex needs three coordinates");
        p.polyline.vertices.push_back({v[0].get<double>(), v[1].get<double>(), v[2].get<double>()});
      }
      try {
        p.polyline.validate();
      } catch (const DomainError& e) {
        throw ParseError(where + ": " + e.what());
      }
      g.polylines.push_back(std::move(p));
    }
    return g;
  } catch (const json::exception& e) {
    throw ParseError(std::string("geometry: ") + e.what());
  }
}

GeometrySet read_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open geometry file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return geometry_from_json(j);
}

void write_geometry(const std::string& path, const GeometrySet& g) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write geometry file " + path);
  out << to_json(g).dump(1) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace qdesign::magnetics
