#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qdesign/magnetics.hpp"

namespace qdesign::magnetics {

// Geometry file layout (JSON, lengths in um):
//
//   {
//     "format": "qdesign-geometry", "version": 1, "units": "um",
//     "footprint_radius": 120,
//     "polylines": [
//       {"name": "qubit.loop1", "closed": true, "winding": 1,
//        "vertices": [[x, y, z], ...]},
//       ...
//     ]
//   }
//
// "winding" is the sign the loop carries in a gradiometric sum. The names
// qubit.loop1, qubit.loop2 and bias_line are looked up by the toolkit.

struct NamedPolyline {
  std::string name;
  Polyline polyline;
  int winding = 1;
};

struct GeometrySet {
  double footprint_radius = 0.0;
  std::vector<NamedPolyline> polylines;

  const NamedPolyline& find(const std::string& name) const;
  GradiometricLoop qubit() const;
  Polyline bias_line() const;
};

GeometrySet reference_geometry(const ReferenceDimensions& dims = {});

nlohmann::json to_json(const GeometrySet& g);
GeometrySet geometry_from_json(const nlohmann::json& j);

GeometrySet read_geometry(const std::string& path);
void write_geometry(const std::string& path, const GeometrySet& g);

}  // namespace qdesign::magnetics
