#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace qdesign::magnetics {

// Lengths in um, inductances in pH.
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm(Vec3 a);

struct Polyline {
  std::vector<Vec3> vertices;
  bool closed = true;  // closing segment from last to first vertex is implicit

  /// >= 2 vertices and no zero-length segment; DomainError otherwise.
  void validate() const;
  std::size_t segment_count() const;
  Vec3 segment_start(std::size_t i) const { return vertices[i]; }
  Vec3 segment_end(std::size_t i) const { return vertices[(i + 1) % vertices.size()]; }
  double length() const;
};

Polyline reversed(const Polyline& p);
Polyline translated(const Polyline& p, Vec3 offset);
/// Rotation about the z axis through `center`.
Polyline rotated(const Polyline& p, double angle, Vec3 center = {});
/// Mirror image through the plane x = x0.
Polyline mirrored_x(const Polyline& p, double x0);
/// Each segment split into `factor` equal parts.
Polyline refined(const Polyline& p, std::size_t factor);

/// Shortest distance between any two segments of a and b.
double min_distance(const Polyline& a, const Polyline& b);

struct GradiometricLoop {
  Polyline loop1;
  Polyline loop2;
  std::array<int, 2> orientation{+1, -1};

  void validate() const;
};

struct NeumannOptions {
  double min_separation = 1.0;  // filament validity threshold, um
  double near_factor = 3.0;     // near pair: distance < factor * segment length
  double near_rel_tol = 1e-10;
};

/// Neumann double line integral between two closed filaments, in pH.
/// Far segment pairs use 4x4 Gauss-Legendre points; near pairs integrate the
/// inner segment in closed form and the outer one adaptively.
double neumann_mutual(const Polyline& a, const Polyline& b, const NeumannOptions& options = {});

/// o1 M(loop1, source) + o2 M(loop2, source).
double gradiometric_mutual(const GradiometricLoop& q, const Polyline& source,
                           const NeumannOptions& options = {});

/// Sum over o_i o_j M(loop_i of a, loop_j of b).
double pair_mutual(const GradiometricLoop& a, const GradiometricLoop& b,
                   const NeumannOptions& options = {});

struct CouplingEstimate {
  double m_ij_ph = 0.0;
  double l_total_nh = 0.0;
  double beta = 0.0;     // C_g / C
  double g_ref_hz = 0.0; // capacitive coupling that corresponds to beta

  void validate() const;
};

/// g_z = g_ref (M_ij / L) / beta, in Hz.
double z_coupling(const CouplingEstimate& est);

/// Bias current per flux quantum in mA for a net mutual inductance in pH.
double flux_per_current(double m_net_ph);

/// Concentric transmon loop dimensions. The two SQUID loops are the half
/// annuli between the island edge and the ring's inner edge, closed through
/// the junction gaps on the junction axis.
struct ReferenceDimensions {
  double island_radius = 70.0;
  double ring_inner_radius = 90.0;
  double ring_outer_radius = 120.0;
  double bias_gap = 100.0;        // bias line to ring outer edge
  double bias_length = 2000.0;
  double bias_return_offset = 1000.0;
  std::size_t arc_segments = 180;
};

/// Half annulus on the +y side (upper = true) or -y side, counterclockwise.
Polyline half_annulus(double r_in, double r_out, bool upper, std::size_t arc_segments);
Polyline circle(double radius, std::size_t segments, Vec3 center = {});

/// Gradiometric pair with the junction axis along x, rotated by `rotation`
/// and moved to `center`.
GradiometricLoop reference_qubit(const ReferenceDimensions& dims, double rotation = 0.0,
                                 Vec3 center = {});

/// Straight bias line parallel to x at distance bias_gap from the ring edge
/// (y > 0 side), closed by a return conductor bias_return_offset farther out.
Polyline reference_bias_line(const ReferenceDimensions& dims);

/// Mutual inductance between two qubits whose outer rings are `gap` apart,
/// centers on the x axis, the second rotated by `rotation`. Both qubits are
/// additionally rotated by `placement` (0: junction axes along the line of
/// centers).
double qubit_pair_mutual(const GradiometricLoop& qubit, double footprint_radius, double gap,
                         double rotation, double placement = 0.0,
                         const NeumannOptions& options = {});

}  // namespace qdesign::magnetics
