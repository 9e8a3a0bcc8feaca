#include "qdesign/magnetics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qdesign/constants.hpp"
#include "qdesign/errors.hpp"
#include "qdesign/quadrature.hpp"

namespace qdesign::magnetics {

using namespace qdesign::constants;

namespace {

constexpr double mu0_over_4pi_ph_per_um = mu0 / (4.0 * pi) * 1e6;

// Integral of 1/sqrt(s^2 + rho2) for s from a to b, written to avoid
// cancellation on either side of the foot point.
double inverse_distance_integral(double a, double b, double rho2) {
  if (a + b < 0.0) {
    const double t = -a;
    a = -b;
    b = t;
  }
  const double upper = b + std::sqrt(b * b + rho2);
  const double ra = std::sqrt(a * a + rho2);
  const double lower = a >= 0.0 ? a + ra : rho2 / (ra - a);
  return std::log(upper / lower);
}

// Line integral of 1/|r - x| along segment p0 -> p1 (unit direction u).
double segment_potential(Vec3 r, Vec3 p0, Vec3 u, double len) {
  const Vec3 d = r - p0;
  const double t = dot(d, u);
  const double rho2 = std::max(dot(d, d) - t * t, 0.0);
  return inverse_distance_integral(-t, len - t, rho2);
}

double segment_distance(Vec3 p1, Vec3 q1, Vec3 p2, Vec3 q2) {
  // Closest points of two segments (Ericson, Real-Time Collision Detection).
  const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
  double s = 0.0, t = 0.0;
  const double c = dot(d1, r);
  const double b = dot(d1, d2);
  const double denom = a * e - b * b;
  s = denom > 1e-14 * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
  t = (b * s + f) / e;
  if (t < 0.0) {
    t = 0.0;
    s = std::clamp(-c / a, 0.0, 1.0);
  } else if (t > 1.0) {
    t = 1.0;
    s = std::clamp((b - c) / a, 0.0, 1.0);
  }
  return norm((p1 + s * d1) - (p2 + t * d2));
}

}  // namespace

double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

void Polyline::validate() const {
  if (vertices.size() < 2) throw DomainError("polyline: need at least 2 vertices");
  for (const auto& v : vertices)
    if (!(std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z)))
      throw DomainError("polyline: non-finite vertex");
  for (std::size_t i = 0; i < segment_count(); ++i)
    if (norm(segment_end(i) - segment_start(i)) == 0.0) {
      std::ostringstream msg;
      msg << "polyline: zero-length segment " << i;
      throw DomainError(msg.str());
    }
}

std::size_t Polyline::segment_count() const {
  if (vertices.size() < 2) return 0;
  return closed ? vertices.size() : vertices.size() - 1;
}

double Polyline::length() const {
  double total = 0.0;
  for (std::size_t i = 0; i < segment_count(); ++i)
    total += norm(segment_end(i) - segment_start(i));
  return total;
}

Polyline reversed(const Polyline& p) {
  Polyline out = p;
  std::reverse(out.vertices.begin(), out.vertices.end());
  return out;
}

Polyline translated(const Polyline& p, Vec3 offset) {
  Polyline out = p;
  for (auto& v : out.vertices) v = v + offset;
  return out;
}

Polyline rotated(const Polyline& p, double angle, Vec3 center) {
  const double c = std::cos(angle), s = std::sin(angle);
  Polyline out = p;
  for (auto& v : out.vertices) {
    const Vec3 d = v - center;
    v = center + Vec3{c * d.x - s * d.y, s * d.x + c * d.y, d.z};
  }
  return out;
}

Polyline mirrored_x(const Polyline& p, double x0) {
  Polyline out = p;
  for (auto& v : out.vertices) v.x = 2.0 * x0 - v.x;
  return out;
}

Polyline refined(const Polyline& p, std::size_t factor) {
  if (factor < 1) throw DomainError("refined: factor must be >= 1");
  Polyline out;
  out.closed = p.closed;
  for (std::size_t i = 0; i < p.segment_count(); ++i) {
    const Vec3 a = p.segment_start(i), b = p.segment_end(i);
    for (std::size_t k = 0; k < factor; ++k)
      out.vertices.push_back(a + (static_cast<double>(k) / factor) * (b - a));
  }
  if (!p.closed) out.vertices.push_back(p.vertices.back());
  return out;
}

double min_distance(const Polyline& a, const Polyline& b) {
  double best = INFINITY;
  for (std::size_t i = 0; i < a.segment_count(); ++i)
    for (std::size_t j = 0; j < b.segment_count(); ++j)
      best = std::min(best, segment_distance(a.segment_start(i), a.segment_end(i),
                                             b.segment_start(j), b.segment_end(j)));
  return best;
}

void GradiometricLoop::validate() const {
  loop1.validate();
  loop2.validate();
  if (!loop1.closed || !loop2.closed) throw DomainError("gradiometer: loops must be closed");
  for (int o : orientation)
    if (o != 1 && o != -1) throw DomainError("gradiometer: orientation must be +1 or -1");
  if (orientation[0] == orientation[1])
    throw DomainError("gradiometer: loops need opposite winding senses");
}

double neumann_mutual(const Polyline& a, const Polyline& b, const NeumannOptions& options) {
  a.validate();
  b.validate();
  if (!a.closed || !b.closed) throw DomainError("neumann_mutual: loops must be closed");
  const double gap = min_distance(a, b);
  if (gap < options.min_separation) {
    std::ostringstream msg;
    msg << "neumann_mutual: loops " << (gap == 0.0 ? "touch or intersect" : "too close")
        << " (distance " << gap << " um, filament threshold " << options.min_separation
        << " um)";
    throw GeometryError(msg.str());
  }

  const auto& xg = numeric::gauss_legendre4_nodes;
  const auto& wg = numeric::gauss_legendre4_weights;
  const numeric::QuadratureOptions near_opt{.rel_tol = options.near_rel_tol,
                                            .abs_tol = 1e-300};
  std::vector<double> rows;
  rows.reserve(a.segment_count());
  std::vector<double> terms(b.segment_count());
  for (std::size_t i = 0; i < a.segment_count(); ++i) {
    const Vec3 pa = a.segment_start(i), qa = a.segment_end(i);
    const Vec3 da = qa - pa;
    const double la = norm(da);
    const Vec3 ua = (1.0 / la) * da;
    const Vec3 ma = 0.5 * (pa + qa);
    for (std::size_t j = 0; j < b.segment_count(); ++j) {
      const Vec3 pb = b.segment_start(j), qb = b.segment_end(j);
      const Vec3 db = qb - pb;
      const double lb = norm(db);
      const Vec3 ub = (1.0 / lb) * db;
      const double cosine = dot(ua, ub);
      if (cosine == 0.0) {
        terms[j] = 0.0;
        continue;
      }
      const double dist = norm(ma - 0.5 * (pb + qb));
      if (dist >= options.near_factor * std::max(la, lb)) {
        double sum = 0.0;
        for (int p = 0; p < 4; ++p) {
          const Vec3 ra = ma + (0.5 * la * xg[p]) * ua;
          for (int q = 0; q < 4; ++q) {
            const Vec3 rb = 0.5 * (pb + qb) + (0.5 * lb * xg[q]) * ub;
            sum += wg[p] * wg[q] / norm(ra - rb);
          }
        }
        terms[j] = cosine * 0.25 * la * lb * sum;
      } else {
        auto inner = [&](double s) { return segment_potential(pa + s * ua, pb, ub, lb); };
        terms[j] = cosine * numeric::integrate(inner, 0.0, la, near_opt).value;
      }
    }
    rows.push_back(numeric::compensated_sum(terms));
  }
  return mu0_over_4pi_ph_per_um * numeric::compensated_sum(rows);
}

double gradiometric_mutual(const GradiometricLoop& q, const Polyline& source,
                           const NeumannOptions& options) {
  q.validate();
  return q.orientation[0] * neumann_mutual(q.loop1, source, options) +
         q.orientation[1] * neumann_mutual(q.loop2, source, options);
}

double pair_mutual(const GradiometricLoop& a, const GradiometricLoop& b,
                   const NeumannOptions& options) {
  a.validate();
  b.validate();
  const Polyline* la[2] = {&a.loop1, &a.loop2};
  const Polyline* lb[2] = {&b.loop1, &b.loop2};
  double terms[4];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      terms[2 * i + j] =
          a.orientation[i] * b.orientation[j] * neumann_mutual(*la[i], *lb[j], options);
  return numeric::compensated_sum(terms);
}

void CouplingEstimate::validate() const {
  if (!(std::isfinite(m_ij_ph) && m_ij_ph >= 0.0))
    throw DomainError("coupling: M_ij must be non-negative");
  if (!(l_total_nh > 0.0)) throw DomainError("coupling: L must be positive");
  if (!(beta > 0.0)) throw DomainError("coupling: beta must be positive");
  if (!(g_ref_hz > 0.0)) throw DomainError("coupling: g_ref must be positive");
}

double z_coupling(const CouplingEstimate& est) {
  est.validate();
  return est.g_ref_hz * (est.m_ij_ph * 1e-3 / est.l_total_nh) / est.beta;
}

double flux_per_current(double m_net_ph) {
  if (!(m_net_ph > 0.0)) throw DomainError("flux_per_current: M must be positive");
  return flux_quantum / (m_net_ph * 1e-12) * 1e3;
}

Polyline half_annulus(double r_in, double r_out, bool upper, std::size_t arc_segments) {
  if (!(r_in > 0.0 && r_out > r_in)) throw DomainError("half_annulus: need 0 < r_in < r_out");
  if (arc_segments < 2) throw DomainError("half_annulus: need >= 2 arc segments");
  Polyline p;
  const double start = upper ? 0.0 : pi;
  const auto n = static_cast<double>(arc_segments);
  // Outer arc counterclockwise, then the inner arc back.
  for (std::size_t k = 0; k <= arc_segments; ++k) {
    const double t = start + pi * static_cast<double>(k) / n;
    p.vertices.push_back({r_out * std::cos(t), r_out * std::sin(t), 0.0});
  }
  for (std::size_t k = 0; k <= arc_segments; ++k) {
    const double t = start + pi - pi * static_cast<double>(k) / n;
    p.vertices.push_back({r_in * std::cos(t), r_in * std::sin(t), 0.0});
  }
  return p;
}

Polyline circle(double radius, std::size_t segments, Vec3 center) {
  if (!(radius > 0.0) || segments < 3) throw DomainError("circle: invalid radius or segments");
  Polyline p;
  for (std::size_t k = 0; k < segments; ++k) {
    const double t = two_pi * static_cast<double>(k) / static_cast<double>(segments);
    p.vertices.push_back(center + Vec3{radius * std::cos(t), radius * std::sin(t), 0.0});
  }
  return p;
}

GradiometricLoop reference_qubit(const ReferenceDimensions& dims, double rotation, Vec3 center) {
  GradiometricLoop q;
  q.loop1 = translated(rotated(half_annulus(dims.island_radius, dims.ring_inner_radius, true,
                                            dims.arc_segments), rotation), center);
  q.loop2 = translated(rotated(half_annulus(dims.island_radius, dims.ring_inner_radius, false,
                                            dims.arc_segments), rotation), center);
  return q;
}

Polyline reference_bias_line(const ReferenceDimensions& dims) {
  const double y = dims.ring_outer_radius + dims.bias_gap;
  const double h = 0.5 * dims.bias_length;
  const double y_ret = y + dims.bias_return_offset;
  Polyline p;
  p.vertices = {{-h, y, 0.0}, {h, y, 0.0}, {h, y_ret, 0.0}, {-h, y_ret, 0.0}};
  return p;
}

double qubit_pair_mutual(const GradiometricLoop& qubit, double footprint_radius, double gap,
                         double rotation, double placement, const NeumannOptions& options) {
  if (!(gap > 0.0)) throw DomainError("qubit pair: gap must be positive");
  const Vec3 origin{};
  GradiometricLoop a = qubit, b = qubit;
  a.loop1 = rotated(qubit.loop1, placement, origin);
  a.loop2 = rotated(qubit.loop2, placement, origin);
  const Vec3 shift{2.0 * footprint_radius + gap, 0.0, 0.0};
  b.loop1 = translated(rotated(qubit.loop1, placement + rotation, origin), shift);
  b.loop2 = translated(rotated(qubit.loop2, placement + rotation, origin), shift);
  return pair_mutual(a, b, options);
}

}  // namespace qdesign::magnetics
