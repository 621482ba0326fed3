#include "taxelgraph/tactilesim/contact.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace taxelgraph {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Rotates p - center by -yaw about z, giving shape-local coordinates.
Vec3 to_local(Vec3 p, Vec3 center, double yaw_deg) {
  const Vec3 d = p - center;
  const double c = std::cos(yaw_deg * kDegToRad), s = std::sin(yaw_deg * kDegToRad);
  return {c * d.x + s * d.y, -s * d.x + c * d.y, d.z};
}

double box_distance(Vec3 local, Vec3 half) {
  const double qx = std::abs(local.x) - half.x;
  const double qy = std::abs(local.y) - half.y;
  const double qz = std::abs(local.z) - half.z;
  const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0), std::max(qz, 0.0));
  const double inside = std::min(std::max({qx, qy, qz}), 0.0);
  return outside + inside;
}

struct DistanceVisitor {
  Vec3 p;
  double operator()(const Sphere& s) const { return norm(p - s.center) - s.radius; }
  double operator()(const Box& b) const {
    return box_distance(to_local(p, b.center, b.yaw_deg), b.half_extents);
  }
  double operator()(const Cylinder& c) const {
    // Local x runs along the axis.
    const Vec3 local = to_local(p, c.center, c.yaw_deg);
    const double radial = std::hypot(local.y, local.z) - c.radius;
    const double axial = std::abs(local.x) - c.half_length;
    const double outside = std::hypot(std::max(radial, 0.0), std::max(axial, 0.0));
    return outside + std::min(std::max(radial, axial), 0.0);
  }
};

}  // namespace

double signed_distance(const Shape& shape, Vec3 point) {
  return std::visit(DistanceVisitor{point}, shape);
}

double signed_distance(std::span<const Shape> shapes, Vec3 point) {
  double best = std::numeric_limits<double>::infinity();
  for (const Shape& s : shapes) best = std::min(best, signed_distance(s, point));
  return best;
}

double noiseless_pressure(double signed_dist, double activation_radius) {
  if (!(activation_radius > 0.0)) {
    throw std::invalid_argument("activation radius must be positive");
  }
  return std::clamp((activation_radius - signed_dist) / activation_radius, 0.0, 1.0);
}

std::vector<double> contact_pressures(std::span<const TaxelSite> sites,
                                      std::span<const Shape> shapes, const ContactModel& model,
                                      Rng& rng) {
  std::vector<double> out(sites.size(), 0.0);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    double p = noiseless_pressure(signed_distance(shapes, sites[i].position),
                                  model.activation_radius);
    if (p > 0.0 && model.noise_fraction > 0.0) {
      p = std::clamp(p * uniform(rng, 1.0 - model.noise_fraction, 1.0 + model.noise_fraction), 0.0,
                     1.0);
    }
    out[i] = p;
  }
  return out;
}

PointSet activated_frame(std::span<const TaxelSite> sites, std::span<const double> pressures,
                         double threshold) {
  if (sites.size() != pressures.size()) {
    throw std::invalid_argument("activated_frame: sites and pressures differ in length");
  }
  PointSet frame;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (pressures[i] >= threshold) frame.push_back({sites[i].taxel_id, sites[i].position, pressures[i]});
  }
  return frame;
}

}  // namespace taxelgraph
