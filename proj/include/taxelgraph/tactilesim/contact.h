#pragma once

#include <span>
#include <variant>
#include <vector>

#include "taxelgraph/pointset/pointset.h"
#include "taxelgraph/rng.h"

namespace taxelgraph {

struct Sphere {
  Vec3 center;
  double radius = 0.0;
};

// Axis-aligned in z, rotated by yaw (degrees) about the vertical axis.
struct Box {
  Vec3 center;
  Vec3 half_extents;
  double yaw_deg = 0.0;
};

// Finite cylinder whose axis lies in the horizontal plane at yaw (degrees).
struct Cylinder {
  Vec3 center;
  double radius = 0.0;
  double half_length = 0.0;
  double yaw_deg = 0.0;
};

using Shape = std::variant<Sphere, Box, Cylinder>;

// Negative inside, zero on the surface, positive outside.
double signed_distance(const Shape& shape, Vec3 point);
// Minimum over shapes; +infinity for an empty list.
double signed_distance(std::span<const Shape> shapes, Vec3 point);

struct TaxelSite {
  int taxel_id = 0;
  Vec3 position;
};

struct ContactModel {
  double activation_radius = 0.001;
  double noise_fraction = 0.1;
  double activation_threshold = kDefaultActivationThreshold;
};

// clamp((r_a - d) / r_a, 0, 1) for signed distance d.
double noiseless_pressure(double signed_dist, double activation_radius);

// Full pressure vector in site order. Each non-zero reading is multiplied by
// an independent U[1 - f, 1 + f] draw and clamped to [0, 1]; draws are taken
// only for non-zero readings.
std::vector<double> contact_pressures(std::span<const TaxelSite> sites,
                                      std::span<const Shape> shapes, const ContactModel& model,
                                      Rng& rng);

// Activated subset of a pressure vector (sites and pressures in the same order).
PointSet activated_frame(std::span<const TaxelSite> sites, std::span<const double> pressures,
                         double threshold = kDefaultActivationThreshold);

}  // namespace taxelgraph
