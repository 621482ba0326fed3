#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "taxelgraph/tactilesim/contact.h"

namespace taxelgraph {

// Rectangular taxel array. Taxel (r, c) sits at
//   center + (c - (cols - 1) / 2) * pitch * col_axis
//          + (r - (rows - 1) / 2) * pitch * row_axis
// and cells listed in `skipped` are left out.
struct Pad {
  std::string name;
  Vec3 center;
  Vec3 row_axis;
  Vec3 col_axis;
  Vec3 normal;  // pointing away from the pad surface, towards objects
  std::size_t rows = 0;
  std::size_t cols = 0;
  double pitch = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> skipped;
  // How far the pad can close along its normal during a grasp; 0 = fixed.
  double travel = 0.0;
};

// Object sizes and pose ranges a layout is generated with.
struct GraspRanges {
  double sphere_radius = 0.012;
  double cube_edge = 0.02;
  double cylinder_radius = 0.008;
  double cylinder_length = 0.03;
  double lateral_half_range = 0.009;  // object center x, y in [-h, h]
  double min_penetration = 0.0002;
  double max_penetration = 0.0015;
  // Object height above resting on the palm, in [-max_penetration, max_lift].
  double max_lift = 0.006;
};

struct HandLayout {
  std::string id;
  std::vector<Pad> pads;
  // Taxel ids are 0..total-1, assigned pad by pad, row-major within a pad.
  std::vector<TaxelSite> taxels;
  std::vector<std::size_t> pad_of_taxel;
  GraspRanges ranges;

  std::size_t total_taxels() const { return taxels.size(); }
  std::vector<Vec3> rest_positions() const;
};

HandLayout build_layout(std::string id, std::vector<Pad> pads, GraspRanges ranges);

// "desk": palm 6x6 plus one 6x6 finger pad and one 4x4 thumb pad, 88 taxels.
// "allegro": 4 fingertips 12x6, 7 inner-phalange pads 6x6, 113-taxel palm; 653.
HandLayout hand_layout(std::string_view id);
std::vector<std::string> layout_ids();

// Taxel sites with every movable pad closed onto the object: each pad slides
// along its normal until its deepest taxel is U[min, max] penetration inside
// the object, or until it runs out of travel.
std::vector<TaxelSite> grasp_taxels(const HandLayout& layout, const Shape& object, Rng& rng);

struct CalibrationResult {
  double activation_radius = 0.0;
  double median_active = 0.0;
};

// Single-pad sphere contacts: a sphere of the layout's radius pressed
// U[min, max] penetration into a random pad at a random in-pad position.
// Returns the active-taxel count of each contact.
std::vector<std::size_t> single_pad_contact_counts(const HandLayout& layout,
                                                   double activation_radius,
                                                   double noise_fraction, std::size_t contacts,
                                                   std::uint64_t seed);

// Bisection on the activation radius until the median count over
// `contacts` single-pad contacts lies in [4, 5].
CalibrationResult calibrate_activation_radius(const HandLayout& layout, double noise_fraction,
                                              std::size_t contacts = 1000,
                                              std::uint64_t seed = 0xCA11B);

}  // namespace taxelgraph
