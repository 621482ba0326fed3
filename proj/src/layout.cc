#include "taxelgraph/tactilesim/layout.h"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "taxelgraph/errors.h"

namespace taxelgraph {

namespace {

constexpr double kMm = 0.001;

Pad make_pad(std::string name, Vec3 center, Vec3 row_axis, Vec3 col_axis, Vec3 normal,
             std::size_t rows, std::size_t cols, double pitch, double travel = 0.0) {
  return {std::move(name), center, row_axis, col_axis, normal, rows, cols, pitch, {}, travel};
}

HandLayout desk_layout() {
  const double w = 32 * kMm;
  std::vector<Pad> pads = {
      make_pad("palm", {0, 0, 0}, {0, 1, 0}, {1, 0, 0}, {0, 0, 1}, 6, 6, 5 * kMm),
      make_pad("finger", {w, 0, 15 * kMm}, {0, 0, 1}, {0, 1, 0}, {-1, 0, 0}, 6, 6, 5 * kMm, w),
      make_pad("thumb", {-w, 0, 12 * kMm}, {0, 0, 1}, {0, 1, 0}, {1, 0, 0}, 4, 4, 5 * kMm, w),
  };
  return build_layout("desk", std::move(pads), GraspRanges{});
}

HandLayout allegro_layout() {
  std::vector<Pad> pads;
  Pad palm = make_pad("palm", {0, 0, 0}, {0, 1, 0}, {1, 0, 0}, {0, 0, 1}, 11, 11, 4 * kMm);
  palm.skipped = {{0, 0}, {0, 1}, {0, 10}, {0, 9}, {10, 0}, {10, 1}, {10, 10}, {10, 9}};
  pads.push_back(palm);
  const double finger_x = 40 * kMm;
  const double pitch = 2.5 * kMm;
  const char* fingers[] = {"index", "middle", "ring"};
  const double finger_y[] = {-14 * kMm, 0.0, 14 * kMm};
  for (int f = 0; f < 3; ++f) {
    const std::string n = fingers[f];
    const Vec3 inward = {-1, 0, 0};
    pads.push_back(make_pad(n + "_proximal", {finger_x, finger_y[f], 10 * kMm}, {0, 0, 1},
                            {0, 1, 0}, inward, 6, 6, pitch, finger_x));
    pads.push_back(make_pad(n + "_middle", {finger_x, finger_y[f], 27 * kMm}, {0, 0, 1},
                            {0, 1, 0}, inward, 6, 6, pitch, finger_x));
    pads.push_back(make_pad(n + "_tip", {finger_x, finger_y[f], 47 * kMm}, {0, 0, 1}, {0, 1, 0},
                            inward, 12, 6, pitch, finger_x));
  }
  pads.push_back(make_pad("thumb_proximal", {-finger_x, 0, 10 * kMm}, {0, 0, 1}, {0, 1, 0},
                          {1, 0, 0}, 6, 6, pitch, finger_x));
  pads.push_back(make_pad("thumb_tip", {-finger_x, 0, 30 * kMm}, {0, 0, 1}, {0, 1, 0}, {1, 0, 0},
                          12, 6, pitch, finger_x));
  GraspRanges ranges;
  ranges.sphere_radius = 22 * kMm;
  ranges.cube_edge = 36 * kMm;
  ranges.cylinder_radius = 15 * kMm;
  ranges.cylinder_length = 50 * kMm;
  ranges.lateral_half_range = 12 * kMm;
  // Finer pitch and a larger sphere: shallower presses keep the footprint small.
  ranges.min_penetration = 0.02 * kMm;
  ranges.max_penetration = 0.12 * kMm;
  return build_layout("allegro", std::move(pads), ranges);
}

Vec3 pad_point(const Pad& pad, double r, double c) {
  const double dr = (r - 0.5 * static_cast<double>(pad.rows - 1)) * pad.pitch;
  const double dc = (c - 0.5 * static_cast<double>(pad.cols - 1)) * pad.pitch;
  return pad.center + dc * pad.col_axis + dr * pad.row_axis;
}

double median(std::vector<std::size_t> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return static_cast<double>(values[n / 2]);
  return 0.5 * static_cast<double>(values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::vector<Vec3> HandLayout::rest_positions() const {
  std::vector<Vec3> out;
  out.reserve(taxels.size());
  for (const auto& t : taxels) out.push_back(t.position);
  return out;
}

HandLayout build_layout(std::string id, std::vector<Pad> pads, GraspRanges ranges) {
  HandLayout layout;
  layout.id = std::move(id);
  layout.ranges = ranges;
  for (std::size_t p = 0; p < pads.size(); ++p) {
    const Pad& pad = pads[p];
    if (pad.rows == 0 || pad.cols == 0 || !(pad.pitch > 0.0)) {
      throw std::invalid_argument("pad '" + pad.name + "' has no taxels");
    }
    for (std::size_t r = 0; r < pad.rows; ++r) {
      for (std::size_t c = 0; c < pad.cols; ++c) {
        if (std::find(pad.skipped.begin(), pad.skipped.end(), std::pair{r, c}) != pad.skipped.end()) {
          continue;
        }
        layout.taxels.push_back({static_cast<int>(layout.taxels.size()),
                                 pad_point(pad, static_cast<double>(r), static_cast<double>(c))});
        layout.pad_of_taxel.push_back(p);
      }
    }
  }
  layout.pads = std::move(pads);
  return layout;
}

HandLayout hand_layout(std::string_view id) {
  if (id == "desk") return desk_layout();
  if (id == "allegro") return allegro_layout();
  throw UsageError("unknown layout '" + std::string(id) + "' (desk, allegro)");
}

std::vector<std::string> layout_ids() { return {"desk", "allegro"}; }

std::vector<TaxelSite> grasp_taxels(const HandLayout& layout, const Shape& object, Rng& rng) {
  const GraspRanges& g = layout.ranges;
  std::vector<TaxelSite> sites = layout.taxels;
  for (std::size_t p = 0; p < layout.pads.size(); ++p) {
    const Pad& pad = layout.pads[p];
    if (pad.travel <= 0.0) continue;
    const double depth = uniform(rng, g.min_penetration, g.max_penetration);
    std::vector<std::size_t> members;
    for (std::size_t t = 0; t < sites.size(); ++t) {
      if (layout.pad_of_taxel[t] == p) members.push_back(t);
    }
    // Deepest-taxel signed distance after closing by `shift`; non-increasing
    // in shift until the pad passes the object's middle.
    auto deepest = [&](double shift) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t t : members) {
        best = std::min(best, signed_distance(object, sites[t].position + shift * pad.normal));
      }
      return best;
    };
    double shift = pad.travel;
    if (deepest(0.0) <= -depth) {
      shift = 0.0;
    } else if (deepest(pad.travel) <= -depth) {
      double lo = 0.0, hi = pad.travel;
      for (int iter = 0; iter < 60; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (deepest(mid) <= -depth ? hi : lo) = mid;
      }
      shift = hi;
    }
    for (std::size_t t : members) sites[t].position = sites[t].position + shift * pad.normal;
  }
  return sites;
}

std::vector<std::size_t> single_pad_contact_counts(const HandLayout& layout,
                                                   double activation_radius,
                                                   double noise_fraction, std::size_t contacts,
                                                   std::uint64_t seed) {
  const GraspRanges& g = layout.ranges;
  ContactModel model{activation_radius, noise_fraction, kDefaultActivationThreshold};
  std::vector<std::size_t> counts;
  counts.reserve(contacts);
  for (std::size_t i = 0; i < contacts; ++i) {
    Rng rng = make_rng(seed, i);
    const std::size_t p = std::uniform_int_distribution<std::size_t>(0, layout.pads.size() - 1)(rng);
    const Pad& pad = layout.pads[p];
    // Stay one pitch inside the pad border so the footprint is not clipped.
    const double r_lo = std::min(1.0, 0.5 * static_cast<double>(pad.rows - 1));
    const double c_lo = std::min(1.0, 0.5 * static_cast<double>(pad.cols - 1));
    const double r = uniform(rng, r_lo, static_cast<double>(pad.rows - 1) - r_lo);
    const double c = uniform(rng, c_lo, static_cast<double>(pad.cols - 1) - c_lo);
    const double depth = uniform(rng, g.min_penetration, g.max_penetration);
    const Shape sphere =
        Sphere{pad_point(pad, r, c) + (g.sphere_radius - depth) * pad.normal, g.sphere_radius};
    std::vector<TaxelSite> sites;
    for (std::size_t t = 0; t < layout.taxels.size(); ++t) {
      if (layout.pad_of_taxel[t] == p) sites.push_back(layout.taxels[t]);
    }
    const auto pressures = contact_pressures(sites, std::span(&sphere, 1), model, rng);
    counts.push_back(activated_frame(sites, pressures).size());
  }
  return counts;
}

CalibrationResult calibrate_activation_radius(const HandLayout& layout, double noise_fraction,
                                              std::size_t contacts, std::uint64_t seed) {
  double max_pitch = 0.0;
  for (const auto& pad : layout.pads) max_pitch = std::max(max_pitch, pad.pitch);
  double lo = 1e-6, hi = 4.0 * max_pitch;
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double med =
        median(single_pad_contact_counts(layout, mid, noise_fraction, contacts, seed));
    if (med < 4.0) {
      lo = mid;
    } else if (med > 5.0) {
      hi = mid;
    } else {
      return {mid, med};
    }
  }
  throw NumericError("activation radius calibration did not reach a median of 4-5 taxels");
}

}  // namespace taxelgraph
