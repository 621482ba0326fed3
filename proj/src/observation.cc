#include "taxelgraph/baoding2d/observation.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "taxelgraph/errors.h"
#include "taxelgraph/numeric_text.h"

namespace taxelgraph {

namespace {

// Typical per-step pusher displacement; scales finger_torque features.
constexpr double kForceScale = 0.005;

double parse_noise_bound(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(v >= 0.0)) {
    throw UsageError("bad noise bound '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

ObservationMode parse_observation_mode(std::string_view name) {
  ObservationMode m;
  if (name == "groundtruth") {
    m.kind = ObservationKind::kGroundTruth;
  } else if (name == "no_perception") {
    m.kind = ObservationKind::kNoPerception;
  } else if (name == "perception" || name == "tacgnn") {
    m.kind = ObservationKind::kPerception;
  } else if (name == "finger_torque") {
    m.kind = ObservationKind::kFingerTorque;
  } else if (name.starts_with("noise")) {
    std::string_view bound = name.substr(5);
    if (bound.starts_with("(") && bound.ends_with(")")) bound = bound.substr(1, bound.size() - 2);
    if (bound.starts_with("_")) bound.remove_prefix(1);
    m.kind = ObservationKind::kNoise;
    m.noise_mm = parse_noise_bound(bound);
  } else {
    throw UsageError("unknown observation mode '" + std::string(name) +
                     "' (groundtruth, no_perception, noise(<mm>), perception, finger_torque)");
  }
  return m;
}

std::string observation_mode_name(const ObservationMode& mode) {
  switch (mode.kind) {
    case ObservationKind::kGroundTruth: return "groundtruth";
    case ObservationKind::kNoPerception: return "no_perception";
    case ObservationKind::kPerception: return "perception";
    case ObservationKind::kFingerTorque: return "finger_torque";
    case ObservationKind::kNoise: {
      std::string s = "noise(";
      append_double(s, mode.noise_mm);
      return s + ")";
    }
  }
  return "unknown";
}

std::size_t observation_width(ObservationKind kind) {
  return kind == ObservationKind::kNoPerception ? 3 * kPushers : 3 * kPushers + 4;
}

std::vector<double> canonical_disc_label(const std::array<Vec2, kDiscs>& discs) {
  Vec2 a = discs[0], b = discs[1];
  if (std::pair{b.x, b.y} < std::pair{a.x, a.y}) std::swap(a, b);
  return {a.x, a.y, b.x, b.y};
}

Observation make_observation(const EnvState& state, const TactileReading& tactile,
                             const ObservationMode& mode, Rng& rng) {
  Observation obs;
  obs.kind = mode.kind;
  obs.extension = state.extension;
  obs.velocity = state.velocity;
  obs.last_action = state.last_action;
  switch (mode.kind) {
    case ObservationKind::kGroundTruth:
      obs.object_info = canonical_disc_label(state.discs);
      break;
    case ObservationKind::kNoPerception:
      break;
    case ObservationKind::kNoise: {
      obs.object_info = canonical_disc_label(state.discs);
      const double b = mode.noise_mm * 0.001;
      for (double& v : obs.object_info) v += uniform(rng, -b, b);
      break;
    }
    case ObservationKind::kPerception: {
      if (mode.perception == nullptr) {
        throw std::invalid_argument("perception observation mode needs a model");
      }
      obs.object_info = mode.perception->predict(perception_sample(tactile, state));
      break;
    }
    case ObservationKind::kFingerTorque:
      obs.object_info.assign(state.contact_force.begin(), state.contact_force.end());
      break;
  }
  return obs;
}

std::vector<double> policy_features(const Observation& obs, const DishGeometry& geometry) {
  std::vector<double> f;
  f.reserve(3 * kPushers + obs.object_info.size());
  for (double v : obs.extension) f.push_back(v);
  for (double v : obs.velocity) f.push_back(v / geometry.max_speed);
  for (double v : obs.last_action) f.push_back(v);
  if (obs.kind == ObservationKind::kFingerTorque) {
    for (double v : obs.object_info) f.push_back(v / kForceScale);
    return f;
  }
  if (obs.object_info.empty()) return f;
  if (obs.object_info.size() != 4) throw std::invalid_argument("expected two disc centers");
  // Midpoint plus the axis at doubled angle: swapping the discs, which the
  // canonical ordering does whenever the axis passes vertical, leaves this
  // unchanged.
  const double r = geometry.dish_radius;
  const double* c = obs.object_info.data();
  const double dx = c[2] - c[0], dy = c[3] - c[1];
  const double len = std::hypot(dx, dy);
  f.push_back(0.5 * (c[0] + c[2]) / r);
  f.push_back(0.5 * (c[1] + c[3]) / r);
  f.push_back(len > 0.0 ? (dx * dx - dy * dy) / (len * r) : 0.0);
  f.push_back(len > 0.0 ? 2.0 * dx * dy / (len * r) : 0.0);
  return f;
}

GraspSample perception_sample(const TactileReading& tactile, const EnvState& state) {
  return {tactile.frame, tactile.raw, canonical_disc_label(state.discs)};
}

ModelSpec baoding_perception_spec(ModelKind kind, const DishGeometry& geometry) {
  BaodingEnv env(TaskConfig{}, geometry);
  ModelSpec spec;
  spec.kind = kind;
  spec.target = {4, 0};
  spec.layout_id = "baoding";
  for (const TaxelSite& s : env.taxel_sites({})) spec.rest_positions.push_back(s.position);
  return spec;
}

}  // namespace taxelgraph
