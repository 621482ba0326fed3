#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "taxelgraph/baoding2d/env.h"
#include "taxelgraph/perception/model.h"

namespace taxelgraph {

enum class ObservationKind { kGroundTruth, kNoPerception, kNoise, kPerception, kFingerTorque };

struct ObservationMode {
  ObservationKind kind = ObservationKind::kGroundTruth;
  double noise_mm = 0.0;  // kNoise: uniform [-b, b] per coordinate
  // kPerception: frozen model predicting canonical disc centers. Not owned.
  const PerceptionModel* perception = nullptr;
};

// "groundtruth", "no_perception", "noise(<mm>)" (or "noise<mm>"), "perception"
// (alias "tacgnn"), "finger_torque". Throws UsageError otherwise.
ObservationMode parse_observation_mode(std::string_view name);
std::string observation_mode_name(const ObservationMode& mode);

struct Observation {
  ObservationKind kind = ObservationKind::kGroundTruth;
  std::array<double, kPushers> extension{};
  std::array<double, kPushers> velocity{};
  std::array<double, kPushers> last_action{};
  // Disc centers (x0, y0, x1, y1) in meters, per-pusher contact force for
  // kFingerTorque, empty for kNoPerception.
  std::vector<double> object_info;
};

// 12 + 4 values, or 12 for kNoPerception.
std::size_t observation_width(ObservationKind kind);

// Disc centers ordered by x then y: the discs are interchangeable, so this is
// the label the perception model learns.
std::vector<double> canonical_disc_label(const std::array<Vec2, kDiscs>& discs);

// Throws std::invalid_argument for kPerception without a model.
Observation make_observation(const EnvState& state, const TactileReading& tactile,
                             const ObservationMode& mode, Rng& rng);

// Flat, roughly unit-scaled policy input. Disc centers enter as their
// midpoint and the axis at doubled angle, which is invariant to disc order.
std::vector<double> policy_features(const Observation& obs, const DishGeometry& geometry);

// Perception training sample for the current step.
GraspSample perception_sample(const TactileReading& tactile, const EnvState& state);

// Model spec for disc-center regression on the pusher taxel strips.
ModelSpec baoding_perception_spec(ModelKind kind, const DishGeometry& geometry);

}  // namespace taxelgraph
