#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "taxelgraph/pointset/pointset.h"
#include "taxelgraph/rng.h"
#include "taxelgraph/tactilesim/contact.h"

namespace taxelgraph {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

inline constexpr std::size_t kPushers = 4;
inline constexpr std::size_t kDiscs = 2;

enum class TaskLevel { kSimple, kMiddle, kHard };

std::string_view task_level_name(TaskLevel level);
TaskLevel parse_task_level(std::string_view name);  // throws UsageError

struct TaskConfig {
  TaskLevel level = TaskLevel::kSimple;
  double disturbance_sigma = 0.0;  // newtons
  int disturbance_period = 10;
  int hold_steps = 0;
  double success_angle = 180.0;  // degrees
  int max_steps = 200;

  static TaskConfig for_level(TaskLevel level);
};

// Planar dish: a circular wall, two discs and four radial pushers at 0, 90,
// 180, 270 degrees. Pusher k's face is a capsule (segment of half-width
// pusher_half_width, radius pusher_tip_radius) whose surface sits at radius
// dish_radius - extension * pusher_travel. Lengths in meters.
struct DishGeometry {
  double dish_radius = 0.04;
  double disc_radius = 0.015;
  double pusher_travel = 0.03;
  double pusher_tip_radius = 0.003;
  double pusher_half_width = 0.007;
  // Tangential shift of each pusher face towards the counter-clockwise side.
  double pusher_offset = 0.005;
  double max_speed = 0.05;  // extension units per step
  int substeps = 4;
  int solver_iterations = 8;
  double disturbance_compliance = 0.02;  // meters of displacement per newton
  std::size_t taxels_per_pusher = 8;
  ContactModel contact{0.0015, 0.1, kDefaultActivationThreshold};
  double reset_gap = 0.0005;
  double reset_jitter = 0.001;
};

struct EnvState {
  std::array<double, kPushers> extension{};
  std::array<double, kPushers> velocity{};
  std::array<double, kPushers> last_action{};
  // Summed disc displacement imposed by each pusher during the last step;
  // the planar stand-in for finger torque.
  std::array<double, kPushers> contact_force{};
  std::array<Vec2, kDiscs> discs{};
  int step_count = 0;
  double axis_angle = 0.0;        // degrees, direction of disc 1 - disc 0
  double cumulative_angle = 0.0;  // degrees, unwrapped and signed
  int hold_count = 0;
  bool done = false;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct RewardBreakdown {
  double r_angle = 0.0;
  double r_success = 0.0;
  double r_fail = 0.0;
  double total = 0.0;
};

// total = 0.5 * r_angle + 250 * r_success - 100 * r_fail.
RewardBreakdown make_reward(double r_angle, bool success, bool fail);

enum class Outcome { kRunning, kSuccess, kFall, kTimeout };
std::string_view outcome_name(Outcome outcome);

struct AngleUpdate {
  double angle_now = 0.0;  // degrees in (-180, 180]
  double delta = 0.0;      // signed short-arc rotation from previous_axis
};

// Throws std::invalid_argument if the two centers coincide.
AngleUpdate compute_angle(const std::array<Vec2, kDiscs>& discs, double previous_axis_deg);

struct TactileReading {
  PointSet frame;           // activated taxels, z = 0
  std::vector<double> raw;  // every taxel, id order
};

struct StepResult {
  TactileReading tactile;
  RewardBreakdown reward;
  Outcome outcome = Outcome::kRunning;
  bool done = false;
  bool disturbed = false;
};

class BaodingEnv {
 public:
  explicit BaodingEnv(TaskConfig task = {}, DishGeometry geometry = {});

  // Discs side by side at a random axis orientation near the center, pushers
  // retracted. The seed also drives disturbances and taxel noise.
  TactileReading reset(std::uint64_t seed);
  // Action: 4 pusher extension targets, clamped to [0, 1]. Throws
  // std::logic_error on a finished episode.
  StepResult step(std::span<const double> action);

  const EnvState& state() const { return state_; }
  // Replaces the state as-is (tests and scripted setups).
  void set_state(const EnvState& state) { state_ = state; }
  const TaskConfig& task() const { return task_; }
  const DishGeometry& geometry() const { return geometry_; }

  std::size_t taxel_count() const { return geometry_.taxels_per_pusher * kPushers; }
  // Taxel sites for the given extensions (ids pusher-major).
  std::vector<TaxelSite> taxel_sites(const std::array<double, kPushers>& extension) const;
  TactileReading read_taxels();

  bool disc_outside(std::size_t disc) const;

 private:
  void move_pushers(const std::array<double, kPushers>& target);
  void resolve_contacts(std::array<double, kPushers>* pushed);
  void disturb();

  TaskConfig task_;
  DishGeometry geometry_;
  EnvState state_;
  Rng rng_;
};

// Pusher geometry helpers shared with tests.
Vec2 pusher_axis(std::size_t pusher);     // outward radial unit vector
Vec2 pusher_tangent(std::size_t pusher);  // counter-clockwise unit vector

}  // namespace taxelgraph
