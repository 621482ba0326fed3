#include "taxelgraph/baoding2d/env.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "taxelgraph/errors.h"

namespace taxelgraph {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double wrap_degrees(double a) {
  a = std::fmod(a, 360.0);
  if (a > 180.0) a -= 360.0;
  if (a <= -180.0) a += 360.0;
  return a;
}

struct Capsule {
  Vec2 center;
  Vec2 tangent;
  double half_width = 0.0;
  double radius = 0.0;
};

Capsule pusher_capsule(const DishGeometry& g, std::size_t k, double extension) {
  const double rho = g.dish_radius + g.pusher_tip_radius - extension * g.pusher_travel;
  return {rho * pusher_axis(k) + g.pusher_offset * pusher_tangent(k), pusher_tangent(k),
          g.pusher_half_width, g.pusher_tip_radius};
}

// Penetration of a disc into a capsule and the push-out direction.
double capsule_overlap(const Capsule& cap, Vec2 center, double disc_radius, std::size_t k,
                       Vec2* normal) {
  const double lateral = std::clamp(dot(center - cap.center, cap.tangent), -cap.half_width,
                                    cap.half_width);
  const Vec2 closest = cap.center + lateral * cap.tangent;
  const Vec2 d = center - closest;
  const double dist = norm(d);
  *normal = dist > 1e-12 ? (1.0 / dist) * d : -1.0 * pusher_axis(k);
  return disc_radius + cap.radius - dist;
}

}  // namespace

Vec2 pusher_axis(std::size_t pusher) {
  static constexpr Vec2 kAxes[kPushers] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return kAxes[pusher];
}

Vec2 pusher_tangent(std::size_t pusher) {
  const Vec2 u = pusher_axis(pusher);
  return {-u.y, u.x};
}

std::string_view task_level_name(TaskLevel level) {
  switch (level) {
    case TaskLevel::kSimple: return "simple";
    case TaskLevel::kMiddle: return "middle";
    case TaskLevel::kHard: return "hard";
  }
  return "unknown";
}

TaskLevel parse_task_level(std::string_view name) {
  if (name == "simple") return TaskLevel::kSimple;
  if (name == "middle") return TaskLevel::kMiddle;
  if (name == "hard") return TaskLevel::kHard;
  throw UsageError("unknown task level '" + std::string(name) + "' (simple, middle, hard)");
}

TaskConfig TaskConfig::for_level(TaskLevel level) {
  TaskConfig c;
  c.level = level;
  if (level != TaskLevel::kSimple) c.disturbance_sigma = 0.1;
  if (level == TaskLevel::kHard) c.hold_steps = 5;
  return c;
}

std::string_view outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::kRunning: return "running";
    case Outcome::kSuccess: return "success";
    case Outcome::kFall: return "fall";
    case Outcome::kTimeout: return "timeout";
  }
  return "unknown";
}

RewardBreakdown make_reward(double r_angle, bool success, bool fail) {
  RewardBreakdown r;
  r.r_angle = r_angle;
  r.r_success = success ? 1.0 : 0.0;
  r.r_fail = fail ? 1.0 : 0.0;
  r.total = 0.5 * r.r_angle + 250.0 * r.r_success - 100.0 * r.r_fail;
  return r;
}

AngleUpdate compute_angle(const std::array<Vec2, kDiscs>& discs, double previous_axis_deg) {
  const Vec2 d = discs[1] - discs[0];
  if (norm(d) < 1e-12) throw std::invalid_argument("compute_angle: disc centers coincide");
  AngleUpdate u;
  u.angle_now = std::atan2(d.y, d.x) * kRadToDeg;
  u.delta = wrap_degrees(u.angle_now - previous_axis_deg);
  return u;
}

BaodingEnv::BaodingEnv(TaskConfig task, DishGeometry geometry)
    : task_(task), geometry_(geometry), rng_(make_rng(0, 0)) {
  if (!(geometry_.disc_radius > 0.0) || 2.0 * geometry_.disc_radius >= geometry_.dish_radius) {
    throw std::invalid_argument("two discs must fit side by side in the dish");
  }
  if (geometry_.substeps < 1 || geometry_.solver_iterations < 1) {
    throw std::invalid_argument("substeps and solver iterations must be >= 1");
  }
  if (task_.max_steps < 1 || task_.disturbance_period < 1) {
    throw std::invalid_argument("max_steps and disturbance_period must be >= 1");
  }
}

TactileReading BaodingEnv::reset(std::uint64_t seed) {
  rng_ = make_rng(seed, 0);
  const DishGeometry& g = geometry_;
  state_ = EnvState{};
  const double theta = uniform(rng_, 0.0, 2.0 * std::numbers::pi);
  const Vec2 axis{std::cos(theta), std::sin(theta)};
  const Vec2 mid{uniform(rng_, -g.reset_jitter, g.reset_jitter),
                 uniform(rng_, -g.reset_jitter, g.reset_jitter)};
  const double half_sep = g.disc_radius + 0.5 * (g.reset_gap + uniform(rng_, 0.0, g.reset_jitter));
  state_.discs = {mid - half_sep * axis, mid + half_sep * axis};
  state_.axis_angle = compute_angle(state_.discs, 0.0).angle_now;
  return read_taxels();
}

StepResult BaodingEnv::step(std::span<const double> action) {
  if (state_.done) throw std::logic_error("step called on a finished episode");
  if (action.size() != kPushers) throw std::invalid_argument("action must have 4 values");
  std::array<double, kPushers> target{};
  for (std::size_t k = 0; k < kPushers; ++k) {
    const double a = std::isfinite(action[k]) ? action[k] : 0.0;
    target[k] = std::clamp(a, 0.0, 1.0);
  }
  const auto before = state_.extension;
  move_pushers(target);
  for (std::size_t k = 0; k < kPushers; ++k) {
    state_.velocity[k] = state_.extension[k] - before[k];
  }
  state_.last_action = target;
  ++state_.step_count;

  StepResult out;
  if (task_.disturbance_sigma > 0.0 && state_.step_count % task_.disturbance_period == 0) {
    disturb();
    out.disturbed = true;
  }

  const AngleUpdate angle = compute_angle(state_.discs, state_.axis_angle);
  state_.axis_angle = angle.angle_now;
  state_.cumulative_angle += angle.delta;

  bool success = false, fail = false;
  if (disc_outside(0) || disc_outside(1)) {
    fail = true;
    out.outcome = Outcome::kFall;
  } else {
    state_.hold_count = state_.cumulative_angle > task_.success_angle ? state_.hold_count + 1 : 0;
    if (state_.hold_count >= std::max(1, task_.hold_steps)) {
      success = true;
      out.outcome = Outcome::kSuccess;
    } else if (state_.step_count >= task_.max_steps) {
      fail = true;
      out.outcome = Outcome::kTimeout;
    }
  }
  out.reward = make_reward(std::abs(angle.delta), success, fail);
  out.done = success || fail;
  state_.done = out.done;
  out.tactile = read_taxels();
  return out;
}

bool BaodingEnv::disc_outside(std::size_t disc) const {
  return norm(state_.discs.at(disc)) > geometry_.dish_radius;
}

void BaodingEnv::move_pushers(const std::array<double, kPushers>& target) {
  const DishGeometry& g = geometry_;
  const double max_delta = g.max_speed / g.substeps;
  state_.contact_force.fill(0.0);
  for (int s = 0; s < g.substeps; ++s) {
    const auto previous = state_.extension;
    for (std::size_t k = 0; k < kPushers; ++k) {
      state_.extension[k] += std::clamp(target[k] - state_.extension[k], -max_delta, max_delta);
    }
    resolve_contacts(&state_.contact_force);
    // A pusher still buried in a disc is jammed. It is back-drivable: it ends
    // at the deepest clear extension between its previous and commanded one,
    // or gives way further if a disc was pushed into it.
    for (std::size_t k = 0; k < kPushers; ++k) {
      auto clear = [&](double ext) {
        const Capsule cap = pusher_capsule(g, k, ext);
        Vec2 n;
        for (const Vec2& c : state_.discs) {
          if (capsule_overlap(cap, c, g.disc_radius, k, &n) > 1e-9) return false;
        }
        return true;
      };
      if (clear(state_.extension[k])) continue;
      double lo = std::min(previous[k], state_.extension[k]);
      double hi = state_.extension[k];
      if (!clear(lo)) lo = 0.0;
      for (int iter = 0; iter < 30; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (clear(mid) ? lo : hi) = mid;
      }
      state_.extension[k] = lo;
    }
  }
}

void BaodingEnv::resolve_contacts(std::array<double, kPushers>* pushed) {
  const DishGeometry& g = geometry_;
  auto& discs = state_.discs;
  const double inner = g.dish_radius - g.disc_radius;
  for (int iter = 0; iter < g.solver_iterations; ++iter) {
    if (pushed != nullptr) {
      for (std::size_t k = 0; k < kPushers; ++k) {
        const Capsule cap = pusher_capsule(g, k, state_.extension[k]);
        for (Vec2& c : discs) {
          Vec2 n;
          const double overlap = capsule_overlap(cap, c, g.disc_radius, k, &n);
          if (overlap > 0.0) {
            c = c + overlap * n;
            (*pushed)[k] += overlap;
          }
        }
      }
    }
    const Vec2 d = discs[1] - discs[0];
    const double dist = norm(d);
    const double overlap = 2.0 * g.disc_radius - dist;
    if (overlap > 0.0 && dist > 1e-12) {
      const Vec2 n = (1.0 / dist) * d;
      discs[0] = discs[0] - (0.5 * overlap) * n;
      discs[1] = discs[1] + (0.5 * overlap) * n;
    }
    // A disc whose center is past the rim has left the dish; the wall no
    // longer holds it.
    for (Vec2& c : discs) {
      const double r = norm(c);
      if (r > inner && r <= g.dish_radius) c = (inner / r) * c;
    }
  }
}

void BaodingEnv::disturb() {
  for (Vec2& c : state_.discs) {
    const double force = std::abs(task_.disturbance_sigma * standard_normal(rng_));
    const double dir = uniform(rng_, 0.0, 2.0 * std::numbers::pi);
    c = c + (force * geometry_.disturbance_compliance) * Vec2{std::cos(dir), std::sin(dir)};
  }
  std::array<double, kPushers> ignored{};
  resolve_contacts(&ignored);
}

std::vector<TaxelSite> BaodingEnv::taxel_sites(const std::array<double, kPushers>& extension) const {
  const DishGeometry& g = geometry_;
  std::vector<TaxelSite> sites;
  sites.reserve(taxel_count());
  const std::size_t n = g.taxels_per_pusher;
  for (std::size_t k = 0; k < kPushers; ++k) {
    const Capsule cap = pusher_capsule(g, k, extension[k]);
    const Vec2 face = cap.center - cap.radius * pusher_axis(k);
    for (std::size_t j = 0; j < n; ++j) {
      const double t = n == 1 ? 0.0 : -cap.half_width + 2.0 * cap.half_width * j / (n - 1.0);
      const Vec2 p = face + t * cap.tangent;
      sites.push_back({static_cast<int>(k * n + j), {p.x, p.y, 0.0}});
    }
  }
  return sites;
}

TactileReading BaodingEnv::read_taxels() {
  const auto sites = taxel_sites(state_.extension);
  std::array<Shape, kDiscs> shapes;
  for (std::size_t i = 0; i < kDiscs; ++i) {
    shapes[i] = Sphere{{state_.discs[i].x, state_.discs[i].y, 0.0}, geometry_.disc_radius};
  }
  TactileReading r;
  r.raw = contact_pressures(sites, shapes, geometry_.contact, rng_);
  r.frame = activated_frame(sites, r.raw, geometry_.contact.activation_threshold);
  return r;
}

}  // namespace taxelgraph
