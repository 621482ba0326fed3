#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "taxelgraph/diffcore/gradient_check.h"
#include "taxelgraph/errors.h"
#include "taxelgraph/ppo/ppo.h"

using namespace taxelgraph;

namespace {

// Single-environment buffer with the given rewards, values and done flags.
RolloutBuffer scalar_buffer(const std::vector<double>& rewards, const std::vector<double>& values,
                            const std::vector<bool>& dones, double bootstrap) {
  RolloutBuffer b;
  b.n_envs = 1;
  b.rollout_length = rewards.size();
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    Transition tr;
    tr.reward = rewards[t];
    tr.value = values[t];
    tr.done = dones[t];
    b.transitions.push_back(tr);
  }
  b.bootstrap_values = {bootstrap};
  return b;
}

// One transition whose stored log-prob makes the current ratio exp(log_ratio).
RolloutBuffer one_transition(const PolicyParams& policy, double log_ratio, Rng& rng) {
  RolloutBuffer b;
  b.n_envs = 1;
  b.rollout_length = 1;
  Transition tr;
  for (std::size_t i = 0; i < policy.observation_width(); ++i) tr.observation.push_back(uniform(rng, -1, 1));
  const auto mean = action_mean(policy, tr.observation);
  tr.action = sample_action(mean, policy.log_std, rng);
  tr.log_prob = gaussian_log_prob(mean, policy.log_std, tr.action) - log_ratio;
  tr.value = state_value(policy, tr.observation);
  b.transitions.push_back(tr);
  b.bootstrap_values = {0.0};
  return b;
}

double max_abs(const MlpParams& params) {
  ConstTensorList tensors;
  params.append_tensors("p", tensors);
  double m = 0.0;
  for (double v : flatten(tensors)) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("config validation") {
  PpoConfig c;
  CHECK_NOTHROW(c.validate());
  c.gamma = 0.0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = {};
  c.gae_lambda = 1.5;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = {};
  c.clip_epsilon = 0.0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = {};
  c.minibatch_size = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("gae on hand-evaluated buffers") {
  const RolloutBuffer b = scalar_buffer({1, 0, 0}, {0, 0, 0}, {false, false, false}, 0.0);
  const GaeResult g = compute_gae(b, 1.0, 1.0);
  CHECK(g.advantages == std::vector<double>{1, 0, 0});
  CHECK(g.returns == std::vector<double>{1, 0, 0});

  const GaeResult zero = compute_gae(scalar_buffer({0, 0}, {0, 0}, {false, false}, 0.0), 0.9, 0.8);
  CHECK(zero.advantages == std::vector<double>{0, 0});

  // done at t = 1 cuts off everything after it, including the bootstrap.
  const RolloutBuffer cut = scalar_buffer({0, 2, 5}, {0.5, 1.0, 0.0}, {false, true, false}, 7.0);
  const GaeResult c = compute_gae(cut, 0.9, 0.8);
  CHECK(c.advantages[2] == doctest::Approx(5 + 0.9 * 7.0));
  CHECK(c.advantages[1] == doctest::Approx(2 - 1.0));
  CHECK(c.advantages[0] == doctest::Approx(0 + 0.9 * 1.0 - 0.5 + 0.9 * 0.8 * 1.0));
  for (std::size_t t = 0; t < 3; ++t) CHECK(c.returns[t] == c.advantages[t] + cut.transitions[t].value);

  const GaeResult scaled = compute_gae(b, 1.0, 1.0, 0.01);
  CHECK(scaled.advantages[0] == doctest::Approx(0.01));
}

TEST_CASE("gae with gamma = lambda = 1 matches Monte-Carlo returns minus values") {
  Rng rng = make_rng(2, 0);
  const std::size_t T = 50, n = 3;
  RolloutBuffer b;
  b.n_envs = n;
  b.rollout_length = T;
  b.transitions.resize(T * n);
  for (auto& tr : b.transitions) {
    tr.reward = uniform(rng, -1, 1);
    tr.value = uniform(rng, -1, 1);
  }
  b.bootstrap_values = {0.3, -0.2, 1.1};
  const GaeResult g = compute_gae(b, 1.0, 1.0);
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t t = 0; t < T; ++t) {
      double mc = b.bootstrap_values[e];
      for (std::size_t s = t; s < T; ++s) mc += b.transitions[s * n + e].reward;
      CHECK(g.advantages[t * n + e] == doctest::Approx(mc - b.transitions[t * n + e].value).epsilon(1e-10));
    }
  }
}

TEST_CASE("advantage normalization") {
  const auto a = normalize_advantages(std::vector<double>{1, 2, 3, 4});
  CHECK(std::accumulate(a.begin(), a.end(), 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  double ss = 0.0;
  for (double v : a) ss += v * v;
  CHECK(ss / 4.0 == doctest::Approx(1.0));
  const auto flat = normalize_advantages(std::vector<double>{2, 2, 2});
  for (double v : flat) CHECK(v == 0.0);
}

TEST_CASE("gaussian log-prob matches the entropy relation over 1e5 samples") {
  Matrix log_std(1, kActionDim);
  log_std.values()[0] = -1.0;
  log_std.values()[1] = 0.0;
  log_std.values()[2] = 0.5;
  log_std.values()[3] = -2.0;
  const std::vector<double> mean = {0.1, -0.3, 0.0, 2.0};
  Rng rng = make_rng(8, 0);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double lp = gaussian_log_prob(mean, log_std, sample_action(mean, log_std, rng));
    sum += lp;
    sum_sq += lp * lp;
  }
  const double m = sum / n;
  const double se = std::sqrt((sum_sq / n - m * m) / n);
  CHECK(std::abs(-m - gaussian_entropy(log_std)) < 5.0 * se);
  // Var(log p) = d / 2 for a d-dimensional Gaussian.
  CHECK(sum_sq / n - m * m == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("clip arithmetic and the identical-policy surrogate") {
  const PolicyParams policy = init_policy(16, kDeskPolicyHidden, 3);
  Rng rng = make_rng(4, 0);
  PpoConfig config;
  const std::vector<std::size_t> idx = {0};

  // ratio 1.5, A > 0: the clipped term 1.2 * A wins.
  const RolloutBuffer high = one_transition(policy, std::log(1.5), rng);
  const std::vector<double> returns = {high.transitions[0].value};
  PpoLossTerms t = ppo_loss(policy, high, idx, std::vector<double>{2.0}, returns, config, nullptr);
  CHECK(t.surrogate == doctest::Approx(-1.2 * 2.0));
  CHECK(t.clip_fraction == 1.0);
  // A < 0 keeps the unclipped, more pessimistic term.
  t = ppo_loss(policy, high, idx, std::vector<double>{-2.0}, returns, config, nullptr);
  CHECK(t.surrogate == doctest::Approx(1.5 * 2.0));

  RolloutBuffer same;
  same.n_envs = 4;
  same.rollout_length = 1;
  std::vector<double> adv;
  std::vector<double> rets;
  for (int i = 0; i < 4; ++i) {
    const RolloutBuffer one = one_transition(policy, 0.0, rng);
    same.transitions.push_back(one.transitions[0]);
    adv.push_back(uniform(rng, -1, 1));
    rets.push_back(uniform(rng, -1, 1));
  }
  same.bootstrap_values.assign(4, 0.0);
  const std::vector<std::size_t> all = {0, 1, 2, 3};
  t = ppo_loss(policy, same, all, adv, rets, config, nullptr);
  CHECK(t.surrogate == doctest::Approx(-std::accumulate(adv.begin(), adv.end(), 0.0) / 4.0).epsilon(1e-9));
  CHECK(t.clip_fraction == 0.0);
  CHECK(t.entropy == doctest::Approx(gaussian_entropy(policy.log_std)));
}

TEST_CASE("ppo_loss gradient matches finite differences on a single transition") {
  Rng rng = make_rng(6, 0);
  for (double log_ratio : {0.05, -0.1, std::log(1.5)}) {
    PolicyParams policy = init_policy(16, std::vector<std::size_t>{8, 8}, 11);
    for (double& w : policy.actor.weights.back().values()) w *= 50.0;
    const RolloutBuffer b = one_transition(policy, log_ratio, rng);
    PpoConfig config;
    config.entropy_coefficient = 0.01;
    const std::vector<double> adv = {0.7};
    const std::vector<double> returns = {b.transitions[0].value + 0.4};
    const std::vector<std::size_t> idx = {0};
    TensorList params = policy.tensors();
    PolicyParams gradient = zeros_like(policy);
    DifferentiableFunction f = [&](std::span<const double> x, std::span<double> grad) {
      unflatten({x.begin(), x.end()}, params);
      if (grad.empty()) return ppo_loss(policy, b, idx, adv, returns, config, nullptr).total;
      zero_all(gradient.tensors());
      const double loss = ppo_loss(policy, b, idx, adv, returns, config, &gradient).total;
      const auto flat = flatten(std::as_const(gradient).tensors());
      std::copy(flat.begin(), flat.end(), grad.begin());
      return loss;
    };
    const auto point = flatten(const_view(params));
    CHECK(gradient_check(f, point, 1e-6).max_relative_error < 1e-5);
  }
}

TEST_CASE("zero advantages and zero value error leave only the entropy gradient") {
  const PolicyParams policy = init_policy(16, kDeskPolicyHidden, 5);
  Rng rng = make_rng(12, 0);
  RolloutBuffer b;
  b.n_envs = 8;
  b.rollout_length = 1;
  std::vector<double> returns;
  for (int i = 0; i < 8; ++i) {
    b.transitions.push_back(one_transition(policy, uniform(rng, -0.1, 0.1), rng).transitions[0]);
    returns.push_back(b.transitions.back().value);
  }
  b.bootstrap_values.assign(8, 0.0);
  PpoConfig config;
  config.entropy_coefficient = 0.01;
  PolicyParams gradient = zeros_like(policy);
  const std::vector<std::size_t> idx = {0, 1, 2, 3, 4, 5, 6, 7};
  ppo_loss(policy, b, idx, std::vector<double>(8, 0.0), returns, config, &gradient);
  CHECK(max_abs(gradient.actor) == 0.0);
  CHECK(max_abs(gradient.critic) < 1e-12);
  for (double g : gradient.log_std.values()) CHECK(g == doctest::Approx(-0.01));
}

TEST_CASE("rollout shapes, auto-reset and determinism") {
  const PolicyParams policy = init_policy(16, kDeskPolicyHidden, 1);
  const DishGeometry g;
  VecEnv a(3, TaskConfig{}, g, parse_observation_mode("groundtruth"), 9);
  const RolloutBuffer empty = collect_rollouts(policy, a, 0);
  CHECK(empty.size() == 0);
  CHECK(empty.episodes.empty());

  VecEnv b(3, TaskConfig{}, g, parse_observation_mode("groundtruth"), 9);
  VecEnv c(3, TaskConfig{}, g, parse_observation_mode("groundtruth"), 9);
  const RolloutBuffer rb = collect_rollouts(policy, b, 250, false, true);
  const RolloutBuffer rc = collect_rollouts(policy, c, 250, false, true, 3);
  CHECK(rb.size() == 750);
  CHECK(rb.perception_samples.size() == 750);
  CHECK(rb.bootstrap_values.size() == 3);
  // 250 steps exceed the 200-step limit, so every env finished an episode.
  CHECK(rb.episodes.size() >= 3);
  for (std::size_t i = 0; i < rb.size(); ++i) {
    CHECK(rb.transitions[i].observation == rc.transitions[i].observation);
    CHECK(rb.transitions[i].action == rc.transitions[i].action);
    CHECK(rb.transitions[i].reward == rc.transitions[i].reward);
    CHECK(std::isfinite(rb.transitions[i].log_prob));
  }
  for (const auto& ep : rb.episodes) {
    CHECK(ep.steps <= 200);
    CHECK(ep.outcome != Outcome::kRunning);
  }
}

TEST_CASE("ppo_update is deterministic and moves the policy") {
  PpoConfig config;
  config.n_envs = 2;
  config.rollout_length = 64;
  config.minibatch_size = 32;
  auto run = [&] {
    PolicyParams policy = init_policy(16, kDeskPolicyHidden, 2);
    AdamState adam;
    VecEnv envs(2, TaskConfig{}, DishGeometry{}, parse_observation_mode("groundtruth"), 4);
    const auto history = train_policy(policy, adam, envs, config, 2, 7);
    CHECK(history.size() == 2);
    for (const auto& d : history) {
      CHECK(d.clip_fraction >= 0.0);
      CHECK(d.clip_fraction <= 1.0);
      CHECK(d.env_steps == 128);
    }
    return policy;
  };
  const PolicyParams a = run();
  const PolicyParams b = run();
  CHECK(a == b);
  CHECK_FALSE(a == init_policy(16, kDeskPolicyHidden, 2));
}

TEST_CASE("evaluation of a random-weight policy") {
  const PolicyParams policy = init_policy(16, kDeskPolicyHidden, 0);
  const ObservationMode mode = parse_observation_mode("groundtruth");
  const PolicyEval e = evaluate_policy(policy, TaskConfig{}, DishGeometry{}, mode, 200, 1, 2);
  CHECK(e.episodes == 200);
  CHECK(e.success_rate < 0.05);
  CHECK(e.success_rate >= 0.0);
  CHECK(e.mean_steps <= 200.0);
  const PolicyEval again = evaluate_policy(policy, TaskConfig{}, DishGeometry{}, mode, 200, 1);
  CHECK(again.success_rate == e.success_rate);
  CHECK(again.mean_reward == e.mean_reward);
  CHECK_THROWS_AS(evaluate_policy(policy, TaskConfig{}, DishGeometry{}, mode, 0, 1), UsageError);
  CHECK_THROWS_AS(evaluate_policy(policy, TaskConfig{}, DishGeometry{},
                                  parse_observation_mode("no_perception"), 5, 1),
                  UsageError);
}

TEST_CASE("policy checkpoints round-trip") {
  const PolicyParams p = init_policy(12, std::vector<std::size_t>{16, 8}, 3);
  const PolicyParams q = policy_from_checkpoint(policy_checkpoint(p, {{"mode", "no_perception"}}));
  CHECK(p == q);
  CHECK(q.observation_width() == 12);
}
