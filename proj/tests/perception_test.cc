#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "taxelgraph/errors.h"
#include "taxelgraph/perception/cnn.h"
#include "taxelgraph/perception/loss.h"
#include "taxelgraph/perception/message_layer.h"
#include "taxelgraph/perception/model.h"
#include "taxelgraph/perception/tacgnn.h"
#include "taxelgraph/perception/training.h"
#include "test_support.h"

using namespace taxelgraph;
using namespace taxelgraph::testing;

namespace {

std::vector<double> row_of(const Matrix& m, std::size_t r) {
  auto v = m.row(r);
  return {v.begin(), v.end()};
}

Matrix single_row(const std::vector<double>& v) { return Matrix::row_vector(v); }

// Direct re-evaluation of one message layer: every edge is pushed through phi
// on its own and maxima are taken with std::max.
std::vector<std::vector<double>> reference_layer(const MlpParams& phi, const PointSet& pts,
                                                 const std::vector<std::vector<double>>& h,
                                                 std::size_t k, double scale) {
  const auto neighbor_ids = knn_oracle(pts, k);
  std::map<int, std::size_t> index_of;
  for (std::size_t i = 0; i < pts.size(); ++i) index_of[pts[i].taxel_id] = i;
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<std::size_t> sources;
    for (int id : neighbor_ids[i]) sources.push_back(index_of[id]);
    if (pts.size() == 1) sources.push_back(i);
    std::vector<double> best(phi.output_width(), -INFINITY);
    for (std::size_t j : sources) {
      std::vector<double> row = h[i];
      row.insert(row.end(), h[j].begin(), h[j].end());
      const Vec3 rel = pts[j].position - pts[i].position;
      row.push_back(rel.x * scale);
      row.push_back(rel.y * scale);
      row.push_back(rel.z * scale);
      const auto msg = row_of(mlp_apply(phi, single_row(row)), 0);
      for (std::size_t c = 0; c < best.size(); ++c) best[c] = std::max(best[c], msg[c]);
    }
    out.push_back(best);
  }
  return out;
}

// Composes the independently checked stages: per-point encoder, reference
// message layers, the FPS oracle, a column max, and the head.
std::vector<double> reference_tacgnn(const TacGnnParams& p, const TacGnnConfig& cfg,
                                     const PointSet& frame) {
  std::vector<double> global(cfg.channels, 0.0);
  if (!frame.empty()) {
    PointSet pts = frame;
    std::vector<std::vector<double>> h;
    for (const auto& pt : pts) {
      h.push_back(row_of(mlp_apply(p.encoder, single_row({pt.position.x * cfg.coord_scale,
                                                          pt.position.y * cfg.coord_scale,
                                                          pt.position.z * cfg.coord_scale,
                                                          pt.pressure})),
                         0));
    }
    for (std::size_t l = 0; l < kMessageLayers; ++l) {
      h = reference_layer(p.layers[l], pts, h, cfg.neighbors, cfg.coord_scale);
      const std::size_t m = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(cfg.sampling_ratio * static_cast<double>(pts.size()))));
      const auto ids = fps_oracle(pts, m);
      PointSet kept_pts;
      std::vector<std::vector<double>> kept_h;
      for (int id : ids) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (pts[i].taxel_id == id) {
            kept_pts.push_back(pts[i]);
            kept_h.push_back(h[i]);
          }
        }
      }
      pts = kept_pts;
      h = kept_h;
    }
    std::fill(global.begin(), global.end(), -INFINITY);
    for (const auto& row : h) {
      for (std::size_t c = 0; c < global.size(); ++c) global[c] = std::max(global[c], row[c]);
    }
  }
  return row_of(mlp_apply(p.head, single_row(global)), 0);
}

TacGnnConfig small_config(std::size_t channels = 8, std::size_t out = 3) {
  TacGnnConfig c;
  c.channels = channels;
  c.output_dim = out;
  c.head_hidden = {8};
  return c;
}

// 4x4 taxel pad with 5 mm pitch, ids 0..15.
std::vector<Vec3> pad_positions() {
  std::vector<Vec3> rest;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) rest.push_back({0.005 * c, 0.005 * r, 0.0});
  }
  return rest;
}

ModelSpec pad_spec(ModelKind kind) {
  ModelSpec s;
  s.kind = kind;
  s.target = {3, 0};
  s.layout_id = "test-pad";
  s.rest_positions = pad_positions();
  s.channels = 8;
  s.mlp_hidden = {16, 16};
  return s;
}

// A contact centered at `center` on the pad: taxels within 6 mm activate
// with pressure decreasing with distance.
GraspSample pad_sample(Vec3 center) {
  GraspSample s;
  const auto rest = pad_positions();
  s.raw.assign(rest.size(), 0.0);
  for (std::size_t i = 0; i < rest.size(); ++i) {
    const double d = norm(rest[i] - center);
    if (d < 0.006) {
      s.raw[i] = 1.0 - d / 0.006;
      if (s.raw[i] >= kDefaultActivationThreshold) {
        s.frame.push_back({static_cast<int>(i), rest[i], s.raw[i]});
      }
    }
  }
  s.label = {center.x, center.y, center.z};
  return s;
}

std::vector<GraspSample> pad_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GraspSample> out;
  while (out.size() < n) {
    GraspSample s = pad_sample({uniform(rng, 0.0, 0.015), uniform(rng, 0.0, 0.015), 0.0});
    if (!s.frame.empty()) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("rmse_loss examples") {
  const std::vector<double> zeros(6, 0.0);
  CHECK(rmse_loss(zeros, zeros) == 0.0);
  const std::vector<double> ones(6, 1.0);
  CHECK(std::abs(rmse_loss(ones, zeros) - 1.0) < 1e-12);
  const std::vector<double> hand = {3, 4, 0, 0, 0, 0};
  CHECK(std::abs(rmse_loss(hand, zeros) - std::sqrt(25.0 / 6.0)) < 1e-12);
  CHECK_THROWS_AS(rmse_loss(hand, std::vector<double>(5, 0.0)), std::invalid_argument);
}

TEST_CASE("rmse_loss is symmetric and zero only on equality") {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(4), b(4);
    for (auto& v : a) v = uniform(rng, -2, 2);
    for (auto& v : b) v = uniform(rng, -2, 2);
    REQUIRE(rmse_loss(a, b) == rmse_loss(b, a));
    REQUIRE(rmse_loss(a, b) > 0.0);
    REQUIRE(rmse_loss(a, a) == 0.0);
  }
  const std::vector<double> p = {1.0, 2.0};
  CHECK(rmse_loss_gradient(p, p) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("encode_nodes") {
  MlpParams zero = zero_mlp(std::vector<std::size_t>{4, 5});
  Rng rng(1);
  const PointSet pts = random_points(6, rng);
  const Matrix h = encode_nodes(zero, pts, 100.0);
  CHECK(h.rows() == 6);
  CHECK(h.cols() == 5);
  for (double v : h.values()) CHECK(v == 0.0);
  CHECK(encode_nodes(zero, {}, 100.0).rows() == 0);

  MlpParams enc = zero_mlp(std::vector<std::size_t>{4, 2});
  enc.weights[0] = Matrix::from_rows({{1, 0}, {0, 2}, {0, 0}, {3, -1}});
  enc.biases[0] = Matrix::from_rows({{0.5, 0.0}});
  // point (0.01, 0.02, 0.03) m, pressure 0.4, scale 100 -> input (1, 2, 3, 0.4)
  const PointSet one = {{1, {0.01, 0.02, 0.03}, 0.4}};
  const Matrix e = encode_nodes(enc, one, 100.0);
  CHECK(e(0, 0) == doctest::Approx(1.0 + 1.2 + 0.5).epsilon(1e-14));
  CHECK(e(0, 1) == doctest::Approx(4.0 - 0.4).epsilon(1e-14));
}

TEST_CASE("message_layer examples") {
  const std::size_t c = 4;
  const MlpParams phi = kaiming_init(std::vector<std::size_t>{2 * c + 3, c, c}, 3);
  Rng rng(2);

  SUBCASE("single node gets its self-message") {
    const PointSet one = random_points(1, rng);
    const Matrix h = random_matrix(1, c, rng);
    const TactileGraph g = build_knn_graph(one, 3, h);
    const auto out = message_layer_forward(phi, g, 100.0);
    std::vector<double> row = row_of(h, 0);
    const std::vector<double> hi = row;
    row.insert(row.end(), hi.begin(), hi.end());
    row.insert(row.end(), {0.0, 0.0, 0.0});
    CHECK(row_of(out.features, 0) == row_of(mlp_apply(phi, single_row(row)), 0));
  }
  SUBCASE("symmetric pair gives identical outputs") {
    const PointSet two = {{1, {0.0, 0.0, 0.0}, 0.5}, {2, {0.0, 0.0, 0.0}, 0.5}};
    Matrix h(2, c);
    for (std::size_t ch = 0; ch < c; ++ch) h(0, ch) = h(1, ch) = 0.1 * static_cast<double>(ch);
    const auto out = message_layer_forward(phi, build_knn_graph(two, 3, h), 100.0);
    CHECK(row_of(out.features, 0) == row_of(out.features, 1));
  }
  SUBCASE("random graphs match direct re-evaluation") {
    for (int trial = 0; trial < 50; ++trial) {
      const PointSet pts = random_points(5, rng);
      const Matrix h = random_matrix(5, c, rng);
      const auto out = message_layer_forward(phi, build_knn_graph(pts, 3, h), 100.0);
      std::vector<std::vector<double>> hv;
      for (std::size_t i = 0; i < 5; ++i) hv.push_back(row_of(h, i));
      const auto ref = reference_layer(phi, pts, hv, 3, 100.0);
      for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t ch = 0; ch < c; ++ch) REQUIRE(out.features(i, ch) == doctest::Approx(ref[i][ch]).epsilon(1e-12));
      }
    }
  }
  SUBCASE("feature width mismatch") {
    const PointSet pts = random_points(3, rng);
    CHECK_THROWS_AS(message_layer_forward(phi, build_knn_graph(pts, 3, Matrix(3, c + 1)), 100.0),
                    std::invalid_argument);
  }
}

TEST_CASE("tacgnn_forward examples") {
  const TacGnnConfig cfg = small_config();
  TacGnnParams p = init_tacgnn(cfg, 17);
  Rng rng(4);

  SUBCASE("empty frame evaluates the head at zero") {
    const auto fwd = tacgnn_forward(p, cfg, {});
    CHECK(fwd.global_feature == std::vector<double>(cfg.channels, 0.0));
    CHECK(fwd.output == row_of(mlp_apply(p.head, Matrix(1, cfg.channels)), 0));
  }
  SUBCASE("single point is finite") {
    const auto fwd = tacgnn_forward(p, cfg, random_points(1, rng));
    for (double v : fwd.output) CHECK(std::isfinite(v));
    CHECK(fwd.node_counts == std::array<std::size_t, 3>{1, 1, 1});
  }
  SUBCASE("stage composition oracle") {
    for (int trial = 0; trial < 20; ++trial) {
      const PointSet frame = random_points(12, rng);
      const auto fwd = tacgnn_forward(p, cfg, frame);
      const auto ref = reference_tacgnn(p, cfg, frame);
      for (std::size_t d = 0; d < ref.size(); ++d) {
        REQUIRE(fwd.output[d] == doctest::Approx(ref[d]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("tacgnn shape laws") {
  const TacGnnConfig cfg = small_config();
  const TacGnnParams p = init_tacgnn(cfg, 1);
  Rng rng(6);
  for (std::size_t n = 1; n <= 20; ++n) {
    const auto fwd = tacgnn_forward(p, cfg, random_points(n, rng));
    for (std::size_t l = 0; l < kMessageLayers; ++l) {
      const double factor = std::pow(0.5, static_cast<double>(l + 1));
      const auto expected = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(factor * static_cast<double>(n))));
      REQUIRE(fwd.node_counts[l] == expected);
    }
    REQUIRE(fwd.global_feature.size() == cfg.channels);
  }
}

TEST_CASE("downsampling never invents nodes") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const PointSet frame = random_points(1 + rng() % 15, rng);
    TactileGraph g = build_knn_graph(frame, 3);
    std::set<int> ids;
    for (const auto& p : frame) ids.insert(p.taxel_id);
    for (std::size_t l = 0; l < 3; ++l) {
      g = downsample_graph(g, 0.5);
      for (const auto& p : g.points) REQUIRE(ids.count(p.taxel_id) == 1);
    }
  }
}

TEST_CASE("tacgnn is permutation invariant") {
  const TacGnnConfig cfg = small_config();
  const TacGnnParams p = init_tacgnn(cfg, 23);
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    PointSet frame = random_points(2 + rng() % 14, rng);
    const auto base = tacgnn_forward(p, cfg, frame).output;
    std::shuffle(frame.begin(), frame.end(), rng);
    REQUIRE(tacgnn_forward(p, cfg, frame).output == base);
  }
}

TEST_CASE("tacgnn end-to-end gradient check") {
  ModelSpec spec = pad_spec(ModelKind::kTacGnn);
  auto model = PerceptionModel::create(spec, 31);
  Rng rng(9);
  for (std::size_t n : {1u, 2u, 12u}) {
    GraspSample s;
    s.frame = random_points(n, rng, 0.01);
    s.label = {0.004, -0.002, 0.01};
    const auto result = model_gradient_check(*model, {s});
    INFO("frame size " << n << " worst index " << result.worst_index);
    CHECK(result.max_relative_error < 1e-4);
  }
}

TEST_CASE("baseline gradient checks") {
  const std::vector<GraspSample> samples = {pad_sample({0.006, 0.004, 0.0}),
                                            pad_sample({0.011, 0.012, 0.0})};
  for (ModelKind kind : {ModelKind::kMlp, ModelKind::kCnn, ModelKind::kGcn}) {
    auto model = PerceptionModel::create(pad_spec(kind), 41);
    // Move every parameter off the ReLU and max-pool ties that zero biases
    // and zero inputs create.
    Rng jitter(kind == ModelKind::kCnn ? 1 : 2);
    for (const auto& t : model->tensors()) {
      for (double& v : t.tensor->values()) v += uniform(jitter, -0.05, 0.05);
    }
    const auto result = model_gradient_check(*model, samples);
    INFO(model_kind_name(kind));
    CHECK(result.max_relative_error < 1e-4);
  }
}

TEST_CASE("angle targets are scaled consistently") {
  ModelSpec spec = pad_spec(ModelKind::kMlp);
  spec.target = {3, 1};
  auto model = PerceptionModel::create(spec, 3);
  GraspSample s = pad_sample({0.006, 0.004, 0.0});
  s.label.push_back(45.0);
  const auto loss_units = model->forward(s);
  const auto label_units = model->predict(s);
  CHECK(label_units[0] == doctest::Approx(loss_units[0] / 100.0));
  CHECK(label_units[3] == loss_units[3]);
  CHECK(model_gradient_check(*model, {s}).max_relative_error < 1e-4);
}

TEST_CASE("mlp baseline") {
  ModelSpec spec = pad_spec(ModelKind::kMlp);
  auto model = PerceptionModel::create(spec, 5);
  GraspSample zero_frame;
  zero_frame.raw.assign(16, 0.0);
  zero_frame.label = {0, 0, 0};
  // Kaiming init has zero biases, so an all-zero frame maps to zero.
  CHECK(model->forward(zero_frame) == std::vector<double>{0.0, 0.0, 0.0});

  auto zeroed = model->zeros_like();
  const GraspSample s = pad_sample({0.006, 0.004, 0.0});
  CHECK(zeroed->forward(s) == std::vector<double>{0.0, 0.0, 0.0});

  GraspSample bad = s;
  bad.raw.pop_back();
  CHECK_THROWS_AS(model->forward(bad), DataError);
}

TEST_CASE("mlp baseline matches hand evaluation") {
  ModelSpec spec = pad_spec(ModelKind::kMlp);
  spec.mlp_hidden = {2};
  auto model = PerceptionModel::create(spec, 0);
  for (const auto& t : model->tensors()) t.tensor->fill(0.0);
  TensorList t = model->tensors();
  // w0: 16 x 2, b0: 1 x 2, w1: 2 x 3, b1: 1 x 3
  (*t[0].tensor)(0, 0) = 2.0;
  (*t[0].tensor)(1, 1) = -1.0;
  (*t[1].tensor)(0, 1) = 0.25;
  (*t[2].tensor)(0, 0) = 1.5;
  (*t[2].tensor)(1, 2) = 4.0;
  (*t[3].tensor)(0, 1) = 0.1;
  GraspSample s;
  s.raw.assign(16, 0.0);
  s.raw[0] = 0.5;
  s.raw[1] = 0.1;
  s.label = {0, 0, 0};
  // hidden = relu(2*0.5, -0.1 + 0.25) = (1.0, 0.15); out = (1.5, 0.1, 0.6)
  const auto out = model->forward(s);
  CHECK(out[0] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(out[1] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(out[2] == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("cnn grid and convolution") {
  CHECK(default_grid(88) == GridShape{12, 12});
  CHECK(default_grid(653) == GridShape{28, 28});
  CHECK(default_grid(16) == GridShape{4, 4});
  CHECK_THROWS_AS(pack_grid(std::vector<double>(17, 0.0), {4, 4}), std::invalid_argument);

  CnnConfig cfg;
  cfg.grid = {4, 4};
  cfg.conv1_channels = 2;
  cfg.conv2_channels = 2;
  cfg.head_hidden = {4};
  CnnParams p = init_cnn(cfg, 3);

  SUBCASE("all-zero frame gives the head's zero-input output") {
    const auto out = cnn_forward(p, std::vector<double>(16, 0.0)).output;
    CHECK(out == row_of(mlp_apply(p.head, Matrix(1, 2)), 0));
  }
  SUBCASE("zero kernels give zero feature maps") {
    p.conv1_kernel.fill(0.0);
    std::vector<double> raw(16, 0.7);
    const auto fwd = cnn_forward(p, raw);
    for (double v : fwd.cache.conv1.activation.values()) CHECK(v == 0.0);
  }
  SUBCASE("one active taxel with a hand-set kernel") {
    p.conv1_kernel.fill(0.0);
    for (int k = 0; k < 9; ++k) p.conv1_kernel(k, 0) = 1.0 + k;
    std::vector<double> raw(16, 0.0);
    raw[5] = 1.0;  // cell (1, 1)
    const auto fwd = cnn_forward(p, raw);
    for (int y = 0; y < 4; ++y) {
      for (int x = 0; x < 4; ++x) {
        const int dy = 1 - y, dx = 1 - x;
        const double expected =
            (std::abs(dy) <= 1 && std::abs(dx) <= 1) ? 1.0 + (dy + 1) * 3 + (dx + 1) : 0.0;
        REQUIRE(fwd.cache.conv1.activation(y * 4 + x, 0) == expected);
        REQUIRE(fwd.cache.conv1.activation(y * 4 + x, 1) == 0.0);
      }
    }
  }
}

TEST_CASE("gcn baseline") {
  const ModelSpec spec = pad_spec(ModelKind::kGcn);
  auto model = PerceptionModel::create(spec, 8);

  const TactileGraph g = static_layout_graph(spec);
  PointSet rest;
  for (std::size_t i = 0; i < 16; ++i) rest.push_back({static_cast<int>(i), spec.rest_positions[i], 0.0});
  const auto oracle = knn_oracle(rest, spec.neighbors);
  std::vector<std::set<int>> edges(16);
  for (const auto& e : g.edges) edges[e.target].insert(static_cast<int>(e.source));
  CHECK(edges == oracle);

  GraspSample none;
  none.raw.assign(16, 0.0);
  none.label = {0, 0, 0};
  const auto constant = model->forward(none);
  CHECK(model->forward(none) == constant);
  GraspSample one = none;
  one.raw[6] = 0.8;
  CHECK(model->forward(one) != constant);
}

TEST_CASE("model checkpoints round-trip for every kind") {
  for (ModelKind kind : {ModelKind::kTacGnn, ModelKind::kMlp, ModelKind::kCnn, ModelKind::kGcn}) {
    auto model = PerceptionModel::create(pad_spec(kind), 12);
    const Checkpoint ckpt = model_checkpoint(*model);
    std::stringstream ss;
    write_checkpoint(ckpt, ss);
    auto back = model_from_checkpoint(read_checkpoint(ss));
    CHECK(back->kind() == kind);
    const GraspSample s = pad_sample({0.006, 0.004, 0.0});
    CHECK(back->forward(s) == model->forward(s));
    CHECK(model_checkpoint(*back) == ckpt);
  }
  CHECK_THROWS_AS(parse_model_kind("transformer"), UsageError);
}

TEST_CASE("split_dataset") {
  const DatasetSplit s = split_dataset(10, 0.8, 1);
  CHECK(s.train.size() == 8);
  CHECK(s.test.size() == 2);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(all[i] == i);
  CHECK(split_dataset(10, 0.8, 1).train == s.train);
  CHECK(split_dataset(1, 0.8, 1).train.size() == 1);
  CHECK(split_dataset(1, 0.8, 1).test.empty());
}

TEST_CASE("train_perception with zero epochs leaves parameters unchanged") {
  auto model = PerceptionModel::create(pad_spec(ModelKind::kTacGnn), 2);
  const Checkpoint before = model_checkpoint(*model);
  const auto data = pad_dataset(20, 1);
  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainReport r = train_perception(*model, data, cfg);
  CHECK(r.epochs.empty());
  CHECK(model_checkpoint(*model) == before);
  CHECK_THROWS_AS(train_perception(*model, std::vector<GraspSample>{}, cfg), DataError);
}

TEST_CASE("train_perception is deterministic and reduces the loss") {
  const auto data = pad_dataset(60, 2);
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.batch_size = 8;
  cfg.seed = 4;
  auto a = PerceptionModel::create(pad_spec(ModelKind::kTacGnn), 2);
  auto b = PerceptionModel::create(pad_spec(ModelKind::kTacGnn), 2);
  const TrainReport ra = train_perception(*a, data, cfg);
  const TrainReport rb = train_perception(*b, data, cfg);
  CHECK(model_checkpoint(*a) == model_checkpoint(*b));
  CHECK(ra.epochs.size() == 15);
  CHECK(ra.epochs.back().train.rmse < 0.5 * ra.initial.train.rmse);
  CHECK(ra.epochs.back().train.rmse == rb.epochs.back().train.rmse);
}

TEST_CASE("a duplicated single sample is memorized") {
  const GraspSample s = pad_sample({0.007, 0.009, 0.0});
  const std::vector<GraspSample> data(4, s);
  auto model = PerceptionModel::create(pad_spec(ModelKind::kTacGnn), 6);
  TrainConfig cfg;
  cfg.epochs = 500;
  cfg.batch_size = 4;
  const TrainReport r = train_perception(*model, data, cfg);
  INFO("final train rmse " << r.epochs.back().train.rmse);
  CHECK(r.epochs.back().train.rmse < 1e-3);
}
