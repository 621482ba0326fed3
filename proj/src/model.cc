#include "taxelgraph/perception/model.h"

#include <fstream>
#include <stdexcept>

#include "taxelgraph/errors.h"
#include "taxelgraph/numeric_text.h"
#include "taxelgraph/perception/loss.h"
#include "taxelgraph/rng.h"

namespace taxelgraph {

namespace {

constexpr double kCentimetersPerMeter = 100.0;
// Networks emit angles in tens of degrees so their outputs stay O(1).
constexpr double kAngleOutputGain = 10.0;

double output_gain(const TargetLayout& target, std::size_t dim) {
  return dim < target.position_dims ? 1.0 : kAngleOutputGain;
}

std::vector<double> apply_gain(const TargetLayout& target, std::vector<double> raw_output) {
  for (std::size_t d = 0; d < raw_output.size(); ++d) raw_output[d] *= output_gain(target, d);
  return raw_output;
}

// Shared loss/gradient plumbing: returns (rmse, d loss / d raw network output).
std::pair<double, std::vector<double>> loss_and_output_gradient(
    const TargetLayout& target, const std::vector<double>& raw_output, const GraspSample& sample,
    double weight) {
  const std::vector<double> prediction = apply_gain(target, raw_output);
  const std::vector<double> truth = to_loss_units(target, sample.label);
  const double loss = rmse_loss(prediction, truth);
  std::vector<double> grad = rmse_loss_gradient(prediction, truth);
  for (std::size_t d = 0; d < grad.size(); ++d) grad[d] *= weight * output_gain(target, d);
  return {loss, std::move(grad)};
}

void check_raw(const ModelSpec& spec, const GraspSample& sample) {
  if (sample.raw.size() != spec.taxel_count()) {
    throw DataError("raw frame has " + std::to_string(sample.raw.size()) +
                    " values, layout expects " + std::to_string(spec.taxel_count()));
  }
}

TacGnnConfig tacgnn_config(const ModelSpec& spec) {
  TacGnnConfig c;
  c.channels = spec.channels;
  c.output_dim = spec.target.size();
  c.neighbors = spec.neighbors;
  c.sampling_ratio = spec.sampling_ratio;
  c.coord_scale = spec.coord_scale;
  return c;
}

class TacGnnModel : public PerceptionModel {
 public:
  TacGnnModel(ModelSpec spec, TacGnnParams params)
      : PerceptionModel(std::move(spec)), config_(tacgnn_config(spec_)), params_(std::move(params)) {}

  std::unique_ptr<PerceptionModel> clone() const override {
    return std::make_unique<TacGnnModel>(*this);
  }
  std::unique_ptr<PerceptionModel> zeros_like() const override {
    return std::make_unique<TacGnnModel>(spec_, taxelgraph::zeros_like(params_));
  }
  TensorList tensors() override {
    TensorList t;
    params_.append_tensors(t);
    return t;
  }
  ConstTensorList tensors() const override {
    ConstTensorList t;
    params_.append_tensors(t);
    return t;
  }
  std::vector<double> forward(const GraspSample& sample) const override {
    return apply_gain(spec_.target, tacgnn_forward(params_, config_, sample.frame).output);
  }
  double accumulate_gradient(const GraspSample& sample, double weight,
                             PerceptionModel& gradient) const override {
    const TacGnnForward fwd = tacgnn_forward(params_, config_, sample.frame);
    auto [loss, grad] = loss_and_output_gradient(spec_.target, fwd.output, sample, weight);
    tacgnn_backward(params_, fwd.cache, grad, static_cast<TacGnnModel&>(gradient).params_);
    return loss;
  }

 private:
  TacGnnConfig config_;
  TacGnnParams params_;
};

class GcnModel : public PerceptionModel {
 public:
  GcnModel(ModelSpec spec, TacGnnParams params)
      : PerceptionModel(std::move(spec)),
        config_(tacgnn_config(spec_)),
        params_(std::move(params)),
        graph_(static_layout_graph(spec_)) {}

  std::unique_ptr<PerceptionModel> clone() const override {
    return std::make_unique<GcnModel>(*this);
  }
  std::unique_ptr<PerceptionModel> zeros_like() const override {
    return std::make_unique<GcnModel>(spec_, taxelgraph::zeros_like(params_));
  }
  TensorList tensors() override {
    TensorList t;
    params_.append_tensors(t);
    return t;
  }
  ConstTensorList tensors() const override {
    ConstTensorList t;
    params_.append_tensors(t);
    return t;
  }
  std::vector<double> forward(const GraspSample& sample) const override {
    return apply_gain(spec_.target, static_graph_forward(params_, config_, with_pressures(sample)).output);
  }
  double accumulate_gradient(const GraspSample& sample, double weight,
                             PerceptionModel& gradient) const override {
    const TacGnnForward fwd = static_graph_forward(params_, config_, with_pressures(sample));
    auto [loss, grad] = loss_and_output_gradient(spec_.target, fwd.output, sample, weight);
    tacgnn_backward(params_, fwd.cache, grad, static_cast<GcnModel&>(gradient).params_);
    return loss;
  }

 private:
  TactileGraph with_pressures(const GraspSample& sample) const {
    check_raw(spec_, sample);
    TactileGraph g = graph_;
    for (std::size_t i = 0; i < g.points.size(); ++i) g.points[i].pressure = sample.raw[i];
    return g;
  }

  TacGnnConfig config_;
  TacGnnParams params_;
  TactileGraph graph_;
};

class MlpModel : public PerceptionModel {
 public:
  MlpModel(ModelSpec spec, MlpParams params)
      : PerceptionModel(std::move(spec)), params_(std::move(params)) {}

  std::unique_ptr<PerceptionModel> clone() const override {
    return std::make_unique<MlpModel>(*this);
  }
  std::unique_ptr<PerceptionModel> zeros_like() const override {
    return std::make_unique<MlpModel>(spec_, taxelgraph::zeros_like(params_));
  }
  TensorList tensors() override {
    TensorList t;
    params_.append_tensors("mlp", t);
    return t;
  }
  ConstTensorList tensors() const override {
    ConstTensorList t;
    params_.append_tensors("mlp", t);
    return t;
  }
  std::vector<double> forward(const GraspSample& sample) const override {
    check_raw(spec_, sample);
    const Matrix out = mlp_apply(params_, Matrix::row_vector(sample.raw));
    return apply_gain(spec_.target, {out.values().begin(), out.values().end()});
  }
  double accumulate_gradient(const GraspSample& sample, double weight,
                             PerceptionModel& gradient) const override {
    check_raw(spec_, sample);
    const MlpForward fwd = mlp_forward(params_, Matrix::row_vector(sample.raw));
    const std::vector<double> out(fwd.output.values().begin(), fwd.output.values().end());
    auto [loss, grad] = loss_and_output_gradient(spec_.target, out, sample, weight);
    mlp_backward(params_, fwd.cache, Matrix::row_vector(grad),
                 static_cast<MlpModel&>(gradient).params_);
    return loss;
  }

 private:
  MlpParams params_;
};

class CnnModel : public PerceptionModel {
 public:
  CnnModel(ModelSpec spec, CnnParams params)
      : PerceptionModel(std::move(spec)), params_(std::move(params)) {}

  std::unique_ptr<PerceptionModel> clone() const override {
    return std::make_unique<CnnModel>(*this);
  }
  std::unique_ptr<PerceptionModel> zeros_like() const override {
    return std::make_unique<CnnModel>(spec_, taxelgraph::zeros_like(params_));
  }
  TensorList tensors() override {
    TensorList t;
    params_.append_tensors(t);
    return t;
  }
  ConstTensorList tensors() const override {
    ConstTensorList t;
    params_.append_tensors(t);
    return t;
  }
  std::vector<double> forward(const GraspSample& sample) const override {
    check_raw(spec_, sample);
    return apply_gain(spec_.target, cnn_forward(params_, sample.raw).output);
  }
  double accumulate_gradient(const GraspSample& sample, double weight,
                             PerceptionModel& gradient) const override {
    check_raw(spec_, sample);
    const CnnForward fwd = cnn_forward(params_, sample.raw);
    auto [loss, grad] = loss_and_output_gradient(spec_.target, fwd.output, sample, weight);
    cnn_backward(params_, fwd.cache, grad, static_cast<CnnModel&>(gradient).params_);
    return loss;
  }

 private:
  CnnParams params_;
};

std::string join_sizes(const std::vector<std::size_t>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(sizes[i]);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> sizes;
  std::size_t start = 0;
  while (start <= text.size() && !text.empty()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const long value = parse_int(item);
    if (value <= 0) throw DataError("layer width must be positive: " + item);
    sizes.push_back(static_cast<std::size_t>(value));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return sizes;
}

std::size_t meta_size(const Checkpoint& ckpt, const std::string& key) {
  const long v = parse_int(ckpt.meta_value(key));
  if (v < 0) throw DataError("checkpoint meta '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<double> to_loss_units(const TargetLayout& target, std::span<const double> label) {
  if (label.size() != target.size()) {
    throw std::invalid_argument("label has " + std::to_string(label.size()) +
                                " values, target expects " + std::to_string(target.size()));
  }
  std::vector<double> out(label.begin(), label.end());
  for (std::size_t d = 0; d < target.position_dims; ++d) out[d] *= kCentimetersPerMeter;
  return out;
}

std::vector<double> from_loss_units(const TargetLayout& target, std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  for (std::size_t d = 0; d < target.position_dims && d < out.size(); ++d) {
    out[d] /= kCentimetersPerMeter;
  }
  return out;
}

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTacGnn: return "tacgnn";
    case ModelKind::kMlp: return "mlp";
    case ModelKind::kCnn: return "cnn";
    case ModelKind::kGcn: return "gcn";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "tacgnn") return ModelKind::kTacGnn;
  if (name == "mlp") return ModelKind::kMlp;
  if (name == "cnn") return ModelKind::kCnn;
  if (name == "gcn") return ModelKind::kGcn;
  throw UsageError("unknown model kind '" + std::string(name) + "' (tacgnn, mlp, cnn, gcn)");
}

TactileGraph static_layout_graph(const ModelSpec& spec) {
  PointSet rest;
  for (std::size_t i = 0; i < spec.rest_positions.size(); ++i) {
    rest.push_back({static_cast<int>(i), spec.rest_positions[i], 0.0});
  }
  return build_knn_graph(rest, spec.neighbors);
}

std::unique_ptr<PerceptionModel> PerceptionModel::create(const ModelSpec& spec,
                                                         std::uint64_t seed) {
  if (spec.target.size() == 0) throw std::invalid_argument("model target has no dimensions");
  switch (spec.kind) {
    case ModelKind::kTacGnn:
      return std::make_unique<TacGnnModel>(spec, init_tacgnn(tacgnn_config(spec), seed));
    case ModelKind::kGcn:
      return std::make_unique<GcnModel>(spec, init_tacgnn(tacgnn_config(spec), seed));
    case ModelKind::kMlp: {
      if (spec.taxel_count() == 0) throw std::invalid_argument("mlp baseline needs a layout");
      std::vector<std::size_t> sizes = {spec.taxel_count()};
      sizes.insert(sizes.end(), spec.mlp_hidden.begin(), spec.mlp_hidden.end());
      sizes.push_back(spec.target.size());
      return std::make_unique<MlpModel>(spec, kaiming_init(sizes, seed));
    }
    case ModelKind::kCnn: {
      if (spec.taxel_count() == 0) throw std::invalid_argument("cnn baseline needs a layout");
      ModelSpec s = spec;
      if (s.grid.area() == 0) s.grid = default_grid(s.taxel_count());
      if (s.grid.area() < s.taxel_count()) {
        throw UsageError("cnn grid " + std::to_string(s.grid.rows) + "x" +
                         std::to_string(s.grid.cols) + " is smaller than the taxel count");
      }
      CnnConfig config;
      config.grid = s.grid;
      config.output_dim = s.target.size();
      return std::make_unique<CnnModel>(s, init_cnn(config, seed));
    }
  }
  throw std::invalid_argument("unknown model kind");
}

std::vector<double> PerceptionModel::predict(const GraspSample& sample) const {
  return from_loss_units(spec_.target, forward(sample));
}

double PerceptionModel::loss(const GraspSample& sample) const {
  return rmse_loss(forward(sample), to_loss_units(spec_.target, sample.label));
}

Checkpoint model_checkpoint(const PerceptionModel& model) {
  const ModelSpec& s = model.spec();
  std::vector<std::pair<std::string, std::string>> meta = {
      {"kind", std::string(model_kind_name(s.kind))},
      {"layout", s.layout_id.empty() ? "-" : s.layout_id},
      {"position_dims", std::to_string(s.target.position_dims)},
      {"angle_dims", std::to_string(s.target.angle_dims)},
      {"channels", std::to_string(s.channels)},
      {"neighbors", std::to_string(s.neighbors)},
      {"sampling_ratio", format_double(s.sampling_ratio)},
      {"coord_scale", format_double(s.coord_scale)},
      {"mlp_hidden", join_sizes(s.mlp_hidden)},
      {"grid", std::to_string(s.grid.rows) + "x" + std::to_string(s.grid.cols)},
      {"taxels", std::to_string(s.taxel_count())},
  };
  Matrix rest(s.taxel_count(), 3);
  for (std::size_t i = 0; i < s.taxel_count(); ++i) {
    rest(i, 0) = s.rest_positions[i].x;
    rest(i, 1) = s.rest_positions[i].y;
    rest(i, 2) = s.rest_positions[i].z;
  }
  ConstTensorList tensors = model.tensors();
  tensors.push_back({"layout.rest_positions", &rest});
  return make_checkpoint(tensors, meta);
}

std::unique_ptr<PerceptionModel> model_from_checkpoint(const Checkpoint& ckpt) {
  ModelSpec s;
  s.kind = parse_model_kind(ckpt.meta_value("kind"));
  s.layout_id = ckpt.meta_value("layout");
  if (s.layout_id == "-") s.layout_id.clear();
  s.target.position_dims = meta_size(ckpt, "position_dims");
  s.target.angle_dims = meta_size(ckpt, "angle_dims");
  s.channels = meta_size(ckpt, "channels");
  s.neighbors = meta_size(ckpt, "neighbors");
  s.sampling_ratio = parse_double(ckpt.meta_value("sampling_ratio"));
  s.coord_scale = parse_double(ckpt.meta_value("coord_scale"));
  s.mlp_hidden = parse_sizes(ckpt.meta_value("mlp_hidden"));
  const std::string grid = ckpt.meta_value("grid");
  const std::size_t x = grid.find('x');
  if (x == std::string::npos) throw DataError("bad grid in checkpoint: " + grid);
  s.grid.rows = static_cast<std::size_t>(parse_int(grid.substr(0, x)));
  s.grid.cols = static_cast<std::size_t>(parse_int(grid.substr(x + 1)));
  const Matrix& rest = ckpt.tensor("layout.rest_positions");
  if (rest.rows() != meta_size(ckpt, "taxels") || (rest.rows() > 0 && rest.cols() != 3)) {
    throw DataError("checkpoint rest positions do not match taxel count");
  }
  for (std::size_t i = 0; i < rest.rows(); ++i) {
    s.rest_positions.push_back({rest(i, 0), rest(i, 1), rest(i, 2)});
  }
  std::unique_ptr<PerceptionModel> model;
  try {
    model = PerceptionModel::create(s, 0);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint describes an invalid model: ") + e.what());
  }
  restore_tensors(ckpt, model->tensors());
  return model;
}

void save_model(const PerceptionModel& model, const std::string& path) {
  save_checkpoint(model_checkpoint(model), path);
}

std::unique_ptr<PerceptionModel> load_model(const std::string& path) {
  return model_from_checkpoint(load_checkpoint(path));
}

}  // namespace taxelgraph
