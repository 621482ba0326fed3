#include "taxelgraph/tactilesim/dataset.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "taxelgraph/errors.h"
#include "taxelgraph/numeric_text.h"

namespace taxelgraph {

namespace {

constexpr std::string_view kMagic = "TAXELGRAPH-DATA";
constexpr std::string_view kVersion = "v1";

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string_view> next(std::string_view what) {
    if (!std::getline(in_, line_)) {
      throw DataError("truncated dataset: expected " + std::string(what) + " at line " +
                      std::to_string(number_ + 1));
    }
    ++number_;
    return split_tokens(line_);
  }
  std::size_t line_number() const { return number_; }

 private:
  std::istream& in_;
  std::string line_;
  std::size_t number_ = 0;
};

std::size_t parse_count(std::string_view token) {
  const auto v = parse_int(token);
  if (v < 0) throw DataError("negative count '" + std::string(token) + "'");
  return static_cast<std::size_t>(v);
}

void expect_tag(const std::vector<std::string_view>& tokens, std::string_view tag,
                std::size_t min_tokens, std::size_t line) {
  if (tokens.empty() || tokens[0] != tag || tokens.size() < min_tokens) {
    throw DataError("malformed dataset line " + std::to_string(line) + ": expected '" +
                    std::string(tag) + "' record");
  }
}

GraspSample make_sample(const HandLayout& layout, const GeneratorConfig& config,
                        double activation_radius, std::size_t index) {
  const GraspRanges& g = layout.ranges;
  Rng rng = make_rng(config.seed, index);
  const double x = uniform(rng, -g.lateral_half_range, g.lateral_half_range);
  const double y = uniform(rng, -g.lateral_half_range, g.lateral_half_range);
  const double height = uniform(rng, -g.max_penetration, g.max_lift);
  GraspSample s;
  switch (config.object) {
    case ObjectKind::kSphere:
      s.label = {x, y, g.sphere_radius + height};
      break;
    case ObjectKind::kCube:
      s.label = {x, y, 0.5 * g.cube_edge + height, uniform(rng, 0.0, 90.0)};
      break;
    case ObjectKind::kCylinder:
      s.label = {x, y, g.cylinder_radius + height, uniform(rng, 0.0, 180.0)};
      break;
  }
  const Shape shape = object_shape(layout, config.object, s.label);
  const std::vector<TaxelSite> sites = grasp_taxels(layout, shape, rng);
  const ContactModel model{activation_radius, config.noise_fraction, kDefaultActivationThreshold};
  s.raw = contact_pressures(sites, std::span(&shape, 1), model, rng);
  s.frame = activated_frame(sites, s.raw);
  return s;
}

}  // namespace

std::string_view object_kind_name(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kSphere: return "sphere";
    case ObjectKind::kCube: return "cube";
    case ObjectKind::kCylinder: return "cylinder";
  }
  return "unknown";
}

ObjectKind parse_object_kind(std::string_view name) {
  if (name == "sphere") return ObjectKind::kSphere;
  if (name == "cube") return ObjectKind::kCube;
  if (name == "cylinder") return ObjectKind::kCylinder;
  throw UsageError("unknown object '" + std::string(name) + "' (sphere, cube, cylinder)");
}

TargetLayout object_target(ObjectKind kind) {
  return kind == ObjectKind::kSphere ? TargetLayout{3, 0} : TargetLayout{3, 1};
}

Shape object_shape(const HandLayout& layout, ObjectKind kind, std::span<const double> label) {
  const GraspRanges& g = layout.ranges;
  const Vec3 c{label[0], label[1], label[2]};
  switch (kind) {
    case ObjectKind::kSphere:
      return Sphere{c, g.sphere_radius};
    case ObjectKind::kCube: {
      const double h = 0.5 * g.cube_edge;
      return Box{c, {h, h, h}, label[3]};
    }
    case ObjectKind::kCylinder:
      return Cylinder{c, g.cylinder_radius, 0.5 * g.cylinder_length, label[3]};
  }
  throw std::invalid_argument("unknown object kind");
}

DatasetFile generate_grasp_dataset(const HandLayout& layout, const GeneratorConfig& config) {
  if (config.count == 0) throw UsageError("dataset size must be >= 1");
  const double radius = config.activation_radius > 0.0
                            ? config.activation_radius
                            : calibrate_activation_radius(layout, config.noise_fraction)
                                  .activation_radius;
  DatasetFile file;
  file.layout_id = layout.id;
  file.object_kind = std::string(object_kind_name(config.object));
  file.label_dim = object_target(config.object).size();
  file.samples.resize(config.count);
  const unsigned workers = std::max(1u, std::min<unsigned>(config.threads,
                                                           static_cast<unsigned>(config.count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < config.count; ++i) {
      file.samples[i] = make_sample(layout, config, radius, i);
    }
    return file;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < config.count; i += workers) {
        file.samples[i] = make_sample(layout, config, radius, i);
      }
    });
  }
  for (auto& t : pool) t.join();
  return file;
}

void write_dataset(const DatasetFile& file, std::ostream& out) {
  std::string buf;
  buf += kMagic;
  buf += ' ';
  buf += kVersion;
  buf += ' ' + file.layout_id + ' ' + file.object_kind + ' ' + std::to_string(file.label_dim) +
         ' ' + std::to_string(file.samples.size()) + '\n';
  for (const GraspSample& s : file.samples) {
    if (s.label.size() != file.label_dim) {
      throw std::invalid_argument("write_dataset: label width does not match header");
    }
    buf += "S " + std::to_string(s.frame.size()) + '\n';
    for (const TaxelPoint& p : s.frame) {
      buf += "T " + std::to_string(p.taxel_id);
      for (double v : {p.position.x, p.position.y, p.position.z, p.pressure}) {
        buf += ' ';
        append_double(buf, v);
      }
      buf += '\n';
    }
    buf += 'L';
    for (double v : s.label) {
      buf += ' ';
      append_double(buf, v);
    }
    buf += "\nR";
    for (double v : s.raw) {
      buf += ' ';
      append_double(buf, v);
    }
    buf += '\n';
    out << buf;
    buf.clear();
  }
  out << buf;
  if (!out) throw DataError("failed to write dataset");
}

DatasetFile read_dataset(std::istream& in) {
  LineReader reader(in);
  const auto header = reader.next("header");
  if (header.size() != 6 || header[0] != kMagic) throw DataError("not a taxelgraph dataset");
  if (header[1] != kVersion) {
    throw DataError("unsupported dataset version '" + std::string(header[1]) + "'");
  }
  DatasetFile file;
  file.layout_id = std::string(header[2]);
  file.object_kind = std::string(header[3]);
  file.label_dim = parse_count(header[4]);
  const std::size_t n = parse_count(header[5]);
  std::vector<GraspSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    GraspSample s;
    auto tokens = reader.next("sample record");
    expect_tag(tokens, "S", 2, reader.line_number());
    const std::size_t active = parse_count(tokens[1]);
    for (std::size_t a = 0; a < active; ++a) {
      tokens = reader.next("taxel record");
      expect_tag(tokens, "T", 6, reader.line_number());
      if (tokens.size() != 6) throw DataError("malformed taxel record");
      s.frame.push_back({static_cast<int>(parse_int(tokens[1])),
                         {parse_double(tokens[2]), parse_double(tokens[3]), parse_double(tokens[4])},
                         parse_double(tokens[5])});
    }
    tokens = reader.next("label record");
    expect_tag(tokens, "L", 1, reader.line_number());
    if (tokens.size() != file.label_dim + 1) {
      throw DataError("label record at line " + std::to_string(reader.line_number()) + " has " +
                      std::to_string(tokens.size() - 1) + " values, expected " +
                      std::to_string(file.label_dim));
    }
    for (std::size_t t = 1; t < tokens.size(); ++t) s.label.push_back(parse_double(tokens[t]));
    tokens = reader.next("raw record");
    expect_tag(tokens, "R", 1, reader.line_number());
    for (std::size_t t = 1; t < tokens.size(); ++t) s.raw.push_back(parse_double(tokens[t]));
    if (!samples.empty() && s.raw.size() != samples.front().raw.size()) {
      throw DataError("raw record at line " + std::to_string(reader.line_number()) +
                      " differs in length from the first sample");
    }
    samples.push_back(std::move(s));
  }
  file.samples = std::move(samples);
  return file;
}

void write_dataset(const DatasetFile& file, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_dataset(file, out);
}

DatasetFile read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  return read_dataset(in);
}

ModelSpec dataset_model_spec(const DatasetFile& file, ModelKind kind) {
  ObjectKind object;
  HandLayout layout;
  try {
    object = parse_object_kind(file.object_kind);
    layout = hand_layout(file.layout_id);
  } catch (const UsageError& e) {
    throw DataError(std::string("dataset header: ") + e.what());
  }
  ModelSpec spec;
  spec.kind = kind;
  spec.target = object_target(object);
  if (spec.target.size() != file.label_dim) throw DataError("dataset label width does not match its object");
  spec.layout_id = file.layout_id;
  spec.rest_positions = layout.rest_positions();
  return spec;
}

}  // namespace taxelgraph
