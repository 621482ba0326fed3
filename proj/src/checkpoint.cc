#include "taxelgraph/diffcore/checkpoint.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "taxelgraph/errors.h"
#include "taxelgraph/numeric_text.h"

namespace taxelgraph {

namespace {

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(std::string("checkpoint truncated: missing ") + what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::size_t parse_count(std::string_view line, std::string_view keyword) {
  auto tokens = split_tokens(line);
  if (tokens.size() != 2 || tokens[0] != keyword) {
    throw DataError("checkpoint: expected '" + std::string(keyword) + " <count>', got '" +
                    std::string(line) + "'");
  }
  const auto n = parse_int(tokens[1]);
  if (n < 0) throw DataError("checkpoint: negative count");
  return static_cast<std::size_t>(n);
}

}  // namespace

const std::string& Checkpoint::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  throw DataError("checkpoint: missing meta key '" + key + "'");
}

const Matrix& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return m;
  }
  throw DataError("checkpoint: missing tensor '" + name + "'");
}

Checkpoint make_checkpoint(const ConstTensorList& tensors,
                           std::vector<std::pair<std::string, std::string>> meta) {
  Checkpoint ckpt;
  ckpt.meta = std::move(meta);
  for (const auto& t : tensors) ckpt.tensors.emplace_back(t.name, *t.tensor);
  return ckpt;
}

void restore_tensors(const Checkpoint& checkpoint, const TensorList& targets) {
  for (const auto& t : targets) {
    const Matrix& source = checkpoint.tensor(t.name);
    if (!source.same_shape(*t.tensor)) {
      throw DataError("checkpoint: tensor '" + t.name + "' has shape " +
                      std::to_string(source.rows()) + "x" + std::to_string(source.cols()) +
                      ", expected " + std::to_string(t.tensor->rows()) + "x" +
                      std::to_string(t.tensor->cols()));
    }
    *t.tensor = source;
  }
}

void write_checkpoint(const Checkpoint& checkpoint, std::ostream& out) {
  std::string buf;
  buf.append(kCheckpointHeader).push_back('\n');
  buf += "meta " + std::to_string(checkpoint.meta.size()) + "\n";
  for (const auto& [key, value] : checkpoint.meta) {
    if (key.find_first_of(" \t\n") != std::string::npos ||
        value.find_first_of(" \t\n") != std::string::npos || key.empty() || value.empty()) {
      throw std::invalid_argument("checkpoint meta must be non-empty single tokens: " + key);
    }
    buf += key + " " + value + "\n";
  }
  buf += "tensors " + std::to_string(checkpoint.tensors.size()) + "\n";
  for (const auto& [name, m] : checkpoint.tensors) {
    buf += name + " " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
      buf += join_doubles(m.row(r));
      buf.push_back('\n');
    }
  }
  out << buf;
}

Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint ckpt;
  const std::string header = next_line(in, "header");
  if (header != kCheckpointHeader) {
    throw DataError("checkpoint: unsupported header '" + header + "'");
  }
  const std::size_t n_meta = parse_count(next_line(in, "meta count"), "meta");
  for (std::size_t i = 0; i < n_meta; ++i) {
    const std::string line = next_line(in, "meta entry");
    auto tokens = split_tokens(line);
    if (tokens.size() != 2) throw DataError("checkpoint: bad meta line '" + line + "'");
    ckpt.meta.emplace_back(std::string(tokens[0]), std::string(tokens[1]));
  }
  const std::size_t n_tensors = parse_count(next_line(in, "tensor count"), "tensors");
  for (std::size_t i = 0; i < n_tensors; ++i) {
    const std::string line = next_line(in, "tensor record");
    auto tokens = split_tokens(line);
    if (tokens.size() != 3) throw DataError("checkpoint: bad tensor line '" + line + "'");
    const auto rows = parse_int(tokens[1]);
    const auto cols = parse_int(tokens[2]);
    if (rows < 0 || cols < 0) throw DataError("checkpoint: negative tensor shape");
    Matrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const std::string values_line = next_line(in, "tensor values");
      auto values = split_tokens(values_line);
      if (values.size() != m.cols()) {
        throw DataError("checkpoint: tensor '" + std::string(tokens[0]) + "' row " +
                        std::to_string(r) + " has " + std::to_string(values.size()) +
                        " values, expected " + std::to_string(m.cols()));
      }
      for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = parse_double(values[c]);
    }
    ckpt.tensors.emplace_back(std::string(tokens[0]), std::move(m));
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_checkpoint(checkpoint, out);
  if (!out) throw DataError("failed writing '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace taxelgraph
