#include "taxelgraph/cli/manifest.h"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "taxelgraph/errors.h"
#include "taxelgraph/numeric_text.h"

namespace taxelgraph {

std::string git_blob_sha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("EVP_MD_CTX_new failed");
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 15];
  }
  return hex;
}

std::string file_blob_sha1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return git_blob_sha1(ss.str());
}

std::string manifest_text(const Manifest& manifest) {
  std::string out = "command=" + manifest.command + "\n";
  out += manifest.config.to_text(manifest.keys);
  out += "[outputs]\n";
  for (const auto& o : manifest.outputs) {
    out += (o.suffix.empty() ? std::string("-") : o.suffix) + " " + o.sha1 + "\n";
  }
  return out;
}

Manifest parse_manifest(std::string_view text) {
  Manifest m;
  const auto first_end = text.find('\n');
  const std::string_view first = text.substr(0, first_end);
  if (!first.starts_with("command=")) throw DataError("manifest does not start with command=");
  m.command = std::string(first.substr(8));
  m.config = RunConfig::parse(text, "manifest");
  for (const auto& [k, v] : m.config.values()) m.keys.push_back(k);
  const auto marker = text.find("\n[outputs]\n");
  if (marker == std::string_view::npos) throw DataError("manifest has no [outputs] section");
  std::string_view rest = text.substr(marker + 11);
  while (!rest.empty()) {
    const auto end = std::min(rest.find('\n'), rest.size());
    const auto tokens = split_tokens(rest.substr(0, end));
    rest = end < rest.size() ? rest.substr(end + 1) : std::string_view{};
    if (tokens.empty()) continue;
    if (tokens.size() != 2) throw DataError("bad manifest output line");
    m.outputs.push_back({tokens[0] == "-" ? std::string() : std::string(tokens[0]), std::string(tokens[1])});
  }
  return m;
}

void write_manifest(const Manifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << manifest_text(manifest);
  if (!out) throw DataError("failed writing '" + path + "'");
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

}  // namespace taxelgraph
