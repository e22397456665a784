#include "clir/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include "clir/error.hpp"

namespace clir {

namespace {

struct DigestContext {
  DigestContext() : ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: init failed");
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx.get(), data, n) != 1) throw Error("sha256: update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) throw Error("sha256: final failed");
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
      std::snprintf(buf, sizeof(buf), "%02x", md[i]);
      out += buf;
    }
    return out;
  }
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  DigestContext d;
  d.update(bytes.data(), bytes.size());
  return d.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  DigestContext d;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return d.hex();
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json in = nlohmann::json::array();
  for (const auto& [role, path] : inputs) {
    in.push_back({{"role", role}, {"path", path.string()}, {"sha256", sha256_file(path)}});
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& path : outputs) out.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
  return {{"format", "clir-manifest"}, {"version", 1}, {"command", command}, {"arguments", arguments},
          {"config", config},          {"seeds", seeds}, {"inputs", in},     {"outputs", out}};
}

std::filesystem::path write_manifest(const std::filesystem::path& dir, const Manifest& manifest) {
  const auto path = dir / "manifest.json";
  const auto doc = manifest.to_json();
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  return path;
}

}  // namespace clir
