#include "radloc/io/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "radloc/common/error.hpp"

namespace radloc::io {

namespace {

constexpr char kMagic[] = "RLCKPT1\n";
constexpr std::size_t kMagicSize = 8;
// Guards against absurd allocations from corrupt length fields.
constexpr std::uint64_t kMaxHeader = 1ULL << 30;
constexpr std::size_t kMaxElements = std::size_t{1} << 34;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace

bool Checkpoint::contains(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return true;
  }
  return false;
}

const nn::Tensor& Checkpoint::at(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.tensor;
  }
  throw FormatError("checkpoint has no tensor '" + std::string(name) + "'");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  nlohmann::json header;
  header["entries"] = nlohmann::json::array();
  for (const auto& t : ck.tensors) {
    header["entries"].push_back({{"name", t.name}, {"dtype", "f32"}, {"shape", t.tensor.shape()}});
  }
  header["meta"] = nlohmann::json::parse(ck.meta.empty() ? "{}" : ck.meta);
  const std::string text = header.dump();
  const std::uint64_t len = text.size();

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    out.write(kMagic, kMagicSize);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& t : ck.tensors) {
      out.write(reinterpret_cast<const char*>(t.tensor.data()),
                static_cast<std::streamsize>(t.tensor.size() * sizeof(float)));
    }
    if (!out) throw FormatError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::string_view prefix) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  char magic[kMagicSize];
  if (!in.read(magic, kMagicSize) || std::memcmp(magic, kMagic, kMagicSize) != 0) {
    throw FormatError(path.string() + ": not a checkpoint (bad magic)");
  }
  std::uint64_t len = 0;
  if (!in.read(reinterpret_cast<char*>(&len), sizeof len) || len > kMaxHeader) {
    throw FormatError(path.string() + ": corrupt header length");
  }
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw FormatError(path.string() + ": truncated header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed header: " + e.what());
  }
  if (!header.is_object() || !header.contains("entries") || !header["entries"].is_array()) {
    throw FormatError(path.string() + ": header lacks an entries array");
  }

  Checkpoint ck;
  if (header.contains("meta")) ck.meta = header["meta"].dump();
  for (const auto& e : header["entries"]) {
    nn::Shape shape;
    std::string name;
    try {
      name = e.at("name").get<std::string>();
      if (e.at("dtype").get<std::string>() != "f32") {
        throw FormatError(path.string() + ": unsupported dtype for " + name);
      }
      shape = e.at("shape").get<nn::Shape>();
    } catch (const nlohmann::json::exception& ex) {
      throw FormatError(path.string() + ": malformed entry: " + ex.what());
    }
    std::size_t count = 1;
    for (auto d : shape) {
      if (d == 0 || count > kMaxElements / d) {
        throw FormatError(path.string() + ": bad shape for " + name);
      }
      count *= d;
    }
    const auto bytes = static_cast<std::streamsize>(count * sizeof(float));
    if (!prefix.empty() && !starts_with(name, prefix)) {
      if (!in.seekg(bytes, std::ios::cur)) throw FormatError(path.string() + ": truncated payload");
      continue;
    }
    nn::Tensor t(shape);
    if (!in.read(reinterpret_cast<char*>(t.data()), bytes)) {
      throw FormatError(path.string() + ": truncated payload for " + name);
    }
    ck.tensors.push_back({std::move(name), std::move(t)});
  }
  // Seeking past the end does not fail, so verify the skipped payloads fit.
  const auto pos = in.tellg();
  in.seekg(0, std::ios::end);
  if (!in || in.tellg() < pos) throw FormatError(path.string() + ": truncated payload");
  if (in.tellg() != pos) throw FormatError(path.string() + ": trailing bytes after payloads");
  return ck;
}

void add_params(Checkpoint& ck, std::string_view prefix, const nn::NetworkParams<float>& params) {
  for (const auto& p : params) {
    ck.tensors.push_back({std::string(prefix) + p.name + ".weight", p.weight});
    ck.tensors.push_back({std::string(prefix) + p.name + ".bias", p.bias});
  }
}

nn::NetworkParams<float> extract_params(const Checkpoint& ck, std::string_view prefix,
                                        const nn::NetworkSpec& spec) {
  auto params = nn::make_params<float>(spec);
  for (auto& p : params) {
    const auto w = std::string(prefix) + p.name + ".weight";
    const auto b = std::string(prefix) + p.name + ".bias";
    const auto& wt = ck.at(w);
    const auto& bt = ck.at(b);
    if (wt.shape() != p.weight.shape() || bt.shape() != p.bias.shape()) {
      throw FormatError("checkpoint tensor " + w + " has shape " + nn::shape_to_string(wt.shape()) +
                        ", expected " + nn::shape_to_string(p.weight.shape()));
    }
    p.weight = wt;
    p.bias = bt;
  }
  return params;
}

}  // namespace radloc::io
