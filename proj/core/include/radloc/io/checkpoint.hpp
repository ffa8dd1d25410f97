#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "radloc/nn/network.hpp"

namespace radloc::io {

// Named-tensor archive: magic "RLCKPT1\n", u64 little-endian header length,
// JSON header {"entries": [{"name", "dtype": "f32", "shape"}], "meta": {...}},
// then raw little-endian f32 payloads in header order.
struct NamedTensor {
  std::string name;
  nn::Tensor tensor;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

struct Checkpoint {
  std::vector<NamedTensor> tensors;
  // Free-form JSON object text carried in the header (architecture configs).
  std::string meta = "{}";

  bool contains(std::string_view name) const;
  // Throws FormatError when absent.
  const nn::Tensor& at(std::string_view name) const;
};

// Writes atomically (temporary file then rename).
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

// Loads entries whose names start with `prefix` (all when empty); other
// payloads are skipped. Throws FormatError on bad magic, malformed header or
// truncated payloads.
Checkpoint load_checkpoint(const std::filesystem::path& path, std::string_view prefix = {});

// Appends "<prefix><block>.weight" and "<prefix><block>.bias" entries.
void add_params(Checkpoint& checkpoint, std::string_view prefix,
                const nn::NetworkParams<float>& params);

// Reads the blocks `spec` expects under `prefix`; throws FormatError when an
// entry is missing or has the wrong shape.
nn::NetworkParams<float> extract_params(const Checkpoint& checkpoint, std::string_view prefix,
                                        const nn::NetworkSpec& spec);

}  // namespace radloc::io
