#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "acf/adam.hpp"
#include "acf/model.hpp"

namespace acf {

inline constexpr char kCheckpointMagic[4] = {'A', 'C', 'F', '1'};

struct Checkpoint {
  Model model;
  std::string vocab_hash;
  AdamState adam;
};

/// Layout: "ACF1", uint32 LE header length, UTF-8 JSON header
/// {config, dims, vocab_hash, precision, adam_step, tensors:[{name, shape, offset}]},
/// then little-endian f64 tensor data (row-major) in directory order.
/// Adam moments are stored as "adam.m.<name>" / "adam.v.<name>". The output
/// carries no timestamps, so equal models serialize to equal bytes.
void write_checkpoint(std::ostream& out, const Model& model, const std::string& vocab_hash,
                      const AdamState& adam);
void save_checkpoint(const std::filesystem::path& path, const Model& model, const std::string& vocab_hash,
                     const AdamState& adam);

/// Throws MalformedInput on a bad magic, header or truncated data, and
/// DataError on non-finite tensors.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace acf
