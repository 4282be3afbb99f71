#include "acf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "acf/errors.hpp"

namespace acf {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw MalformedInput("checkpoint truncated in header length");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

struct Entry {
  std::string name;
  const Eigen::MatrixXd* value;
};

std::vector<Entry> directory(const Model& model, const AdamState& adam) {
  std::vector<Entry> out;
  for (const auto& t : model.params()) out.push_back({t.name, &t.value});
  for (const auto& t : adam.m) out.push_back({"adam.m." + t.name, &t.value});
  for (const auto& t : adam.v) out.push_back({"adam.v." + t.name, &t.value});
  return out;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Model& model, const std::string& vocab_hash,
                      const AdamState& adam) {
  const auto entries = directory(model, adam);
  nlohmann::json tensors = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& e : entries) {
    tensors.push_back({{"name", e.name}, {"shape", {e.value->rows(), e.value->cols()}}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(e.value->size()) * sizeof(double);
  }
  const nlohmann::json header = {
      {"config", model.config().to_json()},
      {"dims", {{"vocab_size", model.dims().vocab_size}, {"app_count", model.dims().app_count}}},
      {"vocab_hash", vocab_hash},
      {"precision", "f64"},
      {"adam_step", adam.step},
      {"tensors", tensors}};
  const std::string text = header.dump();
  out.write(kCheckpointMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& e : entries) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = *e.value;
    out.write(reinterpret_cast<const char*>(row_major.data()),
              static_cast<std::streamsize>(row_major.size() * static_cast<Eigen::Index>(sizeof(double))));
  }
  if (!out) throw DataError("failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const std::string& vocab_hash,
                     const AdamState& adam) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, model, vocab_hash, adam);
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw MalformedInput("not a checkpoint (bad magic)");
  const std::uint32_t len = get_u32(in);
  std::string text(len, '\0');
  if (!in.read(text.data(), len)) throw MalformedInput("checkpoint truncated in header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("checkpoint header is not JSON: ") + e.what());
  }

  try {
    if (header.at("precision").get<std::string>() != "f64")
      throw MalformedInput("unsupported checkpoint precision");
    const TrainingConfig config = TrainingConfig::from_json(header.at("config"));
    ModelDims dims;
    dims.vocab_size = header.at("dims").at("vocab_size").get<int>();
    dims.app_count = header.at("dims").at("app_count").get<int>();
    Checkpoint ck{Model(config, dims), header.at("vocab_hash").get<std::string>(), {}};
    ck.adam = AdamState::zeros_like(ck.model.params());
    ck.adam.step = header.at("adam_step").get<std::int64_t>();

    // Read the data section once and fill tensors by name.
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::pair<std::string, Eigen::MatrixXd*>> slots;
    for (auto& t : ck.model.params()) slots.emplace_back(t.name, &t.value);
    for (auto& t : ck.adam.m) slots.emplace_back("adam.m." + t.name, &t.value);
    for (auto& t : ck.adam.v) slots.emplace_back("adam.v." + t.name, &t.value);

    const auto& tensors = header.at("tensors");
    if (tensors.size() != slots.size()) throw MalformedInput("checkpoint tensor directory has wrong length");
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& entry = tensors[i];
      auto& [name, target] = slots[i];
      if (entry.at("name").get<std::string>() != name)
        throw MalformedInput("checkpoint tensor " + std::to_string(i) + " should be '" + name + "'");
      const auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
      if (shape.size() != 2 || shape[0] != target->rows() || shape[1] != target->cols())
        throw MalformedInput("checkpoint tensor '" + name + "' has inconsistent shape");
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const std::uint64_t bytes = static_cast<std::uint64_t>(target->size()) * sizeof(double);
      if (offset + bytes > data.size()) throw MalformedInput("checkpoint truncated in tensor '" + name + "'");
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major(target->rows(),
                                                                                       target->cols());
      std::memcpy(row_major.data(), data.data() + offset, bytes);
      *target = row_major;
    }
    if (!ck.model.params().all_finite() || !ck.adam.m.all_finite() || !ck.adam.v.all_finite())
      throw DataError("checkpoint contains non-finite values");
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("bad checkpoint header: ") + e.what());
  } catch (const ContractViolation& e) {
    throw MalformedInput(std::string("bad checkpoint config: ") + e.what());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace acf
