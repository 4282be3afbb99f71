#include <gtest/gtest.h>

#include <fstream>
#include <cstring>
#include <sstream>

#include <nlohmann/json.hpp>

#include "acf/checkpoint.hpp"
#include "acf/errors.hpp"
#include "support.hpp"

using namespace acf;

namespace {

Model small_model(CellType cell = CellType::lstm) {
  TrainingConfig cfg;
  cfg.cell = cell;
  cfg.hidden_size = 6;
  cfg.num_layers = 2;
  cfg.n_past = 3;
  cfg.seed = 42;
  Model m(cfg, {8, 2});
  m.initialize(3);
  return m;
}

std::string serialize(const Model& m, const AdamState& a, const std::string& hash = "00ff") {
  std::ostringstream os;
  write_checkpoint(os, m, hash, a);
  return os.str();
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  const Model m = small_model();
  AdamState adam = AdamState::zeros_like(m.params());
  adam.step = 17;
  adam.m.at(2).value(1, 1) = 0.125;
  adam.v.at(5).value(0, 0) = 1e-300;
  const std::string bytes = serialize(m, adam);
  std::istringstream in(bytes);
  const Checkpoint c = read_checkpoint(in);
  EXPECT_EQ(c.vocab_hash, "00ff");
  EXPECT_EQ(c.model.config(), m.config());
  EXPECT_EQ(c.model.dims(), m.dims());
  EXPECT_EQ(c.adam.step, 17);
  for (std::size_t k = 0; k < m.params().size(); ++k) {
    EXPECT_EQ(c.model.params().at(k).name, m.params().at(k).name);
    EXPECT_EQ(c.model.params().at(k).value, m.params().at(k).value);
    EXPECT_EQ(c.adam.m.at(k).value, adam.m.at(k).value);
    EXPECT_EQ(c.adam.v.at(k).value, adam.v.at(k).value);
  }
  EXPECT_EQ(serialize(c.model, c.adam), bytes);
}

TEST(Checkpoint, LayoutHeader) {
  const Model m = small_model(CellType::gru);
  const std::string bytes = serialize(m, AdamState::zeros_like(m.params()));
  ASSERT_GE(bytes.size(), 8u);
  EXPECT_EQ(bytes.substr(0, 4), "ACF1");
  const auto len = static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4])) |
                   static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[5])) << 8 |
                   static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[6])) << 16 |
                   static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[7])) << 24;
  const auto header = nlohmann::json::parse(bytes.substr(8, len));
  EXPECT_EQ(header["precision"], "f64");
  EXPECT_EQ(header["config"]["cell"], "gru");
  EXPECT_EQ(header["dims"]["vocab_size"], 8);
  const auto& tensors = header["tensors"];
  EXPECT_EQ(tensors.size(), 3 * m.params().size());
  EXPECT_EQ(tensors[0]["name"], "rnn.l0.W_z");
  EXPECT_EQ(tensors[0]["offset"], 0);
  EXPECT_EQ(tensors.back()["name"], "adam.v.head.b2");
  // Data section: every scalar as 8 bytes.
  EXPECT_EQ(bytes.size(), 8 + len + 3 * m.params().scalar_count() * 8);
  // Row-major: the second stored value of W_z is element (0, 1).
  double second = 0.0;
  std::memcpy(&second, bytes.data() + 8 + len + 8, 8);
  EXPECT_EQ(second, m.params()["rnn.l0.W_z"](0, 1));
}

TEST(Checkpoint, SaveLoadFile) {
  test::TempDir dir;
  const Model m = small_model();
  save_checkpoint(dir / "m.acf", m, "abc", AdamState::zeros_like(m.params()));
  const Checkpoint c = load_checkpoint(dir / "m.acf");
  EXPECT_EQ(c.vocab_hash, "abc");
  EXPECT_THROW(load_checkpoint(dir / "none.acf"), DataError);
}

TEST(Checkpoint, RejectsCorruption) {
  const Model m = small_model();
  const std::string good = serialize(m, AdamState::zeros_like(m.params()));
  const auto reject = [](const std::string& bytes) {
    std::istringstream in(bytes);
    EXPECT_THROW(read_checkpoint(in), MalformedInput);
  };
  reject("");
  reject("ACF2" + good.substr(4));
  reject(good.substr(0, 6));
  reject(good.substr(0, good.size() - 1));
  std::string bad_header = good;
  bad_header[8] = '!';
  reject(bad_header);
}

TEST(Checkpoint, NonFiniteTensorsAreDataErrors) {
  Model m = small_model();
  m.params().at(1).value(0, 0) = std::numeric_limits<double>::quiet_NaN();
  std::istringstream in(serialize(m, AdamState::zeros_like(m.params())));
  EXPECT_THROW(read_checkpoint(in), DataError);
}
