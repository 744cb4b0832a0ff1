#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "linksched/checkpoint.hpp"
#include "linksched/dataset_io.hpp"
#include "linksched/error.hpp"
#include "linksched/hash.hpp"

using namespace linksched;

namespace {

Dataset small_dataset(std::size_t n, int links = 6) {
  LayoutConfig c;
  c.num_pairs = links;
  return generate_dataset(c, n, 21, 2.5);
}

ModelParams trained_looking_model() {
  Architecture a;
  a.embed_dim = 5;
  a.hidden = 7;
  a.iterations = 3;
  a.quant_bits = 4;
  a.topology = Topology::knn(6);
  auto m = init_model(a, 3);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  for (Matrix* p : m.parameters()) {
    for (double& v : p->values()) v = n01(rng) * 1e-3 + v;
  }
  for (double& v : m.clf.running_mean.values()) v = n01(rng);
  for (double& v : m.clf.running_var.values()) v = 0.1 + std::abs(n01(rng));
  m.config_hash = sha256_hex("cfg");
  return m;
}

}  // namespace

TEST(Hash, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Hash, MixSeedSpreadsIndices) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(5, 9), mix_seed(5, 9));
}

TEST(DatasetIo, RoundTripIsExact) {
  auto data = small_dataset(20);
  label_records(data, ChannelConfig{}, OracleKind::brute_force());
  data[3].label.reset();
  data[3].oracle.reset();
  std::stringstream ss;
  write_dataset(ss, data);
  const auto back = read_dataset(ss);
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back[i].layout, data[i].layout) << i;
    EXPECT_EQ(back[i].label, data[i].label);
    EXPECT_EQ(back[i].oracle, data[i].oracle);
    EXPECT_EQ(back[i].shadowing_std, data[i].shadowing_std);
  }
}

TEST(DatasetIo, GenerationIsSeededPerRecord) {
  const auto a = small_dataset(5);
  const auto b = small_dataset(5);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(a[i].layout, b[i].layout);
    EXPECT_EQ(a[i].layout.config.seed, mix_seed(21, i));
  }
}

TEST(DatasetIo, EmptyDatasetKeepsHeader) {
  std::stringstream ss;
  write_dataset(ss, Dataset{});
  EXPECT_NE(ss.str().find("\"format\""), std::string::npos);
  EXPECT_TRUE(read_dataset(ss).empty());
}

TEST(DatasetIo, MalformedInputsAreInputErrors) {
  auto read = [](const std::string& s) {
    std::stringstream ss(s);
    return read_dataset(ss);
  };
  EXPECT_THROW(read(""), InputError);
  EXPECT_THROW(read("not json\n"), InputError);
  EXPECT_THROW(read("{\"format\":\"other\",\"version\":1,\"count\":0}\n"), InputError);
  std::stringstream ok;
  write_dataset(ok, small_dataset(2));
  std::string text = ok.str();
  EXPECT_THROW(read(text.substr(0, text.size() - 20)), InputError);
  const auto pos = text.find("\"L\":6");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 5, "\"L\":7");
  EXPECT_THROW(read(text), InputError);
  EXPECT_THROW(read_dataset(std::filesystem::path("/nonexistent/none.jsonl")), InputError);
}

TEST(DatasetIo, BruteForceLabelingRejectsLargeLayouts) {
  auto data = small_dataset(1, 25);
  EXPECT_THROW(label_records(data, ChannelConfig{}, OracleKind::brute_force()), ConfigError);
}

TEST(DatasetIo, RecordChannelUsesRecordShadowing) {
  const auto data = small_dataset(1);
  const auto ch = record_channel(data[0], ChannelConfig{});
  ChannelConfig cc;
  cc.shadowing_std_db = 2.5;
  EXPECT_EQ(ch.gain, compute_channel(data[0].layout, cc, channel_seed(data[0].layout)).gain);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto m = trained_looking_model();
  const std::string bytes = serialize_checkpoint(m);
  const auto back = deserialize_checkpoint(bytes);
  EXPECT_EQ(back.arch, m.arch);
  EXPECT_EQ(back.config_hash, m.config_hash);
  const auto a = m.parameters();
  const auto b = back.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i]->size(), b[i]->size());
    EXPECT_EQ(std::memcmp(a[i]->values().data(), b[i]->values().data(), a[i]->size() * sizeof(double)), 0);
  }
  EXPECT_EQ(back.clf.running_mean, m.clf.running_mean);
  EXPECT_EQ(back.clf.running_var, m.clf.running_var);
  EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto m = trained_looking_model();
  const auto path = std::filesystem::temp_directory_path() / "linksched_test_ckpt.bin";
  save_checkpoint(path, m);
  EXPECT_EQ(serialize_checkpoint(load_checkpoint(path)), serialize_checkpoint(m));
  std::filesystem::remove(path);
}

TEST(Checkpoint, VersionMismatchIsCompatibilityError) {
  std::string bytes = serialize_checkpoint(trained_looking_model());
  const std::uint32_t v = kCheckpointVersion + 1;
  std::memcpy(bytes.data() + 8, &v, sizeof v);
  EXPECT_THROW(deserialize_checkpoint(bytes), CompatibilityError);
}

TEST(Checkpoint, CorruptBytesAreInputErrors) {
  const std::string bytes = serialize_checkpoint(trained_looking_model());
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() / 2)), InputError);
  EXPECT_THROW(deserialize_checkpoint("garbage"), InputError);
  EXPECT_THROW(deserialize_checkpoint(bytes + "x"), InputError);
  EXPECT_THROW(load_checkpoint("/nonexistent/model.bin"), InputError);
}
