// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The splitwire Authors

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "splitwire/error.hpp"
#include "splitwire/model_graph.hpp"
#include "splitwire/weights.hpp"

namespace splitwire {
namespace {

WeightStore small_store() {
  WeightStore s;
  s.add("a.weight", {{2, 3}, {1, 2, 3, 4, 5, 6}});
  s.add("a.bias", {{2}, {-1.0f, 0.5f}});
  s.add("scalar", {{}, {42.0f}});
  return s;
}

std::string error_of(const std::vector<std::byte>& bytes) {
  try {
    load_weights(bytes);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::uint32_t manifest_length(const std::vector<std::byte>& bytes) {
  std::uint32_t n = 0;
  std::memcpy(&n, bytes.data() + 6, 4);
  return n;
}

// Rebuilds a container around a hand-written manifest.
std::vector<std::byte> with_manifest(const std::string& manifest, std::size_t blob_bytes) {
  std::vector<std::byte> out;
  for (char c : std::string("SWWT")) out.push_back(static_cast<std::byte>(c));
  out.push_back(std::byte{1});
  out.push_back(std::byte{0});
  const auto n = static_cast<std::uint32_t>(manifest.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((n >> (8 * i)) & 0xff));
  for (char c : manifest) out.push_back(static_cast<std::byte>(c));
  out.resize(out.size() + blob_bytes);
  return out;
}

TEST(WeightContainer, RoundTripsBitExactly) {
  const WeightStore s = small_store();
  const auto bytes = export_weights(s);
  const WeightStore loaded = load_weights(bytes);
  EXPECT_EQ(loaded, s);
  EXPECT_EQ(export_weights(loaded), bytes);
  EXPECT_EQ(loaded.fingerprint(), s.fingerprint());
}

TEST(WeightContainer, LayoutHeader) {
  const auto bytes = export_weights(small_store());
  EXPECT_EQ(std::memcmp(bytes.data(), "SWWT", 4), 0);
  EXPECT_EQ(bytes[4], std::byte{1});
  EXPECT_EQ(bytes[5], std::byte{0});
  EXPECT_EQ(bytes.size(), 10 + manifest_length(bytes) + 9 * sizeof(float));
}

TEST(WeightContainer, TruncatedBlob) {
  auto bytes = export_weights(small_store());
  bytes.pop_back();
  EXPECT_NE(error_of(bytes).find("truncated"), std::string::npos);
}

TEST(WeightContainer, TruncatedPreambleAndManifest) {
  const auto bytes = export_weights(small_store());
  EXPECT_NE(error_of({bytes.begin(), bytes.begin() + 5}).find("truncated"), std::string::npos);
  EXPECT_NE(error_of({bytes.begin(), bytes.begin() + 20}).find("truncated"), std::string::npos);
}

TEST(WeightContainer, DuplicateName) {
  const std::string m =
      R"([{"name":"x","dtype":"f32","shape":[1],"offset":0,"byte_length":4},)"
      R"({"name":"x","dtype":"f32","shape":[1],"offset":4,"byte_length":4}])";
  EXPECT_NE(error_of(with_manifest(m, 8)).find("duplicate"), std::string::npos);
}

TEST(WeightContainer, SizeMismatch) {
  const std::string wrong_len =
      R"([{"name":"x","dtype":"f32","shape":[2],"offset":0,"byte_length":4}])";
  EXPECT_NE(error_of(with_manifest(wrong_len, 4)).find("mismatch"), std::string::npos);
  const std::string ok = R"([{"name":"x","dtype":"f32","shape":[1],"offset":0,"byte_length":4}])";
  EXPECT_NE(error_of(with_manifest(ok, 12)).find("mismatch"), std::string::npos);
}

TEST(WeightContainer, NonContiguousAndBadDtype) {
  const std::string gap =
      R"([{"name":"x","dtype":"f32","shape":[1],"offset":4,"byte_length":4}])";
  EXPECT_NE(error_of(with_manifest(gap, 8)).find("contiguous"), std::string::npos);
  const std::string f16 =
      R"([{"name":"x","dtype":"f16","shape":[1],"offset":0,"byte_length":4}])";
  EXPECT_NE(error_of(with_manifest(f16, 4)).find("dtype"), std::string::npos);
  EXPECT_NE(error_of(with_manifest("{not json", 0)).find("malformed"), std::string::npos);
}

TEST(WeightContainer, BadMagicAndVersion) {
  auto bytes = export_weights(small_store());
  auto bad = bytes;
  bad[0] = std::byte{'X'};
  EXPECT_NE(error_of(bad).find("magic"), std::string::npos);
  bad = bytes;
  bad[4] = std::byte{9};
  EXPECT_NE(error_of(bad).find("version"), std::string::npos);
}

TEST(WeightContainer, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "splitwire_weights_test.swwt";
  write_weights_file(small_store(), path);
  EXPECT_EQ(read_weights_file(path), small_store());
  std::filesystem::remove(path);
  EXPECT_THROW(read_weights_file(path), Error);
}

TEST(WeightStore, FingerprintTracksContent) {
  WeightStore a = small_store();
  WeightStore b;
  b.add("a.weight", {{2, 3}, {1, 2, 3, 4, 5, 6}});
  b.add("a.bias", {{2}, {-1.0f, 0.75f}});
  b.add("scalar", {{}, {42.0f}});
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  EXPECT_EQ(a.fingerprint(), small_store().fingerprint());
}

TEST(WeightStore, RejectsDuplicateAdd) {
  WeightStore s = small_store();
  EXPECT_THROW(s.add("scalar", {{}, {1.0f}}), Error);
}

TEST(RandomWeights, CoverGraphAndAreStableAcrossSplits) {
  const ModelGraph v = build_resnet(18, ResNetVariant::kCifar, 10);
  const WeightStore full = random_weights(v, 7);
  EXPECT_NO_THROW(validate_weights(v, full));
  const SplitModel m = apply_split(v, SplitPoint::kSP3, 64);
  const WeightStore split = random_weights(m.joined(), 7);
  EXPECT_NO_THROW(validate_weights(m.encoder, split));
  EXPECT_NO_THROW(validate_weights(m.decoder, split));
  EXPECT_EQ(split.at("layer1.0.conv1.weight"), full.at("layer1.0.conv1.weight"));
  EXPECT_EQ(split.at("fc.weight"), full.at("fc.weight"));
  EXPECT_NE(random_weights(v, 8).fingerprint(), full.fingerprint());
}

TEST(RandomWeights, BoundedByFanIn) {
  const ModelGraph v = build_resnet(18, ResNetVariant::kCifar, 10);
  const WeightStore w = random_weights(v, 3);
  const float bound = 1.0f / std::sqrt(64.0f * 9.0f);
  for (float x : w.at("layer1.0.conv1.weight").values) EXPECT_LE(std::abs(x), bound);
  for (float x : w.at("bn1.running_var").values) EXPECT_GE(x, 0.5f);
}

TEST(ValidateWeights, NamesMissingAndMisshapen) {
  const ModelGraph v = build_resnet(18, ResNetVariant::kCifar, 10);
  WeightStore partial;
  try {
    validate_weights(v, partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("conv1.weight"), std::string::npos);
  }
  const WeightStore full = random_weights(v, 1);
  WeightStore wrong;
  for (const auto& [name, t] : full.entries()) {
    if (name == "fc.bias") {
      wrong.add(name, {{11}, std::vector<float>(11)});
    } else {
      wrong.add(name, t);
    }
  }
  EXPECT_THROW(validate_weights(v, wrong), Error);
}

}  // namespace
}  // namespace splitwire
