#include "hkcg/ensemble_io.hpp"

#include <omp.h>

#include <filesystem>
#include <fstream>
#include <cstring>
#include <iterator>

#include <gtest/gtest.h>
#include <json.hpp>

#include "hkcg/error.hpp"
#include "test_util.hpp"

namespace hkcg {
namespace {

namespace fs = std::filesystem;
using testing::make_config;

class EnsembleIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hkcg_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }
  static void spit(const fs::path& p, const std::string& data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << data;
  }

  fs::path dir_;
};

TEST_F(EnsembleIo, RoundTripIsBitIdentical) {
  const SdeConfig cfg = make_config(1, 8, 2, 4, 1.0, 3);
  const EnsembleHandle h = sample_ensemble(cfg, 1, dir_ / "one");
  EXPECT_EQ(h.manifest_path, dir_ / "one.json");
  EXPECT_EQ(h.payload_path, dir_ / "one.f64le");
  const Ensemble e = read_ensemble(dir_ / "one");
  ASSERT_EQ(e.fields.size(), 1u);
  EXPECT_EQ(e.fields[0].data(), sample_field(cfg).data());
  EXPECT_EQ(e.manifest.checksum, h.manifest.checksum);
  EXPECT_EQ(e.manifest.P, 8);
  EXPECT_EQ(e.manifest.M_max, 2);
  EXPECT_EQ(e.manifest.n_steps, 4);
  EXPECT_EQ(e.manifest.seed, 3u);
  EXPECT_EQ(e.manifest.rng, RngStream::kAlgorithm);
}

TEST_F(EnsembleIo, PayloadSizeAndLayout) {
  const SdeConfig cfg = make_config(2, 8, 2, 3, 0.5, 4, 2, 3);
  const EnsembleHandle h = sample_ensemble(cfg, 3, dir_ / "e");
  EXPECT_EQ(fs::file_size(h.payload_path), 3u * 64u * 9u * 2u * 8u);
  EXPECT_EQ(h.manifest.payload_bytes(), 3u * 64u * 9u * 2u * 8u);
  const std::string bytes = slurp(h.payload_path);
  // Sample 1, point 5, row 2, col 1, imaginary part.
  const FieldState f = sample_field(cfg, substream(4, 1));
  const std::size_t offset = (((1 * 64 + 5) * 3 + 2) * 3 + 1) * 16 + 8;
  double v;
  std::memcpy(&v, bytes.data() + offset, 8);
  EXPECT_EQ(v, f.at(5)[2 * 3 + 1].imag());
  const auto manifest = nlohmann::json::parse(slurp(h.manifest_path));
  EXPECT_EQ(manifest["layout"], "sample-major,row-major,complex-interleaved,f64le");
  EXPECT_EQ(manifest["format_version"], 1);
  EXPECT_EQ(manifest["checksum"].get<std::string>().size(), 16u);
}

TEST_F(EnsembleIo, ByteFlipIsChecksumError) {
  const EnsembleHandle h = sample_ensemble(make_config(1, 8, 2, 2, 1.0, 5), 2, dir_ / "x");
  std::string bytes = slurp(h.payload_path);
  bytes[100] = static_cast<char>(bytes[100] ^ 0x01);
  spit(h.payload_path, bytes);
  EXPECT_THROW(read_ensemble(dir_ / "x"), ChecksumError);
}

TEST_F(EnsembleIo, TruncationIsDistinctError) {
  const EnsembleHandle h = sample_ensemble(make_config(1, 8, 2, 2, 1.0, 5), 2, dir_ / "x");
  std::string bytes = slurp(h.payload_path);
  spit(h.payload_path, bytes.substr(0, bytes.size() - 8));
  try {
    read_ensemble(dir_ / "x");
    FAIL() << "expected TruncatedPayloadError";
  } catch (const TruncatedPayloadError&) {
  } catch (const ChecksumError&) {
    FAIL() << "truncation reported as checksum error";
  }
}

TEST_F(EnsembleIo, VersionMismatchIsDistinctError) {
  const EnsembleHandle h = sample_ensemble(make_config(1, 8, 2, 2, 1.0, 5), 1, dir_ / "x");
  auto manifest = nlohmann::json::parse(slurp(h.manifest_path));
  manifest["format_version"] = 2;
  spit(h.manifest_path, manifest.dump(2));
  EXPECT_THROW(read_ensemble(dir_ / "x"), VersionMismatchError);
}

TEST_F(EnsembleIo, MissingFileNamesPath) {
  try {
    read_ensemble(dir_ / "absent");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("absent.json"), std::string::npos);
  }
}

TEST_F(EnsembleIo, ThreadCountIndependentBytes) {
  const SdeConfig cfg = make_config(1, 16, 4, 6, 1.0, 12);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  sample_ensemble(cfg, 5, dir_ / "a", Exec::parallel);
  omp_set_num_threads(4);
  sample_ensemble(cfg, 5, dir_ / "b", Exec::parallel);
  omp_set_num_threads(saved);
  EXPECT_EQ(slurp(dir_ / "a.f64le"), slurp(dir_ / "b.f64le"));
  EXPECT_EQ(slurp(dir_ / "a.json"), slurp(dir_ / "b.json"));
}

TEST_F(EnsembleIo, LatticeAndCentralRoundTrip) {
  const SdeConfig cfg = make_config(1, 8, 2, 2, 1.0, 1);
  EnsembleManifest m = manifest_for(cfg, 1);
  m.lattice = std::vector<double>{1, 0, 0, 0, 2, 0, 0, 0, 3};
  m.central = std::vector<std::vector<double>>{{0.1, 0.2, 0.3}};
  const std::vector<FieldState> fields{sample_field(cfg)};
  write_ensemble(dir_ / "l", m, fields);
  const Ensemble e = read_ensemble(dir_ / "l");
  EXPECT_EQ(*e.manifest.lattice, *m.lattice);
  EXPECT_EQ(*e.manifest.central, *m.central);
  EXPECT_THROW(write_ensemble(dir_ / "bad", manifest_for(cfg, 2), fields), PreconditionError);
}

TEST(Fnv1a, KnownVectors) {
  const std::string a = "a";
  EXPECT_EQ(fnv1a64({}), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64({reinterpret_cast<const unsigned char*>(a.data()), 1}), 0xaf63dc4c8601ec8cULL);
}

}  // namespace
}  // namespace hkcg
