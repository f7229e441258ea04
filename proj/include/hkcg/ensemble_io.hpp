#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hkcg/exec.hpp"
#include "hkcg/sampler.hpp"

namespace hkcg {

// Ensemble persistence, format_version 1:
//   <path>.json   UTF-8 manifest (keys sorted)
//   <path>.f64le  raw little-endian doubles, index order
//                 [sample][grid point, row-major][matrix row][matrix col][re|im]
// The checksum is FNV-1a 64 over the payload bytes, stored as 16 hex digits.
struct EnsembleManifest {
  static constexpr int kFormatVersion = 1;
  static constexpr const char* kLayout = "sample-major,row-major,complex-interleaved,f64le";
  static constexpr const char* kChecksumAlgorithm = "fnv1a-64";

  int format_version = kFormatVersion;
  int d = 1;
  int n = 2;
  int k = 2;
  int M_max = 16;
  int P = 64;
  int n_steps = 256;
  double t_end = 1.0;
  int n_samples = 1;
  std::uint64_t seed = 0;
  std::uint64_t first_stream = 0;  // sample i uses substream(seed, first_stream + i)
  std::string layout = kLayout;
  std::string rng = "";
  std::optional<std::vector<double>> lattice;               // row-major N x N
  std::optional<std::vector<std::vector<double>>> central;  // per-sample lattice coordinates
  std::uint64_t checksum = 0;

  std::size_t payload_bytes() const;
};

struct Ensemble {
  EnsembleManifest manifest;
  std::vector<FieldState> fields;
};

struct EnsembleHandle {
  std::filesystem::path manifest_path;
  std::filesystem::path payload_path;
  EnsembleManifest manifest;
};

EnsembleManifest manifest_for(const SdeConfig& cfg, int n_samples, std::uint64_t first_stream = 0);

std::vector<unsigned char> encode_payload(std::span<const FieldState> fields);
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

std::string manifest_to_json(const EnsembleManifest& manifest);
EnsembleManifest manifest_from_json(const std::string& text);

// Sets manifest.checksum from the payload and writes both files.
EnsembleHandle write_ensemble(const std::filesystem::path& path, EnsembleManifest manifest,
                              std::span<const FieldState> fields);
// Throws VersionMismatchError, TruncatedPayloadError, ChecksumError or IoError.
Ensemble read_ensemble(const std::filesystem::path& path);

// Samples n_samples terminal fields (sample i from substream(cfg.seed, i))
// and persists them at `path`.
EnsembleHandle sample_ensemble(const SdeConfig& cfg, int n_samples, const std::filesystem::path& path,
                               Exec exec = Exec::parallel);

}  // namespace hkcg
