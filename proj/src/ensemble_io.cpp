#include "hkcg/ensemble_io.hpp"

#include <bit>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "hkcg/error.hpp"

namespace hkcg {

using nlohmann::json;

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& base, const char* suffix) {
  return std::filesystem::path(base.string() + suffix);
}

void put_le(std::vector<unsigned char>& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>(bits >> (8 * b)));
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[b];
  return std::bit_cast<double>(bits);
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string io_cause() { return std::strerror(errno); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + ": " + io_cause());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing: " + io_cause());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed: " + io_cause());
}

}  // namespace

std::size_t EnsembleManifest::payload_bytes() const {
  std::size_t points = 1;
  for (int i = 0; i < d; ++i) points *= static_cast<std::size_t>(P);
  return static_cast<std::size_t>(n_samples) * points * n * n * 2 * 8;
}

EnsembleManifest manifest_for(const SdeConfig& cfg, int n_samples, std::uint64_t first_stream) {
  EnsembleManifest m;
  m.d = cfg.spec.grid().dim();
  m.n = cfg.spec.lie().n();
  m.k = cfg.spec.sobolev_k();
  m.M_max = cfg.spec.basis().max_mode();
  m.P = cfg.spec.grid().points_per_axis();
  m.n_steps = cfg.n_steps;
  m.t_end = cfg.t_end;
  m.n_samples = n_samples;
  m.seed = cfg.seed;
  m.first_stream = first_stream;
  m.rng = RngStream::kAlgorithm;
  return m;
}

std::vector<unsigned char> encode_payload(std::span<const FieldState> fields) {
  std::vector<unsigned char> out;
  std::size_t total = 0;
  for (const auto& f : fields) total += f.data().size() * 16;
  out.reserve(total);
  for (const auto& f : fields) {
    for (const Complex& z : f.data()) {
      put_le(out, z.real());
      put_le(out, z.imag());
    }
  }
  return out;
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string manifest_to_json(const EnsembleManifest& m) {
  json j;
  j["format_version"] = m.format_version;
  j["d"] = m.d;
  j["n"] = m.n;
  j["k"] = m.k;
  j["M_max"] = m.M_max;
  j["P"] = m.P;
  j["n_steps"] = m.n_steps;
  j["t_end"] = m.t_end;
  j["n_samples"] = m.n_samples;
  j["seed"] = m.seed;
  j["first_stream"] = m.first_stream;
  j["layout"] = m.layout;
  j["rng"] = m.rng;
  j["checksum"] = hex64(m.checksum);
  j["checksum_algorithm"] = EnsembleManifest::kChecksumAlgorithm;
  if (m.lattice) j["lattice"] = *m.lattice;
  if (m.central) j["central"] = *m.central;
  return j.dump(2) + "\n";
}

EnsembleManifest manifest_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed manifest: ") + e.what());
  }
  EnsembleManifest m;
  try {
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != EnsembleManifest::kFormatVersion)
      throw VersionMismatchError("unsupported ensemble format_version " + std::to_string(m.format_version) +
                                 " (expected " + std::to_string(EnsembleManifest::kFormatVersion) + ")");
    m.d = j.at("d").get<int>();
    m.n = j.at("n").get<int>();
    m.k = j.at("k").get<int>();
    m.M_max = j.at("M_max").get<int>();
    m.P = j.at("P").get<int>();
    m.n_steps = j.at("n_steps").get<int>();
    m.t_end = j.at("t_end").get<double>();
    m.n_samples = j.at("n_samples").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.first_stream = j.value("first_stream", std::uint64_t{0});
    m.layout = j.at("layout").get<std::string>();
    m.rng = j.value("rng", std::string{});
    m.checksum = std::stoull(j.at("checksum").get<std::string>(), nullptr, 16);
    if (j.contains("lattice")) m.lattice = j["lattice"].get<std::vector<double>>();
    if (j.contains("central")) m.central = j["central"].get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw IoError(std::string("invalid manifest field: ") + e.what());
  } catch (const std::logic_error& e) {
    throw IoError(std::string("invalid manifest checksum: ") + e.what());
  }
  if (m.layout != EnsembleManifest::kLayout) throw IoError("unsupported payload layout '" + m.layout + "'");
  return m;
}

EnsembleHandle write_ensemble(const std::filesystem::path& path, EnsembleManifest manifest,
                              std::span<const FieldState> fields) {
  require(static_cast<int>(fields.size()) == manifest.n_samples,
          "manifest n_samples does not match the number of fields");
  for (const auto& f : fields) {
    require(f.grid().dim() == manifest.d && f.grid().points_per_axis() == manifest.P && f.n() == manifest.n,
            "field shape does not match the manifest");
  }
  const std::vector<unsigned char> payload = encode_payload(fields);
  manifest.checksum = fnv1a64(payload);
  EnsembleHandle handle{with_suffix(path, ".json"), with_suffix(path, ".f64le"), manifest};
  write_file(handle.payload_path, payload.data(), payload.size());
  const std::string text = manifest_to_json(manifest);
  write_file(handle.manifest_path, text.data(), text.size());
  return handle;
}

Ensemble read_ensemble(const std::filesystem::path& path) {
  const auto manifest_path = with_suffix(path, ".json");
  const auto payload_path = with_suffix(path, ".f64le");
  Ensemble ens{manifest_from_json(read_file(manifest_path)), {}};
  const EnsembleManifest& m = ens.manifest;
  const std::string payload = read_file(payload_path);
  const std::size_t expected = m.payload_bytes();
  if (payload.size() < expected)
    throw TruncatedPayloadError(payload_path.string() + ": payload has " + std::to_string(payload.size()) +
                                " bytes, manifest requires " + std::to_string(expected));
  if (payload.size() > expected)
    throw IoError(payload_path.string() + ": payload has " + std::to_string(payload.size()) +
                  " bytes, manifest requires " + std::to_string(expected));
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  const std::uint64_t sum = fnv1a64({bytes, payload.size()});
  if (sum != m.checksum)
    throw ChecksumError(payload_path.string() + ": checksum " + hex64(sum) + " does not match manifest " +
                        hex64(m.checksum));

  const TorusGrid grid(m.d, m.P);
  std::size_t offset = 0;
  ens.fields.reserve(static_cast<std::size_t>(m.n_samples));
  for (int s = 0; s < m.n_samples; ++s) {
    FieldState f(grid, m.n, m.t_end);
    for (Complex& z : f.data()) {
      z = Complex(get_le(bytes + offset), get_le(bytes + offset + 8));
      offset += 16;
    }
    ens.fields.push_back(std::move(f));
  }
  return ens;
}

EnsembleHandle sample_ensemble(const SdeConfig& cfg, int n_samples, const std::filesystem::path& path,
                               Exec exec) {
  const std::vector<FieldState> fields = sample_ensemble_fields(cfg, n_samples, exec);
  return write_ensemble(path, manifest_for(cfg, n_samples), fields);
}

}  // namespace hkcg
