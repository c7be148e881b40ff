#include "contourlab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "contourlab/errors.hpp"

namespace contourlab {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

namespace {
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 34;
}

void BinaryWriter::header() {
  out_.write(kCheckpointMagic, sizeof kCheckpointMagic);
  const std::uint32_t v = kCheckpointVersion;
  out_.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void BinaryWriter::u64(std::uint64_t v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(const std::string& s) {
  u64(s.size());
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::doubles(const double* data, std::size_t n) {
  out_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void BinaryWriter::matrix(const Eigen::MatrixXd& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  doubles(m.data(), static_cast<std::size_t>(m.size()));
}

void BinaryWriter::row(const Eigen::RowVectorXd& v) {
  u64(static_cast<std::uint64_t>(v.size()));
  doubles(v.data(), static_cast<std::size_t>(v.size()));
}

void BinaryWriter::rng(const std::mt19937_64& engine) {
  std::ostringstream s;
  s << engine;
  str(s.str());
}

void BinaryWriter::tag(const char (&name)[5]) { out_.write(name, 4); }

// ---------------------------------------------------------------------------

void BinaryReader::read(void* dst, std::size_t n) {
  in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("checkpoint truncated");
}

void BinaryReader::header() {
  char magic[8];
  read(magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) throw FormatError("not a contourlab checkpoint");
  std::uint32_t v = 0;
  read(&v, sizeof v);
  if (v != kCheckpointVersion) {
    throw FormatError(fmt::format("checkpoint version {} unsupported (expected {})", v, kCheckpointVersion));
  }
}

std::uint64_t BinaryReader::u64() {
  std::uint64_t v = 0;
  read(&v, sizeof v);
  return v;
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::str() {
  const std::uint64_t n = u64();
  if (n > kMaxLength) throw FormatError("checkpoint string length implausible");
  std::string s(n, '\0');
  read(s.data(), n);
  return s;
}

void BinaryReader::doubles(double* data, std::size_t n) { read(data, n * sizeof(double)); }

Eigen::MatrixXd BinaryReader::matrix() {
  const std::uint64_t r = u64();
  const std::uint64_t c = u64();
  if (r * c > kMaxLength) throw FormatError("checkpoint matrix size implausible");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  doubles(m.data(), static_cast<std::size_t>(m.size()));
  return m;
}

Eigen::RowVectorXd BinaryReader::row() {
  const std::uint64_t n = u64();
  if (n > kMaxLength) throw FormatError("checkpoint vector size implausible");
  Eigen::RowVectorXd v(static_cast<Eigen::Index>(n));
  doubles(v.data(), static_cast<std::size_t>(v.size()));
  return v;
}

void BinaryReader::rng(std::mt19937_64& engine) {
  std::istringstream s(str());
  s >> engine;
  if (!s) throw FormatError("checkpoint RNG state unreadable");
}

void BinaryReader::tag(const char (&name)[5]) {
  char got[4];
  read(got, 4);
  if (std::memcmp(got, name, 4) != 0) {
    throw FormatError(fmt::format("checkpoint section '{}' expected, found '{}'", name, std::string(got, 4)));
  }
}

}  // namespace contourlab
