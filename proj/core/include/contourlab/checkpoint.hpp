#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace contourlab {

/// Little-endian binary stream helpers for checkpoint files.
///
/// File layout: 8-byte magic "CLABCKPT", u32 format version, then a sequence of
/// tagged sections written by the owner (see harness.cpp). Doubles are stored
/// as their raw IEEE-754 bits, so a save/load round trip is bit-exact.
inline constexpr char kCheckpointMagic[8] = {'C', 'L', 'A', 'B', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void header();
  void u64(std::uint64_t v);
  void f64(double v);
  void str(const std::string& s);
  void doubles(const double* data, std::size_t n);
  void matrix(const Eigen::MatrixXd& m);
  void row(const Eigen::RowVectorXd& v);
  void rng(const std::mt19937_64& engine);
  /// Section marker, checked on load to catch layout drift.
  void tag(const char (&name)[5]);

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  /// Validates magic and version; throws FormatError otherwise.
  void header();
  std::uint64_t u64();
  double f64();
  std::string str();
  void doubles(double* data, std::size_t n);
  Eigen::MatrixXd matrix();
  Eigen::RowVectorXd row();
  void rng(std::mt19937_64& engine);
  void tag(const char (&name)[5]);

 private:
  void read(void* dst, std::size_t n);
  std::istream& in_;
};

}  // namespace contourlab
