#include "ical/tensor_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "ical/errors.hpp"

namespace ical {

namespace {

constexpr std::size_t kHeaderBytes = 8 + 3 * 8;

std::uint64_t read_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void write_u64_le(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (auto& c : b) {
    c = static_cast<char>(v & 0xffU);
    v >>= 8;
  }
  out.write(b.data(), b.size());
}

}  // namespace

PredictionTensor load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open tensor file " + path, 0);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < 8 || std::memcmp(bytes.data(), kTensorMagic, 8) != 0)
    throw FormatError("bad magic in " + path, 0);
  if (bytes.size() < kHeaderBytes) throw FormatError("truncated header in " + path, bytes.size());

  const std::uint64_t n = read_u64_le(bytes.data() + 8);
  const std::uint64_t m = read_u64_le(bytes.data() + 16);
  const std::uint64_t c = read_u64_le(bytes.data() + 24);
  constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 31;
  if (n == 0 || m == 0 || c == 0)
    throw FormatError("zero dimension in " + path, n == 0 ? 8 : (m == 0 ? 16 : 24));
  if (n > kMaxDim || m > kMaxDim || c > kMaxDim || n * m > kMaxDim || n * m * c > (std::uint64_t{1} << 40) / 4)
    throw FormatError("dimensions too large in " + path, 8);

  const std::uint64_t count = n * m * c;
  const std::uint64_t expected = kHeaderBytes + 4 * count;
  if (bytes.size() < expected) throw FormatError("truncated payload in " + path, bytes.size());
  if (bytes.size() > expected) throw FormatError("trailing bytes in " + path, expected);

  Eigen::MatrixXd values(static_cast<Eigen::Index>(n * m), static_cast<Eigen::Index>(c));
  const unsigned char* p = bytes.data() + kHeaderBytes;
  for (std::uint64_t k = 0; k < count; ++k, p += 4) {
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    const float f = std::bit_cast<float>(bits);
    if (!std::isfinite(f)) throw FormatError("non-finite value in " + path, kHeaderBytes + 4 * k);
    values(static_cast<Eigen::Index>(k / c), static_cast<Eigen::Index>(k % c)) = f;
  }
  return PredictionTensor(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m), std::move(values));
}

void save_predictions(const PredictionTensor& tensor, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write tensor file " + path);
  out.write(kTensorMagic, 8);
  write_u64_le(out, static_cast<std::uint64_t>(tensor.points()));
  write_u64_le(out, static_cast<std::uint64_t>(tensor.samples()));
  write_u64_le(out, static_cast<std::uint64_t>(tensor.classes()));
  const Eigen::MatrixXd& v = tensor.values();
  std::vector<char> payload(static_cast<std::size_t>(v.size()) * 4);
  std::size_t pos = 0;
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    for (Eigen::Index col = 0; col < v.cols(); ++col) {
      auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v(r, col)));
      for (int b = 0; b < 4; ++b, bits >>= 8) payload[pos++] = static_cast<char>(bits & 0xffU);
    }
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw std::runtime_error("failed writing tensor file " + path);
}

}  // namespace ical
