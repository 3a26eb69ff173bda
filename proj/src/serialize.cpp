#include "avcl/serialize.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "avcl/error.hpp"

namespace avcl {

namespace {

// Arbitrary sanity bounds to reject garbage headers before allocating.
constexpr std::uint32_t kMaxRank = 8;
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

template <class U>
void put_le(std::ostream& os, U v) {
  std::array<char, sizeof(U)> buf;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  }
  os.write(buf.data(), buf.size());
}

template <class U>
U get_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> buf;
  is.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (!is) throw IoError("tensor stream truncated");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= U(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void write_tensor(std::ostream& os, const Tensor& t) {
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) put_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  for (double v : t.data()) put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
  if (!os) throw IoError("failed writing tensor");
}

Tensor read_tensor(std::istream& is) {
  const auto rank = get_le<std::uint32_t>(is);
  if (rank > kMaxRank) {
    throw IoError("tensor header has implausible rank " + std::to_string(rank));
  }
  Shape shape(rank);
  std::uint64_t n = 1;
  for (auto& d : shape) {
    d = get_le<std::uint32_t>(is);
    if (d == 0) throw IoError("tensor header has a zero dimension");
    n *= d;
    if (n > kMaxElements) throw IoError("tensor header has too many elements");
  }
  std::vector<double> data(n);
  for (auto& v : data) v = std::bit_cast<double>(get_le<std::uint64_t>(is));
  return Tensor::from_data(std::move(shape), std::move(data));
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!os) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("failed writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  save_tensors(path, {t});
}

Tensor load_tensor(const std::filesystem::path& path) {
  return load_tensors(path, 1).front();
}

void save_tensors(const std::filesystem::path& path,
                  const std::vector<Tensor>& tensors) {
  std::ostringstream os(std::ios::binary);
  for (const auto& t : tensors) write_tensor(os, t);
  write_file_atomic(path, os.str());
}

std::vector<Tensor> load_tensors(const std::filesystem::path& path,
                                 std::size_t expected_count) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<Tensor> out;
  out.reserve(expected_count);
  for (std::size_t i = 0; i < expected_count; ++i) out.push_back(read_tensor(is));
  if (is.peek() != std::char_traits<char>::eof()) {
    throw IoError(path.string() + " has trailing bytes after " +
                  std::to_string(expected_count) + " tensors");
  }
  return out;
}

}  // namespace avcl
