#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "avcl/tensor.hpp"

namespace avcl {

// Binary tensor layout, little-endian regardless of host:
//   [rank: u32][dims: u32 x rank][values: f64 x prod(dims)], row-major.
void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

// Several tensors back to back in one file.
void save_tensors(const std::filesystem::path& path,
                  const std::vector<Tensor>& tensors);
std::vector<Tensor> load_tensors(const std::filesystem::path& path,
                                 std::size_t expected_count);

// Writes through a sibling temp file and renames it into place, so readers
// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

}  // namespace avcl
