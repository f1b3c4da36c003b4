#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ltc {

struct NamedTensor {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<double> data;
};

// Versioned little-endian container:
//   magic[8] | u32 version | u64 config_hash | u64 vocab_hash | u32 count |
//   count x (u32 name_len | name | u32 rank | u64 dims[rank] | f64 values[])
struct TensorFile {
  std::string magic;  // exactly 8 bytes
  std::uint32_t version = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t vocab_hash = 0;
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(std::string_view name) const;
};

void write_tensor_file(const TensorFile& file, std::ostream& out);
void write_tensor_file(const TensorFile& file, const std::filesystem::path& path);

// Throws DataError on a foreign magic, VersionMismatchError on another
// version, TruncatedFileError when the data ends early and DataError on
// trailing bytes.
TensorFile read_tensor_file(std::istream& in, std::string_view magic, std::uint32_t version);
TensorFile read_tensor_file(const std::filesystem::path& path, std::string_view magic, std::uint32_t version);

}  // namespace ltc
