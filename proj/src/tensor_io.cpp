#include "ltc/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ltc/errors.hpp"

namespace ltc {

namespace {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <typename T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get() {
    T v;
    bytes(reinterpret_cast<char*>(&v), sizeof(T));
    return to_little(v);
  }

  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw TruncatedFileError("tensor file ends unexpectedly");
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
};

// Bounds on sizes read from the header so a corrupt file cannot trigger an
// enormous allocation before the read fails.
constexpr std::uint32_t kMaxNameLen = 1 << 12;
constexpr std::uint32_t kMaxRank = 8;
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

}  // namespace

const NamedTensor* TensorFile::find(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void write_tensor_file(const TensorFile& file, std::ostream& out) {
  if (file.magic.size() != 8) throw ContractViolation("tensor file magic must be 8 bytes");
  out.write(file.magic.data(), 8);
  put<std::uint32_t>(out, file.version);
  put<std::uint64_t>(out, file.config_hash);
  put<std::uint64_t>(out, file.vocab_hash);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(file.tensors.size()));
  for (const auto& t : file.tensors) {
    std::uint64_t n = 1;
    for (auto d : t.dims) n *= d;
    if (n != t.data.size()) throw ContractViolation("tensor '" + t.name + "' dims do not match data");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) put<std::uint64_t>(out, d);
    for (double v : t.data) put<double>(out, v);
  }
}

void write_tensor_file(const TensorFile& file, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_tensor_file(file, out);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

TensorFile read_tensor_file(std::istream& in, std::string_view magic, std::uint32_t version) {
  Reader r(in);
  TensorFile file;
  file.magic.resize(8);
  r.bytes(file.magic.data(), 8);
  if (file.magic != magic) throw DataError("not a recognised tensor file (bad magic)");
  file.version = r.get<std::uint32_t>();
  if (file.version != version) {
    throw VersionMismatchError("format version " + std::to_string(file.version) + ", expected " +
                               std::to_string(version));
  }
  file.config_hash = r.get<std::uint64_t>();
  file.vocab_hash = r.get<std::uint64_t>();
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const auto name_len = r.get<std::uint32_t>();
    if (name_len > kMaxNameLen) throw DataError("corrupt tensor name length");
    t.name.resize(name_len);
    r.bytes(t.name.data(), name_len);
    const auto rank = r.get<std::uint32_t>();
    if (rank > kMaxRank) throw DataError("corrupt tensor rank");
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      t.dims.push_back(r.get<std::uint64_t>());
      n *= t.dims.back();
      if (n > kMaxElements) throw DataError("corrupt tensor dimensions");
    }
    t.data.resize(n);
    for (auto& v : t.data) v = r.get<double>();
    file.tensors.push_back(std::move(t));
  }
  if (!r.at_end()) throw DataError("trailing bytes after last tensor");
  return file;
}

TensorFile read_tensor_file(const std::filesystem::path& path, std::string_view magic, std::uint32_t version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_tensor_file(in, magic, version);
}

}  // namespace ltc
