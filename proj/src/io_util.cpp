#include "surfcorr/io_util.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "surfcorr/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary file formats are little-endian");

namespace surfcorr {

void atomic_write(const std::string& path,
                  const std::function<void(std::ostream&)>& writer) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + tmp);
    try {
      writer(os);
    } catch (...) {
      os.close();
      std::remove(tmp.c_str());
      throw;
    }
    os.flush();
    if (!os) {
      os.close();
      std::remove(tmp.c_str());
      throw IoError("write failed: " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("rename failed: " + tmp + " -> " + path);
  }
}

template <typename T>
static void write_scalar(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
static T read_scalar(std::istream& is, const char* what) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ParseError(std::string("unexpected end of file reading ") + what);
  return v;
}

void write_u32(std::ostream& os, std::uint32_t v) { write_scalar(os, v); }
void write_u64(std::ostream& os, std::uint64_t v) { write_scalar(os, v); }
void write_i32(std::ostream& os, std::int32_t v) { write_scalar(os, v); }
void write_f32(std::ostream& os, float v) { write_scalar(os, v); }

std::uint32_t read_u32(std::istream& is, const char* what) {
  return read_scalar<std::uint32_t>(is, what);
}
std::uint64_t read_u64(std::istream& is, const char* what) {
  return read_scalar<std::uint64_t>(is, what);
}
std::int32_t read_i32(std::istream& is, const char* what) {
  return read_scalar<std::int32_t>(is, what);
}
float read_f32(std::istream& is, const char* what) {
  return read_scalar<float>(is, what);
}

void write_magic(std::ostream& os, const char magic[4]) { os.write(magic, 4); }

void expect_magic(std::istream& is, const char magic[4], const char* what) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0) {
    throw ParseError(std::string("bad magic, not a ") + what + " file");
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace surfcorr
