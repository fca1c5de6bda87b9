#pragma once

#include <cstdint>
#include <cstring>
#include <functional>
#include <iosfwd>
#include <string>

namespace surfcorr {

// Writes through a temp file in the target directory and renames into place,
// so a failed run never leaves a partially-written output.
void atomic_write(const std::string& path,
                  const std::function<void(std::ostream&)>& writer);

// Little-endian scalar io. The library assumes a little-endian host (checked
// once at startup of the binary readers/writers).
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_i32(std::ostream& os, std::int32_t v);
void write_f32(std::ostream& os, float v);
std::uint32_t read_u32(std::istream& is, const char* what);
std::uint64_t read_u64(std::istream& is, const char* what);
std::int32_t read_i32(std::istream& is, const char* what);
float read_f32(std::istream& is, const char* what);
void write_magic(std::ostream& os, const char magic[4]);
void expect_magic(std::istream& is, const char magic[4], const char* what);

std::string read_text_file(const std::string& path);

}  // namespace surfcorr
