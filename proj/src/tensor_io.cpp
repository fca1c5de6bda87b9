#include "surfcorr/tensor_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "surfcorr/errors.hpp"
#include "surfcorr/io_util.hpp"

namespace surfcorr {

namespace {
constexpr char kTensorMagic[5] = "SCTS";
constexpr char kVertexMapMagic[5] = "SCVM";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::size_t NamedTensor::element_count() const {
  std::size_t n = 1;
  for (const std::uint32_t s : shape) n *= s;
  return n;
}

void save_tensors(const std::vector<NamedTensor>& tensors,
                  const std::string& path) {
  for (const NamedTensor& t : tensors) {
    if (t.values.size() != t.element_count()) {
      throw ArgError("tensor '" + t.name + "' payload does not match its shape");
    }
  }
  atomic_write(path, [&](std::ostream& out) {
    write_magic(out, kTensorMagic);
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const NamedTensor& t : tensors) {
      write_u32(out, static_cast<std::uint32_t>(t.name.size()));
      out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
      write_u32(out, static_cast<std::uint32_t>(t.shape.size()));
      for (const std::uint32_t s : t.shape) write_u32(out, s);
      for (const double v : t.values) write_f32(out, static_cast<float>(v));
    }
  });
}

std::vector<NamedTensor> load_tensors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tensor file: " + path);
  expect_magic(in, kTensorMagic, "tensor file");
  if (read_u32(in, "tensor file") != kVersion) throw ParseError("unsupported tensor file version");
  const std::uint32_t count = read_u32(in, "tensor file");
  std::vector<NamedTensor> tensors(count);
  for (NamedTensor& t : tensors) {
    const std::uint32_t name_len = read_u32(in, "tensor file");
    t.name.resize(name_len);
    in.read(t.name.data(), name_len);
    if (!in) throw ParseError("tensor file truncated in a name");
    const std::uint32_t rank = read_u32(in, "tensor file");
    t.shape.resize(rank);
    for (std::uint32_t& s : t.shape) s = read_u32(in, "tensor file");
    t.values.resize(t.element_count());
    for (double& v : t.values) v = read_f32(in, "tensor file");
  }
  return tensors;
}

const NamedTensor& find_tensor(const std::vector<NamedTensor>& tensors,
                               const std::string& name) {
  for (const NamedTensor& t : tensors) {
    if (t.name == name) return t;
  }
  throw ParseError("tensor '" + name + "' not found in container");
}

void save_vertex_map(const VertexMap& map, const std::string& path) {
  atomic_write(path, [&](std::ostream& out) {
    write_magic(out, kVertexMapMagic);
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(map.height));
    write_u32(out, static_cast<std::uint32_t>(map.width));
    for (const int v : map.data) write_i32(out, v);
  });
}

VertexMap load_vertex_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vertex map file: " + path);
  expect_magic(in, kVertexMapMagic, "vertex map file");
  if (read_u32(in, "tensor file") != kVersion) {
    throw ParseError("unsupported vertex map file version");
  }
  const int h = static_cast<int>(read_u32(in, "tensor file"));
  const int w = static_cast<int>(read_u32(in, "tensor file"));
  if (h <= 0 || w <= 0) throw ParseError("vertex map file has empty dimensions");
  VertexMap map(h, w, -1);
  for (int& v : map.data) v = read_i32(in, "tensor file");
  return map;
}

void write_pgm_mask(const Mask& mask, const std::string& path) {
  atomic_write(path, [&](std::ostream& out) {
    out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
    for (const std::uint8_t m : mask.data) out.put(m ? '\xff' : '\0');
  });
}

namespace {

int pnm_token(std::istream& in, const std::string& path) {
  // Skips whitespace and # comments, then reads one integer.
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (!std::isspace(ch)) {
      break;
    }
    ch = in.get();
  }
  if (ch == EOF) throw ParseError("truncated PNM header: " + path);
  int value = 0;
  bool any = false;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    any = true;
    ch = in.get();
  }
  if (!any) throw ParseError("malformed PNM header: " + path);
  return value;
}

}  // namespace

Mask read_pgm_mask(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PGM file: " + path);
  char p = 0, five = 0;
  in.get(p).get(five);
  if (p != 'P' || five != '5') throw ParseError("not a binary PGM file: " + path);
  const int w = pnm_token(in, path);
  const int h = pnm_token(in, path);
  const int maxval = pnm_token(in, path);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw ParseError("unsupported PGM geometry: " + path);
  }
  Mask mask(h, w, 0);
  for (std::uint8_t& m : mask.data) {
    const int ch = in.get();
    if (ch == EOF) throw ParseError("truncated PGM payload: " + path);
    m = ch ? 1 : 0;
  }
  return mask;
}

PartMap read_pgm_parts(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PGM file: " + path);
  char p = 0, five = 0;
  in.get(p).get(five);
  if (p != 'P' || five != '5') throw ParseError("not a binary PGM file: " + path);
  const int w = pnm_token(in, path);
  const int h = pnm_token(in, path);
  const int maxval = pnm_token(in, path);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw ParseError("unsupported PGM geometry: " + path);
  }
  PartMap parts(h, w, 0);
  for (int& label : parts.data) {
    const int ch = in.get();
    if (ch == EOF) throw ParseError("truncated PGM payload: " + path);
    label = ch;
  }
  return parts;
}

void write_ppm(int height, int width, const std::vector<std::uint8_t>& rgb,
               const std::string& path) {
  if (rgb.size() != static_cast<std::size_t>(height) * width * 3) {
    throw ArgError("PPM payload does not match the image size");
  }
  atomic_write(path, [&](std::ostream& out) {
    out << "P6\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()),
              static_cast<std::streamsize>(rgb.size()));
  });
}

}  // namespace surfcorr
