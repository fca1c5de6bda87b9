#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surfcorr/grid.hpp"

namespace surfcorr {

// Named f32 tensor container: magic, version, count, then per tensor a
// length-prefixed name, rank, dims (u32), and payload. Values are stored as
// f32 and widened back to double on read.
struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<double> values;

  std::size_t element_count() const;
};

void save_tensors(const std::vector<NamedTensor>& tensors,
                  const std::string& path);
std::vector<NamedTensor> load_tensors(const std::string& path);

// Finds a tensor by name; throws ParseError when absent.
const NamedTensor& find_tensor(const std::vector<NamedTensor>& tensors,
                               const std::string& name);

// Per-pixel vertex map file: magic, version, H, W, then i32 vertex ids
// row-major (-1 marks no prediction).
void save_vertex_map(const VertexMap& map, const std::string& path);
VertexMap load_vertex_map(const std::string& path);

// Binary PGM (P5, maxval 255). Nonzero bytes read back as 1 so masks
// round-trip; writing stores 0 or 255.
void write_pgm_mask(const Mask& mask, const std::string& path);
Mask read_pgm_mask(const std::string& path);

// PGM read keeping raw byte values as part labels (0 = background).
PartMap read_pgm_parts(const std::string& path);

// Binary PPM (P6, maxval 255) from interleaved RGB bytes, row-major.
void write_ppm(int height, int width, const std::vector<std::uint8_t>& rgb,
               const std::string& path);

}  // namespace surfcorr
