#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "segrank/error.hpp"

namespace segrank {

// Voxel datatypes accepted for label volumes.
enum class NiftiDatatype : std::int16_t {
  u8 = 2,
  i16 = 4,
  i32 = 8,
  f32 = 16,
  f64 = 64,
  u16 = 512,
};

const char* datatype_name(NiftiDatatype dt) noexcept;
NiftiDatatype parse_datatype(const std::string& name);

// Decoded NIFTI-1 header, restricted to the fields the engine honors.
// Orientation and affine fields are ignored by design: ground truth and
// predictions are compared in identical index space, never resampled.
struct NiftiHeader {
  std::int32_t sizeof_hdr = 348;
  std::array<std::int16_t, 8> dim{};
  std::int16_t datatype = 0;
  std::int16_t bitpix = 0;
  std::array<float, 8> pixdim{};
  float vox_offset = 352.0f;
  float scl_slope = 1.0f;
  float scl_inter = 0.0f;
  std::array<char, 4> magic{};  // "n+1\0" or "ni1\0"
  bool byte_swapped = false;    // true when the file was opposite-endian
};

// A 3D integer label grid with physical voxel spacing. Index order is
// x-fastest: labels[x + nx*(y + ny*z)].
struct LabelVolume {
  std::array<int, 3> extents{};    // nx, ny, nz
  std::array<double, 3> spacing{}; // sx, sy, sz in millimeters
  std::vector<std::int32_t> labels;
  std::string source;

  std::int64_t voxel_count() const {
    return static_cast<std::int64_t>(extents[0]) * extents[1] * extents[2];
  }
  std::int64_t index(int x, int y, int z) const {
    return x + static_cast<std::int64_t>(extents[0]) *
                   (y + static_cast<std::int64_t>(extents[1]) * z);
  }
  std::int32_t at(int x, int y, int z) const { return labels[index(x, y, z)]; }
};

bool same_grid(const LabelVolume& a, const LabelVolume& b);
bool same_spacing(const std::array<double, 3>& a, const std::array<double, 3>& b,
                  double rel_tol = 1e-6);

// Decodes the first 348+ bytes of an (already decompressed) NIFTI-1 file.
// Endianness is detected via sizeof_hdr == 348 under either byte order.
NiftiHeader parse_header(std::span<const std::uint8_t> bytes);

// Full decode of in-memory file bytes (post-gunzip) into a label volume.
LabelVolume decode_label_volume(std::span<const std::uint8_t> bytes,
                                std::string source);

// Reads a ".nii" or ".nii.gz" file. Gzip is detected by magic bytes,
// not extension.
LabelVolume load_label_volume(const std::filesystem::path& path);

// Serializes a volume as a single-file NIFTI-1 image (vox_offset=352,
// extension flag zeroed). big_endian exists for byte-order round-trip tests.
std::vector<std::uint8_t> write_synthetic(const LabelVolume& volume,
                                          NiftiDatatype datatype,
                                          bool big_endian = false);

// Writes to disk; compresses when the path ends in ".gz".
void write_volume_file(const LabelVolume& volume,
                       const std::filesystem::path& path,
                       NiftiDatatype datatype);

bool is_gzip(std::span<const std::uint8_t> bytes) noexcept;
std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> gzip_decompress(std::span<const std::uint8_t> bytes);

}  // namespace segrank
