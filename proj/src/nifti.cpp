#include "segrank/nifti.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace segrank {

namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kMinFileSize = 352;  // header + extension flag

// Field offsets within the 348-byte NIFTI-1 header.
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffMagic = 344;

std::uint16_t load_u16(const std::uint8_t* p, bool swap) {
  std::uint16_t v = static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  return swap ? static_cast<std::uint16_t>((v >> 8) | (v << 8)) : v;
}

std::uint32_t load_u32(const std::uint8_t* p, bool swap) {
  std::uint32_t v = static_cast<std::uint32_t>(p[0]) |
                    (static_cast<std::uint32_t>(p[1]) << 8) |
                    (static_cast<std::uint32_t>(p[2]) << 16) |
                    (static_cast<std::uint32_t>(p[3]) << 24);
  if (swap) {
    v = ((v >> 24) & 0xffu) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) |
        (v << 24);
  }
  return v;
}

std::uint64_t load_u64(const std::uint8_t* p, bool swap) {
  std::uint64_t lo = load_u32(swap ? p + 4 : p, swap);
  std::uint64_t hi = load_u32(swap ? p : p + 4, swap);
  return lo | (hi << 32);
}

std::int16_t load_i16(const std::uint8_t* p, bool swap) {
  return static_cast<std::int16_t>(load_u16(p, swap));
}
std::int32_t load_i32(const std::uint8_t* p, bool swap) {
  return static_cast<std::int32_t>(load_u32(p, swap));
}
float load_f32(const std::uint8_t* p, bool swap) {
  return std::bit_cast<float>(load_u32(p, swap));
}
double load_f64(const std::uint8_t* p, bool swap) {
  return std::bit_cast<double>(load_u64(p, swap));
}

void store_u16(std::vector<std::uint8_t>& out, std::size_t off, std::uint16_t v,
               bool be) {
  if (be) v = static_cast<std::uint16_t>((v >> 8) | (v << 8));
  out[off] = static_cast<std::uint8_t>(v & 0xff);
  out[off + 1] = static_cast<std::uint8_t>(v >> 8);
}

void store_u32(std::vector<std::uint8_t>& out, std::size_t off, std::uint32_t v,
               bool be) {
  if (be) {
    v = ((v >> 24) & 0xffu) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) |
        (v << 24);
  }
  for (int i = 0; i < 4; ++i)
    out[off + i] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xff);
}

void store_f32(std::vector<std::uint8_t>& out, std::size_t off, float v, bool be) {
  store_u32(out, off, std::bit_cast<std::uint32_t>(v), be);
}

int bytes_per_voxel(NiftiDatatype dt) {
  switch (dt) {
    case NiftiDatatype::u8: return 1;
    case NiftiDatatype::i16:
    case NiftiDatatype::u16: return 2;
    case NiftiDatatype::i32:
    case NiftiDatatype::f32: return 4;
    case NiftiDatatype::f64: return 8;
  }
  return 0;
}

bool is_supported_datatype(std::int16_t code) {
  switch (static_cast<NiftiDatatype>(code)) {
    case NiftiDatatype::u8:
    case NiftiDatatype::i16:
    case NiftiDatatype::u16:
    case NiftiDatatype::i32:
    case NiftiDatatype::f32:
    case NiftiDatatype::f64: return true;
  }
  return false;
}

constexpr double kIntegralTolerance = 1e-6;

std::int32_t to_label(double raw, std::int64_t voxel, const std::string& source) {
  if (!std::isfinite(raw)) {
    fail(Errc::non_integral_label,
         "non-finite voxel value at index " + std::to_string(voxel) + " in " +
             source);
  }
  double rounded = std::nearbyint(raw);
  if (std::fabs(raw - rounded) > kIntegralTolerance) {
    fail(Errc::non_integral_label,
         "voxel " + std::to_string(voxel) + " holds " + std::to_string(raw) +
             " in " + source);
  }
  if (rounded < 0.0) {
    fail(Errc::negative_label,
         "voxel " + std::to_string(voxel) + " holds " + std::to_string(raw) +
             " in " + source);
  }
  if (rounded > static_cast<double>(std::numeric_limits<std::int32_t>::max())) {
    fail(Errc::label_overflow,
         "voxel " + std::to_string(voxel) + " exceeds 32-bit label range in " +
             source);
  }
  return static_cast<std::int32_t>(rounded);
}

}  // namespace

const char* datatype_name(NiftiDatatype dt) noexcept {
  switch (dt) {
    case NiftiDatatype::u8: return "uint8";
    case NiftiDatatype::i16: return "int16";
    case NiftiDatatype::u16: return "uint16";
    case NiftiDatatype::i32: return "int32";
    case NiftiDatatype::f32: return "float32";
    case NiftiDatatype::f64: return "float64";
  }
  return "unknown";
}

NiftiDatatype parse_datatype(const std::string& name) {
  for (NiftiDatatype dt :
       {NiftiDatatype::u8, NiftiDatatype::i16, NiftiDatatype::u16,
        NiftiDatatype::i32, NiftiDatatype::f32, NiftiDatatype::f64}) {
    if (name == datatype_name(dt)) return dt;
  }
  fail(Errc::unsupported_datatype, "no datatype named '" + name + "'");
}

bool same_grid(const LabelVolume& a, const LabelVolume& b) {
  return a.extents == b.extents;
}

bool same_spacing(const std::array<double, 3>& a, const std::array<double, 3>& b,
                  double rel_tol) {
  for (int i = 0; i < 3; ++i) {
    double scale = std::max({std::fabs(a[i]), std::fabs(b[i]), 1.0});
    if (std::fabs(a[i] - b[i]) > rel_tol * scale) return false;
  }
  return true;
}

NiftiHeader parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) {
    fail(Errc::truncated_header, "need 348 header bytes, have " +
                                     std::to_string(bytes.size()));
  }
  const std::uint8_t* p = bytes.data();
  bool swap = false;
  if (load_i32(p, false) == 348) {
    swap = false;
  } else if (load_i32(p, true) == 348) {
    swap = true;
  } else {
    fail(Errc::unsupported_endianness,
         "sizeof_hdr is not 348 under either byte order");
  }

  NiftiHeader hdr;
  hdr.sizeof_hdr = 348;
  hdr.byte_swapped = swap;
  std::memcpy(hdr.magic.data(), p + kOffMagic, 4);
  const bool single = std::memcmp(hdr.magic.data(), "n+1\0", 4) == 0;
  const bool dual = std::memcmp(hdr.magic.data(), "ni1\0", 4) == 0;
  if (!single && !dual) fail(Errc::bad_magic, "magic is neither n+1 nor ni1");

  for (int i = 0; i < 8; ++i)
    hdr.dim[i] = load_i16(p + kOffDim + 2 * i, swap);
  hdr.datatype = load_i16(p + kOffDatatype, swap);
  hdr.bitpix = load_i16(p + kOffBitpix, swap);
  for (int i = 0; i < 8; ++i)
    hdr.pixdim[i] = load_f32(p + kOffPixdim + 4 * i, swap);
  hdr.vox_offset = load_f32(p + kOffVoxOffset, swap);
  hdr.scl_slope = load_f32(p + kOffSclSlope, swap);
  hdr.scl_inter = load_f32(p + kOffSclInter, swap);
  return hdr;
}

LabelVolume decode_label_volume(std::span<const std::uint8_t> bytes,
                                std::string source) {
  NiftiHeader hdr = parse_header(bytes);
  if (std::memcmp(hdr.magic.data(), "ni1\0", 4) == 0) {
    fail(Errc::dual_file_unsupported,
         "dual-file (.hdr/.img) pairs are not supported: " + source);
  }

  // Label volumes are 3D; a singleton fourth dimension is squeezed.
  int rank = hdr.dim[0];
  if (rank < 1 || rank > 7) {
    fail(Errc::dimension_mismatch,
         "dim[0]=" + std::to_string(rank) + " outside 1..7 in " + source);
  }
  if (rank == 4 && hdr.dim[4] == 1) rank = 3;
  if (rank != 3) {
    fail(Errc::dimension_mismatch,
         "expected a 3D volume (or 4D with singleton), got rank " +
             std::to_string(hdr.dim[0]) + " in " + source);
  }
  std::array<int, 3> extents{};
  for (int i = 0; i < 3; ++i) {
    if (hdr.dim[i + 1] < 1) {
      fail(Errc::dimension_mismatch, "dim[" + std::to_string(i + 1) +
                                         "] < 1 in " + source);
    }
    extents[i] = hdr.dim[i + 1];
  }

  std::array<double, 3> spacing{};
  for (int i = 0; i < 3; ++i) {
    float s = hdr.pixdim[i + 1];
    if (!std::isfinite(s) || s <= 0.0f) {
      fail(Errc::invalid_spacing, "pixdim[" + std::to_string(i + 1) +
                                      "] must be positive in " + source);
    }
    spacing[i] = static_cast<double>(s);
  }

  if (!is_supported_datatype(hdr.datatype)) {
    fail(Errc::unsupported_datatype,
         "datatype code " + std::to_string(hdr.datatype) + " in " + source);
  }
  const auto dt = static_cast<NiftiDatatype>(hdr.datatype);
  const int bpv = bytes_per_voxel(dt);

  const std::int64_t count =
      static_cast<std::int64_t>(extents[0]) * extents[1] * extents[2];
  if (!std::isfinite(hdr.vox_offset) ||
      hdr.vox_offset < static_cast<float>(kHeaderSize)) {
    fail(Errc::truncated_data, "vox_offset " + std::to_string(hdr.vox_offset) +
                                   " is invalid in " + source);
  }
  const std::uint64_t offset = static_cast<std::uint64_t>(hdr.vox_offset);
  const std::uint64_t needed = offset + static_cast<std::uint64_t>(count) * bpv;
  if (needed > bytes.size()) {
    fail(Errc::truncated_data,
         "file holds " + std::to_string(bytes.size()) + " bytes, voxel data needs " +
             std::to_string(needed) + " in " + source);
  }

  const bool scale = (hdr.scl_slope != 0.0f && hdr.scl_slope != 1.0f) ||
                     hdr.scl_inter != 0.0f;
  const double slope = hdr.scl_slope == 0.0f ? 1.0 : hdr.scl_slope;
  const double inter = hdr.scl_inter;
  const bool swap = hdr.byte_swapped;
  const std::uint8_t* data = bytes.data() + offset;

  LabelVolume vol;
  vol.extents = extents;
  vol.spacing = spacing;
  vol.source = std::move(source);
  vol.labels.resize(static_cast<std::size_t>(count));

  for (std::int64_t i = 0; i < count; ++i) {
    const std::uint8_t* q = data + i * bpv;
    double raw = 0.0;
    switch (dt) {
      case NiftiDatatype::u8: raw = q[0]; break;
      case NiftiDatatype::i16: raw = load_i16(q, swap); break;
      case NiftiDatatype::u16: raw = load_u16(q, swap); break;
      case NiftiDatatype::i32: raw = load_i32(q, swap); break;
      case NiftiDatatype::f32: raw = load_f32(q, swap); break;
      case NiftiDatatype::f64: raw = load_f64(q, swap); break;
    }
    if (scale) raw = raw * slope + inter;
    vol.labels[static_cast<std::size_t>(i)] = to_label(raw, i, vol.source);
  }
  return vol;
}

LabelVolume load_label_volume(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (!in.good() && !in.eof()) fail(Errc::io_error, "read failed: " + path.string());
  if (is_gzip(bytes)) bytes = gzip_decompress(bytes);
  return decode_label_volume(bytes, path.string());
}

std::vector<std::uint8_t> write_synthetic(const LabelVolume& volume,
                                          NiftiDatatype datatype,
                                          bool big_endian) {
  for (int i = 0; i < 3; ++i) {
    if (volume.extents[i] < 1 || volume.extents[i] > 32767) {
      fail(Errc::dimension_mismatch,
           "extent " + std::to_string(volume.extents[i]) +
               " not representable in a NIFTI-1 header");
    }
    if (!(volume.spacing[i] > 0.0)) {
      fail(Errc::invalid_spacing, "spacing must be positive");
    }
  }
  const std::int64_t count = volume.voxel_count();
  if (count != static_cast<std::int64_t>(volume.labels.size())) {
    fail(Errc::dimension_mismatch, "label buffer does not match extents");
  }

  std::int64_t max_label = 0;
  for (std::int32_t v : volume.labels) {
    if (v < 0) fail(Errc::negative_label, "labels must be non-negative");
    max_label = std::max<std::int64_t>(max_label, v);
  }
  std::int64_t limit = 0;
  switch (datatype) {
    case NiftiDatatype::u8: limit = 255; break;
    case NiftiDatatype::i16: limit = 32767; break;
    case NiftiDatatype::u16: limit = 65535; break;
    case NiftiDatatype::i32: limit = std::numeric_limits<std::int32_t>::max(); break;
    case NiftiDatatype::f32: limit = (std::int64_t{1} << 24); break;
    case NiftiDatatype::f64: limit = std::numeric_limits<std::int32_t>::max(); break;
  }
  if (max_label > limit) {
    fail(Errc::label_overflow, "label " + std::to_string(max_label) +
                                   " does not fit in " + datatype_name(datatype));
  }

  const int bpv = bytes_per_voxel(datatype);
  const bool be = big_endian;
  std::vector<std::uint8_t> out(kMinFileSize + static_cast<std::size_t>(count) * bpv,
                                0);

  store_u32(out, 0, 348, be);
  store_u16(out, kOffDim + 0, 3, be);
  for (int i = 0; i < 3; ++i) {
    store_u16(out, kOffDim + 2 * (i + 1),
              static_cast<std::uint16_t>(volume.extents[i]), be);
  }
  for (int i = 4; i < 8; ++i) store_u16(out, kOffDim + 2 * i, 1, be);
  store_u16(out, kOffDatatype, static_cast<std::uint16_t>(datatype), be);
  store_u16(out, kOffBitpix, static_cast<std::uint16_t>(8 * bpv), be);
  store_f32(out, kOffPixdim + 0, 1.0f, be);
  for (int i = 0; i < 3; ++i) {
    store_f32(out, kOffPixdim + 4 * (i + 1),
              static_cast<float>(volume.spacing[i]), be);
  }
  for (int i = 4; i < 8; ++i) store_f32(out, kOffPixdim + 4 * i, 1.0f, be);
  store_f32(out, kOffVoxOffset, 352.0f, be);
  store_f32(out, kOffSclSlope, 1.0f, be);
  store_f32(out, kOffSclInter, 0.0f, be);
  out[123] = 2;  // xyzt_units: millimeters
  std::memcpy(out.data() + kOffMagic, "n+1\0", 4);
  // bytes 348..351 stay zero: no header extensions.

  std::uint8_t* data = out.data() + kMinFileSize;
  for (std::int64_t i = 0; i < count; ++i) {
    const std::int32_t v = volume.labels[static_cast<std::size_t>(i)];
    std::uint8_t* q = data + i * bpv;
    switch (datatype) {
      case NiftiDatatype::u8:
        q[0] = static_cast<std::uint8_t>(v);
        break;
      case NiftiDatatype::i16:
      case NiftiDatatype::u16: {
        std::uint16_t u = static_cast<std::uint16_t>(v);
        if (be) u = static_cast<std::uint16_t>((u >> 8) | (u << 8));
        q[0] = static_cast<std::uint8_t>(u & 0xff);
        q[1] = static_cast<std::uint8_t>(u >> 8);
        break;
      }
      case NiftiDatatype::i32: {
        std::size_t off = static_cast<std::size_t>(q - out.data());
        store_u32(out, off, static_cast<std::uint32_t>(v), be);
        break;
      }
      case NiftiDatatype::f32: {
        std::size_t off = static_cast<std::size_t>(q - out.data());
        store_f32(out, off, static_cast<float>(v), be);
        break;
      }
      case NiftiDatatype::f64: {
        std::size_t off = static_cast<std::size_t>(q - out.data());
        std::uint64_t u = std::bit_cast<std::uint64_t>(static_cast<double>(v));
        store_u32(out, off + (be ? 4 : 0), static_cast<std::uint32_t>(u & 0xffffffffu), be);
        store_u32(out, off + (be ? 0 : 4), static_cast<std::uint32_t>(u >> 32), be);
        break;
      }
    }
  }
  return out;
}

void write_volume_file(const LabelVolume& volume,
                       const std::filesystem::path& path,
                       NiftiDatatype datatype) {
  std::vector<std::uint8_t> bytes = write_synthetic(volume, datatype);
  if (path.extension() == ".gz") bytes = gzip_compress(bytes);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io_error, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::io_error, "write failed: " + path.string());
}

bool is_gzip(std::span<const std::uint8_t> bytes) noexcept {
  return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> bytes) {
  z_stream strm{};
  if (deflateInit2(&strm, Z_BEST_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
                   Z_DEFAULT_STRATEGY) != Z_OK) {
    fail(Errc::gzip_error, "deflateInit2 failed");
  }
  std::vector<std::uint8_t> out(deflateBound(&strm, static_cast<uLong>(bytes.size())));
  strm.next_in = const_cast<Bytef*>(bytes.data());
  strm.avail_in = static_cast<uInt>(bytes.size());
  strm.next_out = out.data();
  strm.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&strm, Z_FINISH);
  deflateEnd(&strm);
  if (rc != Z_STREAM_END) fail(Errc::gzip_error, "deflate did not finish");
  out.resize(out.size() - strm.avail_out);
  return out;
}

std::vector<std::uint8_t> gzip_decompress(std::span<const std::uint8_t> bytes) {
  z_stream strm{};
  if (inflateInit2(&strm, 15 + 32) != Z_OK) {
    fail(Errc::gzip_error, "inflateInit2 failed");
  }
  std::vector<std::uint8_t> out;
  out.reserve(bytes.size() * 4);
  std::array<std::uint8_t, 1 << 16> buf;
  strm.next_in = const_cast<Bytef*>(bytes.data());
  strm.avail_in = static_cast<uInt>(bytes.size());
  int rc = Z_OK;
  do {
    strm.next_out = buf.data();
    strm.avail_out = static_cast<uInt>(buf.size());
    rc = inflate(&strm, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&strm);
      fail(Errc::gzip_error, "corrupt gzip stream (zlib rc " + std::to_string(rc) + ")");
    }
    out.insert(out.end(), buf.data(), buf.data() + (buf.size() - strm.avail_out));
  } while (rc != Z_STREAM_END && (strm.avail_in > 0 || strm.avail_out == 0));
  inflateEnd(&strm);
  if (rc != Z_STREAM_END) fail(Errc::gzip_error, "truncated gzip stream");
  return out;
}

}  // namespace segrank
