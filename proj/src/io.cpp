#include "fringe/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace fringe::io {
namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError("FPT1: truncated header");
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

std::uint8_t to_byte(double v) {
  if (!std::isfinite(v)) return 0;
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Skips whitespace and '#' comments in a PNM header.
int read_pnm_int(std::istream& in) {
  int c = in.peek();
  while (c != EOF) {
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
    c = in.peek();
  }
  int v = 0;
  if (!(in >> v)) throw IoError("PGM: malformed header");
  return v;
}

struct PgmData {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bytes;
};

PgmData read_pgm_bytes(const std::filesystem::path& path) {
  auto in = open_in(path);
  char magic[2];
  if (!in.read(magic, 2) || magic[0] != 'P' || magic[1] != '5') throw IoError("not a binary PGM (P5): " + path.string());
  PgmData d;
  d.width = read_pnm_int(in);
  d.height = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  if (maxval <= 0 || maxval > 255) throw IoError("PGM: only 8-bit maxval supported: " + path.string());
  in.get();  // single whitespace after maxval
  d.bytes.resize(static_cast<std::size_t>(d.width) * d.height);
  if (!in.read(reinterpret_cast<char*>(d.bytes.data()), static_cast<std::streamsize>(d.bytes.size())))
    throw IoError("PGM: truncated payload: " + path.string());
  return d;
}

void write_pgm_bytes(const std::filesystem::path& path, int w, int h, const std::vector<std::uint8_t>& bytes) {
  auto out = open_out(path);
  out << "P5\n" << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_png_rows(const std::filesystem::path& path, int w, int h, int color_type,
                    const std::vector<std::uint8_t>& pixels) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!fp) throw IoError("cannot open for writing: " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encoding failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  for (int y = 0; y < h; ++y) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * w * channels));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

std::size_t RawTensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

void write_fpt(std::ostream& out, const RawTensor& t) {
  if (t.element_count() != t.values.size()) throw ValidationError("FPT1: payload does not match dims");
  out.write("FPT1", 4);
  put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put_u32(out, d);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * 4));
  } else {
    for (float v : t.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  if (!out) throw IoError("FPT1: write failed");
}

RawTensor read_fpt(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "FPT1", 4) != 0) throw IoError("FPT1: bad magic");
  RawTensor t;
  const std::uint32_t rank = get_u32(in);
  if (rank == 0 || rank > 8) throw IoError("FPT1: unsupported rank " + std::to_string(rank));
  for (std::uint32_t i = 0; i < rank; ++i) t.dims.push_back(get_u32(in));
  t.values.resize(t.element_count());
  for (auto& v : t.values) v = std::bit_cast<float>(get_u32(in));
  return t;
}

void write_fpt(const std::filesystem::path& path, const RawTensor& t) {
  auto out = open_out(path);
  write_fpt(out, t);
}

RawTensor read_fpt(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_fpt(in);
}

RawTensor to_raw(const Image& img) {
  RawTensor t;
  t.dims = {static_cast<std::uint32_t>(img.height()), static_cast<std::uint32_t>(img.width())};
  t.values.assign(img.values().begin(), img.values().end());
  return t;
}

RawTensor to_raw(const std::vector<Image>& images) {
  RawTensor t;
  if (images.empty()) throw ValidationError("FPT1: empty image list");
  t.dims = {static_cast<std::uint32_t>(images.size()), static_cast<std::uint32_t>(images[0].height()),
            static_cast<std::uint32_t>(images[0].width())};
  for (const auto& img : images) {
    require_same_shape(img, images[0], "FPT1 stack");
    t.values.insert(t.values.end(), img.values().begin(), img.values().end());
  }
  return t;
}

Image image_from_raw(const RawTensor& t) {
  if (t.dims.size() != 2 && !(t.dims.size() == 3 && t.dims[0] == 1))
    throw ValidationError("FPT1: expected a rank-2 image tensor");
  const int h = static_cast<int>(t.dims[t.dims.size() - 2]);
  const int w = static_cast<int>(t.dims.back());
  Image img(w, h);
  std::copy(t.values.begin(), t.values.end(), img.data());
  return img;
}

std::vector<Image> images_from_raw(const RawTensor& t) {
  if (t.dims.size() == 2) return {image_from_raw(t)};
  if (t.dims.size() != 3) throw ValidationError("FPT1: expected a rank-3 image stack");
  const int h = static_cast<int>(t.dims[1]);
  const int w = static_cast<int>(t.dims[2]);
  std::vector<Image> out;
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  for (std::uint32_t k = 0; k < t.dims[0]; ++k) {
    Image img(w, h);
    std::copy(t.values.begin() + static_cast<std::ptrdiff_t>(k * plane),
              t.values.begin() + static_cast<std::ptrdiff_t>((k + 1) * plane), img.data());
    out.push_back(std::move(img));
  }
  return out;
}

void write_image_fpt(const std::filesystem::path& path, const Image& img) { write_fpt(path, to_raw(img)); }

Image read_image_fpt(const std::filesystem::path& path) { return image_from_raw(read_fpt(path)); }

void write_pgm(const std::filesystem::path& path, const Image& img) {
  std::vector<std::uint8_t> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) bytes[i] = to_byte(img[i]);
  write_pgm_bytes(path, img.width(), img.height(), bytes);
}

void write_pgm(const std::filesystem::path& path, const Mask& mask) {
  std::vector<std::uint8_t> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) bytes[i] = mask[i] ? 255 : 0;
  write_pgm_bytes(path, mask.width(), mask.height(), bytes);
}

Image read_pgm(const std::filesystem::path& path) {
  const auto d = read_pgm_bytes(path);
  Image img(d.width, d.height);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = d.bytes[i];
  return img;
}

Mask read_mask_pgm(const std::filesystem::path& path) {
  const auto d = read_pgm_bytes(path);
  Mask m(d.width, d.height);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = d.bytes[i] > 0 ? 1 : 0;
  return m;
}

Image read_image(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".fpt") return read_image_fpt(path);
  throw ValidationError("unsupported image extension '" + ext + "' (expected .pgm or .fpt)");
}

std::array<std::uint8_t, 3> jet(double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto channel = [t](double offset) {
    const double v = 1.5 - std::abs(4.0 * t - offset);
    return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
  };
  return {channel(3.0), channel(2.0), channel(1.0)};
}

void write_png_gray(const std::filesystem::path& path, const Image& img, double lo, double hi) {
  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<std::uint8_t> px(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) px[i] = to_byte(255.0 * (img[i] - lo) / span);
  write_png_rows(path, img.width(), img.height(), PNG_COLOR_TYPE_GRAY, px);
}

void write_png_heatmap(const std::filesystem::path& path, const Image& img, double lo, double hi, const Mask* mask) {
  if (mask) require_same_shape(img, *mask, "heatmap mask");
  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<std::uint8_t> px(img.size() * 3, 0);
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (mask && !(*mask)[i]) continue;  // masked-out pixels stay black
    const auto c = jet((img[i] - lo) / span);
    std::copy(c.begin(), c.end(), px.begin() + static_cast<std::ptrdiff_t>(3 * i));
  }
  write_png_rows(path, img.width(), img.height(), PNG_COLOR_TYPE_RGB, px);
}

}  // namespace fringe::io
