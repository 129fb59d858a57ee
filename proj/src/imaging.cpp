#include "fex/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <string>

#include "fex/error.hpp"

namespace fex {

namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::InvalidArgument, "image dimensions must be positive");
  }
}

// Netpbm header tokenizer: whitespace separated, '#' starts a comment that
// runs to end of line.
class PnmHeader {
 public:
  explicit PnmHeader(const std::vector<char>& bytes) : bytes_(bytes) {}

  std::string magic() {
    if (bytes_.size() < 2) throw Error(ErrorKind::Format, "file too short");
    pos_ = 2;
    return std::string(bytes_.begin(), bytes_.begin() + 2);
  }

  long number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      throw Error(ErrorKind::Format, "malformed header");
    }
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000'000) throw Error(ErrorKind::Format, "header value out of range");
      ++pos_;
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw Error(ErrorKind::Format, "malformed header");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<char>& bytes_;
  std::size_t pos_ = 0;
};

std::uint8_t rescale(unsigned v, unsigned maxval) {
  if (maxval == 255) return static_cast<std::uint8_t>(v);
  return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
}

Image read_pnm(const std::vector<char>& bytes) {
  PnmHeader header(bytes);
  const std::string magic = header.magic();
  if (magic != "P5" && magic != "P6") {
    throw Error(ErrorKind::Format, "unsupported netpbm variant " + magic);
  }
  const long width = header.number();
  const long height = header.number();
  const long maxval = header.number();
  if (width <= 0 || height <= 0) throw Error(ErrorKind::Format, "malformed header");
  if (maxval <= 0) throw Error(ErrorKind::Format, "malformed header");
  if (maxval > 255) throw Error(ErrorKind::UnsupportedDepth, "unsupported bit depth");

  const std::size_t offset = header.raster_offset();
  const std::size_t channels = magic == "P5" ? 1 : 3;
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < offset + n * channels) {
    throw Error(ErrorKind::Format, "truncated raster");
  }
  const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  const auto mv = static_cast<unsigned>(maxval);
  for (std::size_t i = 0; i < n * channels; ++i) {
    if (raster[i] > mv) throw Error(ErrorKind::Format, "sample exceeds maxval");
  }

  const int w = static_cast<int>(width);
  const int h = static_cast<int>(height);
  if (channels == 1) {
    std::vector<std::uint8_t> px(n);
    for (std::size_t i = 0; i < n; ++i) px[i] = rescale(raster[i], mv);
    return GrayImage(w, h, std::move(px));
  }
  ColorImage img(w, h);
  for (int c = 0; c < 3; ++c) {
    auto dst = img.plane(c).pixels();
    for (std::size_t i = 0; i < n; ++i) dst[i] = rescale(raster[i * 3 + static_cast<std::size_t>(c)], mv);
  }
  return img;
}

Image read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw Error(ErrorKind::Format, std::string("malformed PNG: ") + png.message);
  }
  const bool linear = (png.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  const bool sixteen_bit = linear ||
      ((png.format & PNG_FORMAT_FLAG_COLORMAP) == 0 && PNG_IMAGE_SAMPLE_COMPONENT_SIZE(png.format) > 1);
  if (sixteen_bit) {
    png_image_free(&png);
    throw Error(ErrorKind::UnsupportedDepth, "unsupported bit depth");
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw Error(ErrorKind::Format, "malformed PNG: " + msg);
  }
  const int w = static_cast<int>(png.width);
  const int h = static_cast<int>(png.height);
  if (!color) return GrayImage(w, h, std::move(buffer));

  ColorImage img(w, h);
  const std::size_t n = img.size();
  for (int c = 0; c < 3; ++c) {
    auto dst = img.plane(c).pixels();
    for (std::size_t i = 0; i < n; ++i) dst[i] = buffer[i * 3 + static_cast<std::size_t>(c)];
  }
  return img;
}

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::string& header,
                 std::span<const std::uint8_t> raster) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - unit();
    const double u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

void add_noise_plane(std::span<const std::uint8_t> in, std::span<std::uint8_t> out,
                     double sigma, GaussianStream& gen) {
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double v = std::round(static_cast<double>(in[i]) + sigma * gen.next());
    out[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
}

void check_noise(const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) {
    throw Error(ErrorKind::InvalidArgument, "noise sigma must be finite and >= 0");
  }
}

}  // namespace

GrayImage::GrayImage(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  check_dims(width, height);
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_dims(width, height);
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorKind::InvalidArgument, "pixel count does not match dimensions");
  }
}

ColorImage::ColorImage(int width, int height)
    : planes_{GrayImage(width, height), GrayImage(width, height), GrayImage(width, height)} {}

ColorImage::ColorImage(GrayImage r, GrayImage g, GrayImage b)
    : planes_{std::move(r), std::move(g), std::move(b)} {
  if (!planes_[0].same_shape(planes_[1]) || !planes_[0].same_shape(planes_[2])) {
    throw Error(ErrorKind::DimensionMismatch, "color planes differ in size");
  }
}

int width_of(const Image& img) {
  return std::visit([](const auto& i) { return i.width(); }, img);
}

int height_of(const Image& img) {
  return std::visit([](const auto& i) { return i.height(); }, img);
}

Image read_image(const std::filesystem::path& path) {
  const std::vector<char> bytes = slurp(path);
  static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(std::begin(kPngSig), std::end(kPngSig), bytes.begin(),
                                      [](unsigned char a, char b) { return a == static_cast<unsigned char>(b); })) {
    return read_png(path);
  }
  return read_pnm(bytes);
}

void write_image(const GrayImage& img, const std::filesystem::path& path) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  write_bytes(path, header, img.pixels());
}

void write_image(const ColorImage& img, const std::filesystem::path& path) {
  const std::size_t n = img.size();
  std::vector<std::uint8_t> interleaved(n * 3);
  for (int c = 0; c < 3; ++c) {
    const auto src = img.plane(c).pixels();
    for (std::size_t i = 0; i < n; ++i) interleaved[i * 3 + static_cast<std::size_t>(c)] = src[i];
  }
  const std::string header =
      "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  write_bytes(path, header, interleaved);
}

void write_image(const Image& img, const std::filesystem::path& path) {
  std::visit([&](const auto& i) { write_image(i, path); }, img);
}

GrayImage add_gaussian_noise(const GrayImage& img, const NoiseSpec& spec) {
  check_noise(spec);
  GrayImage out = img;
  if (spec.sigma == 0.0) return out;
  GaussianStream gen(spec.seed);
  add_noise_plane(img.pixels(), out.pixels(), spec.sigma, gen);
  return out;
}

ColorImage add_gaussian_noise(const ColorImage& img, const NoiseSpec& spec) {
  check_noise(spec);
  ColorImage out = img;
  if (spec.sigma == 0.0) return out;
  GaussianStream gen(spec.seed);
  for (int c = 0; c < 3; ++c) add_noise_plane(img.plane(c).pixels(), out.plane(c).pixels(), spec.sigma, gen);
  return out;
}

Image add_gaussian_noise(const Image& img, const NoiseSpec& spec) {
  return std::visit([&](const auto& i) -> Image { return add_gaussian_noise(i, spec); }, img);
}

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  // Integer form of round(0.299 R + 0.587 G + 0.114 B); max is 255000 + 500.
  const unsigned weighted = 299u * r + 587u * g + 114u * b;
  return static_cast<std::uint8_t>((weighted + 500u) / 1000u);
}

GrayImage to_luma(const ColorImage& img) {
  GrayImage out(img.width(), img.height());
  const auto r = img.plane(Channel::R).pixels();
  const auto g = img.plane(Channel::G).pixels();
  const auto b = img.plane(Channel::B).pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = luma(r[i], g[i], b[i]);
  return out;
}

GrayImage gray_view(const Image& img) {
  if (const auto* g = std::get_if<GrayImage>(&img)) return *g;
  return to_luma(std::get<ColorImage>(img));
}

}  // namespace fex
