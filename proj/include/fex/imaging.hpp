#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace fex {

inline constexpr int kGrayLevels = 256;

/// 8-bit single-plane raster, row-major. Intensities are in [0, 255] by
/// construction of the storage type.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return pixels_[index(x, y)]; }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  bool same_shape(const GrayImage& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

enum class Channel { R = 0, G = 1, B = 2 };

/// Three equally-sized planes.
class ColorImage {
 public:
  ColorImage() = default;
  ColorImage(int width, int height);
  ColorImage(GrayImage r, GrayImage g, GrayImage b);

  int width() const noexcept { return planes_[0].width(); }
  int height() const noexcept { return planes_[0].height(); }
  std::size_t size() const noexcept { return planes_[0].size(); }

  const GrayImage& plane(Channel c) const { return planes_[static_cast<int>(c)]; }
  GrayImage& plane(Channel c) { return planes_[static_cast<int>(c)]; }
  const GrayImage& plane(int c) const { return planes_.at(static_cast<std::size_t>(c)); }
  GrayImage& plane(int c) { return planes_.at(static_cast<std::size_t>(c)); }

  bool same_shape(const ColorImage& other) const noexcept {
    return planes_[0].same_shape(other.planes_[0]);
  }

  friend bool operator==(const ColorImage&, const ColorImage&) = default;

 private:
  std::array<GrayImage, 3> planes_;
};

using Image = std::variant<GrayImage, ColorImage>;

int width_of(const Image& img);
int height_of(const Image& img);

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Reads binary PGM (P5) / PPM (P6) with maxval <= 255, or an 8-bit PNG.
/// Grayscale files yield GrayImage, everything else ColorImage.
Image read_image(const std::filesystem::path& path);

/// Writes P5 for gray and P6 for color, independent of the extension.
void write_image(const Image& img, const std::filesystem::path& path);
void write_image(const GrayImage& img, const std::filesystem::path& path);
void write_image(const ColorImage& img, const std::filesystem::path& path);

/// Additive white Gaussian noise, rounded and clamped to [0, 255].
///
/// Samples come from std::mt19937_64 seeded with `spec.seed` (the engine is
/// fully specified by the standard), converted to doubles with 53 random
/// bits and shaped with the Box-Muller transform. Both outputs of each
/// Box-Muller pair are used. Color images consume the stream plane by plane
/// (R, then G, then B), row-major within a plane.
GrayImage add_gaussian_noise(const GrayImage& img, const NoiseSpec& spec);
ColorImage add_gaussian_noise(const ColorImage& img, const NoiseSpec& spec);
Image add_gaussian_noise(const Image& img, const NoiseSpec& spec);

/// BT.601 luma: round(0.299 R + 0.587 G + 0.114 B).
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;
GrayImage to_luma(const ColorImage& img);

/// Luma for color input, the image itself for gray input.
GrayImage gray_view(const Image& img);

}  // namespace fex
