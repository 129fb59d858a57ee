#include "fex/synthetic.hpp"

#include <algorithm>

#include "fex/error.hpp"

namespace fex {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double lattice(std::uint64_t seed, std::int64_t ix, std::int64_t iy) {
  const std::uint64_t h = mix(seed ^ mix(static_cast<std::uint64_t>(ix) * 0x100000001b3ULL ^
                                         mix(static_cast<std::uint64_t>(iy))));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

// Bilinear value noise in [0, 1) for non-negative coordinates.
double value_noise(std::uint64_t seed, double x, double y) {
  const auto ix = static_cast<std::int64_t>(x);
  const auto iy = static_cast<std::int64_t>(y);
  const double fx = smooth(x - static_cast<double>(ix));
  const double fy = smooth(y - static_cast<double>(iy));
  const double a = lattice(seed, ix, iy);
  const double b = lattice(seed, ix + 1, iy);
  const double c = lattice(seed, ix, iy + 1);
  const double d = lattice(seed, ix + 1, iy + 1);
  const double top = a + (b - a) * fx;
  const double bottom = c + (d - c) * fx;
  return top + (bottom - top) * fy;
}

double fbm(std::uint64_t seed, double x, double y, double freq, int octaves) {
  double sum = 0.0;
  double amp = 1.0;
  double norm = 0.0;
  for (int o = 0; o < octaves; ++o) {
    sum += amp * value_noise(mix(seed + static_cast<std::uint64_t>(o)), x * freq, y * freq);
    norm += amp;
    amp *= 0.5;
    freq *= 2.0;
  }
  return sum / norm;
}

// <= 1 inside the axis-aligned ellipse.
double ellipse(double u, double v, double cu, double cv, double ru, double rv) {
  const double du = (u - cu) / ru;
  const double dv = (v - cv) / rv;
  return du * du + dv * dv;
}

// Triangle wave in [0, 1] with period 1.
double tri(double t) {
  t -= static_cast<double>(static_cast<std::int64_t>(t));
  return t < 0.5 ? 2.0 * t : 2.0 - 2.0 * t;
}

struct Rgb {
  double r, g, b;
};

Rgb scale(Rgb c, double k) { return {c.r * k, c.g * k, c.b * k}; }

Rgb blend(Rgb a, Rgb b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

std::uint8_t channel(double v) { return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0) + 0.5); }

}  // namespace

ColorImage synthetic_mandrill(int width, int height, std::uint64_t seed) {
  if (width < 1 || height < 1) throw Error(ErrorKind::InvalidArgument, "image dimensions must be positive");
  GrayImage r(width, height), g(width, height), b(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      // Unit square coordinates for the noise, [-1, 1] for the layout.
      const double px = (x + 0.5) / width;
      const double py = (y + 0.5) / height;
      const double u = 2.0 * px - 1.0;
      const double v = 2.0 * py - 1.0;

      const double coarse = fbm(seed, px, py, 6.0, 4);
      const double strands = value_noise(mix(seed ^ 0x51ULL), px * 96.0, py * 10.0);
      const double fur = 0.55 * coarse + 0.45 * strands;
      Rgb c = scale(Rgb{120.0, 80.0, 45.0}, 0.6 + 0.7 * fur);

      // Beard and mane.
      if (v > 0.55 || u * u > 0.7) {
        const double pale = fbm(seed ^ 0xbeefULL, px, py, 12.0, 3);
        c = blend(c, scale(Rgb{235.0, 215.0, 170.0}, 0.75 + 0.3 * pale), 0.85);
      }

      // Striped blue cheeks.
      for (double side : {-1.0, 1.0}) {
        const double e = ellipse(u, v, side * 0.3, 0.2, 0.16, 0.42);
        if (e <= 1.0) {
          const double ridge = tri(u * 14.0 + 0.3 * coarse + 8.0);
          Rgb blue = scale(Rgb{140.0, 185.0, 250.0}, 0.75 + 0.3 * ridge);
          c = blend(blue, c, e * e);
        }
      }

      // Red nose ridge.
      if (u > -0.12 && u < 0.12 && v > -0.25 && v < 0.6) {
        const double edge = 1.0 - (u / 0.12) * (u / 0.12);
        Rgb red = scale(Rgb{205.0, 45.0, 50.0}, 0.7 + 0.35 * fbm(seed ^ 0xfaceULL, px, py, 20.0, 2));
        c = blend(c, red, std::min(1.0, 2.0 * edge));
      }
      // Nostrils.
      for (double side : {-1.0, 1.0}) {
        if (ellipse(u, v, side * 0.05, 0.55, 0.03, 0.025) <= 1.0) c = {80.0, 40.0, 35.0};
      }

      // Eyes: dark socket with an amber iris.
      for (double side : {-1.0, 1.0}) {
        const double socket = ellipse(u, v, side * 0.22, -0.35, 0.11, 0.07);
        if (socket <= 1.0) {
          c = blend(Rgb{75.0, 55.0, 40.0}, c, socket * socket * socket);
          if (ellipse(u, v, side * 0.22, -0.35, 0.035, 0.035) <= 1.0) c = {210.0, 160.0, 40.0};
          if (ellipse(u, v, side * 0.22, -0.35, 0.015, 0.015) <= 1.0) c = {50.0, 40.0, 30.0};
        }
      }

      // Mouth.
      if (ellipse(u, v, 0.0, 0.78, 0.2, 0.03) <= 1.0) c = scale(c, 0.6);

      r.at(x, y) = channel(c.r);
      g.at(x, y) = channel(c.g);
      b.at(x, y) = channel(c.b);
    }
  }
  return ColorImage(std::move(r), std::move(g), std::move(b));
}

GrayImage two_tone(int width, int height, std::uint8_t dark, std::uint8_t bright) {
  GrayImage img(width, height, dark);
  for (int y = 0; y < height; ++y) {
    for (int x = width / 2; x < width; ++x) img.at(x, y) = bright;
  }
  return img;
}

}  // namespace fex
