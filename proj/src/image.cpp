#include "gblend/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "gblend/io.hpp"

namespace gblend {

std::uint8_t encode_srgb8(double linear) {
  const double c = std::clamp(std::isfinite(linear) ? linear : 0.0, 0.0, 1.0);
  const double s = c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
  return static_cast<std::uint8_t>(std::lround(s * 255.0));
}

namespace {

std::vector<std::uint8_t> to_rgb8(const Framebuffer& fb) {
  std::vector<std::uint8_t> px;
  px.reserve(fb.rgb.size() * 3);
  for (const Rgb& c : fb.rgb) {
    px.push_back(encode_srgb8(c.r));
    px.push_back(encode_srgb8(c.g));
    px.push_back(encode_srgb8(c.b));
  }
  return px;
}

}  // namespace

std::string encode_ppm(const Framebuffer& fb) {
  std::string out = "P6\n" + std::to_string(fb.width) + " " + std::to_string(fb.height) + "\n255\n";
  const std::vector<std::uint8_t> px = to_rgb8(fb);
  out.append(reinterpret_cast<const char*>(px.data()), px.size());
  return out;
}

void write_ppm(const std::filesystem::path& path, const Framebuffer& fb) {
  write_file(path, encode_ppm(fb));
}

void write_png(const std::filesystem::path& path, const Framebuffer& fb) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw std::runtime_error("cannot open '" + path.string() + "' for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  const std::vector<std::uint8_t> px = to_rgb8(fb);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng failed while writing '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, fb.width, fb.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_sRGB(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
  png_write_info(png, info);
  for (int y = 0; y < fb.height; ++y)
    png_write_row(png, px.data() + std::size_t(y) * fb.width * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Framebuffer box_downsample(const Framebuffer& fb, int factor) {
  if (factor < 1 || fb.width % factor != 0 || fb.height % factor != 0)
    throw std::invalid_argument("box_downsample: size must be divisible by the factor");
  Framebuffer out(fb.width / factor, fb.height / factor);
  const double inv = 1.0 / (factor * factor);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      Rgb sum;
      double res = 0.0;
      for (int dy = 0; dy < factor; ++dy)
        for (int dx = 0; dx < factor; ++dx) {
          sum += fb.at(x * factor + dx, y * factor + dy);
          res += fb.residual_at(x * factor + dx, y * factor + dy);
        }
      out.at(x, y) = sum * inv;
      out.residual_at(x, y) = res * inv;
    }
  }
  return out;
}

Framebuffer difference_image(const Framebuffer& a, const Framebuffer& b, double gain) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("difference_image: dimensions differ");
  Framebuffer out(a.width, a.height);
  for (std::size_t i = 0; i < a.rgb.size(); ++i) {
    const Rgb d = a.rgb[i] - b.rgb[i];
    const double m = gain * (std::abs(d.r) + std::abs(d.g) + std::abs(d.b)) / 3.0;
    out.rgb[i] = {m, m, m};
  }
  return out;
}

}  // namespace gblend
