#include "tcg/raster.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "tcg/errors.hpp"
#include "tcg/io.hpp"

namespace tcg {

namespace {

double segment_distance(double px, double py, const Point& a, const Point& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (a.x + t * dx), py - (a.y + t * dy));
}

void stamp(GrayImage& img, double x0, double y0, double x1, double y1, double reach,
           const auto& coverage) {
  const auto w = static_cast<long>(img.width);
  const auto h = static_cast<long>(img.height);
  const long lx = std::max(0L, static_cast<long>(std::floor(std::min(x0, x1) - reach)));
  const long hx = std::min(w - 1, static_cast<long>(std::ceil(std::max(x0, x1) + reach)));
  const long ly = std::max(0L, static_cast<long>(std::floor(std::min(y0, y1) - reach)));
  const long hy = std::min(h - 1, static_cast<long>(std::ceil(std::max(y0, y1) + reach)));
  for (long y = ly; y <= hy; ++y) {
    for (long x = lx; x <= hx; ++x) {
      const double c = coverage(x + 0.5, y + 0.5);
      if (c <= 0.0) continue;
      auto& px = img.ink[static_cast<std::size_t>(y) * img.width + static_cast<std::size_t>(x)];
      px = std::max<std::uint8_t>(px, static_cast<std::uint8_t>(std::lround(255.0 * std::min(c, 1.0))));
    }
  }
}

}  // namespace

GrayImage rasterize(const SpatialGraph& g, std::size_t width, std::size_t height,
                    double stroke_px, double node_radius_px) {
  if (width == 0 || height == 0) throw InputError("image size must be positive");
  if (!(stroke_px > 0.0)) throw InputError("stroke width must be positive");
  GrayImage img{width, height, std::vector<std::uint8_t>(width * height, 0)};
  const double scale = static_cast<double>(std::max(width, height));
  const double half = 0.5 * stroke_px;
  const auto& nodes = g.nodes();
  for (const Edge& e : g.edges()) {
    const Point a{nodes[e.i].x * scale, nodes[e.i].y * scale};
    const Point b{nodes[e.j].x * scale, nodes[e.j].y * scale};
    stamp(img, a.x, a.y, b.x, b.y, half + 1.0, [&](double px, double py) {
      return half + 0.5 - segment_distance(px, py, a, b);
    });
  }
  if (node_radius_px > 0.0) {
    for (const Point& n : nodes) {
      const Point c{n.x * scale, n.y * scale};
      stamp(img, c.x, c.y, c.x, c.y, node_radius_px + 1.0, [&](double px, double py) {
        return node_radius_px + 0.5 - std::hypot(px - c.x, py - c.y);
      });
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  if (img.width == 0 || img.height == 0) throw InputError("cannot encode an empty image");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> rows(img.ink.size());
  std::transform(img.ink.begin(), img.ink.end(), rows.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(255 - v); });
  std::vector<png_bytep> row_ptrs(img.height);
  for (std::size_t y = 0; y < img.height; ++y) row_ptrs[y] = rows.data() + y * img.width;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encoding failed");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t len) {
        auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        buf->insert(buf->end(), data, data + len);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
               8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_rows(png, info, row_ptrs.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const GrayImage& img, const std::filesystem::path& path) {
  const auto bytes = encode_png(img);
  write_text_file(path, std::string(bytes.begin(), bytes.end()));
}

std::string to_svg(const SpatialGraph& g, std::size_t width, std::size_t height, double stroke_px) {
  const double scale = static_cast<double>(std::max(width, height));
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%zu\" height=\"%zu\" "
                "viewBox=\"0 0 %zu %zu\">\n<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n"
                "<g stroke=\"black\" stroke-width=\"%g\" stroke-linecap=\"round\">\n",
                width, height, width, height, stroke_px);
  out += buf;
  const auto& nodes = g.nodes();
  for (const Edge& e : g.edges()) {
    std::snprintf(buf, sizeof buf, "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\"/>\n",
                  nodes[e.i].x * scale, nodes[e.i].y * scale, nodes[e.j].x * scale,
                  nodes[e.j].y * scale);
    out += buf;
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace tcg
