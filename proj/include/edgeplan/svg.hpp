#pragma once

// Deterministic SVG 1.1 rendering: optional density-map background embedded
// as a base64 grayscale PNG (stored-block deflate, so output bytes depend on
// nothing but the input), polygons as stroked closed paths with a fixed
// color palette.

#include <array>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "edgeplan/core.hpp"
#include "edgeplan/io.hpp"
#include "edgeplan/projection.hpp"

namespace edgeplan::io {

namespace detail {

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t len, std::uint32_t crc = 0) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t n = 0; n < 256; ++n) {
      std::uint32_t c = n;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[n] = c;
    }
    return t;
  }();
  crc ^= 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

inline std::uint32_t adler32(const std::uint8_t* data, std::size_t len) {
  std::uint32_t a = 1, b = 0;
  for (std::size_t i = 0; i < len; ++i) {
    a = (a + data[i]) % 65521u;
    b = (b + a) % 65521u;
  }
  return (b << 16) | a;
}

inline void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void push_chunk(std::vector<std::uint8_t>& out, const char type[4],
                       const std::vector<std::uint8_t>& data) {
  push_be32(out, static_cast<std::uint32_t>(data.size()));
  std::vector<std::uint8_t> body(type, type + 4);
  body.insert(body.end(), data.begin(), data.end());
  out.insert(out.end(), body.begin(), body.end());
  push_be32(out, crc32(body.data(), body.size()));
}

// 8-bit grayscale PNG; the zlib stream uses stored (uncompressed) deflate
// blocks so identical pixels always produce identical bytes.
inline std::vector<std::uint8_t> encode_gray_png(const std::vector<std::uint8_t>& pixels,
                                                 std::size_t width, std::size_t height) {
  std::vector<std::uint8_t> raw;
  raw.reserve(height * (width + 1));
  for (std::size_t y = 0; y < height; ++y) {
    raw.push_back(0);  // filter: none
    raw.insert(raw.end(), pixels.begin() + static_cast<std::ptrdiff_t>(y * width),
               pixels.begin() + static_cast<std::ptrdiff_t>((y + 1) * width));
  }

  std::vector<std::uint8_t> zlib;
  zlib.push_back(0x78);
  zlib.push_back(0x01);
  std::size_t pos = 0;
  while (pos < raw.size() || raw.empty()) {
    const std::size_t n = std::min<std::size_t>(raw.size() - pos, 65535);
    const bool final = pos + n == raw.size();
    zlib.push_back(final ? 1 : 0);
    zlib.push_back(static_cast<std::uint8_t>(n & 0xFF));
    zlib.push_back(static_cast<std::uint8_t>(n >> 8));
    zlib.push_back(static_cast<std::uint8_t>(~n & 0xFF));
    zlib.push_back(static_cast<std::uint8_t>((~n >> 8) & 0xFF));
    zlib.insert(zlib.end(), raw.begin() + static_cast<std::ptrdiff_t>(pos),
                raw.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
    if (final) break;
  }
  push_be32(zlib, adler32(raw.data(), raw.size()));

  std::vector<std::uint8_t> png{137, 80, 78, 71, 13, 10, 26, 10};
  std::vector<std::uint8_t> ihdr;
  push_be32(ihdr, static_cast<std::uint32_t>(width));
  push_be32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  push_chunk(png, "IHDR", ihdr);
  push_chunk(png, "IDAT", zlib);
  push_chunk(png, "IEND", {});
  return png;
}

inline std::string base64(const std::vector<std::uint8_t>& data) {
  static constexpr char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
  }
  const std::size_t rest = data.size() - i;
  if (rest == 1) {
    const std::uint32_t v = data[i] << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

}  // namespace detail

inline constexpr std::array<const char*, 8> kPolygonPalette = {
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628", "#f781bf", "#17becf"};

inline std::string render_svg_string(const std::vector<PolygonVertices>& polys,
                                     const DensityMap* background = nullptr,
                                     std::size_t default_size = 256) {
  const std::size_t w = background ? background->width : default_size;
  const std::size_t h = background ? background->height : default_size;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" "
         "version=\"1.1\" width=\""
      << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  out << "  <rect width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";
  if (background) {
    std::vector<std::uint8_t> pixels(background->values.size());
    for (std::size_t i = 0; i < pixels.size(); ++i)
      pixels[i] = static_cast<std::uint8_t>(std::lround(background->values[i] * 255.0));
    const auto png = detail::encode_gray_png(pixels, background->width, background->height);
    out << "  <image x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
        << "\" image-rendering=\"pixelated\" xlink:href=\"data:image/png;base64," << detail::base64(png)
        << "\"/>\n";
  }
  for (std::size_t p = 0; p < polys.size(); ++p) {
    const auto& verts = polys[p].vertices;
    if (verts.empty()) continue;
    out << "  <path d=\"";
    for (std::size_t v = 0; v < verts.size(); ++v) {
      out << (v == 0 ? "M " : " L ") << detail::format_number(verts[v].x * static_cast<double>(w)) << ' '
          << detail::format_number(verts[v].y * static_cast<double>(h));
    }
    out << " Z\" fill=\"none\" stroke=\"" << kPolygonPalette[p % kPolygonPalette.size()]
        << "\" stroke-width=\"1.5\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

inline void render_svg(const std::vector<PolygonVertices>& polys, const DensityMap* background,
                       const std::string& path, std::size_t default_size = 256) {
  detail::write_file(path, render_svg_string(polys, background, default_size));
}

}  // namespace edgeplan::io
