#include "panel.hpp"

#include "metasr/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>

namespace metasr::cli {

namespace {

using Glyph = std::array<const char*, 7>;

const std::map<char, Glyph>& font() {
  static const std::map<char, Glyph> glyphs{
      {'0', {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."}},
      {'1', {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."}},
      {'2', {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
      {'3', {"#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."}},
      {'4', {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
      {'5', {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
      {'6', {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."}},
      {'7', {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."}},
      {'8', {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."}},
      {'9', {".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."}},
      {'A', {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
      {'B', {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."}},
      {'C', {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."}},
      {'D', {"###..", "#..#.", "#...#", "#...#", "#...#", "#..#.", "###.."}},
      {'E', {"#####", "#....", "#....", "####.", "#....", "#....", "#####"}},
      {'F', {"#####", "#....", "#....", "####.", "#....", "#....", "#...."}},
      {'G', {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"}},
      {'H', {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
      {'I', {".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."}},
      {'J', {"..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."}},
      {'K', {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"}},
      {'L', {"#....", "#....", "#....", "#....", "#....", "#....", "#####"}},
      {'M', {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"}},
      {'N', {"#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"}},
      {'O', {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
      {'P', {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."}},
      {'Q', {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"}},
      {'R', {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"}},
      {'S', {".####", "#....", "#....", ".###.", "....#", "....#", "####."}},
      {'T', {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."}},
      {'U', {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
      {'V', {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."}},
      {'W', {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."}},
      {'X', {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"}},
      {'Y', {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."}},
      {'Z', {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"}},
      {'.', {".....", ".....", ".....", ".....", ".....", ".##..", ".##.."}},
      {'-', {".....", ".....", ".....", "#####", ".....", ".....", "....."}},
      {'+', {".....", "..#..", "..#..", "#####", "..#..", "..#..", "....."}},
      {':', {".....", ".##..", ".##..", ".....", ".##..", ".##..", "....."}},
      {'=', {".....", ".....", "#####", ".....", "#####", ".....", "....."}},
      {'/', {".....", "....#", "...#.", "..#..", ".#...", "#....", "....."}},
      {'_', {".....", ".....", ".....", ".....", ".....", ".....", "#####"}},
  };
  return glyphs;
}

void fill_rect(ImageBuffer& img, int x, int y, int w, int h, const std::array<double, 3>& rgb) {
  const int x0 = std::max(0, x), y0 = std::max(0, y);
  const int x1 = std::min(img.width(), x + w), y1 = std::min(img.height(), y + h);
  if (x1 <= x0 || y1 <= y0) return;
  for (int c = 0; c < 3; ++c) img.planes[c].block(y0, x0, y1 - y0, x1 - x0).setConstant(rgb[c]);
}

void outline(ImageBuffer& img, int x, int y, int w, int h, int t, const std::array<double, 3>& rgb) {
  fill_rect(img, x - t, y - t, w + 2 * t, t, rgb);
  fill_rect(img, x - t, y + h, w + 2 * t, t, rgb);
  fill_rect(img, x - t, y, t, h, rgb);
  fill_rect(img, x + w, y, t, h, rgb);
}

void blit(ImageBuffer& dst, const ImageBuffer& src, int x, int y) {
  for (int c = 0; c < 3; ++c) dst.planes[c].block(y, x, src.height(), src.width()) = src.planes[c];
}

ImageBuffer enlarge(const ImageBuffer& src, int factor) {
  ImageBuffer out(src.channels(), src.height() * factor, src.width() * factor);
  for (int c = 0; c < src.channels(); ++c)
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x) out.planes[c](y, x) = src.planes[c](y / factor, x / factor);
  return out;
}

constexpr std::array<double, 3> kWhite{255, 255, 255};
constexpr std::array<double, 3> kRed{255, 0, 0};

}  // namespace

void draw_text(ImageBuffer& image, int x, int y, const std::string& text, int scale, double value) {
  int cursor = x;
  for (char raw : text) {
    const char ch = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
    const auto it = font().find(ch);
    if (it != font().end()) {
      for (int row = 0; row < 7; ++row)
        for (int col = 0; col < 5; ++col)
          if (it->second[row][col] == '#') fill_rect(image, cursor + col * scale, y + row * scale, scale, scale, {value, value, value});
    }
    cursor += 6 * scale;
  }
}

std::pair<ImageBuffer, PanelLayout> compose_panel(const std::vector<Pane>& panes, const std::optional<ZoomBox>& zoom) {
  if (panes.empty()) throw ContractViolation("compose_panel: no panes");
  PanelLayout layout;
  layout.pane_width = panes.front().image.width();
  layout.pane_height = panes.front().image.height();
  for (const auto& p : panes) {
    if (p.image.width() != layout.pane_width || p.image.height() != layout.pane_height || p.image.channels() != 3) {
      throw ContractViolation("compose_panel: panes must share one RGB size");
    }
  }
  const int n = static_cast<int>(panes.size());
  layout.width = n * layout.pane_width + (n + 1) * kGutter;
  int zoom_h = 0;
  if (zoom) {
    if (zoom->width < 1 || zoom->height < 1 || zoom->x < 0 || zoom->y < 0 ||
        zoom->x + zoom->width > layout.pane_width || zoom->y + zoom->height > layout.pane_height) {
      throw ConfigurationError("zoom box lies outside the image");
    }
    layout.zoom_factor = std::max(1, layout.pane_width / zoom->width);
    zoom_h = zoom->height * layout.zoom_factor;
  }
  layout.height = kGutter + layout.pane_height + kCaptionHeight + (zoom ? zoom_h + kGutter : 0);
  ImageBuffer panel(3, layout.height, layout.width, 255.0);
  for (int i = 0; i < n; ++i) {
    const int x = kGutter + i * (layout.pane_width + kGutter);
    layout.pane_x.push_back(x);
    blit(panel, panes[i].image, x, kGutter);
    // Largest font that fits the pane; at the smallest size, truncate.
    std::string text = panes[i].caption;
    int font_scale = 2;
    while (font_scale > 1 && static_cast<int>(text.size()) * 6 * font_scale - font_scale > layout.pane_width) --font_scale;
    const std::size_t fit = static_cast<std::size_t>((layout.pane_width + 1) / 6);
    if (text.size() > fit) text.resize(fit);
    draw_text(panel, x, kGutter + layout.pane_height + 4, text, font_scale);
    if (zoom) {
      const ImageBuffer inset = enlarge(crop(panes[i].image, zoom->y, zoom->x, zoom->height, zoom->width),
                                        layout.zoom_factor);
      const int iy = kGutter + layout.pane_height + kCaptionHeight;
      blit(panel, crop(inset, 0, 0, inset.height(), std::min(inset.width(), layout.pane_width)), x, iy);
      outline(panel, x + zoom->x, kGutter + zoom->y, zoom->width, zoom->height, 1, kRed);
    }
  }
  // Gutters are drawn last so outlines never bleed into a neighbour.
  for (int i = 0; i <= n; ++i) fill_rect(panel, i * (layout.pane_width + kGutter), 0, kGutter, layout.height, kWhite);
  fill_rect(panel, 0, 0, layout.width, kGutter, kWhite);
  return {panel, layout};
}

}  // namespace metasr::cli
