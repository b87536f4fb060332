#pragma once

#include "metasr/image.hpp"

#include <optional>
#include <string>
#include <vector>

namespace metasr::cli {

inline constexpr int kGutter = 8;
inline constexpr int kCaptionHeight = 22;

struct ZoomBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

struct Pane {
  std::string caption;
  ImageBuffer image;
};

struct PanelLayout {
  int pane_width = 0;
  int pane_height = 0;
  int width = 0;
  int height = 0;
  std::vector<int> pane_x;
  int zoom_factor = 0;
};

/// Panes side by side, all the same size, separated and framed by kGutter
/// pixels of white. Each pane gets a caption strip below it. With a zoom box
/// the region is outlined in red on every pane and repeated, enlarged by an
/// integer factor, in a second row.
std::pair<ImageBuffer, PanelLayout> compose_panel(const std::vector<Pane>& panes, const std::optional<ZoomBox>& zoom);

/// Draws upper-case text with a 5x7 bitmap font at the given pixel scale.
/// Characters without a glyph render as blanks.
void draw_text(ImageBuffer& image, int x, int y, const std::string& text, int scale, double value = 0.0);

}  // namespace metasr::cli
