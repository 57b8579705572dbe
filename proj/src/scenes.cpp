#include "gisim/scenes.hpp"

#include <algorithm>
#include <array>
#include <string_view>

#include "gisim/error.hpp"

namespace gisim {

namespace {

constexpr std::size_t kGlyphW = 5;
constexpr std::size_t kGlyphH = 7;

constexpr std::array<std::string_view, kGlyphH> kGlyphG = {
    ".###.",
    "#...#",
    "#....",
    "#.###",
    "#...#",
    "#...#",
    ".###.",
};

constexpr std::array<std::string_view, kGlyphH> kGlyphI = {
    "#####",
    "..#..",
    "..#..",
    "..#..",
    "..#..",
    "..#..",
    "#####",
};

ObjectScene gi_scene(std::size_t width, std::size_t height) {
    // Two glyphs plus a one-cell gap, scaled to ~80% of the canvas.
    const std::size_t cells_w = 2 * kGlyphW + 1;
    const std::size_t scale = std::min(width * 4 / 5 / cells_w, height * 4 / 5 / kGlyphH);
    if (scale == 0) throw Error(Errc::invalid_argument, "scene 'gi' needs at least 14x9 pixels");
    const std::size_t x0 = (width - cells_w * scale) / 2;
    const std::size_t y0 = (height - kGlyphH * scale) / 2;

    std::vector<double> t(width * height, 0.0);
    auto stamp = [&](const auto& glyph, std::size_t cell_x) {
        for (std::size_t gy = 0; gy < kGlyphH; ++gy) {
            for (std::size_t gx = 0; gx < kGlyphW; ++gx) {
                if (glyph[gy][gx] != '#') continue;
                for (std::size_t dy = 0; dy < scale; ++dy) {
                    for (std::size_t dx = 0; dx < scale; ++dx) {
                        const std::size_t x = x0 + (cell_x + gx) * scale + dx;
                        const std::size_t y = y0 + gy * scale + dy;
                        t[y * width + x] = 1.0;
                    }
                }
            }
        }
    };
    stamp(kGlyphG, 0);
    stamp(kGlyphI, kGlyphW + 1);
    return ObjectScene(width, height, std::move(t));
}

ObjectScene disk_scene(std::size_t width, std::size_t height) {
    const double cx = (static_cast<double>(width) - 1.0) / 2.0;
    const double cy = (static_cast<double>(height) - 1.0) / 2.0;
    const double r = static_cast<double>(std::min(width, height)) / 4.0;
    std::vector<double> t(width * height, 0.0);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            const double dx = static_cast<double>(x) - cx;
            const double dy = static_cast<double>(y) - cy;
            if (dx * dx + dy * dy <= r * r) t[y * width + x] = 1.0;
        }
    }
    return ObjectScene(width, height, std::move(t));
}

}  // namespace

ObjectScene builtin_scene(const std::string& name, std::size_t width, std::size_t height) {
    if (width == 0 || height == 0) throw Error(Errc::invalid_argument, "scene: zero dimension");
    if (name == "gi") return gi_scene(width, height);
    if (name == "disk") return disk_scene(width, height);
    throw Error(Errc::invalid_argument, "unknown built-in scene '" + name + "'");
}

}  // namespace gisim
