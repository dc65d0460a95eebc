#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pancake {

// Binary raster with a physical scale. Foreground pixels are nonzero.
// Pixel (x, y) maps to the world point (x * scale, y * scale), y down.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, width * height
    double scale = 0.001;              // metres per pixel

    bool at(int x, int y) const {
        if (x < 0 || y < 0 || x >= width || y >= height) return false;
        return pixels[static_cast<size_t>(y) * width + x] != 0;
    }
    void set(int x, int y, bool on) {
        pixels[static_cast<size_t>(y) * width + x] = on ? 1 : 0;
    }
    std::size_t count() const;
    bool empty_mask() const { return count() == 0; }
};

BinaryMask make_mask(int width, int height, double scale = 0.001);

// PGM (P2/P5) round-trip. Loading binarizes at threshold 128 (>= 128 is
// foreground); saving writes P5 with 0/255. Malformed input throws
// ParseError carrying the byte offset.
BinaryMask load_pgm(const std::string& path, double scale = 0.001);
BinaryMask parse_pgm(const std::vector<std::uint8_t>& bytes, double scale = 0.001);
void save_pgm(const BinaryMask& mask, const std::string& path);

// Squared Euclidean distance from each pixel to the nearest background
// pixel; everything outside the image counts as background. Exact
// integer-grid transform (two-pass lower envelope).
std::vector<double> squared_distance_to_background(const BinaryMask& mask);

// Morphological erosion by the discrete disk { (dx,dy) : dx^2+dy^2 <= r^2 }.
BinaryMask erode(const BinaryMask& mask, int radius_px);

enum class ShapeKind { Enclosed, OpenLines };

// Enclosed iff the shape survives erosion by a full stroke-width disk,
// i.e. it has an interior at least one stroke wide.
ShapeKind classify_shape(const BinaryMask& mask, int stroke_width_px);

// 8-connected foreground component labels (-1 for background) plus count.
std::pair<std::vector<int>, int> label_components(const BinaryMask& mask);

}  // namespace pancake
