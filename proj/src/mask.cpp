#include "pancake/mask.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "pancake/errors.hpp"

namespace pancake {

std::size_t BinaryMask::count() const {
    std::size_t n = 0;
    for (const auto p : pixels) n += (p != 0);
    return n;
}

BinaryMask make_mask(int width, int height, double scale) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("mask dimensions must be positive");
    if (scale <= 0.0) throw std::invalid_argument("mask scale must be positive");
    BinaryMask m;
    m.width = width;
    m.height = height;
    m.scale = scale;
    m.pixels.assign(static_cast<size_t>(width) * height, 0);
    return m;
}

namespace {

struct ByteCursor {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    bool eof() const { return pos >= bytes.size(); }
    int peek() const { return eof() ? -1 : bytes[pos]; }

    void skip_space_and_comments() {
        while (!eof()) {
            const int c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') ++pos;
            } else if (std::isspace(c)) {
                ++pos;
            } else {
                break;
            }
        }
    }

    int read_uint(const char* what) {
        skip_space_and_comments();
        if (eof() || !std::isdigit(peek()))
            throw ParseError(std::string("expected ") + what, pos);
        long v = 0;
        while (!eof() && std::isdigit(peek())) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > std::numeric_limits<int>::max())
                throw ParseError(std::string(what) + " out of range", pos);
            ++pos;
        }
        return static_cast<int>(v);
    }
};

}  // namespace

BinaryMask parse_pgm(const std::vector<std::uint8_t>& bytes, double scale) {
    ByteCursor cur{bytes};
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw ParseError("not a P2/P5 PGM file", 0);
    const bool binary = bytes[1] == '5';
    cur.pos = 2;

    const int width = cur.read_uint("width");
    const int height = cur.read_uint("height");
    const int maxval = cur.read_uint("maxval");
    if (width <= 0 || height <= 0) throw ParseError("non-positive dimensions", cur.pos);
    if (maxval <= 0 || maxval > 255) throw ParseError("unsupported maxval", cur.pos);

    BinaryMask m = make_mask(width, height, scale);
    const std::size_t n = static_cast<size_t>(width) * height;

    if (binary) {
        // exactly one whitespace byte after maxval
        if (cur.eof() || !std::isspace(cur.peek()))
            throw ParseError("missing separator before raster", cur.pos);
        ++cur.pos;
        if (bytes.size() - cur.pos < n)
            throw ParseError("truncated raster", bytes.size());
        for (std::size_t i = 0; i < n; ++i)
            m.pixels[i] = bytes[cur.pos + i] >= 128 ? 1 : 0;
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const int v = cur.read_uint("pixel value");
            if (v > maxval) throw ParseError("pixel value exceeds maxval", cur.pos);
            m.pixels[i] = v >= 128 ? 1 : 0;
        }
    }
    return m;
}

BinaryMask load_pgm(const std::string& path, double scale) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_pgm(bytes, scale);
}

void save_pgm(const BinaryMask& mask, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
    std::vector<char> row(static_cast<size_t>(mask.width));
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x)
            row[static_cast<size_t>(x)] = mask.at(x, y) ? static_cast<char>(255) : 0;
        out.write(row.data(), mask.width);
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

namespace {

// 1D squared-distance lower envelope (Felzenszwalb & Huttenlocher).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

std::vector<double> squared_distance_to_background(const BinaryMask& mask) {
    const int w = mask.width, h = mask.height;
    const double inf = 1e18;
    std::vector<double> dist(static_cast<size_t>(w) * h);

    // column pass
    {
        std::vector<double> f(h), d(h), z(h + 1);
        std::vector<int> v(h);
        for (int x = 0; x < w; ++x) {
            for (int y = 0; y < h; ++y) f[y] = mask.at(x, y) ? inf : 0.0;
            edt_1d(f, d, v, z);
            for (int y = 0; y < h; ++y) dist[static_cast<size_t>(y) * w + x] = d[y];
        }
    }
    // row pass
    {
        std::vector<double> f(w), d(w), z(w + 1);
        std::vector<int> v(w);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) f[x] = dist[static_cast<size_t>(y) * w + x];
            edt_1d(f, d, v, z);
            for (int x = 0; x < w; ++x) dist[static_cast<size_t>(y) * w + x] = d[x];
        }
    }
    // everything beyond the image border is background
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double border = std::min(std::min(x + 1, w - x), std::min(y + 1, h - y));
            auto& d = dist[static_cast<size_t>(y) * w + x];
            d = std::min(d, border * border);
        }
    }
    return dist;
}

BinaryMask erode(const BinaryMask& mask, int radius_px) {
    if (radius_px < 1) throw std::invalid_argument("erosion radius must be >= 1");
    const auto sq = squared_distance_to_background(mask);
    BinaryMask out = mask;
    const double r2 = static_cast<double>(radius_px) * radius_px;
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        out.pixels[i] = (mask.pixels[i] != 0 && sq[i] > r2) ? 1 : 0;
    return out;
}

ShapeKind classify_shape(const BinaryMask& mask, int stroke_width_px) {
    if (mask.empty_mask()) throw std::invalid_argument("cannot classify an empty mask");
    if (stroke_width_px < 1) throw std::invalid_argument("stroke width must be >= 1 px");
    return erode(mask, stroke_width_px).empty_mask() ? ShapeKind::OpenLines : ShapeKind::Enclosed;
}

std::pair<std::vector<int>, int> label_components(const BinaryMask& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<int> labels(static_cast<size_t>(w) * h, -1);
    int next = 0;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y) || labels[static_cast<size_t>(y) * w + x] != -1) continue;
            labels[static_cast<size_t>(y) * w + x] = next;
            stack.push_back({x, y});
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = cx + dx, ny = cy + dy;
                        if (!mask.at(nx, ny)) continue;
                        auto& lab = labels[static_cast<size_t>(ny) * w + nx];
                        if (lab == -1) {
                            lab = next;
                            stack.push_back({nx, ny});
                        }
                    }
                }
            }
            ++next;
        }
    }
    return {std::move(labels), next};
}

}  // namespace pancake
