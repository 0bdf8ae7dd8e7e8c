#include "subco/data.hpp"
#include "subco/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace subco {

namespace {

// Pixel column/row range [first, last) whose centers fall inside [lo, hi).
std::pair<int, int> covered_range(double lo, double hi, int limit) {
    const int first = std::max(0, static_cast<int>(std::ceil(lo - 0.5)));
    const int last = std::min(limit, static_cast<int>(std::ceil(hi - 0.5)));
    return {first, std::max(first, last)};
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

void skip_ws_and_comments(std::istream& in) {
    while (true) {
        const int c = in.peek();
        if (c == '#') {
            std::string dummy;
            std::getline(in, dummy);
        } else if (c == ' ' || c == '\n' || c == '\r' || c == '\t') {
            in.get();
        } else {
            return;
        }
    }
}

}  // namespace

void fill_rect(RgbImage& image, const BBox& box, const std::array<double, 3>& rgb) {
    const auto [x0, x1] = covered_range(box.x, box.right(), image.width);
    const auto [y0, y1] = covered_range(box.y, box.bottom(), image.height);
    const std::array<std::uint8_t, 3> c{to_byte(rgb[0]), to_byte(rgb[1]), to_byte(rgb[2])};
    for (int py = y0; py < y1; ++py)
        for (int px = x0; px < x1; ++px)
            for (int ch = 0; ch < 3; ++ch) image.at(px, py, ch) = c[ch];
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

RgbImage read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P6") throw ParseError(path.string() + ": not a binary PPM (P6)", 0);
    int w = 0, h = 0, maxval = 0;
    skip_ws_and_comments(in);
    in >> w;
    skip_ws_and_comments(in);
    in >> h;
    skip_ws_and_comments(in);
    in >> maxval;
    if (!in || w <= 0 || h <= 0 || maxval != 255)
        throw ParseError(path.string() + ": unsupported PPM header", 0);
    in.get();  // single whitespace before the raster
    RgbImage image(w, h);
    in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(image.pixels.size()))
        throw ParseError(path.string() + ": truncated PPM raster", 0);
    return image;
}

}  // namespace subco
