#include "subco/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace subco {

CropFeature extract_crop(const RgbImage& image, const BBox& box, PatchSize patch) {
    if (patch.width <= 0 || patch.height <= 0) throw std::invalid_argument("patch size must be positive");
    const double x0 = std::max(box.x, 0.0);
    const double y0 = std::max(box.y, 0.0);
    const double x1 = std::min(box.right(), static_cast<double>(image.width));
    const double y1 = std::min(box.bottom(), static_cast<double>(image.height));
    if (!(x1 > x0 && y1 > y0)) throw std::invalid_argument("box lies outside the image");

    const int px_lo = std::clamp(static_cast<int>(std::floor(x0)), 0, image.width - 1);
    const int px_hi = std::clamp(static_cast<int>(std::ceil(x1)) - 1, px_lo, image.width - 1);
    const int py_lo = std::clamp(static_cast<int>(std::floor(y0)), 0, image.height - 1);
    const int py_hi = std::clamp(static_cast<int>(std::ceil(y1)) - 1, py_lo, image.height - 1);
    const double step_x = (x1 - x0) / patch.width;
    const double step_y = (y1 - y0) / patch.height;

    CropFeature crop{Vector(patch.feature_length())};
    for (int v = 0; v < patch.height; ++v) {
        const double sy = std::clamp(y0 + (v + 0.5) * step_y - 0.5, static_cast<double>(py_lo), static_cast<double>(py_hi));
        const int ya = static_cast<int>(std::floor(sy));
        const int yb = std::min(ya + 1, py_hi);
        const double fy = sy - ya;
        for (int u = 0; u < patch.width; ++u) {
            const double sx = std::clamp(x0 + (u + 0.5) * step_x - 0.5, static_cast<double>(px_lo), static_cast<double>(px_hi));
            const int xa = static_cast<int>(std::floor(sx));
            const int xb = std::min(xa + 1, px_hi);
            const double fx = sx - xa;
            for (int c = 0; c < 3; ++c) {
                const double top = (1.0 - fx) * image.at(xa, ya, c) + fx * image.at(xb, ya, c);
                const double bottom = (1.0 - fx) * image.at(xa, yb, c) + fx * image.at(xb, yb, c);
                crop.values[(v * patch.width + u) * 3 + c] = ((1.0 - fy) * top + fy * bottom) / 255.0;
            }
        }
    }
    return crop;
}

std::vector<CropFeature> extract_crops(const RgbImage& image, const FrameDetections& frame, PatchSize patch) {
    std::vector<CropFeature> crops;
    crops.reserve(frame.size());
    for (const auto& d : frame.detections) crops.push_back(extract_crop(image, d.box, patch));
    return crops;
}

}  // namespace subco
