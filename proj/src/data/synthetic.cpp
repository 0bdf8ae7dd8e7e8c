#include "subco/data.hpp"
#include "subco/errors.hpp"
#include "subco/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace subco {

void SyntheticConfig::validate() const {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw ConfigError(std::string("synthetic config: ") + msg);
    };
    require(num_objects >= 1, "num_objects must be >= 1");
    require(num_frames >= 2, "num_frames must be >= 2");
    require(image_width > 0 && image_height > 0, "image size must be positive");
    require(min_object_size > 1.0 && min_object_size <= max_object_size, "object size range must satisfy 1 < min <= max");
    require(max_object_size < std::min(image_width, image_height), "objects cannot fit the image");
    require(min_speed >= 0.0 && min_speed <= max_speed, "speed range must satisfy 0 <= min <= max");
    require(occluder_count >= 0, "occluder_count must be >= 0");
    require(appearance_noise >= 0.0, "appearance_noise must be >= 0");
    require(detector_dropout >= 0.0 && detector_dropout <= 1.0, "detector_dropout must be in [0, 1]");
    require(clutter_rate >= 0.0, "clutter_rate must be >= 0");
    require(position_jitter >= 0.0 && velocity_jitter >= 0.0 && box_noise >= 0.0 && pixel_noise >= 0.0, "noise levels must be >= 0");
    require(occlusion_drop_threshold >= 0.0 && occlusion_drop_threshold <= 1.0,
            "occlusion_drop_threshold must be in [0, 1]");
    require(brightness_ramp >= 0.0 && brightness_ramp < 1.0, "brightness_ramp must be in [0, 1)");
    require(illumination_gradient >= 0.0 && illumination_gradient < 1.0, "illumination_gradient must be in [0, 1)");
}

namespace {

using Rgb = std::array<double, 3>;

Rgb hsv_to_rgb(double h, double s, double v) {
    h = h - std::floor(h);
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    Rgb rgb{};
    switch (static_cast<int>(hp) % 6) {
        case 0: rgb = {c, x, 0}; break;
        case 1: rgb = {x, c, 0}; break;
        case 2: rgb = {0, c, x}; break;
        case 3: rgb = {0, x, c}; break;
        case 4: rgb = {x, 0, c}; break;
        default: rgb = {c, 0, x}; break;
    }
    const double m = v - c;
    for (auto& ch : rgb) ch = 255.0 * (ch + m);
    return rgb;
}

struct MovingObject {
    int id;
    double x, y, w, h, vx, vy;
    Rgb primary;
    Rgb secondary;
};

struct Occluder {
    BBox box;
    double gray;
};

std::pair<int, int> covered(double lo, double hi, int limit) {
    const int first = std::max(0, static_cast<int>(std::ceil(lo - 0.5)));
    const int last = std::min(limit, static_cast<int>(std::ceil(hi - 0.5)));
    return {first, std::max(first, last)};
}

void bounce(double& pos, double& vel, double extent, double limit) {
    if (pos < 0.0) {
        pos = -pos;
        vel = -vel;
    } else if (pos + extent > limit) {
        pos = 2.0 * (limit - extent) - pos;
        vel = -vel;
    }
    pos = std::clamp(pos, 0.0, limit - extent);
}

}  // namespace

SyntheticSequence generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const int W = cfg.image_width;
    const int H = cfg.image_height;

    std::vector<MovingObject> objects;
    const double hue_offset = rng.uniform();
    for (int k = 0; k < cfg.num_objects; ++k) {
        MovingObject o{};
        o.id = k + 1;
        o.w = rng.uniform(cfg.min_object_size, cfg.max_object_size);
        o.h = rng.uniform(cfg.min_object_size, cfg.max_object_size);
        o.x = rng.uniform(0.0, W - o.w);
        o.y = rng.uniform(0.0, H - o.h);
        const double speed = rng.uniform(cfg.min_speed, cfg.max_speed);
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        o.vx = speed * std::cos(angle);
        o.vy = speed * std::sin(angle);
        const double hue = hue_offset + static_cast<double>(k) / cfg.num_objects;
        o.primary = hsv_to_rgb(hue, rng.uniform(0.65, 1.0), rng.uniform(0.65, 0.95));
        o.secondary = hsv_to_rgb(rng.uniform(), rng.uniform(0.3, 1.0), rng.uniform(0.3, 0.9));
        objects.push_back(o);
    }

    std::vector<Occluder> occluders;
    for (int k = 0; k < cfg.occluder_count; ++k) {
        Occluder oc{};
        oc.box.width = rng.uniform(1.0, 2.0) * cfg.max_object_size;
        oc.box.height = rng.uniform(0.6, 1.0) * H;
        oc.box.x = rng.uniform(0.05 * W, std::max(0.05 * W, 0.95 * W - oc.box.width));
        oc.box.y = rng.uniform(0.0, H - oc.box.height);
        oc.gray = rng.uniform(100.0, 170.0);
        occluders.push_back(oc);
    }

    // Static low-frequency background texture.
    std::vector<double> background(static_cast<std::size_t>(W) * H);
    for (int py = 0; py < H; ++py)
        for (int px = 0; px < W; ++px)
            background[static_cast<std::size_t>(py) * W + px] =
                60.0 + 18.0 * std::sin(px / 17.0) * std::cos(py / 23.0);

    std::vector<double> column_gain(static_cast<std::size_t>(W));
    for (int px = 0; px < W; ++px)
        column_gain[static_cast<std::size_t>(px)] = 1.0 + cfg.illumination_gradient * (2.0 * (px + 0.5) / W - 1.0);

    SyntheticSequence out;
    std::vector<int> owner(static_cast<std::size_t>(W) * H);
    constexpr int kBackground = -1;
    constexpr int kFirstOccluder = -2;  // occluder k is stored as -2 - k

    for (int t = 0; t < cfg.num_frames; ++t) {
        const int frame = t + 1;
        if (t > 0) {
            for (auto& o : objects) {
                if (cfg.velocity_jitter > 0.0) {
                    o.vx += rng.normal(0.0, cfg.velocity_jitter);
                    o.vy += rng.normal(0.0, cfg.velocity_jitter);
                    const double speed = std::hypot(o.vx, o.vy);
                    if (speed > cfg.max_speed && speed > 0.0) {
                        o.vx *= cfg.max_speed / speed;
                        o.vy *= cfg.max_speed / speed;
                    }
                }
                o.x += o.vx;
                o.y += o.vy;
                bounce(o.x, o.vx, o.w, W);
                bounce(o.y, o.vy, o.h, H);
            }
        }
        const double brightness = 1.0 + cfg.brightness_ramp * (2.0 * t / (cfg.num_frames - 1) - 1.0);

        // Rendered boxes with jitter, plus per-frame color tint per object.
        std::vector<BBox> boxes;
        std::vector<Rgb> tints;
        for (const auto& o : objects) {
            BBox b{o.x + rng.normal(0.0, cfg.position_jitter), o.y + rng.normal(0.0, cfg.position_jitter), o.w, o.h};
            b.x = std::clamp(b.x, 0.0, W - b.width);
            b.y = std::clamp(b.y, 0.0, H - b.height);
            boxes.push_back(b);
            tints.push_back({rng.normal(0.0, cfg.appearance_noise), rng.normal(0.0, cfg.appearance_noise),
                             rng.normal(0.0, cfg.appearance_noise)});
        }

        std::fill(owner.begin(), owner.end(), kBackground);
        for (std::size_t k = 0; k < objects.size(); ++k) {
            const auto [x0, x1] = covered(boxes[k].x, boxes[k].right(), W);
            const auto [y0, y1] = covered(boxes[k].y, boxes[k].bottom(), H);
            for (int py = y0; py < y1; ++py)
                for (int px = x0; px < x1; ++px) owner[static_cast<std::size_t>(py) * W + px] = static_cast<int>(k);
        }
        for (std::size_t k = 0; k < occluders.size(); ++k) {
            const auto [x0, x1] = covered(occluders[k].box.x, occluders[k].box.right(), W);
            const auto [y0, y1] = covered(occluders[k].box.y, occluders[k].box.bottom(), H);
            for (int py = y0; py < y1; ++py)
                for (int px = x0; px < x1; ++px)
                    owner[static_cast<std::size_t>(py) * W + px] = kFirstOccluder - static_cast<int>(k);
        }

        RgbImage image(W, H);
        std::vector<std::size_t> visible(objects.size(), 0);
        for (int py = 0; py < H; ++py) {
            for (int px = 0; px < W; ++px) {
                const std::size_t idx = static_cast<std::size_t>(py) * W + px;
                const double gain = brightness * column_gain[static_cast<std::size_t>(px)];
                Rgb base{};
                const int who = owner[idx];
                if (who >= 0) {
                    const auto& o = objects[static_cast<std::size_t>(who)];
                    const auto& b = boxes[static_cast<std::size_t>(who)];
                    const bool upper = (py + 0.5) < b.y + 0.6 * b.height;
                    const Rgb& c = upper ? o.primary : o.secondary;
                    const Rgb& tint = tints[static_cast<std::size_t>(who)];
                    base = {c[0] + tint[0], c[1] + tint[1], c[2] + tint[2]};
                    ++visible[static_cast<std::size_t>(who)];
                } else if (who <= kFirstOccluder) {
                    const double g = occluders[static_cast<std::size_t>(kFirstOccluder - who)].gray;
                    base = {g, g, g};
                } else {
                    const double g = background[idx];
                    base = {g, g * 1.05, g * 1.1};
                }
                for (int ch = 0; ch < 3; ++ch) {
                    const double v = base[static_cast<std::size_t>(ch)] * gain + rng.normal(0.0, cfg.pixel_noise);
                    image.at(px, py, ch) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
                }
            }
        }

        FrameDetections gt{frame, {}};
        FrameDetections det{frame, {}};
        for (std::size_t k = 0; k < objects.size(); ++k) {
            const auto [x0, x1] = covered(boxes[k].x, boxes[k].right(), W);
            const auto [y0, y1] = covered(boxes[k].y, boxes[k].bottom(), H);
            const auto total = static_cast<std::size_t>(x1 - x0) * static_cast<std::size_t>(y1 - y0);
            const double visible_frac = total ? static_cast<double>(visible[k]) / static_cast<double>(total) : 0.0;
            if (visible_frac <= 0.0) continue;
            gt.detections.push_back(Detection{frame, boxes[k], 1.0, 1, objects[k].id});

            const double hidden = 1.0 - visible_frac;
            const bool dropped = rng.bernoulli(cfg.detector_dropout);
            double left = boxes[k].x + rng.normal(0.0, cfg.box_noise);
            double top = boxes[k].y + rng.normal(0.0, cfg.box_noise);
            double right = boxes[k].right() + rng.normal(0.0, cfg.box_noise);
            double bottom = boxes[k].bottom() + rng.normal(0.0, cfg.box_noise);
            const double conf = std::clamp(0.92 - 0.6 * hidden + rng.normal(0.0, 0.03), 0.01, 1.0);
            if (dropped || hidden > cfg.occlusion_drop_threshold) continue;
            left = std::clamp(left, 0.0, W - 2.0);
            top = std::clamp(top, 0.0, H - 2.0);
            right = std::clamp(right, left + 2.0, static_cast<double>(W));
            bottom = std::clamp(bottom, top + 2.0, static_cast<double>(H));
            det.detections.push_back(Detection{frame, BBox{left, top, right - left, bottom - top}, conf, 1, objects[k].id});
        }

        const int clutter = rng.poisson(cfg.clutter_rate);
        for (int c = 0; c < clutter; ++c) {
            BBox b;
            b.width = rng.uniform(cfg.min_object_size, cfg.max_object_size);
            b.height = rng.uniform(cfg.min_object_size, cfg.max_object_size);
            b.x = rng.uniform(0.0, W - b.width);
            b.y = rng.uniform(0.0, H - b.height);
            det.detections.push_back(Detection{frame, b, rng.uniform(0.1, 0.6), 1, std::nullopt});
        }

        // Detector output order carries no identity information.
        for (std::size_t i = det.detections.size(); i > 1; --i)
            std::swap(det.detections[i - 1], det.detections[rng.below(i)]);

        out.ground_truth.push_back(std::move(gt));
        out.sample.frames.push_back(std::move(det));
        out.sample.images.push_back(std::move(image));
    }
    return out;
}

}  // namespace subco
