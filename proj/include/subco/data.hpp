#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace subco {

/// Axis-aligned box in pixel coordinates: top-left corner plus extent.
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double width = 1.0;
    double height = 1.0;

    double right() const { return x + width; }
    double bottom() const { return y + height; }
    double center_x() const { return x + 0.5 * width; }
    double center_y() const { return y + 0.5 * height; }
    double area() const { return width * height; }
    bool valid() const { return width > 0.0 && height > 0.0; }

    static BBox from_center(double cx, double cy, double w, double h) {
        return {cx - 0.5 * w, cy - 0.5 * h, w, h};
    }

    friend bool operator==(const BBox&, const BBox&) = default;
};

double intersection_area(const BBox& a, const BBox& b);
double iou(const BBox& a, const BBox& b);

struct Detection {
    int frame = 1;
    BBox box;
    double confidence = 1.0;
    int class_id = 1;
    std::optional<int> gt_track_id;  // ground truth identity, synthetic/evaluation only
};

/// Detections of one frame. Order is significant: detection j is column j of
/// every score or assignment matrix built for this frame.
struct FrameDetections {
    int frame = 1;
    std::vector<Detection> detections;

    std::size_t size() const { return detections.size(); }
    bool empty() const { return detections.empty(); }
};

/// 8-bit interleaved RGB raster, row-major.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    RgbImage() = default;
    RgbImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

    std::uint8_t& at(int px, int py, int channel) {
        return pixels[(static_cast<std::size_t>(py) * width + px) * 3 + channel];
    }
    std::uint8_t at(int px, int py, int channel) const {
        return pixels[(static_cast<std::size_t>(py) * width + px) * 3 + channel];
    }
    bool empty() const { return pixels.empty(); }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// T consecutive frames, the unit over which the training loss is computed.
/// `images` is either empty or holds one image per frame.
struct SequenceSample {
    std::vector<FrameDetections> frames;
    std::vector<RgbImage> images;

    std::size_t length() const { return frames.size(); }
    bool has_images() const { return !images.empty(); }
};

/// Throws ConfigError when frame indices are not strictly increasing, a
/// detection carries the wrong frame index, or images do not line up.
void validate_sample(const SequenceSample& sample);

/// One tracker output row.
struct ResultRow {
    int frame = 1;
    int track_id = 1;
    BBox box;
    double confidence = 1.0;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

// MOTChallenge text format: frame,id,bb_left,bb_top,bb_width,bb_height,conf[,x,y,z]
// 1-based frames; id -1 means "no identity".
std::vector<FrameDetections> parse_mot_stream(std::istream& in);
std::vector<FrameDetections> parse_mot_file(const std::filesystem::path& path);

std::string format_mot_line(int frame, int id, const BBox& box, double confidence);
void write_mot_file(std::span<const ResultRow> results, const std::filesystem::path& path);
/// Writes detections, using gt_track_id as the id column (-1 when absent).
void write_detections_file(std::span<const FrameDetections> frames, const std::filesystem::path& path);

std::vector<FrameDetections> filter_by_confidence(std::span<const FrameDetections> frames, double threshold);

/// Groups result rows by frame; track ids land in Detection::gt_track_id.
std::vector<FrameDetections> rows_to_frames(std::span<const ResultRow> rows);
std::vector<ResultRow> frames_to_rows(std::span<const FrameDetections> frames);

/// Produces one entry per frame in [first, last], inserting empty frames.
std::vector<FrameDetections> densify_frames(std::span<const FrameDetections> frames, int first, int last);

// Binary PPM (P6), maxval 255.
void write_ppm(const RgbImage& image, const std::filesystem::path& path);
RgbImage read_ppm(const std::filesystem::path& path);

struct SyntheticConfig {
    int num_objects = 6;
    int num_frames = 24;
    int image_width = 320;
    int image_height = 240;
    double min_object_size = 24.0;  // pixels, per side
    double max_object_size = 40.0;
    double min_speed = 1.0;  // pixels per frame
    double max_speed = 10.0;
    int occluder_count = 0;
    double appearance_noise = 10.0;  // std-dev of the per-frame object color shift, 8-bit units
    double detector_dropout = 0.0;
    double clutter_rate = 0.0;  // expected false positives per frame
    std::uint64_t seed = 0;

    double position_jitter = 0.3;          // std-dev of per-frame rendering jitter, pixels
    double velocity_jitter = 0.0;          // std-dev of the per-frame velocity random walk, pixels/frame
    double box_noise = 1.0;                // std-dev of detected corner perturbation, pixels
    double pixel_noise = 100.0;            // std-dev of independent per-pixel sensor noise, 8-bit units
    double occlusion_drop_threshold = 0.7; // detection dropped above this hidden fraction
    double brightness_ramp = 0.4;          // global brightness goes 1-r .. 1+r over the sequence
    double illumination_gradient = 0.6;    // brightness goes 1-g .. 1+g from left to right edge

    void validate() const;
};

struct SyntheticSequence {
    SequenceSample sample;                     // detector output plus rendered frames
    std::vector<FrameDetections> ground_truth; // every at least partially visible object
};

SyntheticSequence generate_synthetic(const SyntheticConfig& cfg);

/// Draws a filled, uniformly shaded rectangle with the same conventions the
/// generator uses (pixel (px,py) is covered when its center lies in the box).
void fill_rect(RgbImage& image, const BBox& box, const std::array<double, 3>& rgb);

// On-disk sequence directory: manifest.json, frames/%06d.ppm, gt.txt, det.txt.
void write_sequence_dir(const SyntheticSequence& sequence, const std::filesystem::path& dir);

struct LoadedSequence {
    std::string name;
    SequenceSample sample;  // detector output (det.txt), one entry per frame
    std::vector<FrameDetections> ground_truth;
};

LoadedSequence load_sequence_dir(const std::filesystem::path& dir, bool with_images = true);
/// `root` is either one sequence directory or a directory of sequence directories.
std::vector<std::filesystem::path> list_sequence_dirs(const std::filesystem::path& root);

}  // namespace subco
