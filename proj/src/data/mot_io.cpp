#include "subco/data.hpp"
#include "subco/errors.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <string_view>

namespace subco {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view field, std::size_t line_no, const char* name) {
    field = trim(field);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value))
        throw ParseError(fmt::format("invalid {} field '{}'", name, field), line_no);
    return value;
}

int parse_integer(std::string_view field, std::size_t line_no, const char* name) {
    const double v = parse_number(field, line_no, name);
    if (v != std::floor(v) || std::abs(v) > 1e9)
        throw ParseError(fmt::format("{} must be an integer, got '{}'", name, trim(field)), line_no);
    return static_cast<int>(v);
}

}  // namespace

std::vector<FrameDetections> parse_mot_stream(std::istream& in) {
    std::map<int, FrameDetections> by_frame;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string_view> fields;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty()) continue;

        fields.clear();
        std::size_t start = 0;
        while (true) {
            const auto comma = text.find(',', start);
            fields.push_back(text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                               : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (fields.size() < 7)
            throw ParseError(fmt::format("expected at least 7 comma-separated fields, got {}", fields.size()),
                             line_no);

        Detection det;
        det.frame = parse_integer(fields[0], line_no, "frame");
        if (det.frame < 1) throw ParseError("frame index must be >= 1", line_no);
        const int id = parse_integer(fields[1], line_no, "id");
        if (id == -1) {
            det.gt_track_id.reset();
        } else if (id >= 1) {
            det.gt_track_id = id;
        } else {
            throw ParseError(fmt::format("id must be -1 or >= 1, got {}", id), line_no);
        }
        det.box.x = parse_number(fields[2], line_no, "bb_left");
        det.box.y = parse_number(fields[3], line_no, "bb_top");
        det.box.width = parse_number(fields[4], line_no, "bb_width");
        det.box.height = parse_number(fields[5], line_no, "bb_height");
        if (!det.box.valid()) throw ParseError("box width and height must be positive", line_no);
        det.confidence = parse_number(fields[6], line_no, "conf");
        if (det.confidence < 0.0 || det.confidence > 1.0)
            throw ParseError(fmt::format("confidence {} outside [0, 1]", det.confidence), line_no);

        auto& frame = by_frame[det.frame];
        frame.frame = det.frame;
        frame.detections.push_back(det);
    }

    std::vector<FrameDetections> out;
    out.reserve(by_frame.size());
    for (auto& [_, f] : by_frame) out.push_back(std::move(f));
    return out;
}

std::vector<FrameDetections> parse_mot_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return parse_mot_stream(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

std::string format_mot_line(int frame, int id, const BBox& box, double confidence) {
    return fmt::format("{},{},{:.2f},{:.2f},{:.2f},{:.2f},{:.4f},-1,-1,-1\n", frame, id, box.x, box.y, box.width,
                       box.height, confidence);
}

void write_mot_file(std::span<const ResultRow> results, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& r : results) {
        if (r.frame < 1 || r.track_id < 1)
            throw std::invalid_argument(fmt::format("result row needs frame >= 1 and track id >= 1 (got {}, {})",
                                                    r.frame, r.track_id));
        out << format_mot_line(r.frame, r.track_id, r.box, r.confidence);
    }
    if (!out) throw IoError("write failed for " + path.string());
}

void write_detections_file(std::span<const FrameDetections> frames, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& f : frames)
        for (const auto& d : f.detections) out << format_mot_line(d.frame, d.gt_track_id.value_or(-1), d.box, d.confidence);
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace subco
