#include "subco/data.hpp"
#include "subco/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>

namespace subco {

namespace fs = std::filesystem;
using nlohmann::json;

void write_sequence_dir(const SyntheticSequence& sequence, const fs::path& dir) {
    const auto& sample = sequence.sample;
    validate_sample(sample);
    fs::create_directories(dir / "frames");

    json manifest;
    manifest["format"] = "subco-sequence";
    manifest["version"] = 1;
    manifest["frame_count"] = sample.length();
    manifest["first_frame"] = sample.frames.empty() ? 1 : sample.frames.front().frame;
    const int width = sample.has_images() ? sample.images.front().width : 0;
    const int height = sample.has_images() ? sample.images.front().height : 0;
    manifest["width"] = width;
    manifest["height"] = height;
    json files = json::array();
    for (std::size_t t = 0; t < sample.images.size(); ++t) {
        const auto name = fmt::format("frames/{:06d}.ppm", sample.frames[t].frame);
        write_ppm(sample.images[t], dir / name);
        files.push_back(name);
    }
    manifest["frames"] = files;

    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';

    write_detections_file(sequence.ground_truth, dir / "gt.txt");
    write_detections_file(sample.frames, dir / "det.txt");
}

LoadedSequence load_sequence_dir(const fs::path& dir, bool with_images) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw IoError("missing manifest.json in " + dir.string());
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError((dir / "manifest.json").string() + ": " + e.what(), 0);
    }

    LoadedSequence seq;
    seq.name = dir.filename().string();
    const int count = manifest.at("frame_count").get<int>();
    const int first = manifest.value("first_frame", 1);
    const int last = first + count - 1;
    seq.sample.frames = densify_frames(parse_mot_file(dir / "det.txt"), first, last);
    if (fs::exists(dir / "gt.txt")) seq.ground_truth = densify_frames(parse_mot_file(dir / "gt.txt"), first, last);

    if (with_images) {
        const auto& files = manifest.at("frames");
        if (static_cast<int>(files.size()) != count)
            throw ParseError(fmt::format("{}: manifest lists {} frames, expected {}", dir.string(), files.size(), count), 0);
        for (const auto& f : files) seq.sample.images.push_back(read_ppm(dir / f.get<std::string>()));
    }
    validate_sample(seq.sample);
    return seq;
}

std::vector<fs::path> list_sequence_dirs(const fs::path& root) {
    if (fs::exists(root / "manifest.json")) return {root};
    if (!fs::is_directory(root)) throw IoError("not a dataset directory: " + root.string());
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw IoError("no sequence directories under " + root.string());
    return dirs;
}

}  // namespace subco
