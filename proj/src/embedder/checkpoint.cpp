#include "subco/embedder.hpp"
#include "subco/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace subco {

using nlohmann::json;

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

json to_array(const Matrix& m) {
    const RowMajor r = m;
    return json(std::vector<double>(r.data(), r.data() + r.size()));
}

Matrix from_array(const json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
    const auto v = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(v.size()) != rows * cols)
        throw DimensionError(std::string("checkpoint array '") + name + "' has " + std::to_string(v.size()) +
                             " values, expected " + std::to_string(rows * cols));
    return Eigen::Map<const RowMajor>(v.data(), rows, cols);
}

}  // namespace

void save_checkpoint(const EmbedderParams& params, const std::filesystem::path& path) {
    params.validate();
    json j;
    j["format"] = "subco-embedder";
    j["version"] = 1;
    j["patch_width"] = params.shape.patch.width;
    j["patch_height"] = params.shape.patch.height;
    j["hidden"] = params.shape.hidden;
    j["dim"] = params.shape.dim;
    j["l2_normalize"] = params.shape.l2_normalize;
    j["w1"] = to_array(params.weights.w1);
    j["b1"] = to_array(params.weights.b1);
    j["w2"] = to_array(params.weights.w2);
    j["b2"] = to_array(params.weights.b2);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump() << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

EmbedderParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        const json j = json::parse(in);
        if (j.value("format", "") != "subco-embedder") throw ParseError(path.string() + ": not an embedder checkpoint", 0);
        EmbedderParams p;
        p.shape.patch.width = j.at("patch_width").get<int>();
        p.shape.patch.height = j.at("patch_height").get<int>();
        p.shape.hidden = j.at("hidden").get<int>();
        p.shape.dim = j.at("dim").get<int>();
        p.shape.l2_normalize = j.at("l2_normalize").get<bool>();
        p.shape.validate();
        const Eigen::Index h = p.shape.hidden, in_size = p.shape.input_size(), d = p.shape.dim;
        p.weights.w1 = from_array(j.at("w1"), h, in_size, "w1");
        p.weights.b1 = from_array(j.at("b1"), h, 1, "b1");
        p.weights.w2 = from_array(j.at("w2"), d, h, "w2");
        p.weights.b2 = from_array(j.at("b2"), d, 1, "b2");
        if (!p.weights.all_finite()) throw ParseError(path.string() + ": non-finite weights", 0);
        return p;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
}

}  // namespace subco
