#include <fstream>
#include <set>

#include <json.hpp>

#include "alv/errors.hpp"
#include "alv/io.hpp"

namespace alv {

namespace {

bool valid_layer_id(const std::string& id) {
    if (id.empty()) return false;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

}  // namespace

LoadedManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open manifest '" + path.string() + "'");

    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("manifest '" + path.string() + "' is not valid JSON: " + e.what());
    }

    LoadedManifest out;
    try {
        out.manifest.canvas_width = j.at("canvas").at("width").get<int>();
        out.manifest.canvas_height = j.at("canvas").at("height").get<int>();
        for (const auto& e : j.at("layers")) {
            ManifestEntry entry;
            entry.layer_id = e.at("layer_id").get<std::string>();
            entry.image_path = e.at("image").get<std::string>();
            entry.mask_path = e.at("mask").get<std::string>();
            entry.z = e.at("z").get<long long>();
            out.manifest.entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("manifest '" + path.string() + "' has a malformed schema: " +
                               e.what());
    }

    if (out.manifest.canvas_width <= 0 || out.manifest.canvas_height <= 0)
        throw validation_error("manifest canvas dimensions must be positive");
    if (out.manifest.entries.empty())
        throw validation_error("manifest '" + path.string() + "' lists no layers");

    std::set<std::string> seen_ids;
    for (size_t i = 0; i < out.manifest.entries.size(); ++i) {
        const ManifestEntry& e = out.manifest.entries[i];
        if (!valid_layer_id(e.layer_id))
            throw validation_error("layer_id '" + e.layer_id +
                                   "' must be non-empty [A-Za-z0-9_.-]");
        if (!seen_ids.insert(e.layer_id).second)
            throw validation_error("duplicate layer_id '" + e.layer_id + "'");
        if (i > 0 && e.z <= out.manifest.entries[i - 1].z)
            throw validation_error("z indices must be strictly increasing (entry '" +
                                   e.layer_id + "')");
    }

    const std::filesystem::path base = path.parent_path();
    for (const ManifestEntry& e : out.manifest.entries) {
        const auto image_path = base / e.image_path;
        const auto mask_path = base / e.mask_path;
        ImageF image = load_raster_rgba(image_path);
        if (image.width != out.manifest.canvas_width ||
            image.height != out.manifest.canvas_height)
            throw validation_error("entry '" + e.layer_id + "': image dimensions " +
                                   std::to_string(image.width) + "x" +
                                   std::to_string(image.height) + " do not match the canvas");
        MaskImage mask = load_mask(mask_path);
        if (mask.width != out.manifest.canvas_width || mask.height != out.manifest.canvas_height)
            throw validation_error("entry '" + e.layer_id + "': mask dimensions " +
                                   std::to_string(mask.width) + "x" +
                                   std::to_string(mask.height) + " do not match the canvas");
        out.targets.push_back(make_layer_target(std::move(image), std::move(mask), e.layer_id));
    }
    return out;
}

void save_manifest(const std::filesystem::path& path, const LayerManifest& manifest) {
    nlohmann::json j;
    j["canvas"] = {{"width", manifest.canvas_width}, {"height", manifest.canvas_height}};
    j["layers"] = nlohmann::json::array();
    for (const ManifestEntry& e : manifest.entries) {
        j["layers"].push_back({{"layer_id", e.layer_id},
                               {"image", e.image_path},
                               {"mask", e.mask_path},
                               {"z", e.z}});
    }
    std::ofstream out(path);
    if (!out) throw runtime_failure("cannot write manifest '" + path.string() + "'");
    out << j.dump(2) << "\n";
}

}  // namespace alv
