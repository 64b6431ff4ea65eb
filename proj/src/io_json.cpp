#include <fstream>

#include <json.hpp>

#include "alv/errors.hpp"
#include "alv/io.hpp"

namespace alv {

void save_document_json(const VectorDocument& doc, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "alv-document";
    j["version"] = 1;
    j["canvas"] = {{"width", doc.canvas_width}, {"height", doc.canvas_height}};
    j["layers"] = nlohmann::json::array();
    for (const DocumentLayer& dl : doc.layers) {
        nlohmann::json jl;
        jl["layer_id"] = dl.layer.layer_id;
        jl["provenance"] = dl.provenance;
        jl["primitives"] = nlohmann::json::array();
        for (const PathPrimitive& prim : dl.layer.primitives) {
            nlohmann::json jp;
            auto& pts = jp["points"] = nlohmann::json::array();
            for (const Vec2& p : prim.points) {
                pts.push_back(p.x);
                pts.push_back(p.y);
            }
            jp["fill_rgb"] = {prim.fill_rgb[0], prim.fill_rgb[1], prim.fill_rgb[2]};
            jp["fill_opacity"] = prim.fill_opacity;
            jl["primitives"].push_back(std::move(jp));
        }
        j["layers"].push_back(std::move(jl));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw runtime_failure("cannot write document '" + path.string() + "'");
    out << j.dump(1) << "\n";
}

VectorDocument load_document_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open document '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("document '" + path.string() + "' is not valid JSON: " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "alv-document")
            throw validation_error("not an alv-document file");
        VectorDocument doc;
        doc.canvas_width = j.at("canvas").at("width").get<int>();
        doc.canvas_height = j.at("canvas").at("height").get<int>();
        for (const auto& jl : j.at("layers")) {
            DocumentLayer dl;
            dl.layer.layer_id = jl.at("layer_id").get<std::string>();
            dl.provenance = jl.value("provenance", std::string{});
            for (const auto& jp : jl.at("primitives")) {
                PathPrimitive prim;
                const auto& pts = jp.at("points");
                if (pts.size() % 6 != 0)
                    throw validation_error("point list must hold 3 points per segment");
                for (size_t k = 0; k + 1 < pts.size(); k += 2)
                    prim.points.push_back({pts[k].get<double>(), pts[k + 1].get<double>()});
                const auto& rgb = jp.at("fill_rgb");
                prim.fill_rgb = {rgb.at(0).get<double>(), rgb.at(1).get<double>(),
                                 rgb.at(2).get<double>()};
                prim.fill_opacity = jp.at("fill_opacity").get<double>();
                dl.layer.primitives.push_back(std::move(prim));
            }
            doc.layers.push_back(std::move(dl));
        }
        return doc;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("document '" + path.string() + "' has a malformed schema: " +
                               e.what());
    }
}

namespace {

void write_trace_records(std::ofstream& out, const RunTrace& trace, const std::string* layer) {
    for (const TraceRecord& r : trace.records) {
        nlohmann::json j{{"iteration", r.iteration},
                         {"total", r.loss.total},
                         {"recon", r.loss.recon},
                         {"mask", r.loss.mask},
                         {"primitives", r.primitive_count},
                         {"pruned", r.n_pruned},
                         {"added", r.n_added},
                         {"marginal", r.marginal_estimate},
                         {"elapsed_s", r.elapsed_s}};
        if (layer) j["layer_id"] = *layer;
        out << j.dump() << "\n";
    }
}

}  // namespace

void write_trace_jsonl(const RunTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw runtime_failure("cannot write trace '" + path.string() + "'");
    write_trace_records(out, trace, nullptr);
}

void write_traces_jsonl(const std::vector<RunTrace>& traces,
                        const std::vector<std::string>& layer_ids,
                        const std::filesystem::path& path) {
    if (traces.size() != layer_ids.size())
        throw validation_error("trace/layer-id count mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw runtime_failure("cannot write trace '" + path.string() + "'");
    for (size_t i = 0; i < traces.size(); ++i)
        write_trace_records(out, traces[i], &layer_ids[i]);
}

}  // namespace alv
