#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "alv/errors.hpp"
#include "alv/io.hpp"

namespace alv {

namespace {

std::string fmt_g6(double v) {
    if (v == 0.0) v = 0.0;  // normalize negative zero
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

int quantize8(double v) {
    v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return static_cast<int>(std::floor(v * 255.0 + 0.5));
}

std::string hex_color(const std::array<double, 3>& rgb) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02X%02X%02X", quantize8(rgb[0]), quantize8(rgb[1]),
                  quantize8(rgb[2]));
    return buf;
}

// ---------------------------------------------------------------------------
// Minimal XML scanning for the emitted subset.

struct Tag {
    std::string name;
    std::map<std::string, std::string> attrs;
    bool closing = false;       // </name>
    bool self_closing = false;  // <name ... />
};

class XmlScanner {
public:
    explicit XmlScanner(const std::string& text) : text_(text) {}

    // Returns false at end of input.
    bool next(Tag& tag) {
        while (true) {
            const size_t lt = text_.find('<', pos_);
            if (lt == std::string::npos) return false;
            if (text_.compare(lt, 4, "<!--") == 0) {
                const size_t end = text_.find("-->", lt);
                if (end == std::string::npos) throw validation_error("unterminated XML comment");
                pos_ = end + 3;
                continue;
            }
            if (text_.compare(lt, 2, "<?") == 0) {
                const size_t end = text_.find("?>", lt);
                if (end == std::string::npos) throw validation_error("unterminated XML prolog");
                pos_ = end + 2;
                continue;
            }
            if (text_.compare(lt, 2, "<!") == 0) {
                const size_t end = text_.find('>', lt);
                if (end == std::string::npos) throw validation_error("unterminated declaration");
                pos_ = end + 1;
                continue;
            }
            const size_t gt = text_.find('>', lt);
            if (gt == std::string::npos) throw validation_error("unterminated XML tag");
            parse_tag(text_.substr(lt + 1, gt - lt - 1), tag);
            pos_ = gt + 1;
            return true;
        }
    }

private:
    static void parse_tag(std::string body, Tag& tag) {
        tag = Tag{};
        if (!body.empty() && body.front() == '/') {
            tag.closing = true;
            body.erase(body.begin());
        }
        if (!body.empty() && body.back() == '/') {
            tag.self_closing = true;
            body.pop_back();
        }
        size_t i = 0;
        auto skip_ws = [&] { while (i < body.size() && std::isspace((unsigned char)body[i])) ++i; };
        skip_ws();
        const size_t name_start = i;
        while (i < body.size() && !std::isspace((unsigned char)body[i])) ++i;
        tag.name = body.substr(name_start, i - name_start);
        while (true) {
            skip_ws();
            if (i >= body.size()) break;
            const size_t key_start = i;
            while (i < body.size() && body[i] != '=' && !std::isspace((unsigned char)body[i])) ++i;
            const std::string key = body.substr(key_start, i - key_start);
            skip_ws();
            if (i >= body.size() || body[i] != '=')
                throw validation_error("malformed attribute '" + key + "'");
            ++i;
            skip_ws();
            if (i >= body.size() || (body[i] != '"' && body[i] != '\''))
                throw validation_error("attribute '" + key + "' is not quoted");
            const char quote = body[i++];
            const size_t val_start = i;
            while (i < body.size() && body[i] != quote) ++i;
            if (i >= body.size()) throw validation_error("unterminated attribute value");
            tag.attrs[key] = body.substr(val_start, i - val_start);
            ++i;
        }
    }

    const std::string& text_;
    size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Path data.

std::vector<double> scan_numbers(const std::string& s, size_t& i) {
    std::vector<double> nums;
    while (true) {
        while (i < s.size() && (std::isspace((unsigned char)s[i]) || s[i] == ',')) ++i;
        if (i >= s.size() || std::isalpha((unsigned char)s[i])) break;
        size_t consumed = 0;
        double v;
        try {
            v = std::stod(s.substr(i), &consumed);
        } catch (const std::exception&) {
            throw validation_error("malformed number in path data near '" + s.substr(i, 12) +
                                   "'");
        }
        nums.push_back(v);
        i += consumed;
    }
    return nums;
}

CubicSegment elevate_line(Vec2 a, Vec2 b) {
    return {a,
            {a.x + (b.x - a.x) / 3.0, a.y + (b.y - a.y) / 3.0},
            {a.x + 2.0 * (b.x - a.x) / 3.0, a.y + 2.0 * (b.y - a.y) / 3.0},
            b};
}

std::vector<CubicSegment> parse_path_data(const std::string& d) {
    std::vector<CubicSegment> segs;
    size_t i = 0;
    bool seen_move = false;
    bool closed = false;
    Vec2 start{}, current{};
    while (i < d.size()) {
        while (i < d.size() && (std::isspace((unsigned char)d[i]) || d[i] == ',')) ++i;
        if (i >= d.size()) break;
        const char cmd = d[i++];
        if (closed) throw unsupported_feature_error("path data continues after Z (subpaths)");
        switch (cmd) {
            case 'M': {
                if (seen_move)
                    throw unsupported_feature_error("multiple subpaths in one path element");
                seen_move = true;
                auto nums = scan_numbers(d, i);
                if (nums.size() < 2 || nums.size() % 2 != 0)
                    throw validation_error("M expects coordinate pairs");
                start = current = {nums[0], nums[1]};
                for (size_t k = 2; k + 1 < nums.size(); k += 2) {  // extra pairs: implicit L
                    const Vec2 next{nums[k], nums[k + 1]};
                    segs.push_back(elevate_line(current, next));
                    current = next;
                }
                break;
            }
            case 'C': {
                if (!seen_move) throw validation_error("path data must start with M");
                auto nums = scan_numbers(d, i);
                if (nums.empty() || nums.size() % 6 != 0)
                    throw validation_error("C expects groups of six coordinates");
                for (size_t k = 0; k < nums.size(); k += 6) {
                    const CubicSegment seg{current,
                                           {nums[k], nums[k + 1]},
                                           {nums[k + 2], nums[k + 3]},
                                           {nums[k + 4], nums[k + 5]}};
                    segs.push_back(seg);
                    current = seg.p3;
                }
                break;
            }
            case 'L': {
                if (!seen_move) throw validation_error("path data must start with M");
                auto nums = scan_numbers(d, i);
                if (nums.empty() || nums.size() % 2 != 0)
                    throw validation_error("L expects coordinate pairs");
                for (size_t k = 0; k + 1 < nums.size(); k += 2) {
                    const Vec2 next{nums[k], nums[k + 1]};
                    segs.push_back(elevate_line(current, next));
                    current = next;
                }
                break;
            }
            case 'Z':
            case 'z': {
                closed = true;
                const double gap = norm(current - start);
                if (gap > 1e-6) {
                    segs.push_back(elevate_line(current, start));
                } else if (!segs.empty()) {
                    segs.back().p3 = start;  // snap exact closure
                }
                break;
            }
            default:
                throw unsupported_feature_error(std::string("unsupported path command '") + cmd +
                                                "' (absolute M/C/L/Z only)");
        }
    }
    if (!closed) throw validation_error("path is not closed with Z");
    if (segs.empty()) throw validation_error("path has no segments");
    return segs;
}

std::array<double, 3> parse_hex_color(const std::string& value) {
    if (value.empty() || value[0] != '#') {
        if (value.rfind("url(", 0) == 0)
            throw unsupported_feature_error("gradient or pattern fill on path element");
        if (value == "none") throw unsupported_feature_error("fill=\"none\" on path element");
        throw unsupported_feature_error("fill '" + value + "' (hex colors only)");
    }
    auto hex = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw validation_error("malformed hex color '" + value + "'");
    };
    if (value.size() == 7) {
        return {(hex(value[1]) * 16 + hex(value[2])) / 255.0,
                (hex(value[3]) * 16 + hex(value[4])) / 255.0,
                (hex(value[5]) * 16 + hex(value[6])) / 255.0};
    }
    if (value.size() == 4) {
        return {hex(value[1]) * 17 / 255.0, hex(value[2]) * 17 / 255.0,
                hex(value[3]) * 17 / 255.0};
    }
    throw validation_error("malformed hex color '" + value + "'");
}

bool is_identity_transform(const std::string& t) {
    // Canonicalize runs of spaces/commas into single commas between tokens.
    std::string canon;
    bool pending_sep = false;
    for (char ch : t) {
        if (std::isspace((unsigned char)ch) || ch == ',') {
            pending_sep = true;
            continue;
        }
        if (pending_sep && !canon.empty() && canon.back() != '(' && ch != '(' && ch != ')')
            canon += ',';
        pending_sep = false;
        canon += ch;
    }
    return canon.empty() || canon == "none" || canon == "matrix(1,0,0,1,0,0)" ||
           canon == "translate(0)" || canon == "translate(0,0)" || canon == "scale(1)" ||
           canon == "scale(1,1)";
}

void check_render_attrs(const Tag& tag) {
    static const char* forbidden[] = {"style",     "filter", "clip-path", "mask",
                                      "opacity",   "stroke", "stroke-width",
                                      "stroke-opacity"};
    for (const char* key : forbidden) {
        auto it = tag.attrs.find(key);
        if (it == tag.attrs.end()) continue;
        if (std::string(key) == "stroke" && it->second == "none") continue;
        throw unsupported_feature_error("attribute '" + std::string(key) + "' on <" + tag.name +
                                        "> is outside the supported subset");
    }
    auto t = tag.attrs.find("transform");
    if (t != tag.attrs.end() && !is_identity_transform(t->second))
        throw unsupported_feature_error("non-identity transform on <" + tag.name + ">");
}

double parse_dimension(const std::string& s) {
    std::string v = s;
    if (v.size() > 2 && v.substr(v.size() - 2) == "px") v = v.substr(0, v.size() - 2);
    try {
        return std::stod(v);
    } catch (const std::exception&) {
        throw validation_error("malformed dimension '" + s + "'");
    }
}

}  // namespace

std::string svg_to_string(const VectorDocument& doc) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << doc.canvas_width
        << "\" height=\"" << doc.canvas_height << "\" viewBox=\"0 0 " << doc.canvas_width << " "
        << doc.canvas_height << "\">\n";
    for (const DocumentLayer& dl : doc.layers) {
        out << "  <g id=\"layer_" << dl.layer.layer_id << "\">\n";
        for (const PathPrimitive& prim : dl.layer.primitives) {
            out << "    <path d=\"";
            const int nseg = prim.segment_count();
            for (int j = 0; j < nseg; ++j) {
                const CubicSegment seg = prim.segment(j);
                if (j == 0)
                    out << "M " << fmt_g6(seg.p0.x) << " " << fmt_g6(seg.p0.y);
                out << " C " << fmt_g6(seg.p1.x) << " " << fmt_g6(seg.p1.y) << " "
                    << fmt_g6(seg.p2.x) << " " << fmt_g6(seg.p2.y) << " " << fmt_g6(seg.p3.x)
                    << " " << fmt_g6(seg.p3.y);
            }
            out << " Z\" fill=\"" << hex_color(prim.fill_rgb) << "\" fill-opacity=\""
                << fmt_g6(prim.fill_opacity) << "\" fill-rule=\"nonzero\"/>\n";
        }
        out << "  </g>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void emit_svg(const VectorDocument& doc, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw runtime_failure("cannot write SVG '" + path.string() + "'");
    out << svg_to_string(doc);
    if (!out) throw runtime_failure("failed while writing SVG '" + path.string() + "'");
}

VectorDocument parse_svg_string(const std::string& text) {
    XmlScanner scanner(text);
    VectorDocument doc;
    Tag tag;
    bool in_svg = false;
    bool in_group = false;
    bool saw_group = false;
    bool saw_loose_path = false;
    LayerVector current;

    auto parse_path = [&](const Tag& t) {
        check_render_attrs(t);
        auto d = t.attrs.find("d");
        if (d == t.attrs.end()) throw validation_error("path element without d attribute");
        auto rule = t.attrs.find("fill-rule");
        if (rule != t.attrs.end() && rule->second != "nonzero")
            throw unsupported_feature_error("fill-rule '" + rule->second + "' on path element");
        std::array<double, 3> rgb{0.0, 0.0, 0.0};
        auto fill = t.attrs.find("fill");
        if (fill != t.attrs.end()) rgb = parse_hex_color(fill->second);
        double opacity = 1.0;
        auto fo = t.attrs.find("fill-opacity");
        if (fo != t.attrs.end()) {
            try {
                opacity = std::stod(fo->second);
            } catch (const std::exception&) {
                throw validation_error("malformed fill-opacity '" + fo->second + "'");
            }
            if (opacity < 0.0 || opacity > 1.0)
                throw validation_error("fill-opacity must lie in [0,1]");
        }
        current.primitives.push_back(
            primitive_from_segments(parse_path_data(d->second), rgb, opacity));
    };

    while (scanner.next(tag)) {
        if (tag.name == "svg") {
            if (tag.closing) break;
            in_svg = true;
            double w = 0, h = 0;
            if (tag.attrs.count("width") && tag.attrs.count("height")) {
                w = parse_dimension(tag.attrs.at("width"));
                h = parse_dimension(tag.attrs.at("height"));
            } else if (tag.attrs.count("viewBox")) {
                std::istringstream vb(tag.attrs.at("viewBox"));
                double x0, y0;
                vb >> x0 >> y0 >> w >> h;
                if (!vb) throw validation_error("malformed viewBox");
            } else {
                throw validation_error("svg element lacks width/height and viewBox");
            }
            doc.canvas_width = static_cast<int>(std::llround(w));
            doc.canvas_height = static_cast<int>(std::llround(h));
            if (doc.canvas_width <= 0 || doc.canvas_height <= 0)
                throw validation_error("canvas dimensions must be positive");
        } else if (tag.name == "g") {
            if (!in_svg) throw validation_error("g element outside svg");
            if (tag.closing) {
                if (!in_group) throw validation_error("unmatched </g>");
                doc.layers.push_back({std::move(current), ""});
                current = LayerVector{};
                in_group = false;
                continue;
            }
            if (in_group) throw unsupported_feature_error("nested group elements");
            check_render_attrs(tag);
            saw_group = true;
            in_group = true;
            std::string id = tag.attrs.count("id")
                                 ? tag.attrs.at("id")
                                 : "g" + std::to_string(doc.layers.size());
            if (id.rfind("layer_", 0) == 0) id = id.substr(6);
            current = LayerVector{};
            current.layer_id = id;
            if (tag.self_closing) {
                doc.layers.push_back({std::move(current), ""});
                current = LayerVector{};
                in_group = false;
            }
        } else if (tag.name == "path") {
            if (tag.closing) continue;
            if (!in_svg) throw validation_error("path element outside svg");
            if (!in_group) {
                saw_loose_path = true;
                if (current.layer_id.empty()) current.layer_id = "0";
            }
            parse_path(tag);
        } else {
            throw unsupported_feature_error("element <" + tag.name +
                                            "> is outside the supported subset");
        }
    }

    if (!in_svg) throw validation_error("no svg element found");
    if (saw_loose_path && saw_group)
        throw unsupported_feature_error("paths outside groups mixed with group elements");
    if (saw_loose_path) doc.layers.push_back({std::move(current), ""});
    if (doc.layers.empty()) throw validation_error("document contains no layers");
    return doc;
}

VectorDocument parse_svg_subset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open SVG '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_svg_string(ss.str());
}

}  // namespace alv
