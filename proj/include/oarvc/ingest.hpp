#ifndef OARVC_INGEST_HPP
#define OARVC_INGEST_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "oarvc/image.hpp"
#include "oarvc/oar.hpp"
#include "oarvc/render.hpp"
#include "oarvc/rng.hpp"

namespace oarvc {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One annotation record: raw (possibly sub-pixel) geometry straight from the
// track file. Rounding to the pixel grid happens when frames are assembled.
struct TrackRecord {
    int frame = 1;
    ObjectId id = 1;
    double x = 0, y = 0, w = 1, h = 1;
    std::optional<double> angle;
    std::string category = "others";
};

enum class TrackFormat { kJsonl, kDetracXml };

struct MaskRect {
    int x = 0, y = 0, w = 0, h = 0;
};

// Manually labeled background regions sitting at the spatial forefront;
// objects overlapping them are occluded by the background.
struct ForegroundMask {
    std::vector<MaskRect> rects;
};

inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

namespace detail {

inline std::string xml_attr(const std::string& tag, const std::string& name) {
    const std::string key = name + "=\"";
    const auto pos = tag.find(key);
    if (pos == std::string::npos) return {};
    const auto end = tag.find('"', pos + key.size());
    if (end == std::string::npos) return {};
    return tag.substr(pos + key.size(), end - pos - key.size());
}

inline std::vector<TrackRecord> parse_tracks_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open track file: " + path.string());
    std::vector<TrackRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        try {
            TrackRecord rec;
            rec.frame = j.at("frame").get<int>();
            rec.id = j.at("id").get<ObjectId>();
            rec.x = j.at("x").get<double>();
            rec.y = j.at("y").get<double>();
            rec.w = j.at("w").get<double>();
            rec.h = j.at("h").get<double>();
            if (j.contains("angle") && !j["angle"].is_null()) rec.angle = j["angle"].get<double>();
            if (j.contains("cat")) rec.category = j["cat"].get<std::string>();
            records.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

// Best-effort UA-DETRAC XML reader: pulls frame numbers, target ids, boxes and
// vehicle types out of the annotation markup without a full XML parser.
inline std::vector<TrackRecord> parse_tracks_detrac(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open track file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<TrackRecord> records;
    std::size_t pos = 0;
    int frame_num = 0;
    while (true) {
        const auto tag_start = text.find('<', pos);
        if (tag_start == std::string::npos) break;
        const auto tag_end = text.find('>', tag_start);
        if (tag_end == std::string::npos)
            throw ParseError(path.string() + ": unterminated element near offset " +
                             std::to_string(tag_start));
        const std::string tag = text.substr(tag_start + 1, tag_end - tag_start - 1);
        pos = tag_end + 1;
        if (tag.rfind("frame", 0) == 0) {
            const std::string num = xml_attr(tag, "num");
            if (num.empty())
                throw ParseError(path.string() + ": frame element without num attribute");
            frame_num = std::stoi(num);
        } else if (tag.rfind("target ", 0) == 0 || tag == "target") {
            TrackRecord rec;
            rec.frame = frame_num;
            const std::string id = xml_attr(tag, "id");
            if (id.empty()) throw ParseError(path.string() + ": target element without id");
            rec.id = static_cast<ObjectId>(std::stoul(id));
            // box and attribute belong to this target; scan forward to </target>
            const auto target_close = text.find("</target>", pos);
            const std::string body =
                text.substr(pos, target_close == std::string::npos ? std::string::npos
                                                                   : target_close - pos);
            const auto box_pos = body.find("<box");
            if (box_pos == std::string::npos)
                throw ParseError(path.string() + ": target " + id + " without box");
            const auto box_end = body.find('>', box_pos);
            const std::string box = body.substr(box_pos, box_end - box_pos);
            rec.x = std::stod(xml_attr(box, "left"));
            rec.y = std::stod(xml_attr(box, "top"));
            rec.w = std::stod(xml_attr(box, "width"));
            rec.h = std::stod(xml_attr(box, "height"));
            const auto attr_pos = body.find("<attribute");
            if (attr_pos != std::string::npos) {
                const auto attr_end = body.find('>', attr_pos);
                const std::string attr = body.substr(attr_pos, attr_end - attr_pos);
                const std::string type = xml_attr(attr, "vehicle_type");
                if (!type.empty()) rec.category = type;
                const std::string orientation = xml_attr(attr, "orientation");
                if (!orientation.empty()) rec.angle = std::stod(orientation);
            }
            records.push_back(std::move(rec));
        }
    }
    return records;
}

}  // namespace detail

inline std::vector<TrackRecord> parse_tracks(const std::filesystem::path& path,
                                             TrackFormat format) {
    std::vector<TrackRecord> records = format == TrackFormat::kJsonl
                                           ? detail::parse_tracks_jsonl(path)
                                           : detail::parse_tracks_detrac(path);
    std::stable_sort(records.begin(), records.end(),
                     [](const TrackRecord& a, const TrackRecord& b) {
                         return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
                     });
    for (TrackRecord& rec : records)
        rec.category = std::string(to_string(category_from_string(rec.category)));
    return records;
}

inline ForegroundMask load_mask(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open mask file: " + path.string());
    ForegroundMask mask;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            mask.rects.push_back({j.at("x").get<int>(), j.at("y").get<int>(),
                                  j.at("w").get<int>(), j.at("h").get<int>()});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return mask;
}

// Geometric relation identification. Object pairs whose boxes intersect get a
// front->back occlusion edge (front = lower bottom edge, ties to smaller id);
// objects under a mask rectangle are occluded by the background; every object
// carries the trivial "in background" edge.
inline std::vector<Relation> identify_relations(const OarFrame& frame,
                                                const ForegroundMask& mask) {
    std::vector<Relation> relations;
    const auto& ids = frame.objects;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const Attributes& a = frame.attributes.at(ids[i]);
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            const Attributes& b = frame.attributes.at(ids[j]);
            if (intersection_area(a, b) <= 0) continue;
            const bool a_front = is_in_front(ids[i], a, ids[j], b);
            relations.push_back({a_front ? ids[i] : ids[j], a_front ? ids[j] : ids[i],
                                 RelationLabel::kOcclusion});
        }
        for (const MaskRect& r : mask.rects) {
            Attributes rect;
            rect.x = r.x;
            rect.y = r.y;
            rect.w = r.w;
            rect.h = r.h;
            if (intersection_area(a, rect) > 0) {
                relations.push_back({kBackgroundId, ids[i], RelationLabel::kOcclusion});
                break;
            }
        }
        relations.push_back({ids[i], kBackgroundId, RelationLabel::kIn});
    }
    canonicalize_relations(relations);
    return relations;
}

namespace detail {

struct ClippedBox {
    int x, y, w, h;
    bool alive;
};

inline ClippedBox clip_box(double x, double y, double w, double h, int width, int height) {
    const int x0 = std::max(0, round_half_up(x));
    const int y0 = std::max(0, round_half_up(y));
    const int x1 = std::min(width, round_half_up(x + w));
    const int y1 = std::min(height, round_half_up(y + h));
    if (x1 <= x0 || y1 <= y0) return {0, 0, 0, 0, false};
    return {x0, y0, x1 - x0, y1 - y0, true};
}

inline double normalize_angle(double deg) {
    double a = std::fmod(deg, 360.0);
    if (a < 0) a += 360.0;
    if (a >= 360.0) a = 0.0;
    return a;
}

}  // namespace detail

// Assembles validated GoPs from sorted track records. Missing orientation is
// derived from the per-object displacement direction when the object moved at
// least one pixel, otherwise carried over, otherwise zero. Trailing frames
// that do not fill a whole GoP are dropped.
inline std::vector<GopStream> build_oar_sequence(std::span<const TrackRecord> records,
                                                 const ForegroundMask& mask, int gop_length,
                                                 int width, int height) {
    if (gop_length < 2) throw IngestError("gop_length must be >= 2");
    if (width <= 0 || height <= 0) throw IngestError("canvas must be positive");

    std::map<int, std::vector<TrackRecord>> by_frame;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const TrackRecord& rec = records[i];
        if (rec.frame < 1) throw IngestError("frame_index must be >= 1");
        if (rec.id == kBackgroundId) throw IngestError("object id 0 is reserved");
        auto& bucket = by_frame[rec.frame];
        for (const TrackRecord& other : bucket)
            if (other.id == rec.id)
                throw IngestError("duplicate record for frame " + std::to_string(rec.frame) +
                                  " object " + std::to_string(rec.id));
        bucket.push_back(rec);
    }
    if (by_frame.empty()) return {};

    const int first = by_frame.begin()->first;
    const int last = by_frame.rbegin()->first;
    const int total = last - first + 1;
    const int gop_count = total / gop_length;

    // angle derivation state, carried across GoP boundaries (tracks are continuous)
    std::map<ObjectId, std::pair<double, double>> prev_pos;
    std::map<ObjectId, double> prev_angle;

    std::vector<GopStream> gops;
    for (int g = 0; g < gop_count; ++g) {
        GopStream gop;
        gop.width = width;
        gop.height = height;
        gop.gop_length = gop_length;
        for (int t = 0; t < gop_length; ++t) {
            const int abs_frame = first + g * gop_length + t;
            OarFrame frame;
            frame.frame_index = t + 1;
            const auto it = by_frame.find(abs_frame);
            if (it != by_frame.end()) {
                for (const TrackRecord& rec : it->second) {
                    const auto box = detail::clip_box(rec.x, rec.y, rec.w, rec.h, width, height);
                    double angle;
                    if (rec.angle) {
                        angle = detail::normalize_angle(*rec.angle);
                    } else {
                        const auto prev = prev_pos.find(rec.id);
                        if (prev != prev_pos.end()) {
                            const double dx = rec.x - prev->second.first;
                            const double dy = rec.y - prev->second.second;
                            if (std::hypot(dx, dy) >= 1.0) {
                                angle = detail::normalize_angle(static_cast<double>(
                                    round_half_up(detail::normalize_angle(
                                        std::atan2(dy, dx) * 180.0 / kPi))));
                            } else {
                                const auto carried = prev_angle.find(rec.id);
                                angle = carried != prev_angle.end() ? carried->second : 0.0;
                            }
                        } else {
                            angle = 0.0;
                        }
                    }
                    prev_pos[rec.id] = {rec.x, rec.y};
                    prev_angle[rec.id] = angle;
                    if (!box.alive) continue;  // exited the canvas
                    Attributes a;
                    a.x = box.x;
                    a.y = box.y;
                    a.w = box.w;
                    a.h = box.h;
                    a.angle = angle;
                    a.category = category_from_string(rec.category);
                    frame.objects.push_back(rec.id);
                    frame.attributes[rec.id] = a;
                }
            }
            std::sort(frame.objects.begin(), frame.objects.end());
            frame.relations = identify_relations(frame, mask);
            if (const Verdict v = validate_frame(frame, width, height); !v)
                throw IngestError("frame " + std::to_string(abs_frame) + ": " + v.message);
            gop.frames.push_back(std::move(frame));
        }
        gops.push_back(std::move(gop));
    }
    return gops;
}

// ---------------------------------------------------------------------------
// Synthetic scenes: deterministic oracle source for reconstruction tests.
// ---------------------------------------------------------------------------

struct MotionProgram {
    Attributes start;
    double dx = 0.0;            // px/frame
    double dy = 0.0;            // px/frame
    double rotation_rate = 0.0; // deg/frame
    double scale_rate = 1.0;    // multiplicative per frame
    int entry_frame = 1;        // birth frame within the GoP
};

struct SyntheticSceneSpec {
    std::uint64_t seed = 1;
    int object_count = 0;  // used when programs is empty
    std::vector<MotionProgram> programs;
    int width = 512;
    int height = 512;
    int gop_length = 15;
};

struct SyntheticScene {
    GopStream gop;
    std::vector<Image> renders;  // ground-truth raster per frame
};

// Random in-bounds programs: integer rigid translation with a safety margin so
// no object exits the canvas within the GoP.
inline std::vector<MotionProgram> rigid_translation_programs(std::uint64_t seed, int object_count,
                                                             int width, int height,
                                                             int gop_length) {
    Rng rng(seed * 0x9e3779b97f4a7c15ull + 0x5ca1ab1eull);
    std::vector<MotionProgram> programs;
    const int t_span = gop_length - 1;
    for (int n = 0; n < object_count; ++n) {
        MotionProgram p;
        p.start.w = static_cast<int>(rng.next_int(width / 16 + 2, width / 6 + 2));
        p.start.h = static_cast<int>(rng.next_int(height / 16 + 2, height / 6 + 2));
        const int max_v = 3;
        p.dx = static_cast<double>(rng.next_int(-max_v, max_v));
        p.dy = static_cast<double>(rng.next_int(-max_v, max_v));
        const int margin_x = max_v * t_span;
        const int margin_y = max_v * t_span;
        p.start.x = static_cast<int>(
            rng.next_int(margin_x, std::max(margin_x, width - p.start.w - margin_x)));
        p.start.y = static_cast<int>(
            rng.next_int(margin_y, std::max(margin_y, height - p.start.h - margin_y)));
        p.start.angle = 0.0;
        p.start.category = static_cast<Category>(rng.next_int(0, 3));
        programs.push_back(p);
    }
    return programs;
}

inline SyntheticScene generate_synthetic(const SyntheticSceneSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0 || spec.gop_length < 2)
        throw IngestError("invalid synthetic scene spec");
    std::vector<MotionProgram> programs = spec.programs;
    if (programs.empty() && spec.object_count > 0)
        programs = rigid_translation_programs(spec.seed, spec.object_count, spec.width,
                                              spec.height, spec.gop_length);

    SyntheticScene scene;
    scene.gop.width = spec.width;
    scene.gop.height = spec.height;
    scene.gop.gop_length = spec.gop_length;

    std::vector<bool> dead(programs.size(), false);
    for (int t = 1; t <= spec.gop_length; ++t) {
        OarFrame frame;
        frame.frame_index = t;
        for (std::size_t n = 0; n < programs.size(); ++n) {
            const MotionProgram& p = programs[n];
            if (dead[n] || t < p.entry_frame) continue;
            const int age = t - p.entry_frame;
            const double scale = std::pow(p.scale_rate, age);
            const double w = p.start.w * scale;
            const double h = p.start.h * scale;
            const double x = p.start.x + p.dx * age;
            const double y = p.start.y + p.dy * age;
            const auto box = detail::clip_box(x, y, w, h, spec.width, spec.height);
            if (!box.alive) {
                dead[n] = true;  // exited: removed from this frame onward
                continue;
            }
            Attributes a;
            a.x = box.x;
            a.y = box.y;
            a.w = box.w;
            a.h = box.h;
            a.angle = detail::normalize_angle(p.start.angle + p.rotation_rate * age);
            a.category = p.start.category;
            const ObjectId id = static_cast<ObjectId>(n + 1);
            frame.objects.push_back(id);
            frame.attributes[id] = a;
        }
        frame.relations = identify_relations(frame, ForegroundMask{});
        scene.renders.push_back(render_frame(frame, spec.width, spec.height));
        scene.gop.frames.push_back(std::move(frame));
    }
    scene.gop.reference_payload = ppm_bytes(scene.renders.front());
    return scene;
}

// OAR sequences as jsonl, one frame per line. Used by the extract and decode
// CLI paths.
inline void write_oar_jsonl(std::ostream& out, std::span<const GopStream> gops) {
    int gop_index = 0;
    for (const GopStream& gop : gops) {
        ++gop_index;
        for (const OarFrame& frame : gop.frames) {
            nlohmann::json j;
            j["gop"] = gop_index;
            j["frame"] = frame.frame_index;
            j["width"] = gop.width;
            j["height"] = gop.height;
            auto objects = nlohmann::json::array();
            for (const ObjectId id : frame.objects) {
                const Attributes& a = frame.attributes.at(id);
                objects.push_back({{"id", id},
                                   {"x", a.x},
                                   {"y", a.y},
                                   {"w", a.w},
                                   {"h", a.h},
                                   {"angle", a.angle},
                                   {"cat", std::string(to_string(a.category))}});
            }
            j["objects"] = std::move(objects);
            auto relations = nlohmann::json::array();
            for (const Relation& r : frame.relations)
                relations.push_back({{"s", r.subject},
                                     {"o", r.object},
                                     {"label", std::string(to_string(r.label))}});
            j["relations"] = std::move(relations);
            out << j.dump() << "\n";
        }
    }
}

}  // namespace oarvc

#endif  // OARVC_INGEST_HPP
