#ifndef OARVC_OAR_HPP
#define OARVC_OAR_HPP

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace oarvc {

using ObjectId = std::uint32_t;

// Object id 0 is reserved for the background in every frame, so relations
// against the background have a well-typed endpoint.
inline constexpr ObjectId kBackgroundId = 0;

enum class Category : std::uint8_t { kCar = 0, kBus, kVan, kOthers, kBackground };
inline constexpr int kCategoryCount = 5;

enum class RelationLabel : std::uint8_t { kOcclusion = 0, kIn, kNull };
inline constexpr int kRelationLabelCount = 3;

inline std::string_view to_string(Category c) {
    switch (c) {
        case Category::kCar: return "car";
        case Category::kBus: return "bus";
        case Category::kVan: return "van";
        case Category::kOthers: return "others";
        case Category::kBackground: return "background";
    }
    return "others";
}

// Unknown labels fall back to "others"; matching is case-sensitive on the
// canonical lower-case vocabulary.
inline Category category_from_string(std::string_view s) {
    if (s == "car") return Category::kCar;
    if (s == "bus") return Category::kBus;
    if (s == "van") return Category::kVan;
    if (s == "background") return Category::kBackground;
    return Category::kOthers;
}

inline std::string_view to_string(RelationLabel r) {
    switch (r) {
        case RelationLabel::kOcclusion: return "occlusion";
        case RelationLabel::kIn: return "in";
        case RelationLabel::kNull: return "null";
    }
    return "null";
}

inline RelationLabel relation_label_from_string(std::string_view s) {
    if (s == "occlusion") return RelationLabel::kOcclusion;
    if (s == "in") return RelationLabel::kIn;
    return RelationLabel::kNull;
}

// Per-object attributes: top-left position, size, orientation in degrees and
// category. Coordinates live on the integer pixel grid.
struct Attributes {
    int x = 0;
    int y = 0;
    int w = 1;
    int h = 1;
    double angle = 0.0;  // [0, 360)
    Category category = Category::kCar;

    double center_x() const { return x + 0.5 * w; }
    double center_y() const { return y + 0.5 * h; }
    int right() const { return x + w; }
    int bottom() const { return y + h; }

    friend bool operator==(const Attributes&, const Attributes&) = default;
};

struct Relation {
    ObjectId subject = kBackgroundId;
    ObjectId object = kBackgroundId;
    RelationLabel label = RelationLabel::kNull;

    friend auto operator<=>(const Relation&, const Relation&) = default;
};

// One frame's OAR tuple. `objects` is kept in ascending-id order by every
// producer in this library; `relations` is a sorted, duplicate-free set.
struct OarFrame {
    int frame_index = 1;  // 1-based within the GoP
    std::vector<ObjectId> objects;
    std::map<ObjectId, Attributes> attributes;
    std::vector<Relation> relations;

    bool has_object(ObjectId id) const { return attributes.count(id) != 0; }

    friend bool operator==(const OarFrame&, const OarFrame&) = default;
};

inline void canonicalize_relations(std::vector<Relation>& relations) {
    std::sort(relations.begin(), relations.end());
    relations.erase(std::unique(relations.begin(), relations.end()), relations.end());
}

// Group-of-pictures: T frames sharing one intra-coded reference frame whose
// coded bytes travel out of band in `reference_payload`.
struct GopStream {
    int width = 0;
    int height = 0;
    int gop_length = 0;
    std::vector<OarFrame> frames;
    std::vector<std::uint8_t> reference_payload;

    friend bool operator==(const GopStream&, const GopStream&) = default;
};

struct Verdict {
    bool ok = true;
    std::string message;

    explicit operator bool() const { return ok; }
};

// Depth ordering used for occlusion: the object whose bbox bottom edge sits
// lower in the image is in front; ties go to the smaller id.
inline bool is_in_front(ObjectId id_a, const Attributes& a, ObjectId id_b, const Attributes& b) {
    if (a.bottom() != b.bottom()) return a.bottom() > b.bottom();
    return id_a < id_b;
}

inline long long intersection_area(const Attributes& a, const Attributes& b) {
    const long long iw =
        std::min<long long>(a.right(), b.right()) - std::max<long long>(a.x, b.x);
    const long long ih =
        std::min<long long>(a.bottom(), b.bottom()) - std::max<long long>(a.y, b.y);
    if (iw <= 0 || ih <= 0) return 0;
    return iw * ih;
}

inline Verdict validate_frame(const OarFrame& frame, int width, int height) {
    if (frame.frame_index < 1) return {false, "frame_index must be >= 1"};
    std::vector<ObjectId> seen;
    for (const ObjectId id : frame.objects) {
        if (id == kBackgroundId)
            return {false, "object " + std::to_string(id) + ": background id reserved"};
        if (std::find(seen.begin(), seen.end(), id) != seen.end())
            return {false, "object " + std::to_string(id) + ": duplicate id"};
        seen.push_back(id);
        const auto it = frame.attributes.find(id);
        if (it == frame.attributes.end())
            return {false, "object " + std::to_string(id) + ": missing attributes"};
        const Attributes& a = it->second;
        const std::string who = "object " + std::to_string(id) + ": ";
        if (a.x < 0) return {false, who + "x is negative"};
        if (a.x > width) return {false, who + "x exceeds W"};
        if (a.y < 0) return {false, who + "y is negative"};
        if (a.y > height) return {false, who + "y exceeds H"};
        if (a.w <= 0) return {false, who + "w must be positive"};
        if (a.w > width) return {false, who + "w exceeds W"};
        if (a.h <= 0) return {false, who + "h must be positive"};
        if (a.h > height) return {false, who + "h exceeds H"};
        if (a.angle < 0.0 || a.angle >= 360.0) return {false, who + "angle outside [0,360)"};
        if (a.category == Category::kBackground)
            return {false, who + "category background reserved for the sentinel"};
        // bbox must intersect the frame
        if (a.x >= width || a.y >= height) return {false, who + "bbox outside frame"};
    }
    if (frame.attributes.size() != frame.objects.size())
        return {false, "attributes must have exactly one entry per object"};
    for (const Relation& r : frame.relations) {
        if (r.subject == r.object)
            return {false, "relation " + std::to_string(r.subject) + "->" +
                               std::to_string(r.object) + ": subject equals object"};
        for (const ObjectId endpoint : {r.subject, r.object}) {
            if (endpoint != kBackgroundId && !frame.has_object(endpoint))
                return {false, "relation " + std::to_string(r.subject) + "->" +
                                   std::to_string(r.object) + ": dangling relation endpoint " +
                                   std::to_string(endpoint)};
        }
    }
    return {};
}

}  // namespace oarvc

#endif  // OARVC_OAR_HPP
