#ifndef OARVC_RENDER_HPP
#define OARVC_RENDER_HPP

#include <algorithm>
#include <array>
#include <cmath>

#include "oarvc/image.hpp"
#include "oarvc/oar.hpp"

namespace oarvc {

// Shared sprite painter. The synthetic scene generator and the synthesis
// branch of the reconstructor paint with the same routine so that generated
// OAR and generated pixels agree by construction.

inline constexpr std::array<std::uint8_t, 3> kBackgroundColor = {96, 96, 96};

inline std::array<std::uint8_t, 3> category_color(Category c) {
    switch (c) {
        case Category::kCar: return {200, 48, 48};
        case Category::kBus: return {48, 96, 208};
        case Category::kVan: return {48, 176, 96};
        case Category::kOthers: return {192, 168, 64};
        case Category::kBackground: return kBackgroundColor;
    }
    return kBackgroundColor;
}

inline constexpr double kPi = 3.14159265358979323846;
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

// Paints an oriented box sprite for one object. The body is the bbox-sized
// rectangle rotated by the object angle about the bbox center; the leading
// quarter along the heading is drawn lighter so orientation is visible in
// pixels. Painting is clipped to the canvas.
inline void paint_sprite(Image& img, ObjectId /*id*/, const Attributes& a) {
    const auto body = category_color(a.category);
    std::array<std::uint8_t, 3> nose;
    for (int c = 0; c < 3; ++c)
        nose[c] = static_cast<std::uint8_t>(std::min(255, body[c] + 48));

    const double cx = a.center_x();
    const double cy = a.center_y();
    const double half_w = 0.5 * a.w;
    const double half_h = 0.5 * a.h;
    const double cos_t = std::cos(deg_to_rad(a.angle));
    const double sin_t = std::sin(deg_to_rad(a.angle));

    // Conservative axis-aligned bounds of the rotated box.
    const double reach = std::hypot(half_w, half_h);
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - reach)));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - reach)));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + reach)));

    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double px = x + 0.5 - cx;
            const double py = y + 0.5 - cy;
            // rotate into the sprite frame (inverse rotation)
            const double u = cos_t * px + sin_t * py;
            const double v = -sin_t * px + cos_t * py;
            if (u < -half_w || u > half_w || v < -half_h || v > half_h) continue;
            const auto& color = (u > half_w * 0.5) ? nose : body;
            std::uint8_t* p = img.pixel(x, y);
            p[0] = color[0];
            p[1] = color[1];
            p[2] = color[2];
        }
    }
}

// Back-to-front paint order following the occlusion depth rule, so sprites
// overlap in pixels exactly the way the relations say they do.
inline std::vector<ObjectId> depth_order_back_to_front(const OarFrame& frame) {
    std::vector<ObjectId> order = frame.objects;
    std::sort(order.begin(), order.end(), [&](ObjectId lhs, ObjectId rhs) {
        // back first: lhs before rhs if rhs is in front of lhs
        return is_in_front(rhs, frame.attributes.at(rhs), lhs, frame.attributes.at(lhs));
    });
    return order;
}

inline Image render_frame(const OarFrame& frame, int width, int height) {
    Image img(width, height);
    img.fill(kBackgroundColor[0], kBackgroundColor[1], kBackgroundColor[2]);
    for (const ObjectId id : depth_order_back_to_front(frame))
        paint_sprite(img, id, frame.attributes.at(id));
    return img;
}

}  // namespace oarvc

#endif  // OARVC_RENDER_HPP
