#ifndef OARVC_RECONSTRUCT_HPP
#define OARVC_RECONSTRUCT_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "oarvc/image.hpp"
#include "oarvc/oar.hpp"
#include "oarvc/render.hpp"
#include "oarvc/tensor.hpp"

namespace oarvc {

// Backward displacement field: warp samples the previous frame at
// (x + dx, y + dy).
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<float> dx, dy;

    FlowField() = default;
    FlowField(int w, int h)
        : width(w), height(h), dx(static_cast<std::size_t>(w) * h, 0.0f),
          dy(static_cast<std::size_t>(w) * h, 0.0f) {}

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

// Per-pixel convex weight between the synthesis and deformation branches.
struct FusionMask {
    int width = 0;
    int height = 0;
    std::vector<float> w;

    FusionMask() = default;
    FusionMask(int width_, int height_, float value = 0.0f)
        : width(width_), height(height_),
          w(static_cast<std::size_t>(width_) * height_, value) {}

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

namespace detail {

// Backward affine map from current-frame pixel coordinates into previous-frame
// coordinates: translate by the bbox centers, scale by the size ratio, rotate
// by the angle difference about the center.
struct BackwardAffine {
    double cx_curr, cy_curr, cx_prev, cy_prev;
    double m00, m01, m10, m11;

    static BackwardAffine between(const Attributes& prev, const Attributes& curr) {
        BackwardAffine map{};
        map.cx_curr = curr.center_x();
        map.cy_curr = curr.center_y();
        map.cx_prev = prev.center_x();
        map.cy_prev = prev.center_y();
        const double sx = static_cast<double>(prev.w) / curr.w;
        const double sy = static_cast<double>(prev.h) / curr.h;
        const double rot = deg_to_rad(prev.angle) - deg_to_rad(curr.angle);
        const double c = std::cos(rot);
        const double s = std::sin(rot);
        // R(theta_prev - theta_curr) * diag(sx, sy)
        map.m00 = c * sx;
        map.m01 = -s * sy;
        map.m10 = s * sx;
        map.m11 = c * sy;
        return map;
    }

    void apply(double x, double y, double& out_x, double& out_y) const {
        const double px = x - cx_curr;
        const double py = y - cy_curr;
        out_x = cx_prev + m00 * px + m01 * py;
        out_y = cy_prev + m10 * px + m11 * py;
    }
};

// Per-pixel id of the front-most covering object (0 where uncovered), painted
// back-to-front with the occlusion depth rule.
inline std::vector<ObjectId> coverage_map(const OarFrame& frame, int width, int height) {
    std::vector<ObjectId> cover(static_cast<std::size_t>(width) * height, kBackgroundId);
    for (const ObjectId id : depth_order_back_to_front(frame)) {
        const Attributes& a = frame.attributes.at(id);
        const int x1 = std::min(a.right(), width);
        const int y1 = std::min(a.bottom(), height);
        for (int y = a.y; y < y1; ++y)
            for (int x = a.x; x < x1; ++x) cover[static_cast<std::size_t>(y) * width + x] = id;
    }
    return cover;
}

}  // namespace detail

// Closed-form optical flow from OAR motion. Inside the current bbox of every
// object present in both frames, the flow is the backward affine map into the
// previous frame; overlaps take the front-most object; births and uncovered
// pixels stay at zero.
inline FlowField flow_from_oar(const OarFrame& prev, const OarFrame& curr, int width,
                               int height) {
    FlowField flow(width, height);
    for (const ObjectId id : depth_order_back_to_front(curr)) {
        const Attributes& ca = curr.attributes.at(id);
        const int x1 = std::min(ca.right(), width);
        const int y1 = std::min(ca.bottom(), height);
        if (!prev.has_object(id)) {
            for (int y = ca.y; y < y1; ++y)
                for (int x = ca.x; x < x1; ++x) {
                    flow.dx[flow.index(x, y)] = 0.0f;
                    flow.dy[flow.index(x, y)] = 0.0f;
                }
            continue;
        }
        const auto map = detail::BackwardAffine::between(prev.attributes.at(id), ca);
        for (int y = ca.y; y < y1; ++y) {
            for (int x = ca.x; x < x1; ++x) {
                double px, py;
                map.apply(x, y, px, py);
                flow.dx[flow.index(x, y)] = static_cast<float>(px - x);
                flow.dy[flow.index(x, y)] = static_cast<float>(py - y);
            }
        }
    }
    return flow;
}

// Bilinear backward sampling with edge clamp. Integer displacements reduce to
// exact pixel copies.
inline Image warp(const Image& image, const FlowField& flow) {
    if (image.width != flow.width || image.height != flow.height)
        throw std::invalid_argument("warp: image and flow dimensions differ");
    Image out(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const std::size_t i = flow.index(x, y);
            double sx = x + static_cast<double>(flow.dx[i]);
            double sy = y + static_cast<double>(flow.dy[i]);
            sx = std::clamp(sx, 0.0, static_cast<double>(image.width - 1));
            sy = std::clamp(sy, 0.0, static_cast<double>(image.height - 1));
            const int x0 = static_cast<int>(sx);
            const int y0 = static_cast<int>(sy);
            const int x1 = std::min(x0 + 1, image.width - 1);
            const int y1 = std::min(y0 + 1, image.height - 1);
            const double fx = sx - x0;
            const double fy = sy - y0;
            const std::uint8_t* p00 = image.pixel(x0, y0);
            const std::uint8_t* p10 = image.pixel(x1, y0);
            const std::uint8_t* p01 = image.pixel(x0, y1);
            const std::uint8_t* p11 = image.pixel(x1, y1);
            std::uint8_t* dst = out.pixel(x, y);
            for (int ch = 0; ch < 3; ++ch) {
                const double v = (1 - fy) * ((1 - fx) * p00[ch] + fx * p10[ch]) +
                                 fy * ((1 - fx) * p01[ch] + fx * p11[ch]);
                dst[ch] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
            }
        }
    }
    return out;
}

// Reference frame with all foreground boxes inpainted by row-neighbor fill:
// covered pixels copy the nearest uncovered pixel on their row (left first),
// fully covered rows copy the row above.
inline Image background_plate(const Image& reference, const OarFrame& reference_oar) {
    Image plate = reference;
    const auto cover = detail::coverage_map(reference_oar, plate.width, plate.height);
    for (int y = 0; y < plate.height; ++y) {
        int last_clear = -1;
        for (int x = 0; x < plate.width; ++x) {
            if (cover[static_cast<std::size_t>(y) * plate.width + x] == kBackgroundId) {
                last_clear = x;
                continue;
            }
            int src_x = last_clear;
            if (src_x < 0) {
                // look right
                for (int r = x + 1; r < plate.width; ++r) {
                    if (cover[static_cast<std::size_t>(y) * plate.width + r] == kBackgroundId) {
                        src_x = r;
                        break;
                    }
                }
            }
            std::uint8_t* dst = plate.pixel(x, y);
            if (src_x >= 0) {
                const std::uint8_t* src = plate.pixel(src_x, y);
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
            } else if (y > 0) {
                const std::uint8_t* src = plate.pixel(x, y - 1);
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
            } else {
                dst[0] = dst[1] = dst[2] = 128;
            }
        }
    }
    return plate;
}

// Synthesis branch: background plate, then objects back to front. Objects
// known from the reference frame re-project their reference crop into the
// current bbox; newcomers get the category sprite. The layout, when given,
// only pins the expected canvas shape.
inline Image synthesize(const Tensor3* layout, const OarFrame& frame, const Image& reference,
                        const OarFrame& reference_oar, const Image& background) {
    if (layout && (layout->height != background.height || layout->width != background.width))
        throw std::invalid_argument("synthesize: layout dimensions differ from canvas");
    Image out = background;
    for (const ObjectId id : depth_order_back_to_front(frame)) {
        const Attributes& ca = frame.attributes.at(id);
        if (!reference_oar.has_object(id)) {
            paint_sprite(out, id, ca);
            continue;
        }
        const Attributes& ra = reference_oar.attributes.at(id);
        const auto map = detail::BackwardAffine::between(ra, ca);
        const int x1 = std::min(ca.right(), out.width);
        const int y1 = std::min(ca.bottom(), out.height);
        for (int y = ca.y; y < y1; ++y) {
            for (int x = ca.x; x < x1; ++x) {
                double sx, sy;
                map.apply(x, y, sx, sy);
                // clamp into the reference bbox, then into the canvas
                sx = std::clamp(sx, static_cast<double>(ra.x),
                                static_cast<double>(ra.right() - 1));
                sy = std::clamp(sy, static_cast<double>(ra.y),
                                static_cast<double>(ra.bottom() - 1));
                sx = std::clamp(sx, 0.0, static_cast<double>(reference.width - 1));
                sy = std::clamp(sy, 0.0, static_cast<double>(reference.height - 1));
                const int x0 = static_cast<int>(sx);
                const int y0 = static_cast<int>(sy);
                const int xb = std::min(x0 + 1, reference.width - 1);
                const int yb = std::min(y0 + 1, reference.height - 1);
                const double fx = sx - x0;
                const double fy = sy - y0;
                std::uint8_t* dst = out.pixel(x, y);
                for (int ch = 0; ch < 3; ++ch) {
                    const double v =
                        (1 - fy) * ((1 - fx) * reference.pixel(x0, y0)[ch] +
                                    fx * reference.pixel(xb, y0)[ch]) +
                        fy * ((1 - fx) * reference.pixel(x0, yb)[ch] +
                              fx * reference.pixel(xb, yb)[ch]);
                    dst[ch] =
                        static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
                }
            }
        }
    }
    return out;
}

// Pixelwise convex combination out = w * synth + (1 - w) * warped, rounded
// half up to 8 bits.
inline Image fuse(const Image& synth, const Image& warped, const FusionMask& mask) {
    if (synth.width != warped.width || synth.height != warped.height ||
        synth.width != mask.width || synth.height != mask.height)
        throw std::invalid_argument("fuse: dimension mismatch");
    Image out(synth.width, synth.height);
    for (int y = 0; y < synth.height; ++y) {
        for (int x = 0; x < synth.width; ++x) {
            const double w = mask.w[mask.index(x, y)];
            const std::uint8_t* a = synth.pixel(x, y);
            const std::uint8_t* b = warped.pixel(x, y);
            std::uint8_t* dst = out.pixel(x, y);
            for (int ch = 0; ch < 3; ++ch) {
                const double v = w * a[ch] + (1.0 - w) * b[ch];
                dst[ch] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
            }
        }
    }
    return out;
}

// Mask = 1 where the deformation branch has no valid backward correspondence:
// birth pixels, pixels whose source was occluded by another object in the
// previous frame, and disoccluded background.
inline FusionMask birth_disocclusion_mask(const OarFrame& prev, const OarFrame& curr, int width,
                                          int height) {
    FusionMask mask(width, height, 0.0f);
    const auto prev_cover = detail::coverage_map(prev, width, height);
    const auto curr_cover = detail::coverage_map(curr, width, height);
    std::map<ObjectId, detail::BackwardAffine> maps;
    for (const ObjectId id : curr.objects)
        if (prev.has_object(id))
            maps.emplace(id, detail::BackwardAffine::between(prev.attributes.at(id),
                                                             curr.attributes.at(id)));
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            const ObjectId front = curr_cover[i];
            if (front == kBackgroundId) {
                if (prev_cover[i] != kBackgroundId) mask.w[i] = 1.0f;  // disocclusion
                continue;
            }
            const auto it = maps.find(front);
            if (it == maps.end()) {
                mask.w[i] = 1.0f;  // birth
                continue;
            }
            double sx, sy;
            it->second.apply(x, y, sx, sy);
            const int px = std::clamp(static_cast<int>(std::floor(sx + 0.5)), 0, width - 1);
            const int py = std::clamp(static_cast<int>(std::floor(sy + 0.5)), 0, height - 1);
            if (prev_cover[static_cast<std::size_t>(py) * width + px] != front)
                mask.w[i] = 1.0f;  // source pixel was occluded a frame ago
        }
    }
    return mask;
}

// Optional per-frame layouts for the synthesis branch (computed by the caller
// from the semantic graph when wanted).
using LayoutSequence = std::vector<Tensor3>;

inline std::vector<Image> reconstruct_gop(const GopStream& gop, const Image& reference,
                                          const LayoutSequence* layouts = nullptr) {
    if (reference.width != gop.width || reference.height != gop.height)
        throw std::invalid_argument("reconstruct_gop: reference dimensions differ from header");
    if (gop.frames.empty()) throw std::invalid_argument("reconstruct_gop: empty GoP");
    std::vector<Image> frames;
    frames.reserve(gop.frames.size());
    frames.push_back(reference);
    const Image plate = background_plate(reference, gop.frames.front());
    for (std::size_t t = 1; t < gop.frames.size(); ++t) {
        const OarFrame& prev = gop.frames[t - 1];
        const OarFrame& curr = gop.frames[t];
        const FlowField flow = flow_from_oar(prev, curr, gop.width, gop.height);
        const Image warped = warp(frames.back(), flow);
        const Tensor3* layout = layouts && t < layouts->size() ? &(*layouts)[t] : nullptr;
        const Image synth = synthesize(layout, curr, reference, gop.frames.front(), plate);
        const FusionMask mask = birth_disocclusion_mask(prev, curr, gop.width, gop.height);
        frames.push_back(fuse(synth, warped, mask));
    }
    return frames;
}

}  // namespace oarvc

#endif  // OARVC_RECONSTRUCT_HPP
