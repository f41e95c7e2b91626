#ifndef OARVC_METRICS_HPP
#define OARVC_METRICS_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "oarvc/image.hpp"
#include "oarvc/oar.hpp"

namespace oarvc {

struct BoxRegion {
    int x = 0, y = 0, w = 0, h = 0;
};

namespace detail {

inline std::vector<std::uint8_t> region_mask(int width, int height,
                                             std::span<const BoxRegion> boxes) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(width) * height, boxes.empty() ? 1 : 0);
    for (const BoxRegion& b : boxes) {
        const int x1 = std::min(b.x + b.w, width);
        const int y1 = std::min(b.y + b.h, height);
        for (int y = std::max(0, b.y); y < y1; ++y)
            for (int x = std::max(0, b.x); x < x1; ++x)
                mask[static_cast<std::size_t>(y) * width + x] = 1;
    }
    return mask;
}

}  // namespace detail

// PSNR in dB over 8-bit channels; +inf for identical inputs. An optional box
// set restricts the evaluation region (e.g. foreground only).
inline double metric_psnr(const Image& a, const Image& b,
                          std::span<const BoxRegion> region = {}) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("psnr: dimension mismatch");
    const auto mask = detail::region_mask(a.width, a.height, region);
    double sse = 0.0;
    std::uint64_t count = 0;
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            if (!mask[static_cast<std::size_t>(y) * a.width + x]) continue;
            const std::uint8_t* pa = a.pixel(x, y);
            const std::uint8_t* pb = b.pixel(x, y);
            for (int ch = 0; ch < 3; ++ch) {
                const double d = static_cast<double>(pa[ch]) - pb[ch];
                sse += d * d;
            }
            count += 3;
        }
    }
    if (count == 0) throw std::invalid_argument("psnr: empty evaluation region");
    const double mse = sse / static_cast<double>(count);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

// SSIM with the standard 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
// K2 = 0.03, averaged over channels. Windows are clipped at borders and
// renormalized.
inline double metric_ssim(const Image& a, const Image& b,
                          std::span<const BoxRegion> region = {}) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("ssim: dimension mismatch");
    constexpr int kRadius = 5;
    constexpr double kSigma = 1.5;
    constexpr double kC1 = (0.01 * 255) * (0.01 * 255);
    constexpr double kC2 = (0.03 * 255) * (0.03 * 255);
    double kernel[2 * kRadius + 1];
    double ksum = 0;
    for (int i = -kRadius; i <= kRadius; ++i) {
        kernel[i + kRadius] = std::exp(-0.5 * (i * i) / (kSigma * kSigma));
        ksum += kernel[i + kRadius];
    }
    for (double& k : kernel) k /= ksum;

    const auto mask = detail::region_mask(a.width, a.height, region);
    const int w = a.width;
    const int h = a.height;
    const std::size_t plane = static_cast<std::size_t>(w) * h;

    // separable pass helper over double planes
    std::vector<double> tmp(plane);
    auto blur = [&](std::vector<double>& img) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0, norm = 0;
                for (int dx = -kRadius; dx <= kRadius; ++dx) {
                    const int sx = x + dx;
                    if (sx < 0 || sx >= w) continue;
                    acc += kernel[dx + kRadius] * img[static_cast<std::size_t>(y) * w + sx];
                    norm += kernel[dx + kRadius];
                }
                tmp[static_cast<std::size_t>(y) * w + x] = acc / norm;
            }
        }
        for (int x = 0; x < w; ++x) {
            for (int y = 0; y < h; ++y) {
                double acc = 0, norm = 0;
                for (int dy = -kRadius; dy <= kRadius; ++dy) {
                    const int sy = y + dy;
                    if (sy < 0 || sy >= h) continue;
                    acc += kernel[dy + kRadius] * tmp[static_cast<std::size_t>(sy) * w + x];
                    norm += kernel[dy + kRadius];
                }
                img[static_cast<std::size_t>(y) * w + x] = acc / norm;
            }
        }
    };

    double total = 0;
    for (int ch = 0; ch < 3; ++ch) {
        std::vector<double> ia(plane), ib(plane), iaa(plane), ibb(plane), iab(plane);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                const double va = a.pixel(x, y)[ch];
                const double vb = b.pixel(x, y)[ch];
                ia[i] = va;
                ib[i] = vb;
                iaa[i] = va * va;
                ibb[i] = vb * vb;
                iab[i] = va * vb;
            }
        }
        blur(ia);
        blur(ib);
        blur(iaa);
        blur(ibb);
        blur(iab);
        double sum = 0;
        std::uint64_t count = 0;
        for (std::size_t i = 0; i < plane; ++i) {
            if (!mask[i]) continue;
            const double mu_a = ia[i];
            const double mu_b = ib[i];
            const double var_a = iaa[i] - mu_a * mu_a;
            const double var_b = ibb[i] - mu_b * mu_b;
            const double cov = iab[i] - mu_a * mu_b;
            const double ssim = ((2 * mu_a * mu_b + kC1) * (2 * cov + kC2)) /
                                ((mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2));
            sum += ssim;
            ++count;
        }
        if (count == 0) throw std::invalid_argument("ssim: empty evaluation region");
        total += sum / static_cast<double>(count);
    }
    return total / 3.0;
}

// Semantic-level distortion between the sent and received OAR sequences over
// id-matched objects. A lost GoP scores zero across the board.
struct OarFidelity {
    double box_iou = 0.0;
    double category_accuracy = 0.0;
    double angle_mae_deg = 0.0;
    double relation_f1 = 0.0;
};

namespace detail {

inline double box_iou(const Attributes& a, const Attributes& b) {
    const long long inter = intersection_area(a, b);
    const long long uni =
        static_cast<long long>(a.w) * a.h + static_cast<long long>(b.w) * b.h - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

inline double circular_angle_diff(double a, double b) {
    double d = std::fabs(a - b);
    d = std::fmod(d, 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

}  // namespace detail

inline OarFidelity metric_oar_fidelity(const GopStream& sent,
                                       const std::optional<GopStream>& received) {
    if (!received) return {};
    OarFidelity out;
    double iou_sum = 0, angle_sum = 0;
    std::uint64_t matched = 0, objects = 0, category_hits = 0;
    double f1_sum = 0;
    std::uint64_t frames = 0;
    const std::size_t common =
        std::min(sent.frames.size(), received->frames.size());
    for (std::size_t t = 0; t < common; ++t) {
        const OarFrame& s = sent.frames[t];
        const OarFrame& r = received->frames[t];
        for (const ObjectId id : s.objects) {
            ++objects;
            if (!r.has_object(id)) continue;
            ++matched;
            const Attributes& sa = s.attributes.at(id);
            const Attributes& ra = r.attributes.at(id);
            iou_sum += detail::box_iou(sa, ra);
            angle_sum += detail::circular_angle_diff(sa.angle, ra.angle);
            if (sa.category == ra.category) ++category_hits;
        }
        std::vector<Relation> sr = s.relations, rr = r.relations;
        canonicalize_relations(sr);
        canonicalize_relations(rr);
        std::vector<Relation> inter;
        std::set_intersection(sr.begin(), sr.end(), rr.begin(), rr.end(),
                              std::back_inserter(inter));
        const std::size_t denom = sr.size() + rr.size();
        f1_sum += denom == 0 ? 1.0 : 2.0 * static_cast<double>(inter.size()) / denom;
        ++frames;
    }
    out.box_iou = objects == 0 ? 1.0 : iou_sum / static_cast<double>(objects);
    out.category_accuracy = objects == 0 ? 1.0
                                         : static_cast<double>(category_hits) /
                                               static_cast<double>(objects);
    out.angle_mae_deg = matched == 0 ? 0.0 : angle_sum / static_cast<double>(matched);
    out.relation_f1 = frames == 0 ? 1.0 : f1_sum / static_cast<double>(frames);
    return out;
}

inline std::vector<BoxRegion> foreground_boxes(const OarFrame& frame) {
    std::vector<BoxRegion> boxes;
    for (const ObjectId id : frame.objects) {
        const Attributes& a = frame.attributes.at(id);
        boxes.push_back({a.x, a.y, a.w, a.h});
    }
    return boxes;
}

}  // namespace oarvc

#endif  // OARVC_METRICS_HPP
