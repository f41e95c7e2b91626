#ifndef OARVC_TESTS_SUPPORT_RANDOM_GOP_HPP
#define OARVC_TESTS_SUPPORT_RANDOM_GOP_HPP

#include <algorithm>
#include <cmath>

#include "oarvc/oar.hpp"
#include "oarvc/rng.hpp"

namespace oarvc::testsupport {

// Seeded generator of valid GoPs with churn: births, deaths, motion, angle
// drift and arbitrary (valid) relation sets, in scrambled input order to
// exercise canonicalization.
inline GopStream random_gop(std::uint64_t seed) {
    Rng rng(seed);
    GopStream gop;
    gop.width = static_cast<int>(rng.next_int(32, 1024));
    gop.height = static_cast<int>(rng.next_int(32, 1024));
    gop.gop_length = static_cast<int>(rng.next_int(2, 8));

    std::map<ObjectId, Attributes> population;
    const int initial = static_cast<int>(rng.next_int(0, 6));
    ObjectId next_id = 1;
    auto random_attrs = [&]() {
        Attributes a;
        a.w = static_cast<int>(rng.next_int(1, std::min(gop.width, 120)));
        a.h = static_cast<int>(rng.next_int(1, std::min(gop.height, 120)));
        a.x = static_cast<int>(rng.next_int(0, gop.width - 1));
        a.y = static_cast<int>(rng.next_int(0, gop.height - 1));
        a.angle = rng.next_uniform(0.0, 360.0);
        a.category = static_cast<Category>(rng.next_int(0, 3));
        return a;
    };
    for (int i = 0; i < initial; ++i) population[next_id++] = random_attrs();

    for (int t = 1; t <= gop.gop_length; ++t) {
        if (!population.empty() && rng.next_double() < 0.3) {
            auto it = population.begin();
            std::advance(it, rng.next_int(0, static_cast<std::int64_t>(population.size()) - 1));
            population.erase(it);
        }
        if (rng.next_double() < 0.4) population[next_id++] = random_attrs();
        for (auto& [id, a] : population) {
            a.x = std::clamp(a.x + static_cast<int>(rng.next_int(-5, 5)), 0, gop.width - 1);
            a.y = std::clamp(a.y + static_cast<int>(rng.next_int(-5, 5)), 0, gop.height - 1);
            a.w = std::clamp(a.w + static_cast<int>(rng.next_int(-2, 2)), 1, gop.width);
            a.h = std::clamp(a.h + static_cast<int>(rng.next_int(-2, 2)), 1, gop.height);
            a.angle = std::fmod(a.angle + rng.next_uniform(-30.0, 390.0), 360.0);
            if (a.angle < 0) a.angle += 360.0;
        }

        OarFrame frame;
        frame.frame_index = t;
        for (const auto& [id, a] : population) {
            frame.objects.push_back(id);
            frame.attributes[id] = a;
        }
        for (std::size_t i = frame.objects.size(); i > 1; --i)
            std::swap(frame.objects[i - 1],
                      frame.objects[static_cast<std::size_t>(rng.next_int(0, i - 1))]);
        const auto& ids = frame.objects;
        const int rel_count = static_cast<int>(rng.next_int(0, 6));
        for (int r = 0; r < rel_count && !ids.empty(); ++r) {
            const ObjectId s =
                rng.next_double() < 0.2
                    ? kBackgroundId
                    : ids[rng.next_int(0, static_cast<std::int64_t>(ids.size()) - 1)];
            const ObjectId o =
                rng.next_double() < 0.5
                    ? kBackgroundId
                    : ids[rng.next_int(0, static_cast<std::int64_t>(ids.size()) - 1)];
            if (s == o) continue;
            frame.relations.push_back(
                {s, o, static_cast<RelationLabel>(rng.next_int(0, kRelationLabelCount - 1))});
        }
        gop.frames.push_back(std::move(frame));
    }
    return gop;
}

}  // namespace oarvc::testsupport

#endif  // OARVC_TESTS_SUPPORT_RANDOM_GOP_HPP
