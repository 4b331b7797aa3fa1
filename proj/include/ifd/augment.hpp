#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ifd/common.hpp"
#include "ifd/geometry.hpp"
#include "ifd/image.hpp"
#include "ifd/rng.hpp"
#include "ifd/store.hpp"

namespace ifd {

// Boundary-condition-preserving augmentation: mirror about the vertical axis
// and integer shifts of up to three pixels per direction. A tag means
// flip-first-then-shift. Variants whose nonzero content would leave the
// frame are rejected, which also keeps bottom-resting content from dropping
// below the fixed boundary.

inline std::optional<LabeledDomain> apply_transform(const LabeledDomain& domain,
                                                    const TransformTag& tag) {
    LabeledDomain out;
    for (int r = 0; r < kImageSide; ++r) {
        for (int c = 0; c < kImageSide; ++c) {
            const float v = domain.at(r, c);
            if (v == 0.0f) continue;
            const int src_c = tag.flipped ? (kImageSide - 1 - c) : c;
            const int rr = r + tag.dy;
            const int cc = src_c + tag.dx;
            if (!in_frame(rr, cc)) return std::nullopt;  // content would leave the frame
            out.at(rr, cc) = v;
        }
    }
    return out;
}

inline std::vector<std::pair<LabeledDomain, TransformTag>> augment(const LabeledDomain& domain,
                                                                   std::uint64_t rng_seed,
                                                                   int max_variants) {
    // all 98 candidate tags: flip x dx in [-3,3] x dy in [-3,3]
    std::vector<TransformTag> tags;
    tags.reserve(98);
    for (int f = 0; f <= 1; ++f)
        for (int dx = -3; dx <= 3; ++dx)
            for (int dy = -3; dy <= 3; ++dy) tags.push_back({f == 1, dx, dy});

    Rng rng(rng_seed);
    rng.shuffle(tags.begin(), tags.end());

    std::vector<std::pair<LabeledDomain, TransformTag>> out;
    for (const auto& tag : tags) {
        if (static_cast<int>(out.size()) >= max_variants) break;
        auto img = apply_transform(domain, tag);
        if (!img) continue;
        bool dup = false;
        for (const auto& kept : out)
            if (kept.first == *img) {
                dup = true;
                break;
            }
        if (!dup) out.emplace_back(std::move(*img), tag);
    }
    return out;
}

// Shifts leave every descriptor untouched; mirroring reflects the
// origin-aligned medial axis about the vertical axis.
inline DescriptorSet adjust_descriptors(const DescriptorSet& desc, const TransformTag& tag) {
    DescriptorSet out = desc;
    if (tag.flipped)
        for (auto& p : out.medial_axis) p.x = -p.x;
    return out;
}

}  // namespace ifd
