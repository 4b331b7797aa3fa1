#pragma once

#include <algorithm>
#include <array>
#include <vector>

#include "ifd/common.hpp"
#include "ifd/image.hpp"

namespace ifd {

// Fixed preprocessing pipeline: grayscale -> binarize -> largest component ->
// fill holes -> two-pixel dilated shell labeling -> drop to the bottom edge.
// Connectivity convention: 8-connected component labeling, 4-connected hole
// filling and enclosure checks.

inline BinaryMask binarize(const StructuralBasis& img, float threshold = 0.5f) {
    BinaryMask m;
    for (int i = 0; i < kImagePixels; ++i)
        m.px[static_cast<size_t>(i)] = img.px[static_cast<size_t>(i)] >= threshold;
    return m;
}

// Largest 8-connected foreground component. Ties break toward the component
// whose first pixel comes earliest in raster order.
inline BinaryMask largest_component(const BinaryMask& mask) {
    std::array<int, kImagePixels> label{};
    label.fill(-1);
    int best_label = -1, best_size = 0, n_labels = 0;
    std::vector<int> stack;
    for (int start = 0; start < kImagePixels; ++start) {
        if (!mask.px[static_cast<size_t>(start)] || label[static_cast<size_t>(start)] >= 0)
            continue;
        const int cur = n_labels++;
        int size = 0;
        stack.push_back(start);
        label[static_cast<size_t>(start)] = cur;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            ++size;
            const int r = p / kImageSide, c = p % kImageSide;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const int rr = r + dr, cc = c + dc;
                    if (!in_frame(rr, cc)) continue;
                    const int q = rr * kImageSide + cc;
                    if (mask.px[static_cast<size_t>(q)] && label[static_cast<size_t>(q)] < 0) {
                        label[static_cast<size_t>(q)] = cur;
                        stack.push_back(q);
                    }
                }
            }
        }
        if (size > best_size) {  // strict: first-in-raster-order wins ties
            best_size = size;
            best_label = cur;
        }
    }
    require(best_label >= 0, Errc::empty_mask, "no foreground pixel");
    BinaryMask out;
    for (int i = 0; i < kImagePixels; ++i)
        out.px[static_cast<size_t>(i)] = label[static_cast<size_t>(i)] == best_label;
    return out;
}

// Background pixels not 4-connected to the border through background become
// foreground.
inline BinaryMask fill_holes(const BinaryMask& mask) {
    std::array<bool, kImagePixels> outside{};
    std::vector<int> stack;
    auto push = [&](int r, int c) {
        const int p = r * kImageSide + c;
        if (!mask.px[static_cast<size_t>(p)] && !outside[static_cast<size_t>(p)]) {
            outside[static_cast<size_t>(p)] = true;
            stack.push_back(p);
        }
    };
    for (int i = 0; i < kImageSide; ++i) {
        push(0, i);
        push(kImageSide - 1, i);
        push(i, 0);
        push(i, kImageSide - 1);
    }
    while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        const int r = p / kImageSide, c = p % kImageSide;
        if (r > 0) push(r - 1, c);
        if (r < kImageSide - 1) push(r + 1, c);
        if (c > 0) push(r, c - 1);
        if (c < kImageSide - 1) push(r, c + 1);
    }
    BinaryMask out;
    for (int i = 0; i < kImagePixels; ++i)
        out.px[static_cast<size_t>(i)] =
            mask.px[static_cast<size_t>(i)] || !outside[static_cast<size_t>(i)];
    return out;
}

// Expand the mask by two pixels in all directions (5x5 maximum filter,
// clipped to the frame). The ring becomes solid material (0.5); the original
// region stays on top as the internal void (1.0).
inline LabeledDomain dilate_shell(const BinaryMask& mask) {
    require(mask.count() > 0, Errc::empty_mask, "dilate_shell on empty mask");
    LabeledDomain out;
    for (int r = 0; r < kImageSide; ++r) {
        for (int c = 0; c < kImageSide; ++c) {
            bool hit = false;
            for (int dr = -2; dr <= 2 && !hit; ++dr) {
                for (int dc = -2; dc <= 2 && !hit; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    hit = in_frame(rr, cc) && mask.at(rr, cc);
                }
            }
            out.at(r, c) = mask.at(r, c) ? 1.0f : (hit ? 0.5f : 0.0f);
        }
    }
    return out;
}

// Translate content down until it touches the bottom row.
inline LabeledDomain drop_to_bottom(const LabeledDomain& domain) {
    int lowest = -1;
    for (int r = kImageSide - 1; r >= 0 && lowest < 0; --r)
        for (int c = 0; c < kImageSide; ++c)
            if (domain.at(r, c) != 0.0f) {
                lowest = r;
                break;
            }
    require(lowest >= 0, Errc::empty_domain, "drop_to_bottom on empty domain");
    const int shift = kImageSide - 1 - lowest;
    if (shift == 0) return domain;
    LabeledDomain out;
    for (int r = kImageSide - 1; r >= shift; --r)
        for (int c = 0; c < kImageSide; ++c) out.at(r, c) = domain.at(r - shift, c);
    return out;
}

inline LabeledDomain preprocess(const StructuralBasis& img, float threshold = 0.5f) {
    const BinaryMask bin = binarize(img, threshold);
    require(bin.count() > 0, Errc::empty_component, "binarized image is empty");
    const BinaryMask comp = largest_component(bin);
    const BinaryMask filled = fill_holes(comp);
    const LabeledDomain shell = dilate_shell(filled);
    return drop_to_bottom(shell);
}

// Enclosure invariant of a labeled domain: no 1.0 pixel is 4-adjacent to a
// 0.0 pixel (treating out-of-frame as background).
inline bool void_enclosed(const LabeledDomain& domain) {
    for (int r = 0; r < kImageSide; ++r) {
        for (int c = 0; c < kImageSide; ++c) {
            if (domain.at(r, c) != 1.0f) continue;
            constexpr int d4[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
            for (const auto& d : d4) {
                const int rr = r + d[0], cc = c + d[1];
                if (!in_frame(rr, cc) || domain.at(rr, cc) == 0.0f) return false;
            }
        }
    }
    return true;
}

}  // namespace ifd
