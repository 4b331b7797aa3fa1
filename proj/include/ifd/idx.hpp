#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "ifd/common.hpp"
#include "ifd/image.hpp"

namespace ifd {

// MNIST-style IDX input. Payload integers are big-endian by convention.

struct RawDigitImage {
    std::array<std::uint8_t, kImagePixels> pixels{};
    int label = -1;

    // intensities are converted once, here, to [0,1] floats
    StructuralBasis to_basis() const {
        StructuralBasis b;
        for (int i = 0; i < kImagePixels; ++i)
            b.px[static_cast<size_t>(i)] = static_cast<float>(pixels[static_cast<size_t>(i)]) / 255.0f;
        return b;
    }
};

namespace detail {

inline std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, size_t off) {
    require(off + 4 <= bytes.size(), Errc::truncated_file, "IDX header truncated");
    return (static_cast<std::uint32_t>(bytes[off]) << 24) |
           (static_cast<std::uint32_t>(bytes[off + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[off + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[off + 3]);
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// Images file: magic, count, rows, cols, then row-major u8 pixels.
inline std::vector<std::array<std::uint8_t, kImagePixels>> parse_idx_images(
    const std::vector<std::uint8_t>& bytes) {
    const std::uint32_t magic = detail::read_be32(bytes, 0);
    require(magic == kIdxImageMagic, Errc::bad_magic,
            "IDX image magic 0x" + std::to_string(magic));
    const std::uint32_t count = detail::read_be32(bytes, 4);
    const std::uint32_t rows = detail::read_be32(bytes, 8);
    const std::uint32_t cols = detail::read_be32(bytes, 12);
    require(rows == kImageSide && cols == kImageSide, Errc::dimension_mismatch,
            "IDX images are " + std::to_string(rows) + "x" + std::to_string(cols));
    const size_t need = 16 + static_cast<size_t>(count) * kImagePixels;
    require(bytes.size() >= need, Errc::truncated_file,
            "IDX payload short: " + std::to_string(bytes.size()) + " < " + std::to_string(need));

    std::vector<std::array<std::uint8_t, kImagePixels>> out(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const size_t off = 16 + static_cast<size_t>(i) * kImagePixels;
        std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(off), kImagePixels, out[i].begin());
    }
    return out;
}

// Labels file: magic, count, then u8 labels.
inline std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes) {
    const std::uint32_t magic = detail::read_be32(bytes, 0);
    require(magic == kIdxLabelMagic, Errc::bad_magic,
            "IDX label magic 0x" + std::to_string(magic));
    const std::uint32_t count = detail::read_be32(bytes, 4);
    require(bytes.size() >= 8 + static_cast<size_t>(count), Errc::truncated_file,
            "IDX label payload short");
    return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), Errc::io_error, "cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

// Keeps only records whose label matches, preserving file order.
inline std::vector<RawDigitImage> filter_label(
    const std::vector<std::array<std::uint8_t, kImagePixels>>& images,
    const std::vector<std::uint8_t>& labels, int target) {
    require(images.size() == labels.size(), Errc::length_mismatch,
            std::to_string(images.size()) + " images vs " + std::to_string(labels.size()) +
                " labels");
    std::vector<RawDigitImage> out;
    for (size_t i = 0; i < images.size(); ++i) {
        if (static_cast<int>(labels[i]) == target) {
            RawDigitImage d;
            d.pixels = images[i];
            d.label = target;
            out.push_back(d);
        }
    }
    return out;
}

}  // namespace ifd
