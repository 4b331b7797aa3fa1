#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>

#include "ifd/common.hpp"

namespace ifd {

inline constexpr int kImageSide = 28;
inline constexpr int kImagePixels = kImageSide * kImageSide;

// 28x28 float grid in [0,1]. Used both for raw structural bases and for the
// tri-level labeled domains {0, 0.5, 1} the preprocessing pipeline emits.
struct Image28 {
    std::array<float, kImagePixels> px{};

    float& at(int row, int col) { return px[static_cast<size_t>(row) * kImageSide + col]; }
    float at(int row, int col) const { return px[static_cast<size_t>(row) * kImageSide + col]; }

    bool operator==(const Image28& o) const { return px == o.px; }
};

struct BinaryMask {
    std::array<bool, kImagePixels> px{};

    bool& at(int row, int col) { return px[static_cast<size_t>(row) * kImageSide + col]; }
    bool at(int row, int col) const { return px[static_cast<size_t>(row) * kImageSide + col]; }

    int count() const {
        int n = 0;
        for (bool b : px) n += b ? 1 : 0;
        return n;
    }
    bool operator==(const BinaryMask& o) const { return px == o.px; }
};

using StructuralBasis = Image28;
using LabeledDomain = Image28;

inline bool in_frame(int row, int col) {
    return row >= 0 && row < kImageSide && col >= 0 && col < kImageSide;
}

inline int nonzero_count(const Image28& img) {
    int n = 0;
    for (float v : img.px) n += (v != 0.0f) ? 1 : 0;
    return n;
}

// Binary PGM (P5) export, maxval 255. Tri-level domains map {0, 0.5, 1} to
// {0, 128, 255}; generic [0,1] images are scaled by 255 and rounded.
inline void write_pgm(const Image28& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), Errc::io_error, "cannot open for write: " + path);
    f << "P5\n" << kImageSide << " " << kImageSide << "\n255\n";
    for (float v : img.px) {
        int byte;
        if (v == 0.5f) {
            byte = 128;
        } else {
            byte = static_cast<int>(std::lround(static_cast<double>(v) * 255.0));
            if (byte < 0) byte = 0;
            if (byte > 255) byte = 255;
        }
        f.put(static_cast<char>(static_cast<unsigned char>(byte)));
    }
    require(f.good(), Errc::io_error, "write failed: " + path);
}

inline Image28 read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), Errc::io_error, "cannot open for read: " + path);
    std::string magic;
    f >> magic;
    require(magic == "P5", Errc::bad_magic, "not a binary PGM: " + path);
    int w = 0, h = 0, maxval = 0;
    f >> w >> h >> maxval;
    require(w == kImageSide && h == kImageSide, Errc::dimension_mismatch,
            "PGM is not 28x28: " + path);
    require(maxval == 255, Errc::dimension_mismatch, "PGM maxval must be 255: " + path);
    f.get();  // single whitespace after header
    Image28 img;
    for (auto& v : img.px) {
        const int c = f.get();
        require(c != EOF, Errc::truncated_file, "PGM payload truncated: " + path);
        v = (c == 128) ? 0.5f : static_cast<float>(c) / 255.0f;
    }
    return img;
}

}  // namespace ifd
