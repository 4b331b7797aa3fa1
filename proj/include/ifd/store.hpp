#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ifd/common.hpp"
#include "ifd/geometry.hpp"
#include "ifd/image.hpp"

namespace ifd {

// Augmentation provenance, packed into one byte for the container:
// flipped*49 + (dx+3)*7 + (dy+3). Identity encodes to 24.
struct TransformTag {
    bool flipped = false;
    int dx = 0;  // +x = content moves right
    int dy = 0;  // +y = content moves down (raster rows)

    enum class Kind { identity, flip, shift };
    Kind kind() const {
        if (flipped) return Kind::flip;
        return (dx != 0 || dy != 0) ? Kind::shift : Kind::identity;
    }
    bool is_identity() const { return !flipped && dx == 0 && dy == 0; }

    std::uint8_t encode() const {
        return static_cast<std::uint8_t>((flipped ? 49 : 0) + (dx + 3) * 7 + (dy + 3));
    }
    static TransformTag decode(std::uint8_t b) {
        TransformTag t;
        t.flipped = b >= 49;
        const int r = b % 49;
        t.dx = r / 7 - 3;
        t.dy = r % 7 - 3;
        return t;
    }
    bool operator==(const TransformTag& o) const {
        return flipped == o.flipped && dx == o.dx && dy == o.dy;
    }
};

struct DatasetRecord {
    std::uint32_t source_index = 0;
    TransformTag tag;
    StructuralBasis basis;
    std::optional<DescriptorSet> descriptors;

    bool operator==(const DatasetRecord& o) const {
        return source_index == o.source_index && tag == o.tag && basis == o.basis &&
               descriptors == o.descriptors;
    }
};

struct DatasetStore {
    std::vector<DatasetRecord> records;
    std::string split_tag = "train";
    std::uint64_t creation_seed = 0;

    bool operator==(const DatasetStore& o) const {
        return records == o.records && split_tag == o.split_tag && creation_seed == o.creation_seed;
    }
};

namespace detail {

inline std::uint32_t crc32(const std::uint8_t* data, size_t n, std::uint32_t crc = 0) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    crc = ~crc;
    for (size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xffu] ^ (crc >> 8);
    return ~crc;
}

struct ByteWriter {
    std::vector<std::uint8_t> buf;

    void u8(std::uint8_t v) { buf.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void bytes(const void* p, size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf.insert(buf.end(), b, b + n);
    }
};

struct ByteReader {
    const std::vector<std::uint8_t>& buf;
    size_t pos = 0;

    void need(size_t n) const {
        require(pos + n <= buf.size(), Errc::corrupt_container, "container truncated");
    }
    std::uint8_t u8() {
        need(1);
        return buf[pos++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[pos++]) << (8 * i);
        return v;
    }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

}  // namespace detail

// Container layout (all little-endian):
//   magic "IFD1", u8 version=1, u64 record count,
//   per record: u32 source index, u8 transform tag, 784 f32 pixels,
//               u8 descriptor-present flag, and when the flag is 1:
//               height f64, width f64, bbox 2xf64, area f64, medial axis 60xf64
//   trailer: u8 split-tag length, split-tag bytes, u64 creation seed,
//            u32 CRC32 of every preceding byte.
inline constexpr char kStoreMagic[4] = {'I', 'F', 'D', '1'};

inline std::vector<std::uint8_t> store_to_bytes(const DatasetStore& store) {
    detail::ByteWriter w;
    w.bytes(kStoreMagic, 4);
    w.u8(1);
    w.u64(store.records.size());
    for (const auto& rec : store.records) {
        w.u32(rec.source_index);
        w.u8(rec.tag.encode());
        for (float v : rec.basis.px) w.f32(v);
        w.u8(rec.descriptors ? 1 : 0);
        if (rec.descriptors) {
            const auto& d = *rec.descriptors;
            require(d.medial_axis.size() == kMedialAxisPoints, Errc::dimension_mismatch,
                    "medial axis must have 30 points");
            w.f64(d.height);
            w.f64(d.width);
            w.f64(d.bbox_h);
            w.f64(d.bbox_w);
            w.f64(d.hull_area);
            for (const auto& p : d.medial_axis) {
                w.f64(p.x);
                w.f64(p.y);
            }
        }
    }
    require(store.split_tag.size() <= 255, Errc::io_error, "split tag too long");
    w.u8(static_cast<std::uint8_t>(store.split_tag.size()));
    w.bytes(store.split_tag.data(), store.split_tag.size());
    w.u64(store.creation_seed);
    w.u32(detail::crc32(w.buf.data(), w.buf.size()));
    return w.buf;
}

inline DatasetStore store_from_bytes(const std::vector<std::uint8_t>& bytes) {
    require(bytes.size() >= 4 + 1 + 8 + 1 + 8 + 4, Errc::corrupt_container, "container too small");
    require(std::memcmp(bytes.data(), kStoreMagic, 4) == 0, Errc::corrupt_container,
            "bad container magic");
    const std::uint32_t stored_crc = [&] {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(bytes[bytes.size() - 4 + static_cast<size_t>(i)])
                 << (8 * i);
        return v;
    }();
    require(detail::crc32(bytes.data(), bytes.size() - 4) == stored_crc, Errc::corrupt_container,
            "container checksum mismatch");

    detail::ByteReader r{bytes};
    r.pos = 4;
    const std::uint8_t version = r.u8();
    require(version == 1, Errc::corrupt_container,
            "unsupported container version " + std::to_string(version));
    const std::uint64_t count = r.u64();
    DatasetStore store;
    store.records.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        DatasetRecord rec;
        rec.source_index = r.u32();
        rec.tag = TransformTag::decode(r.u8());
        for (auto& v : rec.basis.px) v = r.f32();
        const std::uint8_t flag = r.u8();
        if (flag == 1) {
            DescriptorSet d;
            d.height = r.f64();
            d.width = r.f64();
            d.bbox_h = r.f64();
            d.bbox_w = r.f64();
            d.hull_area = r.f64();
            d.medial_axis.resize(kMedialAxisPoints);
            for (auto& p : d.medial_axis) {
                p.x = r.f64();
                p.y = r.f64();
            }
            rec.descriptors = std::move(d);
        } else {
            require(flag == 0, Errc::corrupt_container, "bad descriptor flag");
        }
        store.records.push_back(std::move(rec));
    }
    const std::uint8_t tag_len = r.u8();
    r.need(tag_len);
    store.split_tag.assign(reinterpret_cast<const char*>(bytes.data()) + r.pos, tag_len);
    r.pos += tag_len;
    store.creation_seed = r.u64();
    return store;
}

inline void write_store(const DatasetStore& store, const std::string& path) {
    const auto bytes = store_to_bytes(store);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    require(f.good(), Errc::io_error, "cannot open for write: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    require(f.good(), Errc::io_error, "write failed: " + path);
}

inline DatasetStore read_store(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), Errc::io_error, "cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return store_from_bytes(bytes);
}

}  // namespace ifd
