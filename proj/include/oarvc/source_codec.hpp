#ifndef OARVC_SOURCE_CODEC_HPP
#define OARVC_SOURCE_CODEC_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oarvc/bitio.hpp"
#include "oarvc/oar.hpp"

namespace oarvc {

struct EncodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuantParams {
    int q_angle = 8;  // angle bins = 2^q_angle, 1 <= q_angle <= 16
};

// Bit-exact coded GoP. Layout (MSB-first, big-endian fields, no alignment
// between frames):
//
//   magic "OARS" | version u8 | width u16 | height u16 | T u8 | q u8 |
//   category_count u8 | relation_label_count u8          (13 header bytes)
//   frame payloads (bit-packed)                           padded to a byte
//   CRC-16/CCITT over the padded payload bytes            (2 bytes)
//
// Frame 1 is an I-frame: object count ue(v); ids gap-coded ascending as
// ue(first-1), ue(gap-1); per object category (3b), x/w (ceil(log2(W+1)) b),
// y/h (ceil(log2(H+1)) b), angle bin (q b). Frames 2..T are P-frames: death
// index list, per-survivor signed Exp-Golomb deltas (dx, dy, dw, dh, dtheta
// with shortest circular wrap in bin space), births coded full. Relations are
// re-coded per frame: one presence bit per object for its (object, background,
// "in") edge, then the remaining relations as fixed-width endpoint indices
// (0 = background) plus a 2-bit label.
struct Bitstream {
    std::uint8_t version = 1;
    int width = 0;
    int height = 0;
    int gop_length = 0;
    int q_angle = 8;
    int category_count = kCategoryCount;
    int relation_label_count = kRelationLabelCount;

    std::vector<std::uint8_t> bytes;  // full serialized stream

    // accounting, filled by encode_gop / a successful decode
    std::vector<std::uint64_t> frame_payload_bits;
    std::uint64_t payload_bits = 0;

    std::uint64_t total_bits() const { return static_cast<std::uint64_t>(bytes.size()) * 8; }
};

inline constexpr std::size_t kBitstreamHeaderBytes = 13;
inline constexpr std::uint32_t kMaxObjectsPerFrame = 1u << 16;

namespace detail {

inline int bits_for(int max_value) {
    return std::bit_width(static_cast<unsigned>(max_value));
}

inline int angle_bin(double angle_deg, int q) {
    const double bins = static_cast<double>(1u << q);
    const long long bin = std::llround(angle_deg * bins / 360.0);
    return static_cast<int>(((bin % (1LL << q)) + (1LL << q)) % (1LL << q));
}

inline double angle_from_bin(int bin, int q) {
    return bin * (360.0 / static_cast<double>(1u << q));
}

}  // namespace detail

// Snaps angles onto the q-bit grid and canonicalizes ordering (objects
// ascending, relations sorted unique). Coordinates are already integers and
// pass through unchanged.
inline OarFrame quantize_frame(const OarFrame& frame, const QuantParams& params) {
    OarFrame out = frame;
    for (auto& [id, attrs] : out.attributes)
        attrs.angle = detail::angle_from_bin(detail::angle_bin(attrs.angle, params.q_angle),
                                             params.q_angle);
    std::sort(out.objects.begin(), out.objects.end());
    canonicalize_relations(out.relations);
    return out;
}

inline GopStream quantize_gop(const GopStream& gop, const QuantParams& params) {
    GopStream out = gop;
    for (OarFrame& frame : out.frames) frame = quantize_frame(frame, params);
    return out;
}

namespace detail {

inline void write_id_list(BitWriter& bw, std::span<const ObjectId> ids) {
    ObjectId prev = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        bw.write_ue(ids[i] - prev - 1);  // ids ascending and nonzero
        prev = ids[i];
    }
}

inline void write_object_full(BitWriter& bw, const Attributes& a, int bx, int by, int q) {
    bw.write_bits(static_cast<std::uint64_t>(a.category), 3);
    bw.write_bits(static_cast<std::uint64_t>(a.x), bx);
    bw.write_bits(static_cast<std::uint64_t>(a.y), by);
    bw.write_bits(static_cast<std::uint64_t>(a.w), bx);
    bw.write_bits(static_cast<std::uint64_t>(a.h), by);
    bw.write_bits(static_cast<std::uint64_t>(angle_bin(a.angle, q)), q);
}

inline void write_relations(BitWriter& bw, const OarFrame& frame) {
    const auto& ids = frame.objects;
    const int idx_width = bits_for(static_cast<int>(ids.size()));
    auto index_of = [&](ObjectId id) -> std::uint64_t {
        if (id == kBackgroundId) return 0;
        const auto it = std::lower_bound(ids.begin(), ids.end(), id);
        return static_cast<std::uint64_t>(it - ids.begin()) + 1;
    };
    // presence bits for the per-object "in background" edges
    std::vector<Relation> rest;
    std::vector<bool> has_in(ids.size(), false);
    for (const Relation& r : frame.relations) {
        if (r.label == RelationLabel::kIn && r.object == kBackgroundId &&
            r.subject != kBackgroundId) {
            has_in[index_of(r.subject) - 1] = true;
        } else {
            rest.push_back(r);
        }
    }
    for (const bool flag : has_in) bw.write_bit(flag ? 1 : 0);
    bw.write_ue(rest.size());
    for (const Relation& r : rest) {
        bw.write_bits(index_of(r.subject), idx_width);
        bw.write_bits(index_of(r.object), idx_width);
        bw.write_bits(static_cast<std::uint64_t>(r.label), 2);
    }
}

inline int shortest_bin_delta(int curr, int prev, int q) {
    const int bins = 1 << q;
    const int half = bins >> 1;
    int d = (curr - prev) % bins;
    d = ((d + half) % bins + bins) % bins - half;
    return d;
}

}  // namespace detail

inline Bitstream encode_gop(const GopStream& gop, const QuantParams& params) {
    if (params.q_angle < 1 || params.q_angle > 16) throw EncodeError("q_angle out of [1,16]");
    if (gop.width <= 0 || gop.width > 0xFFFF || gop.height <= 0 || gop.height > 0xFFFF)
        throw EncodeError("canvas dimensions out of range");
    if (gop.gop_length < 1 || gop.gop_length > 0xFF ||
        static_cast<int>(gop.frames.size()) != gop.gop_length)
        throw EncodeError("frame count does not match gop_length");
    for (int t = 0; t < gop.gop_length; ++t) {
        const OarFrame& frame = gop.frames[t];
        if (frame.frame_index != t + 1)
            throw EncodeError("frame_index values must run 1..T");
        if (frame.objects.size() > kMaxObjectsPerFrame)
            throw EncodeError("capacity: more than 2^16 objects in a frame");
        if (const Verdict v = validate_frame(frame, gop.width, gop.height); !v)
            throw EncodeError("invalid frame " + std::to_string(frame.frame_index) + ": " +
                              v.message);
    }

    const GopStream q = quantize_gop(gop, params);
    const int bx = detail::bits_for(q.width);
    const int by = detail::bits_for(q.height);

    Bitstream bs;
    bs.width = q.width;
    bs.height = q.height;
    bs.gop_length = q.gop_length;
    bs.q_angle = params.q_angle;

    BitWriter payload;
    for (int t = 0; t < q.gop_length; ++t) {
        const std::uint64_t start = payload.bit_count();
        const OarFrame& frame = q.frames[t];
        if (t == 0) {
            payload.write_ue(frame.objects.size());
            detail::write_id_list(payload, frame.objects);
            for (const ObjectId id : frame.objects)
                detail::write_object_full(payload, frame.attributes.at(id), bx, by,
                                          params.q_angle);
        } else {
            const OarFrame& prev = q.frames[t - 1];
            std::vector<std::uint32_t> deaths;
            for (std::size_t i = 0; i < prev.objects.size(); ++i)
                if (!frame.has_object(prev.objects[i]))
                    deaths.push_back(static_cast<std::uint32_t>(i));
            payload.write_ue(deaths.size());
            for (const std::uint32_t idx : deaths) payload.write_ue(idx);
            for (const ObjectId id : prev.objects) {
                if (!frame.has_object(id)) continue;
                const Attributes& pa = prev.attributes.at(id);
                const Attributes& ca = frame.attributes.at(id);
                payload.write_se(ca.x - pa.x);
                payload.write_se(ca.y - pa.y);
                payload.write_se(ca.w - pa.w);
                payload.write_se(ca.h - pa.h);
                payload.write_se(detail::shortest_bin_delta(
                    detail::angle_bin(ca.angle, params.q_angle),
                    detail::angle_bin(pa.angle, params.q_angle), params.q_angle));
            }
            std::vector<ObjectId> births;
            for (const ObjectId id : frame.objects)
                if (!prev.has_object(id)) births.push_back(id);
            payload.write_ue(births.size());
            detail::write_id_list(payload, births);
            for (const ObjectId id : births)
                detail::write_object_full(payload, frame.attributes.at(id), bx, by,
                                          params.q_angle);
        }
        detail::write_relations(payload, frame);
        bs.frame_payload_bits.push_back(payload.bit_count() - start);
    }
    bs.payload_bits = payload.bit_count();
    payload.align_to_byte();
    const std::vector<std::uint8_t> payload_bytes = payload.take();

    BitWriter out;
    for (const char c : {'O', 'A', 'R', 'S'}) out.write_byte(static_cast<std::uint8_t>(c));
    out.write_byte(bs.version);
    out.write_u16(static_cast<std::uint16_t>(bs.width));
    out.write_u16(static_cast<std::uint16_t>(bs.height));
    out.write_byte(static_cast<std::uint8_t>(bs.gop_length));
    out.write_byte(static_cast<std::uint8_t>(bs.q_angle));
    out.write_byte(static_cast<std::uint8_t>(bs.category_count));
    out.write_byte(static_cast<std::uint8_t>(bs.relation_label_count));
    bs.bytes = out.take();
    bs.bytes.insert(bs.bytes.end(), payload_bytes.begin(), payload_bytes.end());
    const std::uint16_t crc = crc16_ccitt(payload_bytes);
    bs.bytes.push_back(static_cast<std::uint8_t>(crc >> 8));
    bs.bytes.push_back(static_cast<std::uint8_t>(crc & 0xFF));
    return bs;
}

struct DecodeResult {
    std::optional<GopStream> gop;
    Bitstream stream;  // parsed header + accounting, valid when ok()
    std::string error;

    bool ok() const { return gop.has_value(); }
};

namespace detail {

inline std::vector<ObjectId> read_id_list(BitReader& br, std::size_t count) {
    std::vector<ObjectId> ids;
    std::uint64_t prev = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t id = prev + br.read_ue() + 1;
        if (id > 0xFFFFFFFFull) throw TruncatedStream{};
        ids.push_back(static_cast<ObjectId>(id));
        prev = id;
    }
    return ids;
}

inline Attributes read_object_full(BitReader& br, int bx, int by, int q, int category_count) {
    Attributes a;
    const auto cat = br.read_bits(3);
    if (cat >= static_cast<std::uint64_t>(category_count)) throw TruncatedStream{};
    a.category = static_cast<Category>(cat);
    a.x = static_cast<int>(br.read_bits(bx));
    a.y = static_cast<int>(br.read_bits(by));
    a.w = static_cast<int>(br.read_bits(bx));
    a.h = static_cast<int>(br.read_bits(by));
    a.angle = angle_from_bin(static_cast<int>(br.read_bits(q)), q);
    return a;
}

inline void read_relations(BitReader& br, OarFrame& frame, int relation_label_count) {
    const auto& ids = frame.objects;
    const int idx_width = bits_for(static_cast<int>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (br.read_bit()) frame.relations.push_back({ids[i], kBackgroundId, RelationLabel::kIn});
    const std::uint64_t rest = br.read_ue();
    for (std::uint64_t i = 0; i < rest; ++i) {
        const std::uint64_t s = br.read_bits(idx_width);
        const std::uint64_t o = br.read_bits(idx_width);
        const std::uint64_t label = br.read_bits(2);
        if (s > ids.size() || o > ids.size() ||
            label >= static_cast<std::uint64_t>(relation_label_count))
            throw TruncatedStream{};
        frame.relations.push_back({s == 0 ? kBackgroundId : ids[s - 1],
                                   o == 0 ? kBackgroundId : ids[o - 1],
                                   static_cast<RelationLabel>(label)});
    }
    canonicalize_relations(frame.relations);
}

}  // namespace detail

inline DecodeResult decode_gop_bytes(std::span<const std::uint8_t> bytes) {
    DecodeResult result;
    if (bytes.size() < kBitstreamHeaderBytes + 2) {
        result.error = "truncated stream: shorter than header";
        return result;
    }
    if (bytes[0] != 'O' || bytes[1] != 'A' || bytes[2] != 'R' || bytes[3] != 'S') {
        result.error = "bad magic";
        return result;
    }
    Bitstream bs;
    bs.version = bytes[4];
    if (bs.version != 1) {
        result.error = "unsupported version " + std::to_string(bytes[4]);
        return result;
    }
    bs.width = (bytes[5] << 8) | bytes[6];
    bs.height = (bytes[7] << 8) | bytes[8];
    bs.gop_length = bytes[9];
    bs.q_angle = bytes[10];
    bs.category_count = bytes[11];
    bs.relation_label_count = bytes[12];
    if (bs.width <= 0 || bs.height <= 0 || bs.gop_length < 1 || bs.q_angle < 1 ||
        bs.q_angle > 16 || bs.category_count != kCategoryCount ||
        bs.relation_label_count != kRelationLabelCount) {
        result.error = "invalid header fields";
        return result;
    }

    const std::span<const std::uint8_t> payload =
        bytes.subspan(kBitstreamHeaderBytes, bytes.size() - kBitstreamHeaderBytes - 2);
    const std::uint16_t stored_crc = static_cast<std::uint16_t>(
        (bytes[bytes.size() - 2] << 8) | bytes[bytes.size() - 1]);
    if (crc16_ccitt(payload) != stored_crc) {
        result.error = "crc mismatch";
        return result;
    }

    const int bx = detail::bits_for(bs.width);
    const int by = detail::bits_for(bs.height);
    GopStream gop;
    gop.width = bs.width;
    gop.height = bs.height;
    gop.gop_length = bs.gop_length;

    try {
        BitReader br(payload);
        for (int t = 0; t < bs.gop_length; ++t) {
            const std::uint64_t start = br.bit_position();
            OarFrame frame;
            frame.frame_index = t + 1;
            if (t == 0) {
                const std::uint64_t count = br.read_ue();
                if (count > kMaxObjectsPerFrame) throw TruncatedStream{};
                frame.objects = detail::read_id_list(br, count);
                for (const ObjectId id : frame.objects)
                    frame.attributes[id] =
                        detail::read_object_full(br, bx, by, bs.q_angle, bs.category_count);
            } else {
                const OarFrame& prev = gop.frames.back();
                const std::uint64_t death_count = br.read_ue();
                if (death_count > prev.objects.size()) throw TruncatedStream{};
                std::vector<bool> dead(prev.objects.size(), false);
                for (std::uint64_t i = 0; i < death_count; ++i) {
                    const std::uint64_t idx = br.read_ue();
                    if (idx >= prev.objects.size() || dead[idx]) throw TruncatedStream{};
                    dead[idx] = true;
                }
                for (std::size_t i = 0; i < prev.objects.size(); ++i) {
                    if (dead[i]) continue;
                    const ObjectId id = prev.objects[i];
                    const Attributes& pa = prev.attributes.at(id);
                    Attributes a = pa;
                    a.x = pa.x + static_cast<int>(br.read_se());
                    a.y = pa.y + static_cast<int>(br.read_se());
                    a.w = pa.w + static_cast<int>(br.read_se());
                    a.h = pa.h + static_cast<int>(br.read_se());
                    const int bins = 1 << bs.q_angle;
                    const int prev_bin = detail::angle_bin(pa.angle, bs.q_angle);
                    const int bin =
                        ((prev_bin + static_cast<int>(br.read_se())) % bins + bins) % bins;
                    a.angle = detail::angle_from_bin(bin, bs.q_angle);
                    frame.objects.push_back(id);
                    frame.attributes[id] = a;
                }
                const std::uint64_t birth_count = br.read_ue();
                if (birth_count > kMaxObjectsPerFrame) throw TruncatedStream{};
                const std::vector<ObjectId> births = detail::read_id_list(br, birth_count);
                for (const ObjectId id : births) {
                    if (frame.has_object(id)) throw TruncatedStream{};
                    frame.attributes[id] =
                        detail::read_object_full(br, bx, by, bs.q_angle, bs.category_count);
                    frame.objects.push_back(id);
                }
                std::sort(frame.objects.begin(), frame.objects.end());
            }
            detail::read_relations(br, frame, bs.relation_label_count);
            if (const Verdict v = validate_frame(frame, gop.width, gop.height); !v)
                throw TruncatedStream{};
            bs.frame_payload_bits.push_back(br.bit_position() - start);
            gop.frames.push_back(std::move(frame));
        }
        bs.payload_bits = 0;
        for (const auto b : bs.frame_payload_bits) bs.payload_bits += b;
    } catch (const TruncatedStream&) {
        result.error = "truncated or inconsistent payload";
        return result;
    }
    bs.bytes.assign(bytes.begin(), bytes.end());
    result.stream = std::move(bs);
    result.gop = std::move(gop);
    return result;
}

inline DecodeResult decode_gop(const Bitstream& bits) { return decode_gop_bytes(bits.bytes); }

// ---------------------------------------------------------------------------
// Rate accounting
// ---------------------------------------------------------------------------

struct BitAccount {
    std::uint64_t total_bits = 0;    // physical stream size incl. header + CRC
    std::uint64_t payload_bits = 0;  // OAR payload only
    std::vector<std::uint64_t> frame_bits;
    double bits_per_frame = 0.0;

    double kbps(double fps) const {
        const double frames = static_cast<double>(frame_bits.size());
        return static_cast<double>(total_bits) / (frames / fps) / 1000.0;
    }
};

inline BitAccount bit_account(const Bitstream& bits) {
    BitAccount acc;
    acc.total_bits = bits.total_bits();
    acc.payload_bits = bits.payload_bits;
    acc.frame_bits = bits.frame_payload_bits;
    acc.bits_per_frame = bits.gop_length > 0
                             ? static_cast<double>(acc.total_bits) / bits.gop_length
                             : 0.0;
    return acc;
}

// ---------------------------------------------------------------------------
// Multi-GoP container (.oars file): magic + u32 count + length-prefixed GoPs.
// ---------------------------------------------------------------------------

inline void save_stream(const std::filesystem::path& path,
                        std::span<const Bitstream> streams) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    const char magic[4] = {'O', 'A', 'R', 'F'};
    out.write(magic, 4);
    const std::uint32_t count = static_cast<std::uint32_t>(streams.size());
    for (int i = 3; i >= 0; --i) out.put(static_cast<char>((count >> (8 * i)) & 0xFF));
    for (const Bitstream& bs : streams) {
        const std::uint32_t len = static_cast<std::uint32_t>(bs.bytes.size());
        for (int i = 3; i >= 0; --i) out.put(static_cast<char>((len >> (8 * i)) & 0xFF));
        out.write(reinterpret_cast<const char*>(bs.bytes.data()),
                  static_cast<std::streamsize>(bs.bytes.size()));
    }
    if (!out) throw std::runtime_error("short write: " + path.string());
}

inline std::vector<std::vector<std::uint8_t>> load_stream(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    auto read_u32 = [&]() -> std::uint32_t {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            const int c = in.get();
            if (c == EOF) throw std::runtime_error("truncated container: " + path.string());
            v = (v << 8) | static_cast<std::uint32_t>(c);
        }
        return v;
    };
    char magic[4];
    in.read(magic, 4);
    if (!in || magic[0] != 'O' || magic[1] != 'A' || magic[2] != 'R' || magic[3] != 'F')
        throw std::runtime_error("not an OAR stream container: " + path.string());
    const std::uint32_t count = read_u32();
    std::vector<std::vector<std::uint8_t>> gops;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t len = read_u32();
        std::vector<std::uint8_t> bytes(len);
        in.read(reinterpret_cast<char*>(bytes.data()), len);
        if (!in) throw std::runtime_error("truncated container: " + path.string());
        gops.push_back(std::move(bytes));
    }
    return gops;
}

}  // namespace oarvc

#endif  // OARVC_SOURCE_CODEC_HPP
