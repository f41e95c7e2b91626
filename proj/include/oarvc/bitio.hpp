#ifndef OARVC_BITIO_HPP
#define OARVC_BITIO_HPP

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace oarvc {

// Thrown when a reader runs past the end of a stream. Callers that model
// corruption as data (the source decoder) catch this and turn it into a
// failure state.
struct TruncatedStream : std::runtime_error {
    TruncatedStream() : std::runtime_error("bitstream truncated") {}
};

// MSB-first bit packer. Values are written big-endian within their field.
class BitWriter {
  public:
    void write_bit(int bit) {
        if (bit_pos_ == 0) bytes_.push_back(0);
        if (bit) bytes_.back() |= static_cast<std::uint8_t>(1u << (7 - bit_pos_));
        bit_pos_ = (bit_pos_ + 1) & 7;
        ++bit_count_;
    }

    void write_bits(std::uint64_t value, int width) {
        for (int i = width - 1; i >= 0; --i) write_bit(static_cast<int>((value >> i) & 1u));
    }

    // Unsigned Exp-Golomb: v=0 codes as a single 1-bit.
    void write_ue(std::uint64_t v) {
        const std::uint64_t m = v + 1;
        const int len = std::bit_width(m);
        for (int i = 0; i < len - 1; ++i) write_bit(0);
        write_bits(m, len);
    }

    // Signed Exp-Golomb via the H.264 zig-zag mapping (0, 1, -1, 2, -2, ...).
    void write_se(std::int64_t v) {
        const std::uint64_t code =
            v > 0 ? 2ull * static_cast<std::uint64_t>(v) - 1 : 2ull * static_cast<std::uint64_t>(-v);
        write_ue(code);
    }

    void align_to_byte() {
        while (bit_pos_ != 0) write_bit(0);
    }

    std::uint64_t bit_count() const { return bit_count_; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

    void write_byte(std::uint8_t b) { write_bits(b, 8); }
    void write_u16(std::uint16_t v) { write_bits(v, 16); }

  private:
    std::vector<std::uint8_t> bytes_;
    int bit_pos_ = 0;
    std::uint64_t bit_count_ = 0;
};

class BitReader {
  public:
    explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    int read_bit() {
        if (pos_ >= bytes_.size() * 8) throw TruncatedStream{};
        const int bit = (bytes_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
        ++pos_;
        return bit;
    }

    std::uint64_t read_bits(int width) {
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) v = (v << 1) | static_cast<std::uint64_t>(read_bit());
        return v;
    }

    std::uint64_t read_ue() {
        int zeros = 0;
        while (read_bit() == 0) {
            if (++zeros > 63) throw TruncatedStream{};
        }
        std::uint64_t m = 1;
        for (int i = 0; i < zeros; ++i) m = (m << 1) | static_cast<std::uint64_t>(read_bit());
        return m - 1;
    }

    std::int64_t read_se() {
        const std::uint64_t code = read_ue();
        const std::uint64_t mag = (code + 1) / 2;
        return (code & 1) ? static_cast<std::int64_t>(mag) : -static_cast<std::int64_t>(mag);
    }

    std::uint64_t bit_position() const { return pos_; }
    void skip_to_byte() { pos_ = (pos_ + 7) & ~std::uint64_t{7}; }

  private:
    std::span<const std::uint8_t> bytes_;
    std::uint64_t pos_ = 0;
};

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
// Check value: crc16_ccitt("123456789") == 0x29B1.
inline std::uint16_t crc16_ccitt(std::span<const std::uint8_t> data) {
    std::uint16_t crc = 0xFFFF;
    for (const std::uint8_t byte : data) {
        crc ^= static_cast<std::uint16_t>(byte) << 8;
        for (int i = 0; i < 8; ++i) {
            crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                                 : static_cast<std::uint16_t>(crc << 1);
        }
    }
    return crc;
}

}  // namespace oarvc

#endif  // OARVC_BITIO_HPP
