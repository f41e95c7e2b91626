#include "oarvc/bitio.hpp"

#include <gtest/gtest.h>

#include "oarvc/rng.hpp"

namespace oarvc {
namespace {

TEST(BitIo, MsbFirstPacking) {
    BitWriter bw;
    bw.write_bits(0b1011, 4);
    bw.write_bits(0b0, 1);
    bw.write_bits(0b111, 3);
    ASSERT_EQ(bw.bytes().size(), 1u);
    EXPECT_EQ(bw.bytes()[0], 0b10110111);

    BitReader br(bw.bytes());
    EXPECT_EQ(br.read_bits(4), 0b1011u);
    EXPECT_EQ(br.read_bits(1), 0u);
    EXPECT_EQ(br.read_bits(3), 0b111u);
}

TEST(BitIo, ExpGolombKnownCodes) {
    // ue: 0 -> "1", 1 -> "010", 2 -> "011", 3 -> "00100"
    BitWriter bw;
    bw.write_ue(0);
    bw.write_ue(1);
    bw.write_ue(2);
    bw.write_ue(3);
    EXPECT_EQ(bw.bit_count(), 1u + 3 + 3 + 5);
    BitReader br(bw.bytes());
    EXPECT_EQ(br.read_ue(), 0u);
    EXPECT_EQ(br.read_ue(), 1u);
    EXPECT_EQ(br.read_ue(), 2u);
    EXPECT_EQ(br.read_ue(), 3u);
}

TEST(BitIo, SignedExpGolombZeroIsOneBit) {
    BitWriter bw;
    bw.write_se(0);
    EXPECT_EQ(bw.bit_count(), 1u);
}

TEST(BitIo, ExpGolombRoundTripProperty) {
    Rng rng(0xB17C0DE);
    BitWriter bw;
    std::vector<std::uint64_t> ue_values;
    std::vector<std::int64_t> se_values;
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t u = rng.next_u64() >> static_cast<int>(rng.next_int(0, 62));
        const std::int64_t s = static_cast<std::int64_t>(rng.next_u64() >>
                                                         static_cast<int>(rng.next_int(2, 62)));
        ue_values.push_back(u);
        se_values.push_back(rng.next_bit() ? s : -s);
        bw.write_ue(ue_values.back());
        bw.write_se(se_values.back());
    }
    BitReader br(bw.bytes());
    for (int i = 0; i < 2000; ++i) {
        EXPECT_EQ(br.read_ue(), ue_values[i]);
        EXPECT_EQ(br.read_se(), se_values[i]);
    }
}

TEST(BitIo, ReaderThrowsPastEnd) {
    BitWriter bw;
    bw.write_bits(0xAB, 8);
    BitReader br(bw.bytes());
    br.read_bits(8);
    EXPECT_THROW(br.read_bit(), TruncatedStream);
}

TEST(Crc16, CcittFalseCheckValue) {
    const std::string s = "123456789";
    const std::uint16_t crc =
        crc16_ccitt({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
    EXPECT_EQ(crc, 0x29B1);
}

TEST(Crc16, SingleBitFlipAlwaysDetected) {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint8_t> data(static_cast<std::size_t>(rng.next_int(1, 64)));
        for (auto& b : data) b = static_cast<std::uint8_t>(rng.next_u64() & 0xFF);
        const std::uint16_t clean = crc16_ccitt(data);
        const std::size_t byte = static_cast<std::size_t>(
            rng.next_int(0, static_cast<std::int64_t>(data.size()) - 1));
        const int bit = static_cast<int>(rng.next_int(0, 7));
        data[byte] ^= static_cast<std::uint8_t>(1u << bit);
        EXPECT_NE(crc16_ccitt(data), clean);
    }
}

}  // namespace
}  // namespace oarvc
