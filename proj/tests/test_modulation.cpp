#include "oarvc/modulation.hpp"

#include <gtest/gtest.h>

#include <bit>

#include "oarvc/rng.hpp"

namespace oarvc {
namespace {

const Modulation kAllSchemes[] = {Modulation::kBpsk, Modulation::kQam4, Modulation::kQam16,
                                  Modulation::kQam64};

TEST(Constellations, UnitMeanEnergy) {
    for (const Modulation m : kAllSchemes) {
        const Constellation& c = constellation(m);
        double energy = 0;
        for (const auto& p : c.points) energy += std::norm(p);
        energy /= static_cast<double>(c.points.size());
        EXPECT_NEAR(energy, 1.0, 1e-12) << to_string(m);
    }
}

TEST(Constellations, BpskConvention) {
    const Constellation& c = constellation(Modulation::kBpsk);
    EXPECT_EQ(c.points[0], std::complex<double>(1.0, 0.0));
    EXPECT_EQ(c.points[1], std::complex<double>(-1.0, 0.0));
}

TEST(Constellations, GrayAdjacencyExhaustive) {
    for (const Modulation m : kAllSchemes) {
        const Constellation& c = constellation(m);
        double min_dist = 1e300;
        for (std::size_t i = 0; i < c.points.size(); ++i)
            for (std::size_t j = i + 1; j < c.points.size(); ++j)
                min_dist = std::min(min_dist, std::abs(c.points[i] - c.points[j]));
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            for (std::size_t j = i + 1; j < c.points.size(); ++j) {
                if (std::abs(std::abs(c.points[i] - c.points[j]) - min_dist) > 1e-9) continue;
                EXPECT_EQ(std::popcount(i ^ j), 1)
                    << to_string(m) << " labels " << i << "," << j;
            }
        }
    }
}

TEST(Modulate, FourQamAverageEnergyExactlyOne) {
    const Constellation& c = constellation(Modulation::kQam4);
    for (const auto& p : c.points) EXPECT_NEAR(std::norm(p), 1.0, 1e-15);
}

TEST(Modulate, PaddingRecorded) {
    const std::vector<std::uint8_t> bits{1, 0, 1};
    const SymbolBlock block = modulate(bits, Modulation::kQam16);
    EXPECT_EQ(block.symbols.size(), 1u);
    EXPECT_EQ(block.pad_bits, 1);
    EXPECT_EQ(block.source_bits, 3u);
}

TEST(Modulate, BlockPowerExactlyNormalized) {
    Rng rng(9);
    for (const Modulation m : kAllSchemes) {
        std::vector<std::uint8_t> bits(240);
        for (auto& b : bits) b = rng.next_bit();
        const SymbolBlock block = modulate(bits, m);
        double power = 0;
        for (const auto& s : block.symbols) power += std::norm(s);
        power /= static_cast<double>(block.symbols.size());
        EXPECT_NEAR(power, 1.0, 1e-9) << to_string(m);
    }
}

TEST(Demodulate, BpskMaxLogMatchesClosedForm) {
    const std::vector<std::complex<double>> y{{0.5, 0.0}, {-1.25, 0.3}};
    const double sigma2 = 0.7;
    const auto llrs = demodulate_llr(y, Modulation::kBpsk, sigma2);
    ASSERT_EQ(llrs.size(), 2u);
    EXPECT_NEAR(llrs[0], 2.0 * 0.5 / sigma2, 1e-5);
    EXPECT_NEAR(llrs[1], 2.0 * -1.25 / sigma2, 1e-5);
}

TEST(Demodulate, NoiselessHardDecisionRoundTrip) {
    Rng rng(123);
    for (const Modulation m : kAllSchemes) {
        const int bps = bits_per_symbol(m);
        for (int trial = 0; trial < 500; ++trial) {
            std::vector<std::uint8_t> bits(static_cast<std::size_t>(bps) *
                                           static_cast<std::size_t>(rng.next_int(1, 40)));
            for (auto& b : bits) b = rng.next_bit();
            const SymbolBlock block = modulate(bits, m);
            const auto llrs = demodulate_llr(block.symbols, m, 0.0, block.gain);
            const auto decided = hard_decide(llrs);
            ASSERT_EQ(decided.size(), bits.size());
            EXPECT_EQ(decided, bits) << to_string(m) << " trial " << trial;
        }
    }
}

TEST(Demodulate, GainUndoneBeforeSlicing) {
    // a small 16QAM block has gain != 1; the demodulator must divide it out
    std::vector<std::uint8_t> bits{1, 1, 1, 1, 1, 1, 1, 1};  // two outer points
    const SymbolBlock block = modulate(bits, Modulation::kQam16);
    EXPECT_NE(block.gain, 1.0);
    const auto llrs = demodulate_llr(block.symbols, Modulation::kQam16, 1e-6, block.gain);
    EXPECT_EQ(hard_decide(llrs), bits);
}

}  // namespace
}  // namespace oarvc
