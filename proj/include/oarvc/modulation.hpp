#ifndef OARVC_MODULATION_HPP
#define OARVC_MODULATION_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace oarvc {

enum class Modulation { kBpsk, kQam4, kQam16, kQam64 };

inline int bits_per_symbol(Modulation m) {
    switch (m) {
        case Modulation::kBpsk: return 1;
        case Modulation::kQam4: return 2;
        case Modulation::kQam16: return 4;
        case Modulation::kQam64: return 6;
    }
    return 1;
}

inline std::string to_string(Modulation m) {
    switch (m) {
        case Modulation::kBpsk: return "bpsk";
        case Modulation::kQam4: return "4qam";
        case Modulation::kQam16: return "16qam";
        case Modulation::kQam64: return "64qam";
    }
    return "bpsk";
}

inline Modulation modulation_from_string(std::string_view s) {
    if (s == "bpsk") return Modulation::kBpsk;
    if (s == "4qam" || s == "qpsk") return Modulation::kQam4;
    if (s == "16qam") return Modulation::kQam16;
    if (s == "64qam") return Modulation::kQam64;
    throw std::invalid_argument("unknown modulation: " + std::string(s));
}

// Gray-labeled square constellations with unit average energy. Labels pack
// the in-phase bits in the high half and quadrature bits in the low half;
// bit 0 of a symbol's bit group is the label MSB.
struct Constellation {
    std::vector<std::complex<double>> points;  // indexed by label
    int bps = 1;
};

namespace detail {

// Reflected Gray code order of per-dimension labels, mapped to ascending
// amplitude levels -(2^m-1), ..., -1, +1, ..., +(2^m-1).
inline std::vector<int> gray_sequence(int bits) {
    std::vector<int> seq(1 << bits);
    for (int i = 0; i < (1 << bits); ++i) seq[i] = i ^ (i >> 1);
    return seq;
}

inline Constellation make_constellation(Modulation m) {
    Constellation c;
    c.bps = bits_per_symbol(m);
    if (m == Modulation::kBpsk) {
        c.points = {{1.0, 0.0}, {-1.0, 0.0}};  // bit 0 -> +1, bit 1 -> -1
        return c;
    }
    const int dim_bits = c.bps / 2;
    const int levels = 1 << dim_bits;
    const auto gray = gray_sequence(dim_bits);
    // amplitude level for each dim label
    std::vector<double> amp(levels);
    for (int pos = 0; pos < levels; ++pos) amp[gray[pos]] = static_cast<double>(2 * pos + 1 - levels);
    double energy = 0;
    for (int i = 0; i < levels; ++i) energy += amp[i] * amp[i];
    const double scale = 1.0 / std::sqrt(2.0 * energy / levels);
    c.points.resize(1 << c.bps);
    for (int label = 0; label < (1 << c.bps); ++label) {
        const int i_label = label >> dim_bits;
        const int q_label = label & (levels - 1);
        c.points[label] = {amp[i_label] * scale, amp[q_label] * scale};
    }
    return c;
}

}  // namespace detail

inline const Constellation& constellation(Modulation m) {
    static const Constellation bpsk = detail::make_constellation(Modulation::kBpsk);
    static const Constellation qam4 = detail::make_constellation(Modulation::kQam4);
    static const Constellation qam16 = detail::make_constellation(Modulation::kQam16);
    static const Constellation qam64 = detail::make_constellation(Modulation::kQam64);
    switch (m) {
        case Modulation::kBpsk: return bpsk;
        case Modulation::kQam4: return qam4;
        case Modulation::kQam16: return qam16;
        case Modulation::kQam64: return qam64;
    }
    return bpsk;
}

// Channel symbols plus everything a receiver needs to undo block-level power
// normalization and bit padding.
struct SymbolBlock {
    std::vector<std::complex<double>> symbols;
    std::size_t source_bits = 0;  // before padding
    int pad_bits = 0;
    Modulation scheme = Modulation::kBpsk;
    double gain = 1.0;  // normalization factor applied to every symbol
};

inline SymbolBlock modulate(std::span<const std::uint8_t> bits, Modulation scheme) {
    const Constellation& c = constellation(scheme);
    SymbolBlock block;
    block.scheme = scheme;
    block.source_bits = bits.size();
    const int bps = c.bps;
    const std::size_t padded = (bits.size() + bps - 1) / bps * bps;
    block.pad_bits = static_cast<int>(padded - bits.size());
    block.symbols.reserve(padded / bps);
    for (std::size_t i = 0; i < padded; i += bps) {
        int label = 0;
        for (int b = 0; b < bps; ++b) {
            const int bit = (i + b) < bits.size() ? (bits[i + b] & 1) : 0;
            label = (label << 1) | bit;
        }
        block.symbols.push_back(c.points[label]);
    }
    // exact unit average power per block
    double power = 0;
    for (const auto& s : block.symbols) power += std::norm(s);
    if (!block.symbols.empty() && power > 0) {
        block.gain = std::sqrt(static_cast<double>(block.symbols.size()) / power);
        for (auto& s : block.symbols) s *= block.gain;
    }
    return block;
}

// Max-log per-bit LLRs; positive means bit 0 is more likely. `gain` is the
// block normalization applied at the transmitter. BPSK noise is real with
// variance sigma2; QAM noise is complex with total variance sigma2.
inline std::vector<float> demodulate_llr(std::span<const std::complex<double>> symbols,
                                         Modulation scheme, double sigma2, double gain = 1.0) {
    const Constellation& c = constellation(scheme);
    const int bps = c.bps;
    const double denom = std::max(
        scheme == Modulation::kBpsk ? 2.0 * sigma2 / (gain * gain) : sigma2 / (gain * gain),
        1e-12);
    constexpr float kLlrClamp = 200.0f;
    std::vector<float> llrs;
    llrs.reserve(symbols.size() * bps);
    std::vector<double> best0(bps), best1(bps);
    for (const auto& raw : symbols) {
        const std::complex<double> y = raw / gain;
        std::fill(best0.begin(), best0.end(), 1e300);
        std::fill(best1.begin(), best1.end(), 1e300);
        for (std::size_t label = 0; label < c.points.size(); ++label) {
            const double d = std::norm(y - c.points[label]);
            for (int b = 0; b < bps; ++b) {
                const bool one = (label >> (bps - 1 - b)) & 1u;
                auto& best = one ? best1[b] : best0[b];
                best = std::min(best, d);
            }
        }
        for (int b = 0; b < bps; ++b) {
            const double llr = (best1[b] - best0[b]) / denom;
            llrs.push_back(static_cast<float>(std::clamp(llr, -static_cast<double>(kLlrClamp),
                                                         static_cast<double>(kLlrClamp))));
        }
    }
    return llrs;
}

inline std::vector<std::uint8_t> hard_decide(std::span<const float> llrs) {
    std::vector<std::uint8_t> bits(llrs.size());
    for (std::size_t i = 0; i < llrs.size(); ++i) bits[i] = llrs[i] < 0 ? 1 : 0;
    return bits;
}

}  // namespace oarvc

#endif  // OARVC_MODULATION_HPP
