#ifndef OARVC_CHANNEL_HPP
#define OARVC_CHANNEL_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <vector>

#include "oarvc/rng.hpp"

namespace oarvc {

// AWGN channel at unit signal power: sigma^2 = 10^(-snr_db/10).
struct ChannelConfig {
    double snr_db = 10.0;
    std::uint64_t seed = 1;

    double sigma2() const { return std::pow(10.0, -snr_db / 10.0); }
};

// Adds seeded Gaussian noise. The unit-variance realization depends only on
// the seed; the SNR enters as a pure scale factor, so sweeping SNR with a
// fixed seed scales one noise realization (monotone coupling).
//
// Complex mode: circularly symmetric, sigma^2/2 per real dimension.
// Real mode (BPSK): real noise with variance sigma^2.
inline std::vector<std::complex<double>> awgn(std::span<const std::complex<double>> symbols,
                                              const ChannelConfig& cfg, bool real_only = false) {
    Rng rng(cfg.seed);
    const double sigma = std::sqrt(cfg.sigma2());
    std::vector<std::complex<double>> out(symbols.begin(), symbols.end());
    if (real_only) {
        for (auto& s : out) s += std::complex<double>(sigma * rng.next_gaussian(), 0.0);
    } else {
        const double per_dim = sigma / std::sqrt(2.0);
        for (auto& s : out) {
            const double re = rng.next_gaussian();
            const double im = rng.next_gaussian();
            s += std::complex<double>(per_dim * re, per_dim * im);
        }
    }
    return out;
}

// Channel trace dump: little-endian float32 (re, im) pairs.
inline void dump_symbol_trace(const std::filesystem::path& path,
                              std::span<const std::complex<double>> symbols) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    for (const auto& s : symbols) {
        const float pair[2] = {static_cast<float>(s.real()), static_cast<float>(s.imag())};
        out.write(reinterpret_cast<const char*>(pair), sizeof(pair));
    }
    if (!out) throw std::runtime_error("short write: " + path.string());
}

inline std::vector<std::complex<double>> load_symbol_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::vector<std::complex<double>> symbols;
    float pair[2];
    while (in.read(reinterpret_cast<char*>(pair), sizeof(pair)))
        symbols.emplace_back(pair[0], pair[1]);
    return symbols;
}

}  // namespace oarvc

#endif  // OARVC_CHANNEL_HPP
