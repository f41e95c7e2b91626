#ifndef OARVC_PIPELINE_HPP
#define OARVC_PIPELINE_HPP

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oarvc/channel.hpp"
#include "oarvc/image.hpp"
#include "oarvc/ldpc.hpp"
#include "oarvc/modulation.hpp"
#include "oarvc/oar.hpp"
#include "oarvc/reconstruct.hpp"
#include "oarvc/render.hpp"
#include "oarvc/source_codec.hpp"
#include "oarvc/tensor.hpp"

namespace oarvc {

enum class CbrMode { kIdeal, kBlock };

struct PathPlan {
    LdpcConfig ldpc = LdpcConfig::rate_1_3();
    Modulation modulation = Modulation::kQam4;
};

// Image codec plug-in for the reference path. Built-ins: "raw" (packed RGB)
// and "ppm". External codecs are shell commands following the protocol
//   <command> encode <in.ppm> <out.bin> <quality>
//   <command> decode <in.bin> <out.ppm> <quality>
// and account bytes-per-frame as the encoded file size.
struct ImageCodecPlugin {
    enum class Kind { kRaw, kPpm, kExternal };
    Kind kind = Kind::kRaw;
    std::string command;  // external only
    int quality = 30;

    std::string id() const {
        switch (kind) {
            case Kind::kRaw: return "raw";
            case Kind::kPpm: return "ppm";
            case Kind::kExternal: return "external:" + command;
        }
        return "raw";
    }

    static ImageCodecPlugin from_id(const std::string& id) {
        if (id == "raw") return {};
        if (id == "ppm") return {Kind::kPpm, "", 30};
        if (id == "external") {
            const char* cmd = std::getenv("OARVC_IMAGE_CODEC");
            if (!cmd || !*cmd)
                throw std::runtime_error(
                    "external codec requested but OARVC_IMAGE_CODEC is not set");
            return {Kind::kExternal, cmd, 30};
        }
        if (id.rfind("external:", 0) == 0) return {Kind::kExternal, id.substr(9), 30};
        throw std::runtime_error("unknown image codec: " + id);
    }
};

// Transmission plan: the OAR path (default rate-1/3 LDPC + 4QAM, which stays
// distortion-free across the 0..20 dB operating range) and the
// reference-frame path.
struct TransmissionPlan {
    PathPlan oar{LdpcConfig::rate_1_3(), Modulation::kQam4};
    PathPlan reference{LdpcConfig::rate_1_2(), Modulation::kQam4};
    ImageCodecPlugin codec;
    ChannelConfig channel;
    CbrMode cbr_mode = CbrMode::kIdeal;
};

// ---------------------------------------------------------------------------
// CBR accounting: transmitted channel symbols per source symbol, where the
// source of a W x H RGB video of F frames counts W*H*3*F symbols.
// ---------------------------------------------------------------------------

inline double cbr(double symbols, int width, int height, int frames) {
    const double source = static_cast<double>(width) * height * 3.0 * frames;
    if (source <= 0) throw std::invalid_argument("cbr: empty source");
    if (symbols < 0) throw std::invalid_argument("cbr: negative symbol count");
    return symbols / source;
}

// Ideal-rate symbol count: exact code rate, no block padding.
inline std::uint64_t ideal_symbol_count(std::uint64_t bits, const LdpcConfig& ldpc,
                                        Modulation mod) {
    const std::uint64_t denom = static_cast<std::uint64_t>(ldpc.k) * bits_per_symbol(mod);
    return (bits * static_cast<std::uint64_t>(ldpc.n) + denom - 1) / denom;
}

// Physical symbol count: whole LDPC blocks, then whole symbols.
inline std::uint64_t block_symbol_count(std::uint64_t bits, const LdpcConfig& ldpc,
                                        Modulation mod) {
    const std::uint64_t blocks = std::max<std::uint64_t>(1, (bits + ldpc.k - 1) / ldpc.k);
    const std::uint64_t coded = blocks * static_cast<std::uint64_t>(ldpc.n);
    const int bps = bits_per_symbol(mod);
    return (coded + bps - 1) / bps;
}

inline std::uint64_t planned_symbol_count(std::uint64_t bits, const PathPlan& path,
                                          CbrMode mode) {
    return mode == CbrMode::kIdeal ? ideal_symbol_count(bits, path.ldpc, path.modulation)
                                   : block_symbol_count(bits, path.ldpc, path.modulation);
}

// ---------------------------------------------------------------------------
// Bit-level transport over LDPC + QAM + AWGN
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::uint8_t> bytes_to_bits(std::span<const std::uint8_t> bytes) {
    std::vector<std::uint8_t> bits;
    bits.reserve(bytes.size() * 8);
    for (const std::uint8_t b : bytes)
        for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1);
    return bits;
}

inline std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits,
                                               std::size_t byte_count) {
    std::vector<std::uint8_t> bytes(byte_count, 0);
    for (std::size_t i = 0; i < byte_count * 8 && i < bits.size(); ++i)
        if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (7 - (i % 8)));
    return bytes;
}

struct BitTransport {
    std::vector<std::uint8_t> bits;  // decoded info bits (padding trimmed by caller)
    bool ok = false;
    int blocks = 0;
    int failed_blocks = 0;
    std::uint64_t bit_errors = 0;   // vs. the transmitted info bits
    std::uint64_t symbols = 0;      // physically transmitted
    std::uint64_t info_bits = 0;
};

// Sends a bit string through pad -> LDPC -> QAM -> power normalization ->
// AWGN -> max-log LLR -> BP, block by block. `abort_on_failure` stops at the
// first failed block (whole payload is lost anyway).
inline BitTransport transport_bits(std::span<const std::uint8_t> payload_bits,
                                   const PathPlan& path, const ChannelConfig& channel,
                                   bool abort_on_failure) {
    const LdpcCode& code = shared_code(path.ldpc);
    const bool real_noise = path.modulation == Modulation::kBpsk;
    BitTransport out;
    out.info_bits = payload_bits.size();
    out.blocks = static_cast<int>((payload_bits.size() + code.k() - 1) / code.k());
    if (out.blocks == 0) out.blocks = 1;
    out.bits.reserve(static_cast<std::size_t>(out.blocks) * code.k());
    std::vector<std::uint8_t> info(code.k());
    for (int b = 0; b < out.blocks; ++b) {
        std::fill(info.begin(), info.end(), 0);
        const std::size_t begin = static_cast<std::size_t>(b) * code.k();
        for (int j = 0; j < code.k(); ++j)
            if (begin + j < payload_bits.size()) info[j] = payload_bits[begin + j] & 1;
        const auto coded = code.encode(info);
        const SymbolBlock block = modulate(coded, path.modulation);
        out.symbols += block.symbols.size();
        ChannelConfig block_channel = channel;
        block_channel.seed = channel.seed + 0x9e3779b9ull * static_cast<std::uint64_t>(b + 1);
        const auto noisy = awgn(block.symbols, block_channel, real_noise);
        const auto llrs =
            demodulate_llr(noisy, path.modulation, block_channel.sigma2(), block.gain);
        const auto outcome = code.decode({llrs.data(), static_cast<std::size_t>(code.n())},
                                         path.ldpc.max_iterations, path.ldpc.decoder);
        for (int j = 0; j < code.k(); ++j)
            if (outcome.info[j] != info[j]) ++out.bit_errors;
        if (!outcome.converged) {
            ++out.failed_blocks;
            if (abort_on_failure) return out;
        }
        out.bits.insert(out.bits.end(), outcome.info.begin(), outcome.info.end());
    }
    out.ok = out.failed_blocks == 0;
    return out;
}

}  // namespace detail

struct OarTransmission {
    std::optional<Bitstream> received;  // CRC-checked
    bool ok = false;
    int blocks = 0;
    int failed_blocks = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t symbols = 0;
    std::uint64_t payload_bits = 0;
    std::string error;
};

// OAR path: failure iff any LDPC block fails to converge or the CRC check
// fails afterwards. Cliff behavior is observable here.
inline OarTransmission transmit_oar(const Bitstream& bits, const TransmissionPlan& plan,
                                    const ChannelConfig& channel) {
    OarTransmission result;
    result.payload_bits = bits.total_bits();
    const auto payload = detail::bytes_to_bits(bits.bytes);
    const auto transport =
        detail::transport_bits(payload, plan.oar, channel, /*abort_on_failure=*/false);
    result.blocks = transport.blocks;
    result.failed_blocks = transport.failed_blocks;
    result.bit_errors = transport.bit_errors;
    result.symbols = transport.symbols;
    if (!transport.ok) {
        result.error = "ldpc decoding failure";
        return result;
    }
    const auto bytes = detail::bits_to_bytes(transport.bits, bits.bytes.size());
    DecodeResult decoded = decode_gop_bytes(bytes);
    if (!decoded.ok()) {
        result.error = decoded.error;
        return result;
    }
    result.received = std::move(decoded.stream);
    result.ok = true;
    return result;
}

// ---------------------------------------------------------------------------
// Reference-frame path (image codec + LDPC + QAM)
// ---------------------------------------------------------------------------

namespace detail {

inline std::filesystem::path scratch_file(const std::string& stem) {
    static std::uint64_t counter = 0;
    return std::filesystem::temp_directory_path() /
           (stem + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path,
                             std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write: " + path.string());
}

}  // namespace detail

inline std::vector<std::uint8_t> codec_encode_image(const Image& image,
                                                    const ImageCodecPlugin& codec) {
    switch (codec.kind) {
        case ImageCodecPlugin::Kind::kRaw: return image.rgb;
        case ImageCodecPlugin::Kind::kPpm: return ppm_bytes(image);
        case ImageCodecPlugin::Kind::kExternal: {
            const auto in = detail::scratch_file("oarvc_codec_in").string() + ".ppm";
            const auto out = detail::scratch_file("oarvc_codec_out").string() + ".bin";
            write_ppm(in, image);
            const std::string cmd = codec.command + " encode " + in + " " + out + " " +
                                    std::to_string(codec.quality);
            const int status = std::system(cmd.c_str());
            std::filesystem::remove(in);
            if (status != 0) {
                std::filesystem::remove(out);
                throw std::runtime_error("external codec failed: " + cmd);
            }
            auto bytes = detail::read_file_bytes(out);
            std::filesystem::remove(out);
            return bytes;
        }
    }
    return image.rgb;
}

inline Image codec_decode_image(std::span<const std::uint8_t> bytes,
                                const ImageCodecPlugin& codec, int width, int height) {
    switch (codec.kind) {
        case ImageCodecPlugin::Kind::kRaw: {
            Image img(width, height);
            if (bytes.size() < img.rgb.size())
                throw std::runtime_error("raw codec: payload shorter than frame");
            std::copy(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(img.rgb.size()),
                      img.rgb.begin());
            return img;
        }
        case ImageCodecPlugin::Kind::kPpm: return parse_ppm(bytes.data(), bytes.size());
        case ImageCodecPlugin::Kind::kExternal: {
            const auto in = detail::scratch_file("oarvc_codec_in").string() + ".bin";
            const auto out = detail::scratch_file("oarvc_codec_out").string() + ".ppm";
            detail::write_file_bytes(in, bytes);
            const std::string cmd = codec.command + " decode " + in + " " + out + " " +
                                    std::to_string(codec.quality);
            const int status = std::system(cmd.c_str());
            std::filesystem::remove(in);
            if (status != 0) {
                std::filesystem::remove(out);
                throw std::runtime_error("external codec failed: " + cmd);
            }
            const Image img = read_ppm(out);
            std::filesystem::remove(out);
            return img;
        }
    }
    return Image(width, height);
}

struct ReferenceTransmission {
    std::optional<Image> received;
    bool ok = false;
    int blocks = 0;
    int failed_blocks = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t symbols = 0;
    std::uint64_t payload_bits = 0;
    std::string error;
};

// Reference path: codec bytes over the same LDPC/QAM/AWGN transport. Any
// failed block loses the whole frame (cliff effect), so transmission aborts
// at the first failure.
inline ReferenceTransmission transmit_reference(const Image& frame, const TransmissionPlan& plan,
                                                const ChannelConfig& channel) {
    ReferenceTransmission result;
    std::vector<std::uint8_t> coded;
    try {
        coded = codec_encode_image(frame, plan.codec);
    } catch (const std::exception& e) {
        result.error = e.what();
        return result;
    }
    result.payload_bits = coded.size() * 8;
    const auto payload = detail::bytes_to_bits(coded);
    const auto transport =
        detail::transport_bits(payload, plan.reference, channel, /*abort_on_failure=*/true);
    result.blocks = transport.blocks;
    result.failed_blocks = transport.failed_blocks;
    result.bit_errors = transport.bit_errors;
    result.symbols = transport.symbols;
    if (!transport.ok) {
        result.error = "ldpc decoding failure";
        return result;
    }
    const auto bytes = detail::bits_to_bytes(transport.bits, coded.size());
    try {
        result.received = codec_decode_image(bytes, plan.codec, frame.width, frame.height);
    } catch (const std::exception& e) {
        result.error = e.what();
        return result;
    }
    result.ok = true;
    return result;
}

// ---------------------------------------------------------------------------
// OAR feature modulation (pointwise multiplication)
// ---------------------------------------------------------------------------

// F_out = F_in (*) m with m in the open interval (0, 1), broadcast over the
// channel axis when the multiplier has depth 1.
inline Tensor3 oar_modulate(const Tensor3& features, const Tensor3& multipliers) {
    if (multipliers.height != features.height || multipliers.width != features.width ||
        (multipliers.depth != features.depth && multipliers.depth != 1))
        throw std::invalid_argument("oar_modulate: shapes not broadcastable");
    for (const float m : multipliers.data)
        if (!(m > 0.0f && m < 1.0f))
            throw std::invalid_argument("oar_modulate: multiplier outside (0,1)");
    Tensor3 out = features;
    for (int i = 0; i < out.height; ++i) {
        for (int j = 0; j < out.width; ++j) {
            float* cell = out.at(i, j);
            const float* m = multipliers.at(i, j);
            for (int d = 0; d < out.depth; ++d)
                cell[d] *= multipliers.depth == 1 ? m[0] : m[d];
        }
    }
    return out;
}

// Default multiplier provider: sigmoid(a * fg + b) of the layout's foreground
// support, so foreground cells get ~0.982 and background cells 0.5 at the
// default a = 4, b = 0.
inline Tensor3 default_multiplier(const Tensor3& layout, double a = 4.0, double b = 0.0) {
    Tensor3 m(layout.height, layout.width, 1);
    for (int i = 0; i < layout.height; ++i) {
        for (int j = 0; j < layout.width; ++j) {
            const float* cell = layout.at(i, j);
            bool fg = false;
            for (int d = 0; d < layout.depth && !fg; ++d) fg = cell[d] != 0.0f;
            const double x = a * (fg ? 1.0 : 0.0) + b;
            m.at(i, j)[0] = static_cast<float>(1.0 / (1.0 + std::exp(-x)));
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// End-to-end run (Fig. 2)
// ---------------------------------------------------------------------------

struct GopTransmissionResult {
    OarTransmission oar;
    ReferenceTransmission reference;
    std::optional<GopStream> decoded;
    std::vector<Image> reconstructed;  // empty when either path failed
    double oar_cbr = 0.0;
    double reference_cbr = 0.0;
    double total_cbr = 0.0;

    bool ok() const { return oar.ok && reference.ok; }
};

// Reference pixels for a GoP: the stored payload when present (PPM), else the
// sprite rendering of the first frame.
inline Image reference_image(const GopStream& gop) {
    if (!gop.reference_payload.empty())
        return parse_ppm(gop.reference_payload.data(), gop.reference_payload.size());
    return render_frame(gop.frames.front(), gop.width, gop.height);
}

inline GopTransmissionResult run_gop(const GopStream& gop, const TransmissionPlan& plan,
                                     const ChannelConfig& channel,
                                     const QuantParams& quant = {}) {
    GopTransmissionResult result;
    const Bitstream bits = encode_gop(gop, quant);
    ChannelConfig oar_channel = channel;
    ChannelConfig ref_channel = channel;
    ref_channel.seed = channel.seed ^ 0xc0ffee123ull;
    result.oar = transmit_oar(bits, plan, oar_channel);

    const Image reference = reference_image(gop);
    result.reference = transmit_reference(reference, plan, ref_channel);

    // CBR accounting per the plan's mode; both paths share the same GoP of
    // source symbols.
    const std::uint64_t oar_symbols =
        plan.cbr_mode == CbrMode::kIdeal
            ? planned_symbol_count(bits.total_bits(), plan.oar, plan.cbr_mode)
            : result.oar.symbols;
    const std::uint64_t ref_symbols =
        plan.cbr_mode == CbrMode::kIdeal
            ? planned_symbol_count(result.reference.payload_bits, plan.reference, plan.cbr_mode)
            : block_symbol_count(result.reference.payload_bits, plan.reference.ldpc,
                                 plan.reference.modulation);
    result.oar_cbr = cbr(static_cast<double>(oar_symbols), gop.width, gop.height,
                         gop.gop_length);
    result.reference_cbr = cbr(static_cast<double>(ref_symbols), gop.width, gop.height,
                               gop.gop_length);
    result.total_cbr = result.oar_cbr + result.reference_cbr;

    if (result.oar.ok && result.reference.ok) {
        const DecodeResult decoded = decode_gop(*result.oar.received);
        if (decoded.ok()) {
            result.decoded = decoded.gop;
            result.reconstructed = reconstruct_gop(*decoded.gop, *result.reference.received);
        }
    }
    return result;
}

inline std::vector<GopTransmissionResult> run_end_to_end(std::span<const GopStream> gops,
                                                         const TransmissionPlan& plan,
                                                         const ChannelConfig& channel,
                                                         const QuantParams& quant = {}) {
    std::vector<GopTransmissionResult> results;
    results.reserve(gops.size());
    for (std::size_t g = 0; g < gops.size(); ++g) {
        ChannelConfig gop_channel = channel;
        gop_channel.seed = channel.seed + 0x51ed2700ull * (g + 1);
        results.push_back(run_gop(gops[g], plan, gop_channel, quant));
    }
    return results;
}

inline std::vector<GopTransmissionResult> run_end_to_end(std::span<const GopStream> gops,
                                                         const TransmissionPlan& plan,
                                                         const QuantParams& quant = {}) {
    return run_end_to_end(gops, plan, plan.channel, quant);
}

}  // namespace oarvc

#endif  // OARVC_PIPELINE_HPP
