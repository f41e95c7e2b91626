// Acceptance suite: runs the release criteria end to end and prints one
// PASS/FAIL line per criterion. `--criterion N` runs a single one; the exit
// code is the number of failed criteria.

#include <array>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oarvc/oarvc.hpp"
#include "../support/random_gop.hpp"

using namespace oarvc;

namespace {

double wall_seconds(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string run_cli_capture(const std::string& args, int& exit_code) {
    const std::string cmd = std::string(OARVC_CLI_PATH) + " " + args + " 2>/dev/null";
    std::string text;
    std::array<char, 4096> buffer;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        exit_code = -1;
        return text;
    }
    std::size_t n;
    while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) text.append(buffer.data(), n);
    const int status = pclose(pipe);
    exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return text;
}

// val1-like scene: ~9 vehicles on a 512x512 canvas, T = 15
GopStream val1_like_gop() {
    SyntheticSceneSpec spec;
    spec.seed = 20240517;
    spec.object_count = 9;
    spec.width = 512;
    spec.height = 512;
    spec.gop_length = 15;
    return generate_synthetic(spec).gop;
}

// --------------------------------------------------------------------------
// criterion implementations; each returns true on pass and appends detail
// --------------------------------------------------------------------------

bool criterion_1_cbr_reproduction(std::string& detail) {
    bool ok = true;
    for (const auto& [bits, expected] :
         std::vector<std::pair<int, double>>{{366, 6.98e-4}, {219, 4.18e-4}}) {
        int code = -1;
        std::string out;
        const double seconds = wall_seconds([&] {
            out = run_cli_capture("report --mode cbr --bits " + std::to_string(bits) +
                                      " --ldpc-rate 1/3 --mod 4qam --w 512 --h 512",
                                  code);
        });
        const double value = out.empty() ? -1.0 : std::stod(out);
        const bool value_ok = std::fabs(value - expected) <= 0.05e-4;
        const bool time_ok = seconds < 1.0;
        ok = ok && code == 0 && value_ok && time_ok;
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%d bits -> %.3e (want %.2e, %.2fs); ", bits, value,
                      expected, seconds);
        detail += buf;
    }
    return ok;
}

bool criterion_2_sequence_cbr(std::string& detail) {
    bool ok = true;
    for (const auto& [kbps, expected] :
         std::vector<std::pair<double, double>>{{3.5, 2.67e-4}, {2.2, 1.68e-4}}) {
        int code = -1;
        char kbps_text[16];
        std::snprintf(kbps_text, sizeof(kbps_text), "%.1f", kbps);
        const std::string out = run_cli_capture(
            "report --mode seq-cbr --kbps " + std::string(kbps_text) +
                " --fps 25 --ldpc-rate 1/3 --mod 4qam --w 512 --h 512",
            code);
        const double value = out.empty() ? -1.0 : std::stod(out);
        ok = ok && code == 0 && std::fabs(value - expected) <= 0.05e-4;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%.1f kbps -> %.3e (want %.2e); ", kbps, value,
                      expected);
        detail += buf;
    }
    return ok;
}

bool criterion_3_distortion_free_oar(std::string& detail) {
    const GopStream gop = val1_like_gop();
    const Bitstream bits = encode_gop(gop, QuantParams{});
    TransmissionPlan plan;  // OAR path defaults to rate 1/3 + 4QAM
    const int trials = 1000;
    int failures = 0;
    const double seconds = wall_seconds([&] {
        for (int t = 0; t < trials; ++t) {
            const ChannelConfig channel{0.0, 0xACCE5500ull + static_cast<std::uint64_t>(t)};
            if (!transmit_oar(bits, plan, channel).ok) ++failures;
        }
    });
    const double rate = static_cast<double>(failures) / trials;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%d/%d GoP failures (rate %.4f, limit 1e-3) over %d blocks/GoP in %.1fs",
                  failures, trials, rate, static_cast<int>((bits.total_bits() + 1535) / 1536),
                  seconds);
    detail = buf;
    return rate <= 1e-3 && seconds <= 300.0;
}

bool criterion_4_cliff_effect(std::string& detail) {
    // 32x32 raw frame over rate 2/3 + 16QAM; any failed block loses the frame
    SyntheticSceneSpec spec;
    spec.seed = 5;
    spec.object_count = 2;
    spec.width = 32;
    spec.height = 32;
    spec.gop_length = 2;
    const Image frame = generate_synthetic(spec).renders[0];
    TransmissionPlan plan;
    plan.reference = {LdpcConfig::rate_2_3(), Modulation::kQam16};
    const int trials = 200;
    std::vector<double> success;
    for (const double snr : {0.0, 5.0, 10.0, 15.0, 20.0}) {
        int ok_count = 0;
        for (int t = 0; t < trials; ++t) {
            const ChannelConfig channel{snr, 0xC11FF000ull + static_cast<std::uint64_t>(t)};
            if (transmit_reference(frame, plan, channel).ok) ++ok_count;
        }
        success.push_back(static_cast<double>(ok_count) / trials);
    }
    std::ostringstream oss;
    oss << "success by SNR {0,5,10,15,20}: ";
    for (const double s : success) oss << s << " ";
    detail = oss.str();
    bool monotone = true;
    for (std::size_t i = 1; i < success.size(); ++i) {
        const double p = success[i - 1];
        const double slack = 2.0 * std::sqrt(std::max(p * (1 - p), 1e-9) / trials);
        if (success[i] < success[i - 1] - slack) monotone = false;
    }
    const double span = success.back() - success.front();
    return monotone && span >= 0.9 && success.front() <= 0.05 && success.back() >= 0.95;
}

bool criterion_5_source_codec_round_trip(std::string& detail) {
    const QuantParams params;
    int checked = 0;
    const double seconds = wall_seconds([&] {
        for (std::uint64_t seed = 1; seed <= 500; ++seed) {
            const GopStream gop = testsupport::random_gop(seed);
            const Bitstream bits = encode_gop(gop, params);
            // determinism
            if (encode_gop(gop, params).bytes != bits.bytes)
                throw std::runtime_error("non-deterministic bytes at seed " +
                                         std::to_string(seed));
            const DecodeResult decoded = decode_gop(bits);
            const GopStream expected = quantize_gop(gop, params);
            if (!decoded.ok() || decoded.gop->frames != expected.frames ||
                decoded.gop->width != expected.width ||
                decoded.gop->height != expected.height ||
                decoded.gop->gop_length != expected.gop_length)
                throw std::runtime_error("round-trip mismatch at seed " + std::to_string(seed));
            // monotone bits under object insertion
            GopStream grown = gop;
            OarFrame& f0 = grown.frames.front();
            const ObjectId extra = 7000000 + static_cast<ObjectId>(seed);
            f0.objects.push_back(extra);
            f0.attributes[extra] = {0, 0, 1, 1, 0.0, Category::kOthers};
            if (encode_gop(grown, params).total_bits() < bits.total_bits())
                throw std::runtime_error("bits shrank when adding an object at seed " +
                                         std::to_string(seed));
            ++checked;
        }
    });
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d seeded GoPs field-exact in %.1fs (limit 30s)", checked,
                  seconds);
    detail = buf;
    return checked == 500 && seconds < 30.0;
}

bool criterion_6_layout_exactness(std::string& detail) {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        const int width = static_cast<int>(rng.next_int(16, 96));
        const int height = static_cast<int>(rng.next_int(16, 96));
        OarFrame frame;
        const int count = static_cast<int>(rng.next_int(0, 6));
        for (ObjectId id = 1; id <= static_cast<ObjectId>(count); ++id) {
            Attributes a;
            a.w = static_cast<int>(rng.next_int(1, width));
            a.h = static_cast<int>(rng.next_int(1, height));
            a.x = static_cast<int>(rng.next_int(0, width - 1));
            a.y = static_cast<int>(rng.next_int(0, height - 1));
            frame.objects.push_back(id);
            frame.attributes[id] = a;
        }
        const int depth = 6;
        std::vector<std::vector<float>> features;
        for (int n = 0; n < count; ++n) {
            std::vector<float> f(depth);
            for (auto& v : f) v = static_cast<float>(rng.next_int(-9, 9));
            features.push_back(std::move(f));
        }
        const Tensor3 layout = build_layout(features, frame, height, width);
        for (int i = 0; i < height; ++i) {
            for (int j = 0; j < width; ++j) {
                std::vector<float> expected(depth, 0.0f);
                bool covered = false;
                for (std::size_t n = 0; n < frame.objects.size(); ++n) {
                    const Attributes& a = frame.attributes.at(frame.objects[n]);
                    if (i >= a.y && i <= a.y + a.h && j >= a.x && j <= a.x + a.w) {
                        covered = true;
                        for (int d = 0; d < depth; ++d) expected[d] += features[n][d];
                    }
                }
                const float* cell = layout.at(i, j);
                for (int d = 0; d < layout.depth; ++d) {
                    if (cell[d] != expected[d]) {
                        detail = "mismatch at seed " + std::to_string(seed);
                        return false;
                    }
                    if (!covered && cell[d] != 0.0f) {
                        detail = "nonzero outside boxes at seed " + std::to_string(seed);
                        return false;
                    }
                }
            }
        }
        ++checked;
    }
    detail = std::to_string(checked) + " randomized frames exact (support, single, overlap)";
    return checked == 100;
}

bool criterion_7_reconstruction_fidelity(std::string& detail) {
    double min_psnr = 1e300;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        // disjoint cell placement so trajectories never overlap: 2x2 grid
        Rng rng(seed * 77 + 1);
        SyntheticSceneSpec spec;
        spec.width = 256;
        spec.height = 256;
        spec.gop_length = 10;
        for (int cell = 0; cell < 4; ++cell) {
            MotionProgram p;
            const int cx = (cell % 2) * 128;
            const int cy = (cell / 2) * 128;
            p.start.w = static_cast<int>(rng.next_int(16, 40));
            p.start.h = static_cast<int>(rng.next_int(16, 40));
            p.dx = static_cast<double>(rng.next_int(-3, 3));
            p.dy = static_cast<double>(rng.next_int(-3, 3));
            p.start.x = cx + 34 + static_cast<int>(rng.next_int(0, 16));
            p.start.y = cy + 34 + static_cast<int>(rng.next_int(0, 16));
            p.start.category = static_cast<Category>(rng.next_int(0, 3));
            spec.programs.push_back(p);
        }
        const SyntheticScene scene = generate_synthetic(spec);

        // through the codec, then reconstruct from the oracle reference
        const DecodeResult decoded = decode_gop(encode_gop(scene.gop, QuantParams{}));
        if (!decoded.ok()) {
            detail = "codec failure at seed " + std::to_string(seed);
            return false;
        }
        const auto frames = reconstruct_gop(*decoded.gop, scene.renders[0]);

        const OarFidelity fidelity = metric_oar_fidelity(scene.gop, decoded.gop);
        if (fidelity.box_iou != 1.0) {
            detail = "decoded bbox IoU " + std::to_string(fidelity.box_iou) + " at seed " +
                     std::to_string(seed);
            return false;
        }
        for (std::size_t t = 0; t < frames.size(); ++t) {
            const auto& frame_oar = decoded.gop->frames[t];
            // per-object detected support must reproduce the OAR bbox exactly
            for (const ObjectId id : frame_oar.objects) {
                const Attributes& a = frame_oar.attributes.at(id);
                int min_x = 1 << 30, min_y = 1 << 30, max_x = -1, max_y = -1;
                for (int y = 0; y < spec.height; ++y) {
                    for (int x = 0; x < spec.width; ++x) {
                        const std::uint8_t* p = frames[t].pixel(x, y);
                        const bool fg = p[0] != kBackgroundColor[0] ||
                                        p[1] != kBackgroundColor[1] ||
                                        p[2] != kBackgroundColor[2];
                        if (!fg) continue;
                        if (x < a.x || x >= a.right() || y < a.y || y >= a.bottom()) continue;
                        min_x = std::min(min_x, x);
                        max_x = std::max(max_x, x);
                        min_y = std::min(min_y, y);
                        max_y = std::max(max_y, y);
                    }
                }
                const bool tight = min_x == a.x && min_y == a.y && max_x == a.right() - 1 &&
                                   max_y == a.bottom() - 1;
                if (!tight) {
                    detail = "painted support != bbox at seed " + std::to_string(seed) +
                             " frame " + std::to_string(t + 1);
                    return false;
                }
            }
            const auto boxes = foreground_boxes(frame_oar);
            if (boxes.empty()) continue;
            const double psnr = metric_psnr(frames[t], scene.renders[t], boxes);
            min_psnr = std::min(min_psnr, psnr);
            if (psnr < 30.0) {
                detail = "foreground PSNR " + std::to_string(psnr) + " dB at seed " +
                         std::to_string(seed);
                return false;
            }
        }
    }
    std::ostringstream oss;
    oss << "10 scenes, IoU 1.0, min foreground PSNR ";
    if (min_psnr > 1e299)
        oss << "inf";
    else
        oss << min_psnr;
    oss << " dB";
    detail = oss.str();
    return true;
}

bool criterion_8_fusion_and_warp_identities(std::string& detail) {
    Rng rng(2029);
    Image synth(32, 24), warped(32, 24);
    for (auto& v : synth.rgb) v = static_cast<std::uint8_t>(rng.next_int(0, 255));
    for (auto& v : warped.rgb) v = static_cast<std::uint8_t>(rng.next_int(0, 255));
    if (fuse(synth, warped, FusionMask(32, 24, 1.0f)) != synth) {
        detail = "W=1 identity failed";
        return false;
    }
    if (fuse(synth, warped, FusionMask(32, 24, 0.0f)) != warped) {
        detail = "W=0 identity failed";
        return false;
    }
    FusionMask mask(32, 24);
    for (auto& w : mask.w) w = static_cast<float>(rng.next_double());
    const Image blended = fuse(synth, warped, mask);
    for (std::size_t i = 0; i < blended.rgb.size(); ++i) {
        const int lo = std::min(synth.rgb[i], warped.rgb[i]);
        const int hi = std::max(synth.rgb[i], warped.rgb[i]);
        if (blended.rgb[i] < lo || blended.rgb[i] > hi) {
            detail = "convexity bound violated";
            return false;
        }
    }
    Image image(40, 30);
    for (auto& v : image.rgb) v = static_cast<std::uint8_t>(rng.next_int(0, 255));
    if (warp(image, FlowField(40, 30)) != image) {
        detail = "zero-flow warp identity failed";
        return false;
    }
    detail = "W in {0,1} exact, convexity bound holds, warp(.,0) bit-exact";
    return true;
}

bool criterion_9_graph_equivariance_determinism(std::string& detail) {
    const GraphWeights weights = seeded_weights(kDefaultWeightsSeed);
    OarFrame frame;
    frame.objects = {3, 8, 11};
    frame.attributes[3] = {10, 10, 20, 12, 45.0, Category::kCar};
    frame.attributes[8] = {40, 30, 16, 16, 90.0, Category::kBus};
    frame.attributes[11] = {60, 50, 10, 10, 180.0, Category::kVan};
    frame.relations = {{3, 8, RelationLabel::kOcclusion},
                       {8, 11, RelationLabel::kOcclusion},
                       {3, kBackgroundId, RelationLabel::kIn},
                       {8, kBackgroundId, RelationLabel::kIn},
                       {11, kBackgroundId, RelationLabel::kIn}};
    const auto base = graph_compute(embed(frame, weights), weights);
    OarFrame permuted = frame;
    permuted.objects = {11, 3, 8};
    const auto shuffled = graph_compute(embed(permuted, weights), weights);
    // map node order by id: frame order (3,8,11) + background
    if (shuffled[1] != base[0] || shuffled[2] != base[1] || shuffled[0] != base[2] ||
        shuffled[3] != base[3]) {
        detail = "permutation equivariance violated";
        return false;
    }
    const auto again = graph_compute(embed(frame, seeded_weights(kDefaultWeightsSeed)),
                                     seeded_weights(kDefaultWeightsSeed));
    if (again != base) {
        detail = "determinism violated across runs with a fixed seed";
        return false;
    }
    detail = "bit-exact under permutation and across runs";
    return true;
}

bool criterion_10_constellation_contracts(std::string& detail) {
    Rng rng(424242);
    for (const Modulation m : {Modulation::kBpsk, Modulation::kQam4, Modulation::kQam16,
                               Modulation::kQam64}) {
        const Constellation& c = constellation(m);
        double energy = 0;
        for (const auto& p : c.points) energy += std::norm(p);
        energy /= static_cast<double>(c.points.size());
        if (std::fabs(energy - 1.0) > 1e-12) {
            detail = to_string(m) + ": mean energy off by more than 1e-12";
            return false;
        }
        double min_dist = 1e300;
        for (std::size_t i = 0; i < c.points.size(); ++i)
            for (std::size_t j = i + 1; j < c.points.size(); ++j)
                min_dist = std::min(min_dist, std::abs(c.points[i] - c.points[j]));
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            for (std::size_t j = i + 1; j < c.points.size(); ++j) {
                if (std::abs(std::abs(c.points[i] - c.points[j]) - min_dist) > 1e-9) continue;
                int diff = 0;
                for (std::size_t v = i ^ j; v; v >>= 1) diff += static_cast<int>(v & 1);
                if (diff != 1) {
                    detail = to_string(m) + ": adjacent labels differ in " +
                             std::to_string(diff) + " bits";
                    return false;
                }
            }
        }
        for (int trial = 0; trial < 10000; ++trial) {
            std::vector<std::uint8_t> bits(static_cast<std::size_t>(c.bps) *
                                           static_cast<std::size_t>(rng.next_int(1, 8)));
            for (auto& b : bits) b = rng.next_bit();
            const SymbolBlock block = modulate(bits, m);
            const auto llrs = demodulate_llr(block.symbols, m, 0.0, block.gain);
            if (hard_decide(llrs) != bits) {
                detail = to_string(m) + ": noiseless round trip failed at trial " +
                         std::to_string(trial);
                return false;
            }
        }
    }
    detail = "unit energy (1e-12), Gray adjacency, 10^4 noiseless round trips per scheme";
    return true;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);

    const std::vector<Criterion> criteria = {
        {1, "CBR accounting reproduction (366 -> 6.98e-4, 219 -> 4.18e-4)",
         criterion_1_cbr_reproduction},
        {2, "sequence CBR at 25 fps (3.5 kbps -> 2.67e-4, 2.2 kbps -> 1.68e-4)",
         criterion_2_sequence_cbr},
        {3, "distortion-free OAR path at 0 dB (rate 1/3 + 4QAM, 1000 trials)",
         criterion_3_distortion_free_oar},
        {4, "cliff effect for rate 2/3 + 16QAM over 0..20 dB", criterion_4_cliff_effect},
        {5, "source codec round trip over 500 seeded GoPs", criterion_5_source_codec_round_trip},
        {6, "layout exactness on 100 randomized frames", criterion_6_layout_exactness},
        {7, "reconstruction proxy fidelity on rigid-translation scenes",
         criterion_7_reconstruction_fidelity},
        {8, "fusion identities and warp identity", criterion_8_fusion_and_warp_identities},
        {9, "graph compute equivariance and determinism",
         criterion_9_graph_equivariance_determinism},
        {10, "constellation contracts", criterion_10_constellation_contracts},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        if (only != 0 && criterion.id != only) continue;
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = e.what();
        }
        std::printf("criterion %2d %s: %s%s%s\n", criterion.id, ok ? "PASS" : "FAIL",
                    criterion.name, detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
