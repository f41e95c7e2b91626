// oarvc: OAR-based video codec and channel simulation toolbox.
//
// Subcommands: extract, encode, decode, transmit, simulate, synth, report.
// Every stochastic subcommand requires an explicit --seed; runs are
// reproducible from their recorded configuration.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "oarvc/oarvc.hpp"

namespace fs = std::filesystem;
using namespace oarvc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitChannelDominated = 2;

struct IngestOptions {
    std::string tracks;
    std::string format = "jsonl";
    std::string mask;
    int gop = 15;
    int width = 512;
    int height = 512;
};

void add_ingest_options(CLI::App* cmd, IngestOptions& opt, bool tracks_required) {
    auto* tracks = cmd->add_option("--tracks,--in", opt.tracks, "track annotation file");
    if (tracks_required) tracks->required();
    cmd->add_option("--format", opt.format, "track format: jsonl|xml")
        ->check(CLI::IsMember({"jsonl", "xml"}));
    cmd->add_option("--mask", opt.mask, "foreground mask rectangles (jsonl)");
    cmd->add_option("--gop", opt.gop, "GoP length T")->check(CLI::Range(2, 255));
    cmd->add_option("--w", opt.width, "canvas width")->check(CLI::PositiveNumber);
    cmd->add_option("--h", opt.height, "canvas height")->check(CLI::PositiveNumber);
}

std::vector<GopStream> ingest_gops(const IngestOptions& opt) {
    const auto records = parse_tracks(
        opt.tracks, opt.format == "xml" ? TrackFormat::kDetracXml : TrackFormat::kJsonl);
    ForegroundMask mask;
    if (!opt.mask.empty()) mask = load_mask(opt.mask);
    return build_oar_sequence(records, mask, opt.gop, opt.width, opt.height);
}

std::vector<double> parse_snr_sweep(const std::string& text) {
    std::vector<double> points;
    const auto colon1 = text.find(':');
    if (colon1 != std::string::npos) {
        const auto colon2 = text.find(':', colon1 + 1);
        if (colon2 == std::string::npos)
            throw std::runtime_error("--snr sweep must be start:stop:step");
        const double start = std::stod(text.substr(0, colon1));
        const double stop = std::stod(text.substr(colon1 + 1, colon2 - colon1 - 1));
        const double step = std::stod(text.substr(colon2 + 1));
        if (step <= 0) throw std::runtime_error("--snr step must be positive");
        for (double v = start; v <= stop + 1e-9; v += step) points.push_back(v);
        return points;
    }
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) points.push_back(std::stod(token));
    if (points.empty()) throw std::runtime_error("--snr: no SNR points given");
    return points;
}

PathPlan make_path(const std::string& rate, const std::string& mod) {
    return {LdpcConfig::from_rate(rate), modulation_from_string(mod)};
}

// ---------------------------------------------------------------------------

int cmd_extract(const IngestOptions& ingest, const std::string& out_path) {
    const auto gops = ingest_gops(ingest);
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    write_oar_jsonl(out, gops);
    std::fprintf(stderr, "extract: %zu GoPs -> %s\n", gops.size(), out_path.c_str());
    return kExitOk;
}

int cmd_encode(const IngestOptions& ingest, int q, double fps, const std::string& out_path) {
    const auto gops = ingest_gops(ingest);
    QuantParams params{q};
    std::vector<Bitstream> streams;
    std::uint64_t total_bits = 0;
    for (const GopStream& gop : gops) {
        streams.push_back(encode_gop(gop, params));
        total_bits += streams.back().total_bits();
    }
    save_stream(out_path, streams);
    const std::uint64_t frames = static_cast<std::uint64_t>(gops.size()) * ingest.gop;
    const double kbps =
        frames ? static_cast<double>(total_bits) / (static_cast<double>(frames) / fps) / 1000.0
               : 0.0;
    std::fprintf(stderr, "encode: %zu GoPs, %llu bits total, %.3f kbps at %.1f fps -> %s\n",
                 streams.size(), static_cast<unsigned long long>(total_bits), kbps, fps,
                 out_path.c_str());
    return kExitOk;
}

int cmd_decode(const std::string& in_path, const std::string& out_path) {
    const auto raw = load_stream(in_path);
    std::vector<GopStream> gops;
    for (std::size_t g = 0; g < raw.size(); ++g) {
        DecodeResult result = decode_gop_bytes(raw[g]);
        if (!result.ok()) {
            std::fprintf(stderr, "decode: GoP %zu failed: %s\n", g, result.error.c_str());
            return kExitValidation;
        }
        gops.push_back(std::move(*result.gop));
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    write_oar_jsonl(out, gops);
    std::fprintf(stderr, "decode: %zu GoPs -> %s\n", gops.size(), out_path.c_str());
    return kExitOk;
}

struct TransmitOptions {
    std::string in;
    std::string image;
    std::string out;
    std::string codec = "raw";
    std::string ldpc = "1/3";
    std::string mod = "4qam";
    std::string decoder = "sum-product";
    double snr = 10.0;
    std::uint64_t seed = 0;
    int trials = 1;
    int max_iterations = 50;
    double fail_threshold = 0.5;
};

int cmd_transmit(const TransmitOptions& opt) {
    TransmissionPlan plan;
    plan.oar = make_path(opt.ldpc, opt.mod);
    plan.reference = plan.oar;
    plan.codec = ImageCodecPlugin::from_id(opt.codec);
    if (opt.decoder == "min-sum") {
        plan.oar.ldpc.decoder = LdpcConfig::Decoder::kMinSum;
        plan.reference.ldpc.decoder = LdpcConfig::Decoder::kMinSum;
    }
    plan.oar.ldpc.max_iterations = opt.max_iterations;
    plan.reference.ldpc.max_iterations = opt.max_iterations;

    int failures = 0;
    if (!opt.image.empty()) {
        const Image frame = read_ppm(opt.image);
        std::optional<Image> last;
        for (int t = 0; t < opt.trials; ++t) {
            const ChannelConfig channel{opt.snr,
                                        opt.seed + 0x7f4a7c15ull * static_cast<std::uint64_t>(t)};
            const auto result = transmit_reference(frame, plan, channel);
            if (!result.ok)
                ++failures;
            else
                last = result.received;
        }
        if (last && !opt.out.empty()) write_ppm(opt.out, *last);
        std::fprintf(stderr, "transmit: image %s, %d/%d trials failed\n", opt.image.c_str(),
                     failures, opt.trials);
    } else {
        const auto raw = load_stream(opt.in);
        std::vector<Bitstream> received;
        for (int t = 0; t < opt.trials; ++t) {
            const ChannelConfig channel{opt.snr,
                                        opt.seed + 0x7f4a7c15ull * static_cast<std::uint64_t>(t)};
            std::vector<Bitstream> round;
            bool all_ok = true;
            for (std::size_t g = 0; g < raw.size(); ++g) {
                Bitstream bits;
                bits.bytes = raw[g];
                ChannelConfig gop_channel = channel;
                gop_channel.seed = channel.seed + 0x51ed2700ull * (g + 1);
                const auto result = transmit_oar(bits, plan, gop_channel);
                if (!result.ok) {
                    all_ok = false;
                    break;
                }
                round.push_back(*result.received);
            }
            if (!all_ok)
                ++failures;
            else
                received = std::move(round);
        }
        if (!received.empty() && !opt.out.empty()) save_stream(opt.out, received);
        std::fprintf(stderr, "transmit: %zu GoPs, %d/%d trials failed\n", raw.size(), failures,
                     opt.trials);
    }
    const double fer = static_cast<double>(failures) / std::max(1, opt.trials);
    return fer >= opt.fail_threshold ? kExitChannelDominated : kExitOk;
}

struct SimulateOptions {
    IngestOptions ingest;
    bool use_synth = true;
    int synth_objects = 6;
    std::uint64_t synth_seed = 1;
    std::string snr = "0:20:5";
    std::string ldpc = "1/3";
    std::string mod = "4qam";
    std::string ref_ldpc = "1/2";
    std::string ref_mod = "4qam";
    std::string codec = "raw";
    std::string cbr_mode = "ideal";
    std::string out;
    std::string json;
    std::string experiment = "simulate";
    int q = 8;
    double fps = 25.0;
    int trials = 10;
    std::uint64_t seed = 0;
    double fail_threshold = 1.1;  // exit 2 only when asked for
};

ReportRecord simulate_point(const std::vector<GopStream>& gops, const TransmissionPlan& plan,
                            double snr_db, std::uint64_t seed, int trials, double fps, int q) {
    ReportRecord rec;
    rec.snr_db = snr_db;
    rec.seed = seed;

    std::uint64_t gop_failures = 0, gop_trials = 0;
    std::uint64_t bit_errors = 0, bits_sent = 0;
    double cbr_sum = 0, kbps_sum = 0;
    double psnr_sum = 0, ssim_sum = 0, iou_sum = 0, cat_sum = 0, mae_sum = 0;
    std::uint64_t metric_gops = 0;

    const QuantParams params{q};
    for (int trial = 0; trial < trials; ++trial) {
        for (std::size_t g = 0; g < gops.size(); ++g) {
            ChannelConfig channel{snr_db, seed + 0x9e3779b97f4a7c15ull * (trial + 1) +
                                              0x51ed2700ull * g};
            const auto result = run_gop(gops[g], plan, channel, params);
            ++gop_trials;
            if (!result.ok()) ++gop_failures;
            bit_errors += result.oar.bit_errors + result.reference.bit_errors;
            bits_sent += result.oar.payload_bits + result.reference.payload_bits;
            if (trial == 0) {
                // rate + semantic/pixel metrics come from the first trial
                cbr_sum += result.total_cbr;
                kbps_sum += bit_account(encode_gop(gops[g], params)).kbps(fps);
                const auto fidelity = metric_oar_fidelity(gops[g], result.decoded);
                iou_sum += fidelity.box_iou;
                cat_sum += fidelity.category_accuracy;
                mae_sum += fidelity.angle_mae_deg;
                if (result.ok() && !result.reconstructed.empty()) {
                    const Image reference = reference_image(gops[g]);
                    const auto offline =
                        reconstruct_gop(quantize_gop(gops[g], params), reference);
                    double psnr = 0, ssim = 0;
                    for (std::size_t t = 0; t < offline.size(); ++t) {
                        const double p = metric_psnr(offline[t], result.reconstructed[t]);
                        psnr += std::isinf(p) ? 99.0 : p;  // capped sentinel for averaging
                        ssim += metric_ssim(offline[t], result.reconstructed[t]);
                    }
                    psnr_sum += psnr / static_cast<double>(offline.size());
                    ssim_sum += ssim / static_cast<double>(offline.size());
                }
                ++metric_gops;
            }
        }
    }
    rec.fer = gop_trials ? static_cast<double>(gop_failures) / gop_trials : 0.0;
    rec.ber = bits_sent ? static_cast<double>(bit_errors) / bits_sent : 0.0;
    if (metric_gops) {
        rec.cbr = cbr_sum / metric_gops;
        rec.kbps = kbps_sum / metric_gops;
        rec.psnr_db = psnr_sum / metric_gops;
        rec.ssim = ssim_sum / metric_gops;
        rec.box_iou = iou_sum / metric_gops;
        rec.category_accuracy = cat_sum / metric_gops;
        rec.angle_mae_deg = mae_sum / metric_gops;
    }
    return rec;
}

int cmd_simulate(const SimulateOptions& opt) {
    std::vector<GopStream> gops;
    if (opt.use_synth) {
        SyntheticSceneSpec spec;
        spec.seed = opt.synth_seed;
        spec.object_count = opt.synth_objects;
        spec.width = opt.ingest.width;
        spec.height = opt.ingest.height;
        spec.gop_length = opt.ingest.gop;
        gops.push_back(generate_synthetic(spec).gop);
    } else {
        gops = ingest_gops(opt.ingest);
        if (gops.empty()) throw std::runtime_error("no complete GoPs in the input tracks");
    }

    TransmissionPlan plan;
    plan.oar = make_path(opt.ldpc, opt.mod);
    plan.reference = make_path(opt.ref_ldpc, opt.ref_mod);
    plan.codec = ImageCodecPlugin::from_id(opt.codec);
    plan.cbr_mode = opt.cbr_mode == "block" ? CbrMode::kBlock : CbrMode::kIdeal;

    const auto snrs = parse_snr_sweep(opt.snr);
    // sweep points fan out to a worker pool; assembly stays ordered by SNR
    std::vector<std::future<ReportRecord>> futures;
    for (const double snr : snrs)
        futures.push_back(std::async(std::launch::async, [&, snr] {
            return simulate_point(gops, plan, snr, opt.seed, opt.trials, opt.fps, opt.q);
        }));

    Report report;
    report.experiment_id = opt.experiment;
    report.config = {{"snr", opt.snr},
                     {"ldpc", opt.ldpc},
                     {"mod", opt.mod},
                     {"ref_ldpc", opt.ref_ldpc},
                     {"ref_mod", opt.ref_mod},
                     {"codec", opt.codec},
                     {"cbr_mode", opt.cbr_mode},
                     {"trials", opt.trials},
                     {"seed", opt.seed},
                     {"q", opt.q},
                     {"fps", opt.fps},
                     {"gop", opt.ingest.gop},
                     {"width", opt.ingest.width},
                     {"height", opt.ingest.height},
                     {"synthetic", opt.use_synth},
                     {"synth_objects", opt.synth_objects},
                     {"synth_seed", opt.synth_seed}};
    for (auto& f : futures) report.records.push_back(f.get());
    report.sort_records();

    std::ofstream out(opt.out);
    if (!out) throw std::runtime_error("cannot open for writing: " + opt.out);
    write_report_csv(out, report);
    const std::string json_path = opt.json.empty() ? opt.out + ".json" : opt.json;
    std::ofstream json_out(json_path);
    if (!json_out) throw std::runtime_error("cannot open for writing: " + json_path);
    write_report_json(json_out, report);
    std::fprintf(stderr, "simulate: %zu SNR points -> %s (config %s)\n", snrs.size(),
                 opt.out.c_str(), json_path.c_str());

    double worst_fer = 0;
    for (const auto& rec : report.records) worst_fer = std::max(worst_fer, rec.fer);
    return worst_fer >= opt.fail_threshold ? kExitChannelDominated : kExitOk;
}

int cmd_synth(std::uint64_t seed, int objects, int frames, int width, int height,
              const std::string& out_dir) {
    SyntheticSceneSpec spec;
    spec.seed = seed;
    spec.object_count = objects;
    spec.width = width;
    spec.height = height;
    spec.gop_length = frames;
    const auto scene = generate_synthetic(spec);
    fs::create_directories(out_dir);
    for (std::size_t t = 0; t < scene.renders.size(); ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04zu.ppm", t + 1);
        write_ppm(fs::path(out_dir) / name, scene.renders[t]);
    }
    std::ofstream tracks(fs::path(out_dir) / "tracks.jsonl");
    for (const OarFrame& frame : scene.gop.frames) {
        for (const ObjectId id : frame.objects) {
            const Attributes& a = frame.attributes.at(id);
            nlohmann::json j = {{"frame", frame.frame_index},
                                {"id", id},
                                {"x", a.x},
                                {"y", a.y},
                                {"w", a.w},
                                {"h", a.h},
                                {"angle", a.angle},
                                {"cat", std::string(to_string(a.category))}};
            tracks << j.dump() << "\n";
        }
    }
    std::ofstream oar(fs::path(out_dir) / "oar.jsonl");
    write_oar_jsonl(oar, {&scene.gop, 1});
    std::fprintf(stderr, "synth: %d frames, %d objects -> %s\n", frames, objects,
                 out_dir.c_str());
    return kExitOk;
}

struct ReportOptions {
    std::string mode = "cbr";
    std::uint64_t bits = 366;
    double kbps = 3.5;
    double fps = 25.0;
    std::string ldpc_rate = "1/3";
    std::string mod = "4qam";
    int width = 512;
    int height = 512;
    int frames = 1;
    std::string cbr_mode = "ideal";
    std::vector<std::string> in;
    std::string out;
};

int cmd_report(const ReportOptions& opt) {
    if (opt.mode == "cbr") {
        const PathPlan path = make_path(opt.ldpc_rate, opt.mod);
        const CbrMode mode = opt.cbr_mode == "block" ? CbrMode::kBlock : CbrMode::kIdeal;
        const std::uint64_t symbols = planned_symbol_count(opt.bits, path, mode);
        const double value = cbr(static_cast<double>(symbols), opt.width, opt.height, opt.frames);
        std::printf("%.2e\n", value);
        return kExitOk;
    }
    if (opt.mode == "seq-cbr") {
        const PathPlan path = make_path(opt.ldpc_rate, opt.mod);
        const double bits_per_frame = opt.kbps * 1000.0 / opt.fps;
        const double symbols_per_frame =
            bits_per_frame / path.ldpc.rate() / bits_per_symbol(path.modulation);
        const double value = cbr(symbols_per_frame, opt.width, opt.height, 1);
        std::printf("%.2e\n", value);
        return kExitOk;
    }
    if (opt.mode == "aggregate") {
        if (opt.in.empty()) throw std::runtime_error("aggregate: no input CSVs");
        std::string header;
        std::vector<std::string> rows;
        for (const std::string& path : opt.in) {
            std::ifstream in(path);
            if (!in) throw std::runtime_error("cannot open: " + path);
            std::string line;
            bool first = true;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                if (first) {
                    if (header.empty())
                        header = line;
                    else if (header != line)
                        throw std::runtime_error("aggregate: header mismatch in " + path);
                    first = false;
                    continue;
                }
                rows.push_back(line);
            }
        }
        std::stable_sort(rows.begin(), rows.end());
        std::ofstream out(opt.out);
        if (!out) throw std::runtime_error("cannot open for writing: " + opt.out);
        out << header << "\n";
        for (const std::string& row : rows) out << row << "\n";
        std::fprintf(stderr, "report: %zu rows -> %s\n", rows.size(), opt.out.c_str());
        return kExitOk;
    }
    throw std::runtime_error("unknown report mode: " + opt.mode);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OAR-based video coding and transmission toolbox"};
    app.require_subcommand(1);
    // --h is a canvas-height option; help stays on --help only
    app.set_help_flag("--help", "print help and exit");

    IngestOptions extract_opt;
    std::string extract_out;
    auto* extract = app.add_subcommand("extract", "tracks -> OAR jsonl");
    add_ingest_options(extract, extract_opt, true);
    extract->add_option("--out", extract_out, "output OAR jsonl")->required();

    IngestOptions encode_opt;
    int encode_q = 8;
    double encode_fps = 25.0;
    std::string encode_out;
    auto* encode = app.add_subcommand("encode", "tracks -> OAR bitstream (.oars)");
    add_ingest_options(encode, encode_opt, true);
    encode->add_option("--q", encode_q, "angle quantization bits")->check(CLI::Range(1, 16));
    encode->add_option("--fps", encode_fps, "frame rate for kbps accounting");
    encode->add_option("--out", encode_out, "output bitstream file")->required();

    std::string decode_in, decode_out;
    auto* decode = app.add_subcommand("decode", "OAR bitstream -> OAR jsonl");
    decode->add_option("--in", decode_in, "input .oars file")->required();
    decode->add_option("--out", decode_out, "output OAR jsonl")->required();

    TransmitOptions transmit_opt;
    auto* transmit = app.add_subcommand("transmit", "send a bitstream or image over the channel");
    transmit->add_option("--in", transmit_opt.in, "input .oars file");
    transmit->add_option("--image", transmit_opt.image, "input PPM image");
    transmit->add_option("--out", transmit_opt.out, "received output path");
    transmit->add_option("--codec", transmit_opt.codec, "image codec: raw|ppm|external");
    transmit->add_option("--ldpc", transmit_opt.ldpc, "LDPC rate: 1/3|1/2|2/3");
    transmit->add_option("--mod", transmit_opt.mod, "modulation: bpsk|4qam|16qam|64qam");
    transmit->add_option("--decoder", transmit_opt.decoder, "sum-product|min-sum")
        ->check(CLI::IsMember({"sum-product", "min-sum"}));
    transmit->add_option("--max-iters", transmit_opt.max_iterations, "BP iteration cap");
    transmit->add_option("--snr", transmit_opt.snr, "channel SNR in dB");
    transmit->add_option("--seed", transmit_opt.seed, "channel seed")->required();
    transmit->add_option("--trials", transmit_opt.trials, "number of channel trials")
        ->check(CLI::PositiveNumber);
    transmit->add_option("--fail-threshold", transmit_opt.fail_threshold,
                         "exit 2 when the failure fraction reaches this value");

    SimulateOptions sim_opt;
    auto* simulate = app.add_subcommand("simulate", "full pipeline SNR sweep -> CSV report");
    add_ingest_options(simulate, sim_opt.ingest, false);
    simulate->add_option("--snr", sim_opt.snr, "sweep start:stop:step or comma list");
    simulate->add_option("--ldpc", sim_opt.ldpc, "OAR path LDPC rate");
    simulate->add_option("--mod", sim_opt.mod, "OAR path modulation");
    simulate->add_option("--ref-ldpc", sim_opt.ref_ldpc, "reference path LDPC rate");
    simulate->add_option("--ref-mod", sim_opt.ref_mod, "reference path modulation");
    simulate->add_option("--codec", sim_opt.codec, "reference image codec");
    simulate->add_option("--cbr-mode", sim_opt.cbr_mode, "ideal|block")
        ->check(CLI::IsMember({"ideal", "block"}));
    simulate->add_option("--q", sim_opt.q, "angle quantization bits");
    simulate->add_option("--fps", sim_opt.fps, "frame rate");
    simulate->add_option("--trials", sim_opt.trials, "channel trials per SNR point")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim_opt.seed, "master seed")->required();
    simulate->add_option("--synth-objects", sim_opt.synth_objects, "synthetic object count");
    simulate->add_option("--synth-seed", sim_opt.synth_seed, "synthetic scene seed");
    simulate->add_option("--experiment", sim_opt.experiment, "experiment id for the report");
    simulate->add_option("--out", sim_opt.out, "output CSV")->required();
    simulate->add_option("--json", sim_opt.json, "config sidecar path (default <out>.json)");
    simulate->add_option("--fail-threshold", sim_opt.fail_threshold,
                         "exit 2 when any point's FER reaches this value");

    std::uint64_t synth_seed = 0;
    int synth_objects = 6, synth_frames = 15, synth_w = 512, synth_h = 512;
    std::string synth_dir;
    auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
    synth->add_option("--seed", synth_seed, "scene seed")->required();
    synth->add_option("--objects", synth_objects, "object count");
    synth->add_option("--frames", synth_frames, "GoP length")->check(CLI::Range(2, 255));
    synth->add_option("--w", synth_w, "canvas width");
    synth->add_option("--h", synth_h, "canvas height");
    synth->add_option("--out-dir", synth_dir, "output directory")->required();

    ReportOptions report_opt;
    auto* report = app.add_subcommand("report", "rate accounting and CSV aggregation");
    report->add_option("--mode", report_opt.mode, "cbr|seq-cbr|aggregate")
        ->check(CLI::IsMember({"cbr", "seq-cbr", "aggregate"}));
    report->add_option("--bits", report_opt.bits, "payload bits (cbr mode)");
    report->add_option("--kbps", report_opt.kbps, "sequence rate (seq-cbr mode)");
    report->add_option("--fps", report_opt.fps, "frame rate (seq-cbr mode)");
    report->add_option("--ldpc-rate", report_opt.ldpc_rate, "LDPC rate");
    report->add_option("--mod", report_opt.mod, "modulation");
    report->add_option("--w", report_opt.width, "source width");
    report->add_option("--h", report_opt.height, "source height");
    report->add_option("--frames", report_opt.frames, "source frame count");
    report->add_option("--cbr-mode", report_opt.cbr_mode, "ideal|block")
        ->check(CLI::IsMember({"ideal", "block"}));
    report->add_option("--in", report_opt.in, "input CSVs (aggregate mode)");
    report->add_option("--out", report_opt.out, "output CSV (aggregate mode)");

    for (CLI::App* sub : app.get_subcommands({}))
        sub->set_help_flag("--help", "print help and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*extract) return cmd_extract(extract_opt, extract_out);
        if (*encode) return cmd_encode(encode_opt, encode_q, encode_fps, encode_out);
        if (*decode) return cmd_decode(decode_in, decode_out);
        if (*transmit) {
            if (transmit_opt.in.empty() == transmit_opt.image.empty())
                throw std::runtime_error("transmit needs exactly one of --in / --image");
            return cmd_transmit(transmit_opt);
        }
        if (*simulate) {
            sim_opt.use_synth = sim_opt.ingest.tracks.empty();
            return cmd_simulate(sim_opt);
        }
        if (*synth)
            return cmd_synth(synth_seed, synth_objects, synth_frames, synth_w, synth_h,
                             synth_dir);
        if (*report) return cmd_report(report_opt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    }
    return kExitValidation;
}
