// Command-line front end: codebook generation, tag frame synthesis through
// the impairment channel, receive/detect, azimuth sweeps, range prediction
// and firmware export.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bletag/bearing.hpp"
#include "bletag/channel.hpp"
#include "bletag/errors.hpp"
#include "bletag/frame.hpp"
#include "bletag/io.hpp"
#include "bletag/pncode.hpp"
#include "bletag/rng.hpp"
#include "bletag/rx.hpp"
#include "bletag/sim.hpp"

namespace {

using bletag::BitSequence;
using bletag::Codebook;

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw bletag::CorruptFileError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Codebook load_codebook(const std::string& path) {
    return bletag::codebook_from_json(read_text_file(path));
}

std::vector<double> parse_angles(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double start = 0, step = 0, stop = 0;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &step, &stop) != 3 || step <= 0)
            throw std::invalid_argument("--angles: expected start:step:stop");
        for (double a = start; a <= stop + 1e-9; a += step) out.push_back(a);
    } else {
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            out.push_back(std::stod(tok));
        }
    }
    if (out.empty()) throw std::invalid_argument("--angles: empty angle list");
    return out;
}

struct Cli {
    CLI::App app{"software tag link toolbox: PN-coded LE frames, GMSK modem, "
                 "impairment channel, correlation receiver, sweeps and link budgets",
                 "bletag"};

    std::uint64_t seed = 1;
    std::string config_path;
    bool verbose = false;
    nlohmann::json config;

    // gen-codebook / verify-codebook
    int gc_tags = 1;
    int gc_max_cross = 192;
    std::string gc_out;
    std::string vc_in;

    // tx
    std::string tx_codebook, tx_tag, tx_out, tx_link;
    double tx_snr = std::numeric_limits<double>::infinity();
    double tx_distance = 0.0;
    double tx_angle = 0.0, tx_cfo = 0.0, tx_phase = 0.0, tx_timing = 0.0, tx_clock_ppm = 0.0;

    // rx
    std::string rx_codebook, rx_in, rx_out;
    int rx_threshold = 192;
    double rx_sample_rate = 4.0e6;

    // sweep
    std::string sw_codebook, sw_tag, sw_out, sw_summary, sw_angles = "-90:10:90", sw_link;
    double sw_distance = 50.0, sw_tag_angle = 0.0, sw_cfo = 0.0;
    int sw_trials = 5, sw_threshold = 192;

    // range
    std::string rg_out, rg_link;
    double rg_pd_target = 0.9;
    int rg_trials = 40;
    double rg_dmin = 100.0, rg_dmax = 1600.0;

    // export-firmware
    std::string ef_codebook, ef_tag, ef_format = "json", ef_out;

    CLI::App* gen = nullptr;
    CLI::App* verify = nullptr;
    CLI::App* tx = nullptr;
    CLI::App* rx = nullptr;
    CLI::App* sweep = nullptr;
    CLI::App* range = nullptr;
    CLI::App* exp = nullptr;
};

void vlog(const Cli& c, const std::string& msg) {
    if (c.verbose) std::cerr << msg << "\n";
}

// --config JSON supplies defaults for flags not given explicitly.
template <typename T>
void merge(const Cli& c, CLI::App* cmd, const std::string& flag, T& value) {
    if (c.config.is_null()) return;
    const std::string key = flag.substr(2);
    if (!c.config.contains(key)) return;
    const CLI::Option* opt = cmd->get_option(flag);
    if (opt && opt->count() > 0) return;
    value = c.config.at(key).get<T>();
}

void load_link_params(const std::string& path, bletag::LinkBudget& budget,
                      bletag::AntennaPattern& pattern) {
    if (!path.empty()) bletag::link_params_from_json(read_text_file(path), budget, pattern);
}

int cmd_gen_codebook(Cli& c) {
    merge(c, c.gen, "--tags", c.gc_tags);
    merge(c, c.gen, "--max-cross", c.gc_max_cross);
    if (c.gc_tags < 1) throw CLI::ValidationError("--tags", "must be >= 1");
    Codebook cb = bletag::build_codebook(c.gc_tags, c.seed, c.gc_max_cross);
    bletag::atomic_write_file(c.gc_out, bletag::codebook_to_json(cb));
    nlohmann::ordered_json j;
    j["out"] = c.gc_out;
    j["tags"] = static_cast<int>(cb.entries.size());
    j["max_cross_correlation"] = cb.max_cross_correlation;
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_verify_codebook(Cli& c) {
    Codebook cb = load_codebook(c.vc_in);
    std::string why;
    const bool ok = bletag::verify_codebook(cb, &why);
    nlohmann::ordered_json j;
    j["in"] = c.vc_in;
    j["ok"] = ok;
    if (!ok) j["reason"] = why;
    std::cout << j.dump() << "\n";
    if (!ok) throw bletag::CapacityError("codebook verification failed: " + why);
    return 0;
}

int cmd_tx(Cli& c) {
    merge(c, c.tx, "--snr", c.tx_snr);
    merge(c, c.tx, "--distance", c.tx_distance);
    merge(c, c.tx, "--angle", c.tx_angle);
    merge(c, c.tx, "--cfo", c.tx_cfo);
    merge(c, c.tx, "--clock-ppm", c.tx_clock_ppm);

    Codebook cb = load_codebook(c.tx_codebook);
    const bletag::CodebookEntry* entry = cb.find(c.tx_tag);
    if (!entry) throw std::invalid_argument("unknown tag id: " + c.tx_tag);

    bletag::LinkBudget budget;
    bletag::AntennaPattern pattern;
    load_link_params(c.tx_link, budget, pattern);

    const bool distance_mode = c.tx->get_option("--distance")->count() > 0 ||
                               (!c.config.is_null() && c.config.contains("distance"));
    const bool snr_mode = c.tx->get_option("--snr")->count() > 0 ||
                          (!c.config.is_null() && c.config.contains("snr"));
    if (distance_mode && snr_mode)
        throw CLI::ValidationError("--snr", "mutually exclusive with --distance");

    const BitSequence code248 = entry->code.subseq(bletag::kPreambleBits, bletag::kCodeBits);
    const BitSequence onair = bletag::flatten_to_bits(bletag::assemble_frame(code248));

    bletag::TxParams txp;
    const bletag::IqBuffer clean = bletag::synth_tx_iq(onair, txp);

    bletag::ChannelParams ch;
    if (distance_mode) ch.distance_m = c.tx_distance;
    else ch.snr_db = c.tx_snr;
    ch.azimuth_deg = c.tx_angle;
    ch.cfo_hz = c.tx_cfo;
    ch.phase_rad = c.tx_phase;
    ch.timing_offset_samples = c.tx_timing;
    ch.clock_offset_ppm = c.tx_clock_ppm;
    ch.rng_seed = bletag::derive_seed(c.seed, 0x7478); // "tx"

    const bletag::IqBuffer impaired = bletag::apply_channel(clean, ch, budget, pattern);

    char desc[160];
    if (distance_mode) {
        std::snprintf(desc, sizeof(desc), "tag=%s distance_m=%g azimuth_deg=%g snr_db=%.3f",
                      c.tx_tag.c_str(), c.tx_distance, c.tx_angle,
                      bletag::rx_snr_db(budget, pattern, c.tx_distance, c.tx_angle));
    } else {
        std::snprintf(desc, sizeof(desc), "tag=%s snr_db=%g", c.tx_tag.c_str(), c.tx_snr);
    }
    bletag::SidecarMeta meta;
    meta.sample_rate_hz = txp.sample_rate_hz;
    meta.center_freq_hz = budget.frequency_hz - txp.if_offset_hz;
    meta.description = desc;
    bletag::write_iq(c.tx_out, impaired, &meta);

    nlohmann::ordered_json j;
    j["out"] = c.tx_out;
    j["samples"] = impaired.size();
    j["description"] = desc;
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_rx(Cli& c) {
    merge(c, c.rx, "--threshold", c.rx_threshold);
    Codebook cb = load_codebook(c.rx_codebook);

    double fs = c.rx_sample_rate;
    if (c.rx->get_option("--sample-rate")->count() == 0) {
        if (auto meta = bletag::read_sidecar(c.rx_in)) fs = meta->sample_rate_hz;
    }
    const bletag::IqBuffer iq = bletag::read_iq(c.rx_in, fs);

    bletag::TxParams txp; // receiver mirrors the tx defaults (IF offset, sps)
    txp.sample_rate_hz = fs;
    bletag::Receiver rx(bletag::default_receiver_params(cb, txp, c.rx_threshold), fs);
    const auto events = rx.run(iq);
    const std::string jsonl = bletag::events_to_jsonl(events);
    std::cout << jsonl;
    if (!c.rx_out.empty()) bletag::atomic_write_file(c.rx_out, jsonl);
    vlog(c, "events: " + std::to_string(events.size()));
    return 0;
}

int cmd_sweep(Cli& c) {
    merge(c, c.sweep, "--distance", c.sw_distance);
    merge(c, c.sweep, "--tag-angle", c.sw_tag_angle);
    merge(c, c.sweep, "--trials", c.sw_trials);
    merge(c, c.sweep, "--angles", c.sw_angles);
    if (c.sw_trials < 1) throw CLI::ValidationError("--trials", "must be >= 1");

    bletag::SweepConfig cfg;
    cfg.angles_deg = parse_angles(c.sw_angles);
    cfg.distance_m = c.sw_distance;
    cfg.tag_azimuth_deg = c.sw_tag_angle;
    cfg.trials_per_angle = c.sw_trials;
    cfg.cfo_hz = c.sw_cfo;
    cfg.threshold = c.sw_threshold;
    cfg.rng_seed = c.seed;
    load_link_params(c.sw_link, cfg.budget, cfg.pattern);
    if (!c.sw_codebook.empty()) {
        cfg.codebook = load_codebook(c.sw_codebook);
        cfg.tag_id = c.sw_tag.empty() ? cfg.codebook.entries.front().tag_id : c.sw_tag;
    } else {
        cfg.codebook = bletag::build_codebook(1, c.seed, 192);
        cfg.tag_id = cfg.codebook.entries.front().tag_id;
    }

    const bletag::SweepResult result = bletag::run_sweep(cfg);
    bletag::atomic_write_file(c.sw_out, bletag::sweep_to_csv(result));
    const std::string summary = bletag::sweep_summary_json(cfg, result);
    std::cout << summary;
    if (!c.sw_summary.empty()) bletag::atomic_write_file(c.sw_summary, summary);
    if (!result.estimated_bearing_deg)
        throw bletag::NoBearingError("no detection at any sweep angle");
    return 0;
}

int cmd_range(Cli& c) {
    merge(c, c.range, "--pd-target", c.rg_pd_target);
    merge(c, c.range, "--trials", c.rg_trials);
    if (c.rg_trials < 1) throw CLI::ValidationError("--trials", "must be >= 1");
    if (!(c.rg_pd_target > 0.0 && c.rg_pd_target <= 1.0))
        throw CLI::ValidationError("--pd-target", "must be in (0, 1]");

    bletag::LinkBudget budget;
    bletag::AntennaPattern pattern;
    load_link_params(c.rg_link, budget, pattern);

    Codebook cb = bletag::build_codebook(1, c.seed, 192);
    const bletag::RangeReport report =
        bletag::predict_range(cb, cb.entries.front().tag_id, c.rg_pd_target, c.rg_trials,
                              budget, pattern, c.rg_dmin, c.rg_dmax, c.seed);
    const std::string json = bletag::range_report_to_json(report);
    std::cout << json;
    if (!c.rg_out.empty()) bletag::atomic_write_file(c.rg_out, json);
    return 0;
}

int cmd_export_firmware(Cli& c) {
    Codebook cb = load_codebook(c.ef_codebook);
    const bletag::CodebookEntry* entry = cb.find(c.ef_tag);
    if (!entry) throw std::invalid_argument("unknown tag id: " + c.ef_tag);
    const BitSequence code248 = entry->code.subseq(bletag::kPreambleBits, bletag::kCodeBits);
    const bletag::FirmwareExport fw = bletag::export_firmware(bletag::assemble_frame(code248));
    std::string text;
    if (c.ef_format == "json") text = bletag::firmware_to_json(fw);
    else if (c.ef_format == "c-header") text = bletag::firmware_to_c_header(fw, c.ef_tag);
    else throw CLI::ValidationError("--format", "must be json or c-header");
    bletag::atomic_write_file(c.ef_out, text);
    nlohmann::ordered_json j;
    j["out"] = c.ef_out;
    j["format"] = c.ef_format;
    std::cout << j.dump() << "\n";
    return 0;
}

int run_app(int argc, char** argv) {
    Cli c;
    c.app.require_subcommand(1);
    c.app.fallthrough();
    c.app.option_defaults()->always_capture_default();

    c.app.add_option("--seed", c.seed, "deterministic seed for everything downstream");
    c.app.add_option("--config", c.config_path, "JSON file with default flag values");
    c.app.add_flag("--verbose", c.verbose, "diagnostics to stderr");

    c.gen = c.app.add_subcommand("gen-codebook", "generate a screened PN codebook");
    c.gen->add_option("--tags", c.gc_tags, "number of tags")->required();
    c.gen->add_option("--max-cross", c.gc_max_cross, "pairwise correlation bound")
        ->check(CLI::Range(128, 255));
    c.gen->add_option("--out", c.gc_out, "codebook JSON path")->required();

    c.verify = c.app.add_subcommand("verify-codebook", "recheck pairwise codebook bounds");
    c.verify->add_option("--in", c.vc_in, "codebook JSON path")->required();

    c.tx = c.app.add_subcommand("tx", "synthesize a tag burst into an IQ file");
    c.tx->add_option("--codebook", c.tx_codebook)->required();
    c.tx->add_option("--tag", c.tx_tag, "tag id from the codebook")->required();
    c.tx->add_option("--snr", c.tx_snr, "target SNR in dB over the noise bandwidth (inf = clean)");
    c.tx->add_option("--distance", c.tx_distance, "link-budget distance in meters");
    c.tx->add_option("--angle", c.tx_angle, "off-boresight angle, degrees");
    c.tx->add_option("--cfo", c.tx_cfo, "carrier offset, Hz");
    c.tx->add_option("--phase", c.tx_phase, "carrier phase, radians");
    c.tx->add_option("--timing-offset", c.tx_timing, "fractional sample delay");
    c.tx->add_option("--clock-ppm", c.tx_clock_ppm, "sample clock offset, ppm");
    c.tx->add_option("--link", c.tx_link, "link budget / antenna JSON");
    c.tx->add_option("--out", c.tx_out, "IQ file path")->required();

    c.rx = c.app.add_subcommand("rx", "detect tag bursts in an IQ file");
    c.rx->add_option("--codebook", c.rx_codebook)->required();
    c.rx->add_option("--in", c.rx_in, "IQ file path")->required();
    c.rx->add_option("--threshold", c.rx_threshold)->check(CLI::Range(129, 256));
    c.rx->add_option("--sample-rate", c.rx_sample_rate, "overrides the sidecar rate");
    c.rx->add_option("--out", c.rx_out, "also write detections JSONL here");

    c.sweep = c.app.add_subcommand("sweep", "simulated antenna azimuth sweep");
    c.sweep->add_option("--codebook", c.sw_codebook, "codebook JSON (default: one generated tag)");
    c.sweep->add_option("--tag", c.sw_tag, "tag id (default: first entry)");
    c.sweep->add_option("--distance", c.sw_distance, "tag distance, meters");
    c.sweep->add_option("--tag-angle", c.sw_tag_angle, "true tag azimuth, degrees");
    c.sweep->add_option("--angles", c.sw_angles, "start:step:stop or comma list");
    c.sweep->add_option("--trials", c.sw_trials, "trials per angle");
    c.sweep->add_option("--threshold", c.sw_threshold)->check(CLI::Range(129, 256));
    c.sweep->add_option("--cfo", c.sw_cfo, "carrier offset, Hz");
    c.sweep->add_option("--link", c.sw_link, "link budget / antenna JSON");
    c.sweep->add_option("--out", c.sw_out, "sweep CSV path")->required();
    c.sweep->add_option("--summary-out", c.sw_summary, "also write the JSON summary here");

    c.range = c.app.add_subcommand("range", "Monte Carlo range prediction at boresight");
    c.range->add_option("--pd-target", c.rg_pd_target, "detection probability target");
    c.range->add_option("--trials", c.rg_trials, "trials per distance bin");
    c.range->add_option("--d-min", c.rg_dmin, "nearest distance, meters");
    c.range->add_option("--d-max", c.rg_dmax, "farthest distance, meters");
    c.range->add_option("--link", c.rg_link, "link budget / antenna JSON");
    c.range->add_option("--out", c.rg_out, "also write the report JSON here");

    c.exp = c.app.add_subcommand("export-firmware", "radio register values for one tag");
    c.exp->add_option("--codebook", c.ef_codebook)->required();
    c.exp->add_option("--tag", c.ef_tag)->required();
    c.exp->add_option("--format", c.ef_format, "json or c-header");
    c.exp->add_option("--out", c.ef_out)->required();

    try {
        c.app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = c.app.exit(e);
        return code == 0 ? 0 : 1; // usage errors are exit 1, --help is 0
    }

    if (!c.config_path.empty()) {
        try {
            c.config = nlohmann::json::parse(read_text_file(c.config_path));
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "error: bad --config JSON: " << e.what() << "\n";
            return 1;
        }
        if (c.config.contains("seed") && c.app.get_option("--seed")->count() == 0)
            c.seed = c.config.at("seed").get<std::uint64_t>();
    }

    try {
        if (c.gen->parsed()) return cmd_gen_codebook(c);
        if (c.verify->parsed()) return cmd_verify_codebook(c);
        if (c.tx->parsed()) return cmd_tx(c);
        if (c.rx->parsed()) return cmd_rx(c);
        if (c.sweep->parsed()) return cmd_sweep(c);
        if (c.range->parsed()) return cmd_range(c);
        if (c.exp->parsed()) return cmd_export_firmware(c);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_app(argc, argv);
    } catch (const bletag::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
