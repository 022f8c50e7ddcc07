#include "bletag/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bletag/errors.hpp"
#include "bletag/frame.hpp"
#include "bletag/rng.hpp"

namespace bletag {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

IqBuffer synth_tx_iq(const BitSequence& onair_bits, const TxParams& tx) {
    if (onair_bits.empty()) throw std::invalid_argument("synth_tx_iq: empty bit stream");
    BitSequence padded;
    for (int i = 0; i < tx.pad_front_bits; ++i) padded.push_back(i & 1);
    padded.append(onair_bits);
    for (int i = 0; i < tx.pad_back_bits; ++i) padded.push_back(i & 1);

    IqBuffer bb = gmsk_modulate(padded, tx.gmsk, tx.sample_rate_hz);
    if (tx.if_offset_hz == 0.0) return bb;

    std::vector<std::complex<double>> shifted = bb.samples();
    const double inc = kTwoPi * tx.if_offset_hz / tx.sample_rate_hz;
    double ph = 0.0;
    for (auto& s : shifted) {
        s *= std::complex<double>(std::cos(ph), std::sin(ph));
        ph += inc;
        if (ph > std::numbers::pi) ph -= kTwoPi;
    }
    return IqBuffer(std::move(shifted), tx.sample_rate_hz);
}

ReceiverParams default_receiver_params(const Codebook& codebook, const TxParams& tx,
                                       int threshold) {
    ReceiverParams p;
    p.fir.center_offset_hz = tx.if_offset_hz;
    p.gmsk = tx.gmsk;
    p.timing.omega = tx.gmsk.samples_per_symbol;
    p.detector.codebook = codebook;
    p.detector.threshold = threshold;
    p.detector.dedup_window_bits = kFrameBits;
    return p;
}

TrialOutcome detection_trial(const BitSequence& onair_bits, const std::string& tag_id,
                             const TxParams& tx, const ChannelParams& channel,
                             const LinkBudget& budget, const AntennaPattern& pattern,
                             const ReceiverParams& rx_params) {
    const IqBuffer clean = synth_tx_iq(onair_bits, tx);
    const IqBuffer impaired = apply_channel(clean, channel, budget, pattern);
    Receiver rx(rx_params, tx.sample_rate_hz);
    const auto events = rx.run(impaired);
    TrialOutcome outcome;
    for (const auto& ev : events) {
        if (ev.tag_id != tag_id) continue;
        outcome.detected = true;
        outcome.best_score = std::max(outcome.best_score, ev.score);
    }
    return outcome;
}

std::vector<PdPoint> pd_vs_snr(const Codebook& codebook, const std::string& tag_id,
                               const std::vector<double>& snr_grid_db,
                               int trials_per_point, std::uint64_t seed) {
    if (trials_per_point < 1)
        throw std::invalid_argument("pd_vs_snr: trials must be >= 1");
    const CodebookEntry* entry = codebook.find(tag_id);
    if (!entry) throw std::invalid_argument("pd_vs_snr: tag_id not in codebook");
    const BitSequence onair =
        flatten_to_bits(assemble_frame(entry->code.subseq(kPreambleBits, kCodeBits)));

    TxParams tx;
    const ReceiverParams rxp = default_receiver_params(codebook, tx);
    const LinkBudget budget;
    const AntennaPattern pattern;

    std::vector<PdPoint> curve;
    curve.reserve(snr_grid_db.size());
    for (std::size_t gi = 0; gi < snr_grid_db.size(); ++gi) {
        int detected = 0;
        for (int t = 0; t < trials_per_point; ++t) {
            const std::uint64_t trial_seed = derive_seed(seed, gi * 65536 + static_cast<std::uint64_t>(t));
            Rng rng(trial_seed);
            ChannelParams ch;
            ch.snr_db = snr_grid_db[gi];
            ch.phase_rad = rng.uniform(0.0, kTwoPi);
            ch.timing_offset_samples = rng.uniform();
            ch.rng_seed = derive_seed(trial_seed, 1);
            if (detection_trial(onair, tag_id, tx, ch, budget, pattern, rxp).detected)
                ++detected;
        }
        curve.push_back({snr_grid_db[gi], static_cast<double>(detected) / trials_per_point, 0.0});
    }
    return curve;
}

RangeReport predict_range(const Codebook& codebook, const std::string& tag_id,
                          double pd_target, int trials_per_point,
                          const LinkBudget& budget, const AntennaPattern& pattern,
                          double d_min_m, double d_max_m, std::uint64_t seed) {
    if (!(pd_target > 0.0) || pd_target > 1.0)
        throw std::invalid_argument("predict_range: pd_target must be in (0, 1]");
    if (trials_per_point < 1)
        throw std::invalid_argument("predict_range: trials must be >= 1");
    if (!(d_min_m > 0.0) || !(d_max_m > d_min_m))
        throw std::invalid_argument("predict_range: bad distance bracket");
    const CodebookEntry* entry = codebook.find(tag_id);
    if (!entry) throw std::invalid_argument("predict_range: tag_id not in codebook");
    const BitSequence onair =
        flatten_to_bits(assemble_frame(entry->code.subseq(kPreambleBits, kCodeBits)));

    TxParams tx;
    const ReceiverParams rxp = default_receiver_params(codebook, tx);

    // geometric distance grid = 0.5 dB SNR bins at boresight
    const double step = std::pow(10.0, 0.5 / 20.0);
    std::vector<double> grid;
    for (double d = d_min_m; d <= d_max_m * (1.0 + 1e-12); d *= step) grid.push_back(d);

    RangeReport report;
    report.pd_target = pd_target;
    report.trials_per_point = trials_per_point;
    report.seed = seed;
    report.curve.reserve(grid.size());

    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        int detected = 0;
        for (int t = 0; t < trials_per_point; ++t) {
            const std::uint64_t trial_seed = derive_seed(seed, gi * 65536 + static_cast<std::uint64_t>(t));
            Rng rng(trial_seed);
            ChannelParams ch;
            ch.distance_m = grid[gi];
            ch.azimuth_deg = 0.0;
            ch.phase_rad = rng.uniform(0.0, kTwoPi);
            ch.timing_offset_samples = rng.uniform();
            ch.rng_seed = derive_seed(trial_seed, 1);
            if (detection_trial(onair, tag_id, tx, ch, budget, pattern, rxp).detected)
                ++detected;
        }
        report.curve.push_back({rx_snr_db(budget, pattern, grid[gi], 0.0),
                                static_cast<double>(detected) / trials_per_point, grid[gi]});
    }

    // walk outward from the nearest distance while the target holds
    std::size_t last_ok = grid.size();
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        if (report.curve[gi].pd >= pd_target) last_ok = gi;
        else break;
    }
    if (last_ok == grid.size())
        throw CapacityError("predict_range: detection target not met at the minimum distance");

    report.snr_star_db = report.curve[last_ok].snr_db;

    // invert the boresight link budget at snr_star (and +/- margin)
    const double link_const = budget.tx_power_dbm + budget.tx_gain_dbi +
                              pattern_gain(pattern, 0.0) -
                              fspl_db(1.0, budget.frequency_hz) - budget.noise_floor_dbm();
    auto invert = [&](double snr) { return std::pow(10.0, (link_const - snr) / 20.0); };
    report.predicted_range_m = invert(report.snr_star_db);
    report.range_low_m = invert(report.snr_star_db + report.calibration_margin_db);
    report.range_high_m = invert(report.snr_star_db - report.calibration_margin_db);
    return report;
}

std::string range_report_to_json(const RangeReport& report) {
    nlohmann::ordered_json j;
    j["pd_target"] = report.pd_target;
    j["snr_star_db"] = report.snr_star_db;
    j["predicted_range_m"] = report.predicted_range_m;
    j["range_interval_m"] = {report.range_low_m, report.range_high_m};
    j["calibration_margin_db"] = report.calibration_margin_db;
    j["trials_per_point"] = report.trials_per_point;
    j["seed"] = report.seed;
    auto curve = nlohmann::ordered_json::array();
    for (const auto& p : report.curve) {
        curve.push_back({{"snr_db", p.snr_db}, {"pd", p.pd}, {"distance_m", p.distance_m}});
    }
    j["curve"] = curve;
    return j.dump(2) + "\n";
}

} // namespace bletag
