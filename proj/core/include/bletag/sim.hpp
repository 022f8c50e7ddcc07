#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bletag/bits.hpp"
#include "bletag/channel.hpp"
#include "bletag/iq.hpp"
#include "bletag/modem.hpp"
#include "bletag/pncode.hpp"
#include "bletag/rx.hpp"

namespace bletag {

/// Transmit-side synthesis: alternating ramp bits around the frame give the
/// squelch and timing loop something to settle on, like a real radio's
/// ramp-up, then GMSK at baseband mixed up to the IF offset the receiver's
/// translating filter expects.
struct TxParams {
    double sample_rate_hz = 4.0e6;
    double if_offset_hz = 1.0e6;
    int pad_front_bits = 24;
    int pad_back_bits = 12;
    GmskParams gmsk;
};

IqBuffer synth_tx_iq(const BitSequence& onair_bits, const TxParams& tx);

/// Receiver defaults wired to the given codebook and tx parameters.
ReceiverParams default_receiver_params(const Codebook& codebook, const TxParams& tx,
                                       int threshold = 192);

struct TrialOutcome {
    bool detected = false;
    int best_score = 0; // best score among events for the expected tag
};

/// One tx -> channel -> rx pass, scored for the expected tag.
TrialOutcome detection_trial(const BitSequence& onair_bits, const std::string& tag_id,
                             const TxParams& tx, const ChannelParams& channel,
                             const LinkBudget& budget, const AntennaPattern& pattern,
                             const ReceiverParams& rx_params);

struct PdPoint {
    double snr_db = 0.0;
    double pd = 0.0;
    double distance_m = 0.0; // 0 in snr-driven sweeps
};

/// Detection probability over an SNR grid (snr drive mode, random phase and
/// fractional timing per trial).
std::vector<PdPoint> pd_vs_snr(const Codebook& codebook, const std::string& tag_id,
                               const std::vector<double>& snr_grid_db,
                               int trials_per_point, std::uint64_t seed);

struct RangeReport {
    double pd_target = 0.9;
    double snr_star_db = 0.0;       // lowest SNR still meeting the target
    double predicted_range_m = 0.0; // link budget inverted at snr_star
    double range_low_m = 0.0;       // inversion at snr_star + margin
    double range_high_m = 0.0;      // inversion at snr_star - margin
    double calibration_margin_db = 6.0;
    std::vector<PdPoint> curve;
    int trials_per_point = 0;
    std::uint64_t seed = 0;
};

/// Monte Carlo Pd over a geometric distance grid (0.5 dB SNR spacing at
/// boresight), then inverts the link budget at the lowest SNR that still
/// meets the target. The half-interval margin covers noise-figure and
/// front-end calibration uncertainty.
RangeReport predict_range(const Codebook& codebook, const std::string& tag_id,
                          double pd_target, int trials_per_point,
                          const LinkBudget& budget, const AntennaPattern& pattern,
                          double d_min_m, double d_max_m, std::uint64_t seed);

std::string range_report_to_json(const RangeReport& report);

} // namespace bletag
