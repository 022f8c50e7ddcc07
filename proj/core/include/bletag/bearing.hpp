#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bletag/channel.hpp"
#include "bletag/pncode.hpp"
#include "bletag/rx.hpp"

namespace bletag {

std::vector<double> default_sweep_angles(); // -90..90 in 10 degree steps

struct SweepConfig {
    std::vector<double> angles_deg = default_sweep_angles(); // strictly increasing
    double distance_m = 50.0;
    double tag_azimuth_deg = 0.0; // ground truth
    int trials_per_angle = 5;
    double cfo_hz = 0.0;
    LinkBudget budget;
    AntennaPattern pattern;
    Codebook codebook;
    std::string tag_id;
    int threshold = 192;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

struct SweepPoint {
    double angle_deg = 0.0;
    int best_score = 0;        // max over trials, 0 when nothing detected
    double detection_rate = 0.0;
    double mean_score = 0.0;   // mean of per-trial best scores
};

struct SweepResult {
    std::vector<SweepPoint> points; // one per configured angle, in order
    std::optional<double> estimated_bearing_deg;
    int detection_threshold = 192;
};

/// For each angle, synthesizes the tag frame, applies the distance-mode
/// channel with the antenna pointed at angle - tag_azimuth off boresight,
/// runs the receiver, and records the best correlation across trials.
SweepResult run_sweep(const SweepConfig& config);

/// Peak of the score-vs-angle curve. Parabolic interpolation through the
/// argmax and its neighbors; midpoint of the plateau when the maximum is
/// tied (saturated scores); plain argmax at a grid edge. Throws
/// NoBearingError when no point reaches the threshold.
double estimate_bearing(const std::vector<SweepPoint>& points, int threshold);

/// Two columns, header "angle,correlation".
std::string sweep_to_csv(const SweepResult& result);

std::string sweep_summary_json(const SweepConfig& config, const SweepResult& result);

} // namespace bletag
