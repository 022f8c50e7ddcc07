#include "bletag/bearing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bletag/errors.hpp"
#include "bletag/frame.hpp"
#include "bletag/rng.hpp"
#include "bletag/sim.hpp"

namespace bletag {

std::vector<double> default_sweep_angles() {
    std::vector<double> angles;
    for (int a = -90; a <= 90; a += 10) angles.push_back(a);
    return angles;
}

void SweepConfig::validate() const {
    if (angles_deg.empty())
        throw std::invalid_argument("SweepConfig: empty angle list");
    for (std::size_t i = 1; i < angles_deg.size(); ++i) {
        if (!(angles_deg[i] > angles_deg[i - 1]))
            throw std::invalid_argument("SweepConfig: angles must be strictly increasing");
    }
    if (trials_per_angle < 1)
        throw std::invalid_argument("SweepConfig: trials must be >= 1");
    if (!(distance_m > 0.0))
        throw std::invalid_argument("SweepConfig: distance must be positive");
    if (codebook.entries.empty())
        throw std::invalid_argument("SweepConfig: empty codebook");
    if (!codebook.find(tag_id))
        throw std::invalid_argument("SweepConfig: tag_id not in codebook");
}

SweepResult run_sweep(const SweepConfig& config) {
    config.validate();
    const CodebookEntry* entry = config.codebook.find(config.tag_id);
    const BitSequence code248 = entry->code.subseq(kPreambleBits, kCodeBits);
    const BitSequence onair = flatten_to_bits(assemble_frame(code248));

    TxParams tx;
    const ReceiverParams rxp =
        default_receiver_params(config.codebook, tx, config.threshold);

    SweepResult result;
    result.detection_threshold = config.threshold;
    result.points.reserve(config.angles_deg.size());

    for (std::size_t ai = 0; ai < config.angles_deg.size(); ++ai) {
        const double angle = config.angles_deg[ai];
        SweepPoint point;
        point.angle_deg = angle;
        int detected = 0;
        long score_sum = 0;
        for (int t = 0; t < config.trials_per_angle; ++t) {
            ChannelParams ch;
            ch.distance_m = config.distance_m;
            ch.azimuth_deg = angle - config.tag_azimuth_deg;
            ch.cfo_hz = config.cfo_hz;
            ch.rng_seed = derive_seed(config.rng_seed, ai * 4096 + static_cast<std::uint64_t>(t));
            const TrialOutcome outcome = detection_trial(onair, config.tag_id, tx, ch,
                                                         config.budget, config.pattern, rxp);
            point.best_score = std::max(point.best_score, outcome.best_score);
            detected += outcome.detected ? 1 : 0;
            score_sum += outcome.best_score;
        }
        point.detection_rate = static_cast<double>(detected) / config.trials_per_angle;
        point.mean_score = static_cast<double>(score_sum) / config.trials_per_angle;
        result.points.push_back(point);
    }

    try {
        result.estimated_bearing_deg = estimate_bearing(result.points, config.threshold);
    } catch (const NoBearingError&) {
        result.estimated_bearing_deg = std::nullopt;
    }
    return result;
}

double estimate_bearing(const std::vector<SweepPoint>& points, int threshold) {
    if (points.empty())
        throw NoBearingError("estimate_bearing: no sweep points");
    int best = 0;
    for (const auto& p : points) best = std::max(best, p.best_score);
    if (best < threshold)
        throw NoBearingError("estimate_bearing: no point reaches the detection threshold");

    // longest contiguous run of points tied at the maximum
    std::size_t run_begin = 0, run_len = 0;
    std::size_t cur_begin = 0, cur_len = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].best_score == best) {
            if (cur_len == 0) cur_begin = i;
            ++cur_len;
            if (cur_len > run_len) {
                run_len = cur_len;
                run_begin = cur_begin;
            }
        } else {
            cur_len = 0;
        }
    }

    if (run_len > 1) {
        // saturated plateau: its midpoint is the best symmetric guess
        return 0.5 * (points[run_begin].angle_deg + points[run_begin + run_len - 1].angle_deg);
    }

    const std::size_t m = run_begin;
    if (m == 0 || m + 1 == points.size()) return points[m].angle_deg;

    // parabola through the peak and both neighbors (grid may be non-uniform)
    const double x1 = points[m - 1].angle_deg, y1 = points[m - 1].best_score;
    const double x2 = points[m].angle_deg, y2 = points[m].best_score;
    const double x3 = points[m + 1].angle_deg, y3 = points[m + 1].best_score;
    const double d1 = (y2 - y1) / (x2 - x1);
    const double d2 = (y3 - y2) / (x3 - x2);
    const double curv = (d2 - d1) / (x3 - x1); // half the quadratic coefficient
    if (!(curv < 0.0)) return x2;              // not concave, fall back to the grid peak
    return 0.5 * (x1 + x2 - d1 / (2.0 * curv));
}

std::string sweep_to_csv(const SweepResult& result) {
    std::string out = "angle,correlation\n";
    char row[64];
    for (const auto& p : result.points) {
        std::snprintf(row, sizeof(row), "%g,%d\n", p.angle_deg, p.best_score);
        out += row;
    }
    return out;
}

std::string sweep_summary_json(const SweepConfig& config, const SweepResult& result) {
    nlohmann::ordered_json j;
    if (result.estimated_bearing_deg)
        j["estimated_bearing_deg"] = *result.estimated_bearing_deg;
    else
        j["estimated_bearing_deg"] = nullptr;
    j["bearing_note"] = "sub-grid peak interpolation, beyond the raw sweep table";
    j["distance_m"] = config.distance_m;
    j["tag_azimuth_deg"] = config.tag_azimuth_deg;
    j["tag_id"] = config.tag_id;
    j["threshold"] = result.detection_threshold;
    j["trials_per_angle"] = config.trials_per_angle;
    j["seed"] = config.rng_seed;
    auto pts = nlohmann::ordered_json::array();
    for (const auto& p : result.points) {
        pts.push_back({{"angle_deg", p.angle_deg},
                       {"best_score", p.best_score},
                       {"detection_rate", p.detection_rate},
                       {"mean_score", p.mean_score}});
    }
    j["points"] = pts;
    return j.dump(2) + "\n";
}

} // namespace bletag
