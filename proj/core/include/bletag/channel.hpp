#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bletag/iq.hpp"

namespace bletag {

/// dB-domain accounting for the radio link. full_scale_dbm calibrates
/// absolute levels into the digital domain: a signal at full_scale_dbm
/// arrives at 0 dBFS, which is what makes the receiver's absolute squelch
/// threshold meaningful in distance-driven simulations.
struct LinkBudget {
    double tx_power_dbm = 8.0;
    double tx_gain_dbi = 0.0;
    double rx_gain_dbi = 16.0; // informational; rx side is modeled by AntennaPattern
    double frequency_hz = 2.480e9;
    double noise_figure_db = 7.0;
    double noise_bandwidth_hz = 1.2e6;
    double full_scale_dbm = -30.0;

    void validate() const;
    /// -174 dBm/Hz + 10 log10(B) + NF.
    double noise_floor_dbm() const;
};

/// Parabolic main lobe with a flat sidelobe floor:
/// gain(az) = boresight - min(12 * (az / beamwidth)^2, floor).
struct AntennaPattern {
    double boresight_gain_dbi = 16.0;
    double beamwidth_3db_deg = 28.0;
    double sidelobe_floor_db = 20.0;

    void validate() const;
};

double pattern_gain(const AntennaPattern& pattern, double azimuth_deg);

/// 20 log10(d) + 20 log10(f) + 20 log10(4 pi / c).
double fspl_db(double distance_m, double frequency_hz);

double rx_power_dbm(const LinkBudget& budget, const AntennaPattern& pattern,
                    double distance_m, double azimuth_deg);

double rx_snr_db(const LinkBudget& budget, const AntennaPattern& pattern,
                 double distance_m, double azimuth_deg);

/// Impairment set for one channel pass. Exactly one of snr_db / distance_m
/// must be set.
///
/// snr mode leaves the signal at its own amplitude and adds noise sized so
/// the SNR over the occupied (noise) bandwidth hits the target; +inf
/// disables noise. distance mode scales the signal to the absolute level
/// the link budget predicts (relative to full scale) and adds noise at the
/// budget's noise floor.
struct ChannelParams {
    std::optional<double> snr_db;
    std::optional<double> distance_m;
    double azimuth_deg = 0.0; // off-boresight angle, distance mode
    double cfo_hz = 0.0;
    double phase_rad = 0.0;
    double timing_offset_samples = 0.0; // fractional delay
    double clock_offset_ppm = 0.0;      // tx/rx sample clock mismatch
    std::uint64_t rng_seed = 0;

    void validate() const;
};

/// Applies, in order: fractional delay / clock-offset resampling (windowed
/// sinc), carrier offset and phase, amplitude scaling, seeded complex AWGN.
/// With no delay, clock offset, carrier offset or noise the input passes
/// through exactly.
IqBuffer apply_channel(const IqBuffer& iq, const ChannelParams& params,
                       const LinkBudget& budget, const AntennaPattern& pattern);

std::string link_params_to_json(const LinkBudget& budget, const AntennaPattern& pattern);
void link_params_from_json(const std::string& text, LinkBudget& budget,
                           AntennaPattern& pattern);

} // namespace bletag
