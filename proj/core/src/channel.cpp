#include "bletag/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "bletag/errors.hpp"
#include "bletag/rng.hpp"

namespace bletag {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSpeedOfLight = 299792458.0;
constexpr double kThermalNoiseDbmHz = -174.0;

// Windowed-sinc fractional resampler. Half-width 32 taps, Blackman window,
// cutoff 0.46 fs: flat to well past the occupied band at 4 MS/s, stopband
// deep enough that interpolation error is far below the noise levels the
// detector is characterized at.
constexpr int kInterpHalfWidth = 32;
constexpr int kInterpPhases = 1024;
constexpr double kInterpCutoff = 0.46;

const std::vector<std::array<double, 2 * kInterpHalfWidth + 1>>& interp_table() {
    static const auto table = [] {
        std::vector<std::array<double, 2 * kInterpHalfWidth + 1>> t(kInterpPhases);
        for (int p = 0; p < kInterpPhases; ++p) {
            const double frac = static_cast<double>(p) / kInterpPhases;
            double sum = 0.0;
            for (int k = -kInterpHalfWidth; k <= kInterpHalfWidth; ++k) {
                const double x = k - frac;
                double sinc = (x == 0.0) ? 2.0 * kInterpCutoff
                                         : std::sin(kTwoPi * kInterpCutoff * x) /
                                               (std::numbers::pi * x);
                const double u = x / kInterpHalfWidth;
                double w = 0.0;
                if (std::abs(u) <= 1.0)
                    w = 0.42 + 0.5 * std::cos(std::numbers::pi * u) +
                        0.08 * std::cos(kTwoPi * u);
                const double h = sinc * w;
                t[static_cast<std::size_t>(p)][static_cast<std::size_t>(k + kInterpHalfWidth)] = h;
                sum += h;
            }
            for (auto& h : t[static_cast<std::size_t>(p)]) h /= sum; // unity gain per phase
        }
        return t;
    }();
    return table;
}

std::vector<std::complex<double>> resample(const std::vector<std::complex<double>>& in,
                                           double ratio, double delay) {
    const auto& table = interp_table();
    const int w = kInterpHalfWidth;
    std::vector<std::complex<double>> out;
    if (in.size() < static_cast<std::size_t>(2 * w + 2)) return out;
    out.reserve(static_cast<std::size_t>(static_cast<double>(in.size()) / ratio));
    for (std::size_t n = 0;; ++n) {
        const double t = w + delay + static_cast<double>(n) * ratio;
        const auto i0 = static_cast<std::ptrdiff_t>(std::floor(t));
        double frac = t - static_cast<double>(i0);
        int phase = static_cast<int>(std::lround(frac * kInterpPhases));
        std::ptrdiff_t base = i0;
        if (phase == kInterpPhases) {
            phase = 0;
            ++base;
        }
        if (base + w >= static_cast<std::ptrdiff_t>(in.size())) break;
        if (base - w < 0) continue;
        const auto& taps = table[static_cast<std::size_t>(phase)];
        std::complex<double> acc{0.0, 0.0};
        for (int k = -w; k <= w; ++k)
            acc += taps[static_cast<std::size_t>(k + w)] * in[static_cast<std::size_t>(base + k)];
        out.push_back(acc);
    }
    return out;
}

} // namespace

void LinkBudget::validate() const {
    for (double v : {tx_power_dbm, tx_gain_dbi, rx_gain_dbi, noise_figure_db, full_scale_dbm}) {
        if (!std::isfinite(v)) throw std::invalid_argument("LinkBudget: non-finite field");
    }
    if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz))
        throw std::invalid_argument("LinkBudget: frequency must be positive");
    if (!(noise_bandwidth_hz > 0.0) || !std::isfinite(noise_bandwidth_hz))
        throw std::invalid_argument("LinkBudget: noise bandwidth must be positive");
}

double LinkBudget::noise_floor_dbm() const {
    return kThermalNoiseDbmHz + 10.0 * std::log10(noise_bandwidth_hz) + noise_figure_db;
}

void AntennaPattern::validate() const {
    if (!(beamwidth_3db_deg > 0.0) || !std::isfinite(beamwidth_3db_deg))
        throw std::invalid_argument("AntennaPattern: beamwidth must be positive");
    if (!(sidelobe_floor_db >= 0.0) || !std::isfinite(sidelobe_floor_db))
        throw std::invalid_argument("AntennaPattern: sidelobe floor must be >= 0");
    if (!std::isfinite(boresight_gain_dbi))
        throw std::invalid_argument("AntennaPattern: non-finite boresight gain");
}

double pattern_gain(const AntennaPattern& pattern, double azimuth_deg) {
    pattern.validate();
    if (!(azimuth_deg >= -180.0 && azimuth_deg <= 180.0))
        throw std::invalid_argument("pattern_gain: azimuth must be in [-180, 180]");
    const double x = azimuth_deg / pattern.beamwidth_3db_deg;
    const double rolloff = std::min(12.0 * x * x, pattern.sidelobe_floor_db);
    return pattern.boresight_gain_dbi - rolloff;
}

double fspl_db(double distance_m, double frequency_hz) {
    if (!(distance_m > 0.0))
        throw std::invalid_argument("fspl_db: distance must be positive");
    if (!(frequency_hz > 0.0))
        throw std::invalid_argument("fspl_db: frequency must be positive");
    return 20.0 * std::log10(distance_m) + 20.0 * std::log10(frequency_hz) +
           20.0 * std::log10(4.0 * std::numbers::pi / kSpeedOfLight);
}

double rx_power_dbm(const LinkBudget& budget, const AntennaPattern& pattern,
                    double distance_m, double azimuth_deg) {
    budget.validate();
    return budget.tx_power_dbm + budget.tx_gain_dbi + pattern_gain(pattern, azimuth_deg) -
           fspl_db(distance_m, budget.frequency_hz);
}

double rx_snr_db(const LinkBudget& budget, const AntennaPattern& pattern,
                 double distance_m, double azimuth_deg) {
    return rx_power_dbm(budget, pattern, distance_m, azimuth_deg) - budget.noise_floor_dbm();
}

void ChannelParams::validate() const {
    if (snr_db.has_value() == distance_m.has_value())
        throw std::invalid_argument("ChannelParams: set exactly one of snr_db / distance_m");
    if (snr_db && std::isnan(*snr_db))
        throw std::invalid_argument("ChannelParams: snr_db is NaN");
    if (distance_m && !(*distance_m > 0.0))
        throw std::invalid_argument("ChannelParams: distance must be positive");
    if (!std::isfinite(cfo_hz) || !std::isfinite(phase_rad))
        throw std::invalid_argument("ChannelParams: non-finite carrier offset");
    if (!std::isfinite(timing_offset_samples) || std::abs(timing_offset_samples) > 4096.0)
        throw std::invalid_argument("ChannelParams: timing offset out of range");
    if (!std::isfinite(clock_offset_ppm) || std::abs(clock_offset_ppm) > 1e5)
        throw std::invalid_argument("ChannelParams: clock offset out of range");
}

IqBuffer apply_channel(const IqBuffer& iq, const ChannelParams& params,
                       const LinkBudget& budget, const AntennaPattern& pattern) {
    params.validate();
    budget.validate();
    const double fs = iq.sample_rate();

    std::vector<std::complex<double>> x;
    if (params.timing_offset_samples == 0.0 && params.clock_offset_ppm == 0.0) {
        x = iq.samples();
    } else {
        const double ratio = 1.0 / (1.0 + params.clock_offset_ppm * 1e-6);
        x = resample(iq.samples(), ratio, params.timing_offset_samples);
    }

    if (params.cfo_hz != 0.0 || params.phase_rad != 0.0) {
        const double inc = kTwoPi * params.cfo_hz / fs;
        double ph = params.phase_rad;
        for (auto& s : x) {
            s *= std::complex<double>(std::cos(ph), std::sin(ph));
            ph += inc;
            if (ph > std::numbers::pi) ph -= kTwoPi;
            else if (ph < -std::numbers::pi) ph += kTwoPi;
        }
    }

    double psig = 0.0;
    for (const auto& s : x) psig += std::norm(s);
    if (!x.empty()) psig /= static_cast<double>(x.size());

    double scale = 1.0;
    double noise_var = 0.0; // per complex sample, full band
    const double band_factor = fs / budget.noise_bandwidth_hz;
    if (params.snr_db) {
        if (!std::isinf(*params.snr_db))
            noise_var = psig * band_factor * std::pow(10.0, -*params.snr_db / 10.0);
    } else {
        const double prx_dbm = rx_power_dbm(budget, pattern, *params.distance_m, params.azimuth_deg);
        const double sig_dbfs = prx_dbm - budget.full_scale_dbm;
        if (psig > 0.0) scale = std::sqrt(std::pow(10.0, sig_dbfs / 10.0) / psig);
        const double noise_dbfs = budget.noise_floor_dbm() - budget.full_scale_dbm;
        noise_var = std::pow(10.0, noise_dbfs / 10.0) * band_factor;
    }

    if (noise_var > 0.0) {
        Rng rng(params.rng_seed);
        const double s = std::sqrt(noise_var / 2.0);
        for (auto& v : x) {
            v = scale * v + std::complex<double>(s * rng.gaussian(), s * rng.gaussian());
        }
    } else if (scale != 1.0) {
        for (auto& v : x) v *= scale;
    }

    return IqBuffer(std::move(x), fs);
}

std::string link_params_to_json(const LinkBudget& budget, const AntennaPattern& pattern) {
    nlohmann::ordered_json j;
    j["tx_power_dbm"] = budget.tx_power_dbm;
    j["tx_gain_dbi"] = budget.tx_gain_dbi;
    j["rx_gain_dbi"] = budget.rx_gain_dbi;
    j["frequency_hz"] = budget.frequency_hz;
    j["noise_figure_db"] = budget.noise_figure_db;
    j["noise_bandwidth_hz"] = budget.noise_bandwidth_hz;
    j["full_scale_dbm"] = budget.full_scale_dbm;
    j["boresight_gain_dbi"] = pattern.boresight_gain_dbi;
    j["beamwidth_3db_deg"] = pattern.beamwidth_3db_deg;
    j["sidelobe_floor_db"] = pattern.sidelobe_floor_db;
    return j.dump(2) + "\n";
}

void link_params_from_json(const std::string& text, LinkBudget& budget,
                           AntennaPattern& pattern) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("link params: bad JSON: ") + e.what());
    }
    auto get = [&](const char* key, double& field) {
        if (j.contains(key)) field = j.at(key).get<double>();
    };
    get("tx_power_dbm", budget.tx_power_dbm);
    get("tx_gain_dbi", budget.tx_gain_dbi);
    get("rx_gain_dbi", budget.rx_gain_dbi);
    get("frequency_hz", budget.frequency_hz);
    get("noise_figure_db", budget.noise_figure_db);
    get("noise_bandwidth_hz", budget.noise_bandwidth_hz);
    get("full_scale_dbm", budget.full_scale_dbm);
    get("boresight_gain_dbi", pattern.boresight_gain_dbi);
    get("beamwidth_3db_deg", pattern.beamwidth_3db_deg);
    get("sidelobe_floor_db", pattern.sidelobe_floor_db);
    budget.validate();
    pattern.validate();
}

} // namespace bletag
