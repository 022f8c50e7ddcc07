#include "bletag/modem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bletag {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

// 4-point cubic (Catmull-Rom) at fractional position mu past p[1]
inline double cubic_interp(const double* p, double mu) {
    return p[1] + 0.5 * mu * (p[2] - p[0] +
           mu * (2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3] +
           mu * (3.0 * (p[1] - p[2]) + p[3] - p[0])));
}
} // namespace

void GmskParams::validate() const {
    if (samples_per_symbol < 2)
        throw std::invalid_argument("GmskParams: samples_per_symbol must be >= 2");
    if (!(bt > 0.0) || bt > 1.0)
        throw std::invalid_argument("GmskParams: bt must be in (0, 1]");
    if (modulation_index < 0.25 || modulation_index > 1.0)
        throw std::invalid_argument("GmskParams: modulation_index must be in [0.25, 1]");
    if (gaussian_span_symbols < 1)
        throw std::invalid_argument("GmskParams: gaussian span must be >= 1");
}

void TimingRecoveryParams::validate() const {
    if (!(gain_mu > 0.0) || gain_mu >= 1.0)
        throw std::invalid_argument("TimingRecoveryParams: gain_mu must be in (0, 1)");
    if (!(omega > 1.0))
        throw std::invalid_argument("TimingRecoveryParams: omega must be > 1");
    if (omega_relative_limit < 0.0)
        throw std::invalid_argument("TimingRecoveryParams: negative omega limit");
}

std::vector<double> gaussian_pulse_taps(const GmskParams& params) {
    params.validate();
    const int sps = params.samples_per_symbol;
    const int ntaps = params.gaussian_span_symbols * sps + 1;
    std::vector<double> taps(static_cast<std::size_t>(ntaps));
    // h(t) = sqrt(2 pi / ln 2) * BT * exp(-2 pi^2 BT^2 t^2 / ln 2), t in symbols
    const double ln2 = std::numbers::ln2;
    const double a = std::sqrt(kTwoPi / ln2) * params.bt;
    const double b = 2.0 * kPi * kPi * params.bt * params.bt / ln2;
    const double center = 0.5 * (ntaps - 1);
    double sum = 0.0;
    for (int k = 0; k < ntaps; ++k) {
        const double t = (k - center) / sps;
        taps[static_cast<std::size_t>(k)] = a * std::exp(-b * t * t);
        sum += taps[static_cast<std::size_t>(k)];
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

IqBuffer gmsk_modulate(const BitSequence& bits, const GmskParams& params,
                       double sample_rate_hz) {
    params.validate();
    if (bits.empty()) throw std::invalid_argument("gmsk_modulate: empty bit stream");
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("gmsk_modulate: sample rate must be positive");

    const int sps = params.samples_per_symbol;
    const auto taps = gaussian_pulse_taps(params);
    const std::size_t held = bits.size() * static_cast<std::size_t>(sps);
    const std::size_t total = held + taps.size() - 1;

    // NRZ hold then convolve with the Gaussian pulse
    std::vector<double> nrz(held);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        const double v = bits[i] ? 1.0 : -1.0;
        for (int k = 0; k < sps; ++k) nrz[i * static_cast<std::size_t>(sps) + static_cast<std::size_t>(k)] = v;
    }
    std::vector<double> freq(total, 0.0);
    for (std::size_t m = 0; m < total; ++m) {
        double acc = 0.0;
        const std::size_t k_lo = m >= held ? m - held + 1 : 0;
        const std::size_t k_hi = std::min(m + 1, taps.size());
        for (std::size_t k = k_lo; k < k_hi; ++k) acc += taps[k] * nrz[m - k];
        freq[m] = acc;
    }

    // integrate frequency to phase; peak deviation h/2 * Rs
    const double dev = params.nominal_deviation_hz(sample_rate_hz);
    const double k_phase = kTwoPi * dev / sample_rate_hz;
    std::vector<std::complex<double>> samples(total);
    double phase = 0.0;
    for (std::size_t n = 0; n < total; ++n) {
        samples[n] = std::complex<double>(std::cos(phase), std::sin(phase));
        phase += k_phase * freq[n];
        if (phase > kPi) phase -= kTwoPi;
        else if (phase < -kPi) phase += kTwoPi;
    }
    return IqBuffer(std::move(samples), sample_rate_hz);
}

QuadratureDemod::QuadratureDemod(const GmskParams& params, double sample_rate_hz) {
    params.validate();
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("QuadratureDemod: sample rate must be positive");
    gain_ = sample_rate_hz / (kTwoPi * params.nominal_deviation_hz(sample_rate_hz));
}

std::vector<double> QuadratureDemod::process(std::span<const std::complex<double>> in) {
    std::vector<double> out;
    if (in.empty()) return out;
    out.reserve(in.size());
    std::size_t start = 0;
    if (!have_prev_) {
        prev_ = in[0];
        have_prev_ = true;
        start = 1;
    }
    for (std::size_t n = start; n < in.size(); ++n) {
        out.push_back(gain_ * std::arg(in[n] * std::conj(prev_)));
        prev_ = in[n];
    }
    return out;
}

void QuadratureDemod::reset() {
    have_prev_ = false;
    prev_ = {0.0, 0.0};
}

std::vector<double> quadrature_demod(const IqBuffer& iq, const GmskParams& params) {
    if (iq.empty()) throw std::invalid_argument("quadrature_demod: empty buffer");
    QuadratureDemod d(params, iq.sample_rate());
    return d.process(iq.samples());
}

DcBlocker::DcBlocker(int window) : window_(window) {
    if (window < 16) throw std::invalid_argument("DcBlocker: window must be >= 16");
    ring_.assign(static_cast<std::size_t>(window), 0.0);
}

std::vector<double> DcBlocker::process(std::span<const double> in) {
    std::vector<double> out;
    out.reserve(in.size());
    for (double x : in) {
        if (filled_ < ring_.size()) {
            ++filled_;
        } else {
            sum_ -= ring_[head_];
        }
        ring_[head_] = x;
        head_ = (head_ + 1) % ring_.size();
        sum_ += x;
        out.push_back(x - sum_ / static_cast<double>(filled_));
    }
    return out;
}

void DcBlocker::reset() {
    std::fill(ring_.begin(), ring_.end(), 0.0);
    head_ = 0;
    filled_ = 0;
    sum_ = 0.0;
}

std::vector<double> remove_dc(const std::vector<double>& soft, int window) {
    DcBlocker b(window);
    return b.process(soft);
}

MmTimingRecovery::MmTimingRecovery(const TimingRecoveryParams& params) : params_(params) {
    params.validate();
    gain_omega_ = 0.25 * params.gain_mu * params.gain_mu;
    omega_ = params.omega;
    omega_mid_ = params.omega;
}

void MmTimingRecovery::process(std::span<const double> in, std::vector<double>& symbols,
                               std::vector<double>* positions) {
    buf_.insert(buf_.end(), in.begin(), in.end());
    const double lim = omega_mid_ * params_.omega_relative_limit;
    std::size_t ii = 0;
    // cubic interpolation needs 4 points: value lands between buf[ii+1] and buf[ii+2]
    while (ii + 4 <= buf_.size()) {
        const double y = cubic_interp(&buf_[ii], mu_);
        symbols.push_back(y);
        if (positions)
            positions->push_back(static_cast<double>(consumed_ + ii) + 1.0 + mu_);

        double e = sgn(last_sample_) * y - sgn(y) * last_sample_;
        e = std::clamp(e, -1.0, 1.0); // discriminator clicks would fling the loop
        last_sample_ = y;
        omega_ += gain_omega_ * e;
        omega_ = std::clamp(omega_, omega_mid_ - lim, omega_mid_ + lim);
        mu_ += omega_ + params_.gain_mu * e;

        double ipart = std::floor(mu_);
        if (ipart < 1.0) ipart = 1.0; // always make progress
        mu_ -= ipart;
        ii += static_cast<std::size_t>(ipart);
    }
    consumed_ += ii;
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(ii));
}

void MmTimingRecovery::reset() {
    omega_ = params_.omega;
    mu_ = 0.5;
    last_sample_ = 0.0;
    buf_.clear();
    consumed_ = 0;
}

std::vector<double> mm_timing_recovery(const std::vector<double>& soft,
                                       const TimingRecoveryParams& params) {
    MmTimingRecovery mm(params);
    std::vector<double> symbols;
    mm.process(soft, symbols);
    return symbols;
}

BitSequence slice(const std::vector<double>& soft_symbols) {
    BitSequence out;
    for (double v : soft_symbols) out.push_back(v < 0.0 ? 0 : 1);
    return out;
}

} // namespace bletag
