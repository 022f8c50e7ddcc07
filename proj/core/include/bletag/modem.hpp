#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "bletag/bits.hpp"
#include "bletag/iq.hpp"

namespace bletag {

struct GmskParams {
    int samples_per_symbol = 4;
    double bt = 0.5;               // gaussian bandwidth-time product
    double modulation_index = 0.5; // MSK-equivalent, BLE 1M nominal
    int gaussian_span_symbols = 4;

    void validate() const;
    double symbol_rate(double sample_rate_hz) const {
        return sample_rate_hz / samples_per_symbol;
    }
    /// Peak frequency deviation for an isolated symbol: h/2 * symbol rate.
    double nominal_deviation_hz(double sample_rate_hz) const {
        return 0.5 * modulation_index * symbol_rate(sample_rate_hz);
    }
};

struct TimingRecoveryParams {
    double gain_mu = 0.55;
    double omega = 4.0; // samples per symbol estimate
    double omega_relative_limit = 0.005;

    void validate() const;
};

/// Discrete Gaussian frequency pulse, unit DC gain,
/// span_symbols * samples_per_symbol + 1 taps.
std::vector<double> gaussian_pulse_taps(const GmskParams& params);

/// Phase-continuous GMSK at unit amplitude. The NRZ bit stream (0 -> -1,
/// 1 -> +1) held at samples_per_symbol is convolved with the Gaussian pulse
/// and integrated into phase; total phase advance per isolated symbol is
/// +/- pi * modulation_index. Output length is
/// bits.size() * samples_per_symbol + filter tail (span * sps samples).
IqBuffer gmsk_modulate(const BitSequence& bits, const GmskParams& params,
                       double sample_rate_hz);

/// Streaming FM discriminator: arg(x[n] * conj(x[n-1])), scaled so the
/// nominal deviation maps to +/- 1.0. First call emits input size - 1
/// values; state carries across calls.
class QuadratureDemod {
public:
    QuadratureDemod(const GmskParams& params, double sample_rate_hz);

    std::vector<double> process(std::span<const std::complex<double>> in);
    void reset();

private:
    double gain_;
    std::complex<double> prev_{0.0, 0.0};
    bool have_prev_ = false;
};

/// One-shot convenience form; output length = input length - 1.
std::vector<double> quadrature_demod(const IqBuffer& iq, const GmskParams& params);

/// Subtracts a trailing-window running mean. Kills the DC offset a carrier
/// frequency error leaves on discriminator output.
class DcBlocker {
public:
    explicit DcBlocker(int window);

    std::vector<double> process(std::span<const double> in);
    void reset();

private:
    int window_;
    std::vector<double> ring_;
    std::size_t head_ = 0;
    std::size_t filled_ = 0;
    double sum_ = 0.0;
};

std::vector<double> remove_dc(const std::vector<double>& soft, int window = 64);

/// Mueller-Muller decision-directed timing recovery with cubic
/// interpolation. Timing error e = sgn(y[n-1])*y[n] - sgn(y[n])*y[n-1];
/// mu advances by omega + gain_mu * e per symbol, omega adapts with
/// gain 0.25 * gain_mu^2 and is clamped to omega * (1 +/- relative limit).
class MmTimingRecovery {
public:
    explicit MmTimingRecovery(const TimingRecoveryParams& params);

    /// Appends one soft value per recovered symbol to `symbols`; if
    /// `positions` is given, also appends the (fractional) global input
    /// sample index each symbol was interpolated at.
    void process(std::span<const double> in, std::vector<double>& symbols,
                 std::vector<double>* positions = nullptr);
    void reset();

private:
    TimingRecoveryParams params_;
    double gain_omega_;
    double omega_;
    double omega_mid_;
    double mu_ = 0.5;
    double last_sample_ = 0.0;
    std::vector<double> buf_;     // unconsumed tail
    std::uint64_t consumed_ = 0;  // global input samples consumed so far
};

/// One-shot form, one output per recovered symbol.
std::vector<double> mm_timing_recovery(const std::vector<double>& soft,
                                       const TimingRecoveryParams& params);

/// Sign threshold at zero; 0.0 maps to 1 (tie rule).
BitSequence slice(const std::vector<double>& soft_symbols);

} // namespace bletag
