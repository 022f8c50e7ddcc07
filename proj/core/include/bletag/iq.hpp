#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace bletag {

/// Complex baseband samples plus the rate they were taken at; the signal
/// currency between modulator, channel and receiver. Construction rejects
/// non-finite samples and non-positive rates.
class IqBuffer {
public:
    IqBuffer() = default;
    IqBuffer(std::vector<std::complex<double>> samples, double sample_rate_hz);

    const std::vector<std::complex<double>>& samples() const noexcept { return samples_; }
    double sample_rate() const noexcept { return sample_rate_hz_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }

    /// Mean of |x|^2.
    double mean_power() const;

private:
    std::vector<std::complex<double>> samples_;
    double sample_rate_hz_ = 0.0;
};

} // namespace bletag
