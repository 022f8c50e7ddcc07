#include "bletag/iq.hpp"

#include <cmath>
#include <stdexcept>

namespace bletag {

IqBuffer::IqBuffer(std::vector<std::complex<double>> samples, double sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
    if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_))
        throw std::invalid_argument("IqBuffer: sample rate must be positive and finite");
    for (const auto& s : samples_) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw std::invalid_argument("IqBuffer: non-finite sample");
    }
}

double IqBuffer::mean_power() const {
    if (samples_.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& s : samples_) acc += std::norm(s);
    return acc / static_cast<double>(samples_.size());
}

} // namespace bletag
