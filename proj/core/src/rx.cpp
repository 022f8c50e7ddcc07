#include "bletag/rx.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bletag/frame.hpp"

namespace bletag {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// retention for rssi lookups and bit -> sample mapping
constexpr std::size_t kPowerRingDepth = 1 << 14;
constexpr std::size_t kBitRingDepth = 1 << 13;
} // namespace

void SquelchParams::validate() const {
    if (!std::isfinite(threshold_db))
        throw std::invalid_argument("SquelchParams: threshold must be finite");
    if (!(averaging_alpha > 0.0) || averaging_alpha > 1.0)
        throw std::invalid_argument("SquelchParams: alpha must be in (0, 1]");
    if (hang_samples < 0)
        throw std::invalid_argument("SquelchParams: negative hang");
}

void XlatingFirParams::validate(double sample_rate_hz) const {
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("XlatingFirParams: sample rate must be positive");
    if (!(cutoff_hz > 0.0) || !(transition_hz > 0.0))
        throw std::invalid_argument("XlatingFirParams: cutoff/transition must be positive");
    if (cutoff_hz + transition_hz >= sample_rate_hz / 2.0)
        throw std::invalid_argument("XlatingFirParams: band edge beyond Nyquist");
    if (decimation < 1)
        throw std::invalid_argument("XlatingFirParams: decimation must be >= 1");
    if (std::abs(center_offset_hz) >= sample_rate_hz / 2.0)
        throw std::invalid_argument("XlatingFirParams: center offset beyond Nyquist");
}

void DetectorConfig::validate() const {
    if (codebook.entries.empty())
        throw std::invalid_argument("DetectorConfig: empty codebook");
    if (threshold <= 128 || threshold > 256)
        throw std::invalid_argument("DetectorConfig: threshold must be in 129..256");
    if (dedup_window_bits < 1)
        throw std::invalid_argument("DetectorConfig: dedup window must be >= 1");
    for (const auto& e : codebook.entries) {
        if (e.code.size() != kDetectSequenceBits)
            throw std::invalid_argument("DetectorConfig: codebook entry is not 256 bits");
    }
}

PowerSquelch::PowerSquelch(const SquelchParams& params) : params_(params) {
    params.validate();
    threshold_lin_ = std::pow(10.0, params.threshold_db / 10.0);
}

void PowerSquelch::process(std::span<const std::complex<double>> in,
                           std::vector<std::complex<double>>& out) {
    for (const auto& x : in) {
        power_ += params_.averaging_alpha * (std::norm(x) - power_);
        bool pass;
        if (power_ >= threshold_lin_) {
            hang_left_ = params_.hang_samples;
            pass = true;
        } else if (hang_left_ > 0) {
            --hang_left_;
            pass = true;
        } else {
            pass = false;
        }
        if (pass) {
            if (!open_) {
                segments_.push_back({out_count_, in_count_});
                open_ = true;
            }
            out.push_back(x);
            ++out_count_;
        } else {
            open_ = false;
        }
        ++in_count_;
    }
}

std::uint64_t PowerSquelch::input_index_of_output(std::uint64_t out_idx) const {
    if (segments_.empty()) return out_idx;
    // last segment whose out_start <= out_idx
    auto it = std::upper_bound(segments_.begin(), segments_.end(), out_idx,
                               [](std::uint64_t v, const Segment& s) { return v < s.out_start; });
    if (it == segments_.begin()) return out_idx;
    --it;
    return it->in_start + (out_idx - it->out_start);
}

IqBuffer power_squelch(const IqBuffer& iq, const SquelchParams& params) {
    PowerSquelch sq(params);
    std::vector<std::complex<double>> out;
    sq.process(iq.samples(), out);
    return IqBuffer(std::move(out), iq.sample_rate());
}

XlatingFir::XlatingFir(const XlatingFirParams& params, double sample_rate_hz)
    : params_(params) {
    params.validate(sample_rate_hz);
    // Hamming windowed sinc; the 3.3/transition rule gives ~53 dB stopband
    int ntaps = static_cast<int>(std::ceil(3.3 * sample_rate_hz / params.transition_hz));
    if (ntaps % 2 == 0) ++ntaps;
    taps_.resize(static_cast<std::size_t>(ntaps));
    const double fc = (params.cutoff_hz + params.transition_hz / 2.0) / sample_rate_hz;
    const int half = ntaps / 2;
    double sum = 0.0;
    for (int k = 0; k < ntaps; ++k) {
        const int m = k - half;
        double h = (m == 0) ? 2.0 * fc
                            : std::sin(kTwoPi * fc * m) / (std::numbers::pi * m);
        h *= 0.54 + 0.46 * std::cos(std::numbers::pi * m / half);
        taps_[static_cast<std::size_t>(k)] = h;
        sum += h;
    }
    for (auto& t : taps_) t /= sum;
    buf_.assign(taps_.size() - 1, {0.0, 0.0});
    phase_inc_ = -kTwoPi * params.center_offset_hz / sample_rate_hz;
}

void XlatingFir::process(std::span<const std::complex<double>> in,
                         std::vector<std::complex<double>>& out) {
    const std::size_t hist = taps_.size() - 1;
    buf_.reserve(buf_.size() + in.size());
    for (const auto& x : in) {
        buf_.push_back(x * std::complex<double>(std::cos(phase_), std::sin(phase_)));
        phase_ += phase_inc_;
        if (phase_ > std::numbers::pi) phase_ -= kTwoPi;
        else if (phase_ < -std::numbers::pi) phase_ += kTwoPi;
    }
    std::size_t i = hist;
    for (; i < buf_.size(); ++i) {
        if (decim_phase_ == 0) {
            std::complex<double> acc{0.0, 0.0};
            for (std::size_t k = 0; k < taps_.size(); ++k) acc += taps_[k] * buf_[i - k];
            out.push_back(acc);
        }
        decim_phase_ = (decim_phase_ + 1) % params_.decimation;
    }
    // keep the last ntaps-1 samples as history
    if (buf_.size() > hist)
        buf_.erase(buf_.begin(), buf_.end() - static_cast<std::ptrdiff_t>(hist));
}

IqBuffer xlating_fir(const IqBuffer& iq, const XlatingFirParams& params) {
    XlatingFir fir(params, iq.sample_rate());
    std::vector<std::complex<double>> out;
    fir.process(iq.samples(), out);
    return IqBuffer(std::move(out), iq.sample_rate() / params.decimation);
}

SlidingCorrelator::SlidingCorrelator(const DetectorConfig& config) : config_(config) {
    config.validate();
    tags_.reserve(config_.codebook.entries.size());
    for (const auto& e : config_.codebook.entries) {
        TagState t;
        t.id = e.tag_id;
        // word q/64 bit q%64 holds code bit 255-q, so the newest window bit
        // (age 0) lines up with the last code bit
        for (int q = 0; q < kDetectSequenceBits; ++q) {
            if (e.code[static_cast<std::size_t>(kDetectSequenceBits - 1 - q)])
                t.code[static_cast<std::size_t>(q / 64)] |= 1ULL << (q % 64);
        }
        tags_.push_back(std::move(t));
    }
}

void SlidingCorrelator::collect(std::vector<DetectionEvent>& out, TagState& t) {
    DetectionEvent ev;
    ev.tag_id = t.id;
    ev.score = t.cand_score;
    ev.sample_offset = t.cand_pos;
    ev.timestamp_sec = 0.0; // stamped by the receiver
    out.push_back(std::move(ev));
    t.has_candidate = false;
}

std::vector<DetectionEvent> SlidingCorrelator::push(const BitSequence& bits) {
    std::vector<DetectionEvent> events;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        // age the window and insert the new bit at age 0
        window_[3] = (window_[3] << 1) | (window_[2] >> 63);
        window_[2] = (window_[2] << 1) | (window_[1] >> 63);
        window_[1] = (window_[1] << 1) | (window_[0] >> 63);
        window_[0] = (window_[0] << 1) | bits[i];
        const std::uint64_t pos = nbits_++;
        if (nbits_ < kDetectSequenceBits) continue;

        for (auto& t : tags_) {
            int mismatch = 0;
            for (int w = 0; w < 4; ++w)
                mismatch += std::popcount(window_[static_cast<std::size_t>(w)] ^
                                          t.code[static_cast<std::size_t>(w)]);
            const int score = kDetectSequenceBits - mismatch;
            if (t.has_candidate && pos - t.cand_pos >= static_cast<std::uint64_t>(config_.dedup_window_bits))
                collect(events, t);
            if (score >= config_.threshold) {
                if (!t.has_candidate || score > t.cand_score) {
                    t.has_candidate = true;
                    t.cand_score = score;
                    t.cand_pos = pos;
                }
            }
        }
    }
    std::sort(events.begin(), events.end(),
              [](const DetectionEvent& a, const DetectionEvent& b) {
                  return a.sample_offset < b.sample_offset ||
                         (a.sample_offset == b.sample_offset && a.tag_id < b.tag_id);
              });
    return events;
}

std::vector<DetectionEvent> SlidingCorrelator::finish() {
    std::vector<DetectionEvent> events;
    for (auto& t : tags_) {
        if (t.has_candidate) collect(events, t);
    }
    std::sort(events.begin(), events.end(),
              [](const DetectionEvent& a, const DetectionEvent& b) {
                  return a.sample_offset < b.sample_offset ||
                         (a.sample_offset == b.sample_offset && a.tag_id < b.tag_id);
              });
    return events;
}

int SlidingCorrelator::current_score(std::size_t idx) const {
    const auto& t = tags_.at(idx);
    int mismatch = 0;
    for (int w = 0; w < 4; ++w)
        mismatch += std::popcount(window_[static_cast<std::size_t>(w)] ^
                                  t.code[static_cast<std::size_t>(w)]);
    return kDetectSequenceBits - mismatch;
}

std::vector<DetectionEvent> sliding_correlate(const BitSequence& bits,
                                              const DetectorConfig& config) {
    SlidingCorrelator corr(config);
    auto events = corr.push(bits);
    auto tail = corr.finish();
    events.insert(events.end(), tail.begin(), tail.end());
    for (auto& e : events) e.timestamp_sec = static_cast<double>(e.sample_offset) / 1.0e6;
    return events;
}

Receiver::Receiver(ReceiverParams params, double sample_rate_hz)
    : params_(std::move(params)),
      sample_rate_(sample_rate_hz),
      bit_rate_(params_.gmsk.symbol_rate(sample_rate_hz / params_.fir.decimation)),
      squelch_(params_.squelch),
      fir_(params_.fir, sample_rate_hz),
      demod_(params_.gmsk, sample_rate_hz / params_.fir.decimation),
      dc_(64),
      mm_(params_.timing),
      corr_(params_.detector) {
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("Receiver: sample rate must be positive");
}

std::vector<DetectionEvent> Receiver::process(const IqBuffer& chunk) {
    if (chunk.sample_rate() != sample_rate_)
        throw std::invalid_argument("Receiver: chunk sample rate mismatch");
    sq_out_.clear();
    squelch_.process(chunk.samples(), sq_out_);

    for (const auto& x : sq_out_) {
        passed_power_.push_back(std::norm(x));
        if (passed_power_.size() > kPowerRingDepth) {
            passed_power_.pop_front();
            ++passed_power_base_;
        }
    }

    fir_out_.clear();
    fir_.process(sq_out_, fir_out_);
    const auto soft = demod_.process(fir_out_);
    const auto soft_dc = dc_.process(soft);

    std::vector<double> symbols;
    std::vector<double> positions;
    mm_.process(soft_dc, symbols, &positions);

    for (double p : positions) {
        bit_positions_.push_back(p);
        if (bit_positions_.size() > kBitRingDepth) {
            bit_positions_.pop_front();
            ++bit_base_;
        }
    }

    auto events = corr_.push(slice(symbols));
    annotate(events);
    return events;
}

std::vector<DetectionEvent> Receiver::finish() {
    std::vector<DetectionEvent> events;
    if (!finished_) {
        finished_ = true;
        // flush the FIR and timing loop with silence so trailing symbols
        // reach the correlator
        const std::size_t flush = fir_.num_taps() +
            static_cast<std::size_t>(8.0 * params_.timing.omega) + 16;
        std::vector<std::complex<double>> zeros(flush, {0.0, 0.0});
        fir_out_.clear();
        fir_.process(zeros, fir_out_);
        const auto soft = demod_.process(fir_out_);
        const auto soft_dc = dc_.process(soft);
        std::vector<double> symbols;
        std::vector<double> positions;
        mm_.process(soft_dc, symbols, &positions);
        for (double p : positions) {
            bit_positions_.push_back(p);
            if (bit_positions_.size() > kBitRingDepth) {
                bit_positions_.pop_front();
                ++bit_base_;
            }
        }
        events = corr_.push(slice(symbols));
    }
    auto tail = corr_.finish();
    events.insert(events.end(), tail.begin(), tail.end());
    annotate(events);
    return events;
}

std::vector<DetectionEvent> Receiver::run(const IqBuffer& iq) {
    auto events = process(iq);
    auto tail = finish();
    events.insert(events.end(), tail.begin(), tail.end());
    return events;
}

std::uint64_t Receiver::input_sample_for_bit(std::uint64_t bit_offset) const {
    double mm_pos = 0.0;
    if (bit_offset >= bit_base_ && bit_offset - bit_base_ < bit_positions_.size()) {
        mm_pos = bit_positions_[static_cast<std::size_t>(bit_offset - bit_base_)];
    } else if (!bit_positions_.empty()) {
        mm_pos = bit_positions_.back(); // fell off the ring; best effort
    }
    // mm input stream == dc output == demod output; demod output k comes
    // from fir outputs (k, k+1); the fir center tap compensates its delay
    double sq_pos = mm_pos + 1.0 - fir_.group_delay_samples();
    if (sq_pos < 0.0) sq_pos = 0.0;
    const auto sq_idx = static_cast<std::uint64_t>(std::llround(sq_pos)) *
                        static_cast<std::uint64_t>(params_.fir.decimation);
    return squelch_.input_index_of_output(sq_idx);
}

double Receiver::offset_uncertainty_samples() const {
    // timing-loop convergence dominates; the fir group delay itself is
    // compensated exactly
    return 8.0 * params_.timing.omega + 4.0;
}

void Receiver::annotate(std::vector<DetectionEvent>& events) {
    const double frame_span = kFrameBits * params_.timing.omega;
    for (auto& ev : events) {
        ev.timestamp_sec = static_cast<double>(ev.sample_offset) / bit_rate_;
        // mean passed power across the frame, in dBFS
        double mm_pos = 0.0;
        if (ev.sample_offset >= bit_base_ &&
            ev.sample_offset - bit_base_ < bit_positions_.size())
            mm_pos = bit_positions_[static_cast<std::size_t>(ev.sample_offset - bit_base_)];
        double end = mm_pos + 1.0 - fir_.group_delay_samples();
        double begin = end - frame_span;
        if (begin < 0.0) begin = 0.0;
        const auto b = static_cast<std::uint64_t>(begin);
        const auto e = static_cast<std::uint64_t>(std::max(end, 0.0));
        double acc = 0.0;
        std::uint64_t n = 0;
        for (std::uint64_t i = b; i < e; ++i) {
            if (i < passed_power_base_) continue;
            const std::uint64_t r = i - passed_power_base_;
            if (r >= passed_power_.size()) break;
            acc += passed_power_[static_cast<std::size_t>(r)];
            ++n;
        }
        ev.rssi_db_est = (n > 0 && acc > 0.0)
                             ? 10.0 * std::log10(acc / static_cast<double>(n))
                             : -200.0;
    }
}

std::string events_to_jsonl(const std::vector<DetectionEvent>& events) {
    std::string out;
    for (const auto& ev : events) {
        nlohmann::ordered_json j;
        j["tag_id"] = ev.tag_id;
        j["score"] = ev.score;
        j["sample_offset"] = ev.sample_offset;
        j["rssi_db"] = ev.rssi_db_est;
        j["t_sec"] = ev.timestamp_sec;
        out += j.dump();
        out += '\n';
    }
    return out;
}

} // namespace bletag
