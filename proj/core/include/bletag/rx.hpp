#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bletag/bits.hpp"
#include "bletag/iq.hpp"
#include "bletag/modem.hpp"
#include "bletag/pncode.hpp"

namespace bletag {

struct SquelchParams {
    double threshold_db = -40.0; // relative to full scale
    double averaging_alpha = 0.01;
    int hang_samples = 4096;

    void validate() const;
};

struct XlatingFirParams {
    double center_offset_hz = 1.0e6;
    double cutoff_hz = 750e3;
    double transition_hz = 250e3;
    int decimation = 1;

    void validate(double sample_rate_hz) const;
};

struct DetectionEvent {
    std::string tag_id;
    int score = 0;                   // agreeing bits, 0..256
    std::uint64_t sample_offset = 0; // bit index of the sequence end
    double rssi_db_est = 0.0;        // mean frame power, dBFS (diagnostic)
    double timestamp_sec = 0.0;      // sample_offset / bit rate
};

struct DetectorConfig {
    Codebook codebook;
    int threshold = 192;
    int dedup_window_bits = 280;

    void validate() const;
};

/// Gates samples on exponentially smoothed power. Passed samples are
/// unmodified; gated samples are dropped and segment anchors are kept so
/// output positions map back to input time.
class PowerSquelch {
public:
    explicit PowerSquelch(const SquelchParams& params);

    void process(std::span<const std::complex<double>> in,
                 std::vector<std::complex<double>>& out);

    /// Input sample index a passed (output) sample came from.
    std::uint64_t input_index_of_output(std::uint64_t out_idx) const;

    std::uint64_t samples_in() const noexcept { return in_count_; }
    std::uint64_t samples_out() const noexcept { return out_count_; }
    double smoothed_power() const noexcept { return power_; }

private:
    SquelchParams params_;
    double threshold_lin_;
    double power_ = 0.0;
    int hang_left_ = 0;
    bool open_ = false;
    std::uint64_t in_count_ = 0;
    std::uint64_t out_count_ = 0;
    struct Segment { std::uint64_t out_start, in_start; };
    std::vector<Segment> segments_;
};

/// One-shot form (gap mapping discarded).
IqBuffer power_squelch(const IqBuffer& iq, const SquelchParams& params);

/// Mixes by -center_offset and low-passes with a Hamming windowed-sinc FIR
/// designed from cutoff/transition, then decimates. Group delay is constant
/// and reported in input samples.
class XlatingFir {
public:
    XlatingFir(const XlatingFirParams& params, double sample_rate_hz);

    void process(std::span<const std::complex<double>> in,
                 std::vector<std::complex<double>>& out);

    int group_delay_samples() const noexcept { return int(taps_.size() - 1) / 2; }
    std::size_t num_taps() const noexcept { return taps_.size(); }

private:
    XlatingFirParams params_;
    std::vector<double> taps_;
    std::vector<std::complex<double>> buf_; // history + pending input
    double phase_ = 0.0;
    double phase_inc_;
    int decim_phase_ = 0;
};

IqBuffer xlating_fir(const IqBuffer& iq, const XlatingFirParams& params);

/// Streaming correlator over the trailing 256 demodulated bits. The window
/// and each code live in four 64-bit words, so the per-bit, per-tag update
/// is a constant number of shift/xor/popcount word operations. Emits the
/// local maximum at or above threshold within dedup_window_bits.
class SlidingCorrelator {
public:
    explicit SlidingCorrelator(const DetectorConfig& config);

    std::vector<DetectionEvent> push(const BitSequence& bits);
    /// Flushes pending peak candidates.
    std::vector<DetectionEvent> finish();

    std::uint64_t bits_consumed() const noexcept { return nbits_; }
    /// Current score of entry `idx` against the trailing window (for tests).
    int current_score(std::size_t idx) const;

private:
    struct TagState {
        std::string id;
        std::array<std::uint64_t, 4> code{};
        bool has_candidate = false;
        std::uint64_t cand_pos = 0;
        int cand_score = 0;
    };

    void collect(std::vector<DetectionEvent>& out, TagState& t);

    DetectorConfig config_;
    std::vector<TagState> tags_;
    std::array<std::uint64_t, 4> window_{};
    std::uint64_t nbits_ = 0;
};

/// One-shot form over a whole bit stream.
std::vector<DetectionEvent> sliding_correlate(const BitSequence& bits,
                                              const DetectorConfig& config);

struct ReceiverParams {
    SquelchParams squelch;
    XlatingFirParams fir;
    GmskParams gmsk;
    TimingRecoveryParams timing;
    DetectorConfig detector;
};

/// The full receive chain: power squelch -> frequency-translating FIR ->
/// quadrature demod -> DC removal -> timing recovery -> slicer -> sliding
/// correlator. Single-stream stateful processor; feed buffers of any size.
class Receiver {
public:
    Receiver(ReceiverParams params, double sample_rate_hz);

    std::vector<DetectionEvent> process(const IqBuffer& chunk);
    /// Flushes internal pipelines and pending candidates.
    std::vector<DetectionEvent> finish();
    /// process() + finish() for a whole capture.
    std::vector<DetectionEvent> run(const IqBuffer& iq);

    /// Maps a recent detection's bit offset back to an input sample index.
    std::uint64_t input_sample_for_bit(std::uint64_t bit_offset) const;
    /// Bound on the mapping error, in input samples.
    double offset_uncertainty_samples() const;

    double bit_rate_hz() const noexcept { return bit_rate_; }

private:
    void annotate(std::vector<DetectionEvent>& events);

    ReceiverParams params_;
    double sample_rate_;
    double bit_rate_;
    PowerSquelch squelch_;
    XlatingFir fir_;
    QuadratureDemod demod_;
    DcBlocker dc_;
    MmTimingRecovery mm_;
    SlidingCorrelator corr_;

    // recent squelch-passed |x|^2 for RSSI, and bit -> sample positions
    std::deque<double> passed_power_;
    std::uint64_t passed_power_base_ = 0;
    std::deque<double> bit_positions_; // MM input stream coordinates
    std::uint64_t bit_base_ = 0;

    std::vector<std::complex<double>> sq_out_, fir_out_;
    bool finished_ = false;
};

/// One JSON object per line: {"tag_id","score","sample_offset","rssi_db","t_sec"}.
std::string events_to_jsonl(const std::vector<DetectionEvent>& events);

} // namespace bletag
