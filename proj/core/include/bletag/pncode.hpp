#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "bletag/bits.hpp"

namespace bletag {

/// Fibonacci LFSR, output taken from stage 0.
///
/// The tap mask encodes the feedback polynomial: bit i set means the
/// polynomial has an x^(i+1) term, the x^0 term is implied. Bit degree-1
/// (the monic x^degree term) must always be set. Example: x^8+x^6+x^5+x^4+1
/// is taps 0xB8.
class Lfsr {
public:
    Lfsr(int degree, std::uint32_t taps, std::uint32_t seed);

    /// Advances one step, returns the emitted bit.
    int step();

    std::uint32_t state() const noexcept { return state_; }
    int degree() const noexcept { return degree_; }

private:
    int degree_;
    std::uint32_t recurrence_; // mask over current stages, includes implied x^0
    std::uint32_t state_;
};

/// Builds a tap mask from polynomial exponents, e.g. {8,6,5,4} -> 0xB8.
std::uint32_t taps_from_exponents(std::initializer_list<int> exponents);

/// First 2^degree - 1 output bits of the LFSR.
BitSequence lfsr_msequence(int degree, std::uint32_t taps, std::uint32_t seed);

/// True iff the nonzero-state cycle has full length 2^degree - 1, checked
/// by an explicit cycle walk. Degrees above 20 are rejected (the walk gets
/// too slow to be a sane library call).
bool is_maximal(int degree, std::uint32_t taps);

/// All primitive tap masks of the given degree, ascending.
std::vector<std::uint32_t> all_primitive_taps(int degree);

/// Number of positions where a and b agree. Symmetric; range [0, length].
int correlate_aligned(const BitSequence& a, const BitSequence& b);

/// Classical +/-1 periodic autocorrelation: sum of s[i]*s[(i+shift) mod N]
/// with bits mapped 0 -> -1, 1 -> +1. Range [-N, N].
int periodic_autocorrelation(const BitSequence& code, std::size_t shift);

/// Peak agreement count between a and b over all relative offsets within
/// one sequence length, counting only the overlapping region. Offset 0 is
/// included, so the result is >= correlate_aligned(a, b).
int peak_sliding_correlation(const BitSequence& a, const BitSequence& b);

struct CodebookEntry {
    std::string tag_id;
    BitSequence code; // 256-bit on-air detection sequence
};

struct Codebook {
    std::vector<CodebookEntry> entries;
    int max_cross_correlation = 0; // worst pairwise score actually present

    const CodebookEntry* find(std::string_view tag_id) const;
};

/// Deterministic seeded search over degree-8 primitive polynomials and
/// cyclic shifts. Every accepted pair of detection sequences has aligned and
/// peak sliding correlation <= max_cross. Throws CapacityError when the
/// candidate space is exhausted before n_tags entries are found.
Codebook build_codebook(int n_tags, std::uint64_t seed, int max_cross);

/// Re-runs the pairwise screening on an existing codebook.
bool verify_codebook(const Codebook& cb, std::string* why = nullptr);

std::string codebook_to_json(const Codebook& cb);
Codebook codebook_from_json(const std::string& text);

} // namespace bletag
