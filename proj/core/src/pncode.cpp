#include "bletag/pncode.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bletag/errors.hpp"
#include "bletag/frame.hpp"
#include "bletag/rng.hpp"

namespace bletag {

namespace {

constexpr int kCycleWalkMaxDegree = 20;

std::string format_tag_id(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "tag-%03d", index);
    return buf;
}

} // namespace

Lfsr::Lfsr(int degree, std::uint32_t taps, std::uint32_t seed) : degree_(degree) {
    if (degree < 2 || degree > 32)
        throw std::invalid_argument("Lfsr: degree must be in 2..32");
    const std::uint64_t mask = (degree == 32) ? 0xFFFFFFFFULL : ((1ULL << degree) - 1);
    if ((taps & ~mask) != 0)
        throw std::invalid_argument("Lfsr: taps outside degree");
    if ((taps & (1ULL << (degree - 1))) == 0)
        throw std::invalid_argument("Lfsr: monic x^degree tap must be set");
    state_ = static_cast<std::uint32_t>(seed & mask);
    if (state_ == 0)
        throw std::invalid_argument("Lfsr: zero state is absorbing and forbidden");
    // taps bit i encodes x^(i+1); the recurrence over current stages needs
    // the x^0..x^(degree-1) coefficients, i.e. taps shifted up with the
    // implied x^0 set. The monic bit shifts out: it is the output side.
    recurrence_ = static_cast<std::uint32_t>(((static_cast<std::uint64_t>(taps) << 1) | 1) & mask);
}

int Lfsr::step() {
    const int out = static_cast<int>(state_ & 1);
    const int fb = std::popcount(state_ & recurrence_) & 1;
    state_ >>= 1;
    state_ |= static_cast<std::uint32_t>(fb) << (degree_ - 1);
    return out;
}

std::uint32_t taps_from_exponents(std::initializer_list<int> exponents) {
    std::uint32_t taps = 0;
    for (int e : exponents) {
        if (e < 1 || e > 32) throw std::invalid_argument("taps_from_exponents: exponent out of range");
        taps |= 1u << (e - 1);
    }
    return taps;
}

BitSequence lfsr_msequence(int degree, std::uint32_t taps, std::uint32_t seed) {
    Lfsr lfsr(degree, taps, seed);
    const std::uint64_t period = (1ULL << degree) - 1;
    std::vector<std::uint8_t> bits;
    bits.reserve(period);
    for (std::uint64_t i = 0; i < period; ++i)
        bits.push_back(static_cast<std::uint8_t>(lfsr.step()));
    return BitSequence(std::move(bits));
}

bool is_maximal(int degree, std::uint32_t taps) {
    if (degree < 2 || degree > 32)
        throw std::invalid_argument("is_maximal: degree must be in 2..32");
    if (degree > kCycleWalkMaxDegree)
        throw UnsupportedError("is_maximal: cycle walk not supported above degree 20");
    const std::uint64_t mask = (1ULL << degree) - 1;
    if ((taps & ~mask) != 0 || (taps & (1ULL << (degree - 1))) == 0) return false;

    Lfsr lfsr(degree, taps, 1);
    const std::uint64_t full = mask; // number of nonzero states
    std::uint64_t steps = 0;
    do {
        lfsr.step();
        ++steps;
        if (steps > full) return false;
    } while (lfsr.state() != 1);
    return steps == full;
}

std::vector<std::uint32_t> all_primitive_taps(int degree) {
    std::vector<std::uint32_t> out;
    const std::uint32_t lo = 1u << (degree - 1);
    const std::uint32_t hi = (degree == 32) ? 0 : (1u << degree); // hi==0 unused below 32
    for (std::uint32_t taps = lo; taps < hi; ++taps) {
        if (is_maximal(degree, taps)) out.push_back(taps);
    }
    return out;
}

int correlate_aligned(const BitSequence& a, const BitSequence& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("correlate_aligned: empty sequence");
    if (a.size() != b.size())
        throw std::invalid_argument("correlate_aligned: length mismatch");
    int agree = 0;
    const auto& av = a.data();
    const auto& bv = b.data();
    for (std::size_t i = 0; i < av.size(); ++i) agree += (av[i] == bv[i]);
    return agree;
}

int periodic_autocorrelation(const BitSequence& code, std::size_t shift) {
    if (code.empty())
        throw std::invalid_argument("periodic_autocorrelation: empty sequence");
    const std::size_t n = code.size();
    if (shift >= n)
        throw std::invalid_argument("periodic_autocorrelation: shift out of range");
    int agree = 0;
    const auto& v = code.data();
    for (std::size_t i = 0; i < n; ++i) agree += (v[i] == v[(i + shift) % n]);
    return 2 * agree - static_cast<int>(n);
}

int peak_sliding_correlation(const BitSequence& a, const BitSequence& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("peak_sliding_correlation: empty sequence");
    if (a.size() != b.size())
        throw std::invalid_argument("peak_sliding_correlation: length mismatch");
    const int n = static_cast<int>(a.size());
    const auto& av = a.data();
    const auto& bv = b.data();
    int peak = 0;
    for (int d = -(n - 1); d <= n - 1; ++d) {
        // b shifted by d relative to a; count agreements in the overlap
        int agree = 0;
        const int lo = std::max(0, d);
        const int hi = std::min(n, n + d);
        for (int i = lo; i < hi; ++i) agree += (av[i] == bv[i - d]);
        peak = std::max(peak, agree);
    }
    return peak;
}

const CodebookEntry* Codebook::find(std::string_view tag_id) const {
    for (const auto& e : entries)
        if (e.tag_id == tag_id) return &e;
    return nullptr;
}

Codebook build_codebook(int n_tags, std::uint64_t seed, int max_cross) {
    if (n_tags < 1)
        throw std::invalid_argument("build_codebook: n_tags must be >= 1");
    if (max_cross < 128 || max_cross >= 256)
        throw std::invalid_argument("build_codebook: max_cross must be in 128..255");

    const auto polys = all_primitive_taps(8);
    struct Candidate { std::uint32_t taps; int shift; };
    std::vector<Candidate> candidates;
    candidates.reserve(polys.size() * 255);
    for (auto taps : polys)
        for (int shift = 0; shift < 255; ++shift) candidates.push_back({taps, shift});

    Rng rng(derive_seed(seed, 0x636F6465)); // "code"
    rng.shuffle(candidates);

    Codebook cb;
    int worst = 0;
    for (const auto& c : candidates) {
        if (static_cast<int>(cb.entries.size()) == n_tags) break;
        const BitSequence m = lfsr_msequence(8, c.taps, 1);
        const BitSequence code = m.cyclic_shift(c.shift).subseq(0, kCodeBits);
        const BitSequence det = build_detect_sequence(code);
        bool ok = true;
        int local_worst = 0;
        for (const auto& e : cb.entries) {
            const int peak = peak_sliding_correlation(det, e.code);
            if (peak > max_cross) { ok = false; break; }
            local_worst = std::max(local_worst, peak);
        }
        if (!ok) continue;
        cb.entries.push_back({format_tag_id(static_cast<int>(cb.entries.size())), det});
        worst = std::max(worst, local_worst);
    }
    if (static_cast<int>(cb.entries.size()) < n_tags) {
        throw CapacityError("build_codebook: candidate space exhausted, achieved " +
                            std::to_string(cb.entries.size()) + " of " +
                            std::to_string(n_tags) + " tags");
    }
    cb.max_cross_correlation = worst;
    return cb;
}

bool verify_codebook(const Codebook& cb, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (cb.entries.empty()) return fail("codebook has no entries");
    for (std::size_t i = 0; i < cb.entries.size(); ++i) {
        if (cb.entries[i].code.size() != kDetectSequenceBits)
            return fail("entry " + cb.entries[i].tag_id + " has wrong length");
        for (std::size_t j = i + 1; j < cb.entries.size(); ++j) {
            if (cb.entries[i].tag_id == cb.entries[j].tag_id)
                return fail("duplicate tag_id " + cb.entries[i].tag_id);
            if (cb.entries[i].code == cb.entries[j].code)
                return fail("duplicate code between " + cb.entries[i].tag_id + " and " +
                            cb.entries[j].tag_id);
            const int peak = peak_sliding_correlation(cb.entries[i].code, cb.entries[j].code);
            if (peak > cb.max_cross_correlation)
                return fail("pair " + cb.entries[i].tag_id + "/" + cb.entries[j].tag_id +
                            " peaks at " + std::to_string(peak) + " > bound " +
                            std::to_string(cb.max_cross_correlation));
        }
    }
    return true;
}

std::string codebook_to_json(const Codebook& cb) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["max_cross_correlation"] = cb.max_cross_correlation;
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : cb.entries) {
        j["entries"].push_back({{"tag_id", e.tag_id}, {"bits", e.code.to_string()}});
    }
    return j.dump(2) + "\n";
}

Codebook codebook_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("codebook: bad JSON: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != 1)
            throw CorruptFileError("codebook: unsupported version");
        Codebook cb;
        cb.max_cross_correlation = j.at("max_cross_correlation").get<int>();
        for (const auto& e : j.at("entries")) {
            CodebookEntry entry;
            entry.tag_id = e.at("tag_id").get<std::string>();
            entry.code = BitSequence::from_string(e.at("bits").get<std::string>());
            if (entry.code.size() != kDetectSequenceBits)
                throw CorruptFileError("codebook: entry is not 256 bits");
            cb.entries.push_back(std::move(entry));
        }
        return cb;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("codebook: missing field: ") + e.what());
    }
}

} // namespace bletag
