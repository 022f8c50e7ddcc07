#include "bletag/bits.hpp"

#include <stdexcept>

namespace bletag {

BitSequence::BitSequence(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto b : bits_) {
        if (b > 1) throw std::invalid_argument("BitSequence: values must be 0 or 1");
    }
}

BitSequence BitSequence::from_string(std::string_view s) {
    std::vector<std::uint8_t> bits;
    bits.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1')
            throw std::invalid_argument("BitSequence: expected '0'/'1' characters");
        bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return BitSequence(std::move(bits));
}

void BitSequence::push_back(int bit) {
    if (bit != 0 && bit != 1) throw std::invalid_argument("BitSequence: bit must be 0 or 1");
    bits_.push_back(static_cast<std::uint8_t>(bit));
}

void BitSequence::append(const BitSequence& other) {
    bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

BitSequence BitSequence::subseq(std::size_t first, std::size_t count) const {
    if (first + count > bits_.size())
        throw std::invalid_argument("BitSequence: subseq out of range");
    BitSequence out;
    out.bits_.assign(bits_.begin() + first, bits_.begin() + first + count);
    return out;
}

BitSequence BitSequence::complement() const {
    BitSequence out;
    out.bits_.reserve(bits_.size());
    for (auto b : bits_) out.bits_.push_back(static_cast<std::uint8_t>(1 - b));
    return out;
}

BitSequence BitSequence::cyclic_shift(std::size_t amount) const {
    if (bits_.empty()) return {};
    amount %= bits_.size();
    BitSequence out;
    out.bits_.reserve(bits_.size());
    out.bits_.insert(out.bits_.end(), bits_.begin() + amount, bits_.end());
    out.bits_.insert(out.bits_.end(), bits_.begin(), bits_.begin() + amount);
    return out;
}

std::string BitSequence::to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
    return s;
}

} // namespace bletag
