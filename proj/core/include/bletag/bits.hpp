#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bletag {

/// Ordered binary sequence in transmission order. Values are 0 or 1.
class BitSequence {
public:
    BitSequence() = default;
    explicit BitSequence(std::vector<std::uint8_t> bits);

    /// Parses a string of '0'/'1' characters, index 0 first on air.
    static BitSequence from_string(std::string_view s);

    std::size_t size() const noexcept { return bits_.size(); }
    bool empty() const noexcept { return bits_.empty(); }
    std::uint8_t operator[](std::size_t i) const { return bits_[i]; }

    void push_back(int bit);
    void append(const BitSequence& other);

    BitSequence subseq(std::size_t first, std::size_t count) const;
    BitSequence complement() const;
    BitSequence cyclic_shift(std::size_t amount) const;

    std::string to_string() const;
    const std::vector<std::uint8_t>& data() const noexcept { return bits_; }

    auto begin() const noexcept { return bits_.begin(); }
    auto end() const noexcept { return bits_.end(); }

    friend bool operator==(const BitSequence&, const BitSequence&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

} // namespace bletag
