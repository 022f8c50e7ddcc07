#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "bletag/bits.hpp"

namespace bletag {

inline constexpr int kPreambleBits = 8;
inline constexpr int kAccessAddressBits = 32;
inline constexpr int kPduBytes = 27;
inline constexpr int kCodeBits = kAccessAddressBits + kPduBytes * 8; // 248
inline constexpr int kDetectSequenceBits = kPreambleBits + kCodeBits; // 256
inline constexpr int kCrcBits = 24;
inline constexpr int kFrameBits = kDetectSequenceBits + kCrcBits; // 280 on air

inline constexpr std::uint32_t kCrcPoly = 0x00065B; // x^24+x^10+x^9+x^6+x^4+x^3+x+1
inline constexpr std::uint32_t kCrcInit = 0x555555;

/// LE 1M uncoded-PHY frame carrying a 248-bit code across access address and
/// PDU. Bit order is LSB-first within bytes (on-air convention); the CRC is
/// transmitted MSB-first.
struct TagFrame {
    BitSequence preamble;             // 8 alternating bits
    std::uint32_t access_address = 0; // bit 0 transmitted first
    std::array<std::uint8_t, kPduBytes> pdu{};
    std::uint32_t crc = 0;            // 24 bits over the PDU
    BitSequence detect_sequence;      // preamble | AA | PDU, 256 bits
};

/// Register-level values for a radio peripheral transmitting the frame.
struct FirmwareExport {
    std::uint32_t access_address_word = 0; // little-endian word, LSB first on air
    std::array<std::uint8_t, kPduBytes> pdu_bytes{};
    std::uint32_t crc_init = kCrcInit;
    bool whitening_enabled = false;
};

/// Bit-serial CRC-24, data consumed LSB-first per byte.
std::uint32_t crc24(const std::uint8_t* data, std::size_t len,
                    std::uint32_t init = kCrcInit);

/// 256-bit on-air detection sequence: 8 preamble bits then the 248 code
/// bits. The preamble alternates and starts equal to the first code bit, so
/// its last bit differs from the first access-address bit.
BitSequence build_detect_sequence(const BitSequence& code248);

TagFrame assemble_frame(const BitSequence& code248);

/// Full transmission-order bit stream (preamble first), length 280.
BitSequence flatten_to_bits(const TagFrame& frame);

FirmwareExport export_firmware(const TagFrame& frame);
TagFrame import_firmware(const FirmwareExport& fw);

std::string firmware_to_json(const FirmwareExport& fw);
FirmwareExport firmware_from_json(const std::string& text);
std::string firmware_to_c_header(const FirmwareExport& fw, std::string_view tag_id);

} // namespace bletag
