#include "bletag/frame.hpp"

#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bletag/errors.hpp"

namespace bletag {

std::uint32_t crc24(const std::uint8_t* data, std::size_t len, std::uint32_t init) {
    std::uint32_t reg = init & 0xFFFFFF;
    for (std::size_t i = 0; i < len; ++i) {
        for (int j = 0; j < 8; ++j) { // LSB first
            const std::uint32_t bit = (data[i] >> j) & 1;
            const std::uint32_t fb = ((reg >> 23) & 1) ^ bit;
            reg = (reg << 1) & 0xFFFFFF;
            if (fb) reg ^= kCrcPoly;
        }
    }
    return reg;
}

BitSequence build_detect_sequence(const BitSequence& code248) {
    if (code248.size() != kCodeBits)
        throw std::invalid_argument("build_detect_sequence: code must be 248 bits");
    BitSequence out;
    const int first_aa_bit = code248[0];
    for (int i = 0; i < kPreambleBits; ++i) out.push_back(first_aa_bit ^ (i & 1));
    out.append(code248);
    return out;
}

TagFrame assemble_frame(const BitSequence& code248) {
    TagFrame f;
    f.detect_sequence = build_detect_sequence(code248);
    f.preamble = f.detect_sequence.subseq(0, kPreambleBits);
    f.access_address = 0;
    for (int i = 0; i < kAccessAddressBits; ++i)
        f.access_address |= static_cast<std::uint32_t>(code248[i]) << i;
    for (int i = 0; i < kPduBytes; ++i) {
        std::uint8_t byte = 0;
        for (int j = 0; j < 8; ++j)
            byte |= static_cast<std::uint8_t>(code248[kAccessAddressBits + 8 * i + j] << j);
        f.pdu[static_cast<std::size_t>(i)] = byte;
    }
    f.crc = crc24(f.pdu.data(), f.pdu.size());
    return f;
}

BitSequence flatten_to_bits(const TagFrame& frame) {
    if (frame.detect_sequence.size() != kDetectSequenceBits)
        throw std::invalid_argument("flatten_to_bits: malformed frame");
    BitSequence out = frame.detect_sequence;
    for (int i = kCrcBits - 1; i >= 0; --i) // CRC goes out MSB first
        out.push_back((frame.crc >> i) & 1);
    return out;
}

FirmwareExport export_firmware(const TagFrame& frame) {
    FirmwareExport fw;
    fw.access_address_word = frame.access_address;
    fw.pdu_bytes = frame.pdu;
    fw.crc_init = kCrcInit;
    fw.whitening_enabled = false;
    return fw;
}

TagFrame import_firmware(const FirmwareExport& fw) {
    BitSequence code;
    for (int i = 0; i < kAccessAddressBits; ++i)
        code.push_back((fw.access_address_word >> i) & 1);
    for (int i = 0; i < kPduBytes; ++i)
        for (int j = 0; j < 8; ++j)
            code.push_back((fw.pdu_bytes[static_cast<std::size_t>(i)] >> j) & 1);
    return assemble_frame(code);
}

std::string firmware_to_json(const FirmwareExport& fw) {
    char aa[16];
    std::snprintf(aa, sizeof(aa), "0x%08X", fw.access_address_word);
    char init[16];
    std::snprintf(init, sizeof(init), "0x%06X", fw.crc_init);
    std::string pdu_hex;
    pdu_hex.reserve(kPduBytes * 2);
    for (auto b : fw.pdu_bytes) {
        char h[4];
        std::snprintf(h, sizeof(h), "%02X", b);
        pdu_hex += h;
    }
    nlohmann::ordered_json j;
    j["access_address"] = aa;
    j["pdu_hex"] = pdu_hex;
    j["crc_init"] = init;
    j["whitening"] = fw.whitening_enabled;
    return j.dump(2) + "\n";
}

FirmwareExport firmware_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("firmware: bad JSON: ") + e.what());
    }
    try {
        FirmwareExport fw;
        fw.access_address_word =
            static_cast<std::uint32_t>(std::stoul(j.at("access_address").get<std::string>(), nullptr, 16));
        const std::string pdu_hex = j.at("pdu_hex").get<std::string>();
        if (pdu_hex.size() != kPduBytes * 2)
            throw CorruptFileError("firmware: pdu_hex must be 54 hex chars");
        for (int i = 0; i < kPduBytes; ++i) {
            fw.pdu_bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
                std::stoul(pdu_hex.substr(static_cast<std::size_t>(2 * i), 2), nullptr, 16));
        }
        fw.crc_init =
            static_cast<std::uint32_t>(std::stoul(j.at("crc_init").get<std::string>(), nullptr, 16));
        fw.whitening_enabled = j.at("whitening").get<bool>();
        return fw;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("firmware: missing field: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw CorruptFileError("firmware: malformed hex field");
    }
}

std::string firmware_to_c_header(const FirmwareExport& fw, std::string_view tag_id) {
    std::string out;
    out += "// radio register values for " + std::string(tag_id) + "\n";
    out += "#pragma once\n\n#include <stdint.h>\n\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "static const uint32_t tag_aa = 0x%08Xu;\n",
                  fw.access_address_word);
    out += buf;
    out += "static const uint8_t tag_pdu[27] = {";
    for (int i = 0; i < kPduBytes; ++i) {
        if (i % 8 == 0) out += "\n    ";
        std::snprintf(buf, sizeof(buf), "0x%02X%s", fw.pdu_bytes[static_cast<std::size_t>(i)],
                      i + 1 < kPduBytes ? ", " : "");
        out += buf;
    }
    out += "\n};\n";
    std::snprintf(buf, sizeof(buf), "static const uint32_t tag_crc_init = 0x%06Xu;\n", fw.crc_init);
    out += buf;
    std::snprintf(buf, sizeof(buf), "static const uint8_t tag_whitening = %uu;\n",
                  fw.whitening_enabled ? 1u : 0u);
    out += buf;
    return out;
}

} // namespace bletag
