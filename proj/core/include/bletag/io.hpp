#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>

#include "bletag/iq.hpp"

namespace bletag {

/// Out-of-band metadata for a headerless IQ file, stored at <path>.json.
struct SidecarMeta {
    double sample_rate_hz = 0.0;
    double center_freq_hz = 0.0;
    std::string description;
};

/// Raw interleaved little-endian float32 I/Q pairs, no header or padding —
/// the de facto interchange format of common SDR tools. Writes the sidecar
/// alongside; pass meta to control its contents.
void write_iq(const std::filesystem::path& path, const IqBuffer& iq,
              const SidecarMeta* meta = nullptr);

/// Reads a raw IQ file; the rate comes from the caller (sidecar or flag).
/// Throws CorruptFileError on odd-sized files or non-finite values.
IqBuffer read_iq(const std::filesystem::path& path, double sample_rate_hz);

std::optional<SidecarMeta> read_sidecar(const std::filesystem::path& iq_path);
std::string sidecar_to_json(const SidecarMeta& meta);
SidecarMeta sidecar_from_json(const std::string& text);

/// Streaming block reads; concatenated blocks equal a whole-file read.
class IqBlockReader {
public:
    explicit IqBlockReader(const std::filesystem::path& path);

    /// Up to max_samples complex samples; empty at end of file.
    std::vector<std::complex<double>> read_block(std::size_t max_samples);
    bool done() const noexcept { return done_; }

private:
    std::ifstream file_;
    std::uint64_t remaining_; // samples left
    bool done_ = false;
};

/// Write-temp-then-rename, so readers never observe partial contents.
void atomic_write_file(const std::filesystem::path& path, std::string_view contents);

} // namespace bletag
