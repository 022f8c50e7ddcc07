#include "bletag/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "bletag/errors.hpp"

namespace bletag {

namespace {

void put_f32_le(std::string& out, float v) {
    const auto u = std::bit_cast<std::uint32_t>(v);
    out.push_back(static_cast<char>(u & 0xFF));
    out.push_back(static_cast<char>((u >> 8) & 0xFF));
    out.push_back(static_cast<char>((u >> 16) & 0xFF));
    out.push_back(static_cast<char>((u >> 24) & 0xFF));
}

float get_f32_le(const unsigned char* p) {
    const std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                            (static_cast<std::uint32_t>(p[1]) << 8) |
                            (static_cast<std::uint32_t>(p[2]) << 16) |
                            (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(u);
}

} // namespace

void atomic_write_file(const std::filesystem::path& path, std::string_view contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp" + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!f) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_iq(const std::filesystem::path& path, const IqBuffer& iq,
              const SidecarMeta* meta) {
    std::string raw;
    raw.reserve(iq.size() * 8);
    for (const auto& s : iq.samples()) {
        const auto i = static_cast<float>(s.real());
        const auto q = static_cast<float>(s.imag());
        if (!std::isfinite(i) || !std::isfinite(q))
            throw std::invalid_argument("write_iq: sample does not fit float32");
        put_f32_le(raw, i);
        put_f32_le(raw, q);
    }
    atomic_write_file(path, raw);

    SidecarMeta m;
    if (meta) m = *meta;
    if (m.sample_rate_hz <= 0.0) m.sample_rate_hz = iq.sample_rate();
    std::filesystem::path side = path;
    side += ".json";
    atomic_write_file(side, sidecar_to_json(m));
}

IqBuffer read_iq(const std::filesystem::path& path, double sample_rate_hz) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw CorruptFileError("read_iq: cannot open " + path.string());
    const auto size = static_cast<std::uint64_t>(f.tellg());
    if (size % 8 != 0)
        throw CorruptFileError("read_iq: size not a multiple of 8 bytes: " + path.string());
    f.seekg(0);
    std::vector<unsigned char> bytes(size);
    f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    if (!f) throw CorruptFileError("read_iq: short read: " + path.string());

    std::vector<std::complex<double>> samples;
    samples.reserve(size / 8);
    for (std::uint64_t off = 0; off < size; off += 8) {
        const float i = get_f32_le(&bytes[off]);
        const float q = get_f32_le(&bytes[off + 4]);
        if (!std::isfinite(i) || !std::isfinite(q))
            throw CorruptFileError("read_iq: non-finite sample in " + path.string());
        samples.emplace_back(i, q);
    }
    return IqBuffer(std::move(samples), sample_rate_hz);
}

std::string sidecar_to_json(const SidecarMeta& meta) {
    nlohmann::ordered_json j;
    j["sample_rate_hz"] = meta.sample_rate_hz;
    j["center_freq_hz"] = meta.center_freq_hz;
    j["description"] = meta.description;
    return j.dump(2) + "\n";
}

SidecarMeta sidecar_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("sidecar: bad JSON: ") + e.what());
    }
    SidecarMeta m;
    try {
        m.sample_rate_hz = j.at("sample_rate_hz").get<double>();
        m.center_freq_hz = j.value("center_freq_hz", 0.0);
        m.description = j.value("description", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("sidecar: missing field: ") + e.what());
    }
    if (!(m.sample_rate_hz > 0.0))
        throw CorruptFileError("sidecar: sample_rate_hz must be positive");
    return m;
}

std::optional<SidecarMeta> read_sidecar(const std::filesystem::path& iq_path) {
    std::filesystem::path side = iq_path;
    side += ".json";
    std::ifstream f(side, std::ios::binary);
    if (!f) return std::nullopt;
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return sidecar_from_json(text);
}

IqBlockReader::IqBlockReader(const std::filesystem::path& path)
    : file_(path, std::ios::binary | std::ios::ate) {
    if (!file_) throw CorruptFileError("IqBlockReader: cannot open " + path.string());
    const auto size = static_cast<std::uint64_t>(file_.tellg());
    if (size % 8 != 0)
        throw CorruptFileError("IqBlockReader: size not a multiple of 8 bytes");
    remaining_ = size / 8;
    done_ = remaining_ == 0;
    file_.seekg(0);
}

std::vector<std::complex<double>> IqBlockReader::read_block(std::size_t max_samples) {
    std::vector<std::complex<double>> out;
    if (done_ || max_samples == 0) {
        done_ = true;
        return out;
    }
    const std::uint64_t n = std::min<std::uint64_t>(max_samples, remaining_);
    std::vector<unsigned char> bytes(n * 8);
    file_.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!file_) throw CorruptFileError("IqBlockReader: short read");
    out.reserve(n);
    for (std::uint64_t off = 0; off < bytes.size(); off += 8) {
        const float i = get_f32_le(&bytes[off]);
        const float q = get_f32_le(&bytes[off + 4]);
        if (!std::isfinite(i) || !std::isfinite(q))
            throw CorruptFileError("IqBlockReader: non-finite sample");
        out.emplace_back(i, q);
    }
    remaining_ -= n;
    done_ = remaining_ == 0;
    return out;
}

} // namespace bletag
