#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "isafp/raster.hpp"

namespace isafp {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline json read_json_file(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

inline void write_text_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

/// Raw raster: little-endian float32, row-major, N·N values, no header.
inline void write_f32(const fs::path& path, const RealRaster& r)
{
    static_assert(sizeof(float) == 4);
    std::vector<unsigned char> bytes(r.count() * 4);
    for (std::size_t i = 0; i < r.count(); ++i) {
        const float f = static_cast<float>(r[i]);
        std::uint32_t bits = 0;
        std::memcpy(&bits, &f, 4);
        for (int b = 0; b < 4; ++b) bytes[4 * i + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits >> (8 * b));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

inline RealRaster read_f32(const fs::path& path, std::size_t n)
{
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open " + path.string());
    const auto bytes_on_disk = static_cast<std::size_t>(in.tellg());
    if (bytes_on_disk != n * n * 4)
        throw IoError(path.string() + ": expected " + std::to_string(n * n * 4) + " bytes, found "
                      + std::to_string(bytes_on_disk));
    in.seekg(0);
    std::vector<unsigned char> bytes(bytes_on_disk);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw IoError("read failed for " + path.string());
    RealRaster r(n);
    for (std::size_t i = 0; i < r.count(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + static_cast<std::size_t>(b)]) << (8 * b);
        float f = 0.0F;
        std::memcpy(&f, &bits, 4);
        r[i] = static_cast<double>(f);
    }
    return r;
}

/// Infers N from the byte count of a headerless square float32 raster.
inline std::size_t f32_side_length(const fs::path& path)
{
    std::error_code ec;
    const auto bytes = fs::file_size(path, ec);
    if (ec) throw IoError("cannot stat " + path.string());
    const auto values = static_cast<std::size_t>(bytes / 4);
    const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(values))));
    if (bytes % 4 != 0 || n * n != values) throw IoError(path.string() + " is not a square float32 raster");
    return n;
}

/// Builds an output directory under a temporary sibling name and renames it
/// into place on commit(); an uncommitted staging directory is removed.
class StagedDirectory {
public:
    explicit StagedDirectory(fs::path target) : target_(std::move(target))
    {
        if (target_.filename().empty()) target_ = target_.parent_path();
        std::random_device rd;
        std::ostringstream name;
        name << "." << target_.filename().string() << ".tmp-" << std::hex << rd();
        staging_ = target_.parent_path() / name.str();
        std::error_code ec;
        if (!target_.parent_path().empty()) fs::create_directories(target_.parent_path(), ec);
        if (!fs::create_directory(staging_, ec) || ec)
            throw IoError("cannot create output directory next to " + target_.string());
    }

    StagedDirectory(const StagedDirectory&) = delete;
    StagedDirectory& operator=(const StagedDirectory&) = delete;

    ~StagedDirectory()
    {
        if (!committed_) {
            std::error_code ec;
            fs::remove_all(staging_, ec);
        }
    }

    const fs::path& path() const noexcept { return staging_; }

    void commit()
    {
        std::error_code ec;
        if (fs::exists(target_)) fs::remove_all(target_, ec);
        fs::rename(staging_, target_, ec);
        if (ec) throw IoError("cannot move output into " + target_.string() + ": " + ec.message());
        committed_ = true;
    }

private:
    fs::path target_;
    fs::path staging_;
    bool committed_ = false;
};

}  // namespace isafp
