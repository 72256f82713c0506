#pragma once

#include <cstdio>
#include <string>

#include "isafp/json_io.hpp"
#include "isafp/sim.hpp"

namespace isafp {

inline constexpr const char* kManifestName = "manifest.json";

inline json to_json(const OpticalConfig& c)
{
    return {{"wavelength", c.wavelength},
            {"grid_size", c.grid_size},
            {"pixel_pitch", c.pixel_pitch},
            {"aperture_radius", c.aperture_radius}};
}

inline OpticalConfig optical_config_from_json(const json& j)
{
    OpticalConfig c;
    c.wavelength = j.at("wavelength").get<double>();
    c.grid_size = j.at("grid_size").get<std::size_t>();
    c.pixel_pitch = j.at("pixel_pitch").get<double>();
    c.aperture_radius = j.at("aperture_radius").get<double>();
    c.validate();
    return c;
}

inline json to_json(const NoiseSpec& n)
{
    return {{"kind", to_string(n.kind)}, {"sigma", n.sigma}, {"peak", n.peak}, {"seed", n.seed}};
}

inline NoiseSpec noise_spec_from_json(const json& j)
{
    NoiseSpec n;
    n.kind = noise_kind_from_string(j.at("kind").get<std::string>());
    n.sigma = j.value("sigma", 0.0);
    n.peak = j.value("peak", 0.0);
    n.seed = j.value("seed", std::uint64_t{0});
    n.validate();
    return n;
}

inline json to_json(WaveVector k) { return {{"kx", k.kx}, {"ky", k.ky}}; }
inline json to_json(RotationAngle a) { return {{"theta_x", a.theta_x}, {"theta_y", a.theta_y}}; }

inline std::string raster_file_name(const char* plane, std::size_t index)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04zu.f32", plane, index);
    return buf;
}

/// Writes `ms` as a dataset directory: manifest.json plus one .f32 file per raster.
inline void write_dataset(const MeasurementSet& ms, const fs::path& dir)
{
    ms.validate();
    json records = json::array();
    StagedDirectory staged(dir);
    for (const auto& r : ms.records) {
        const std::string image_name = raster_file_name("image", r.index);
        const std::string pupil_name = raster_file_name("pupil", r.index);
        write_f32(staged.path() / image_name, r.image_intensity);
        write_f32(staged.path() / pupil_name, r.pupil_intensity);
        records.push_back({{"index", r.index},
                           {"angle", to_json(r.angle)},
                           {"true_k", r.true_k ? to_json(*r.true_k) : json(nullptr)},
                           {"image", image_name},
                           {"pupil", pupil_name}});
    }
    json truth = nullptr;
    if (ms.truth) {
        RealRaster re(ms.truth->size()), im(ms.truth->size());
        for (std::size_t i = 0; i < re.count(); ++i) {
            re[i] = (*ms.truth)[i].real();
            im[i] = (*ms.truth)[i].imag();
        }
        write_f32(staged.path() / "target_re.f32", re);
        write_f32(staged.path() / "target_im.f32", im);
        truth = {{"re", "target_re.f32"}, {"im", "target_im.f32"}};
    }
    json manifest = {{"format", "isafp-dataset"},
                     {"version", 1},
                     {"config", to_json(ms.config)},
                     {"noise", to_json(ms.noise)},
                     {"grid", {{"layout", to_string(ms.layout)}, {"nx", ms.nx}, {"ny", ms.ny}}},
                     {"truth", truth},
                     {"records", records}};
    write_text_file(staged.path() / kManifestName, manifest.dump(2) + "\n");
    staged.commit();
}

inline MeasurementSet read_dataset(const fs::path& dir)
{
    const fs::path manifest_path = dir / kManifestName;
    if (!fs::exists(manifest_path)) throw IoError("no " + std::string(kManifestName) + " in " + dir.string());
    const json m = read_json_file(manifest_path);
    MeasurementSet ms;
    try {
        ms.config = optical_config_from_json(m.at("config"));
        if (m.contains("noise")) ms.noise = noise_spec_from_json(m.at("noise"));
        if (m.contains("grid")) {
            const json& g = m.at("grid");
            ms.layout = grid_layout_from_string(g.value("layout", std::string("custom")));
            ms.nx = g.value("nx", std::size_t{0});
            ms.ny = g.value("ny", std::size_t{0});
        }
        for (const json& jr : m.at("records")) {
            MeasurementRecord r;
            r.index = jr.at("index").get<std::size_t>();
            r.angle = {jr.at("angle").at("theta_x").get<double>(), jr.at("angle").at("theta_y").get<double>()};
            if (jr.contains("true_k") && !jr.at("true_k").is_null())
                r.true_k = WaveVector{jr.at("true_k").at("kx").get<int>(), jr.at("true_k").at("ky").get<int>()};
            const std::size_t n = ms.config.grid_size;
            r.image_intensity = read_f32(dir / jr.at("image").get<std::string>(), n);
            r.pupil_intensity = read_f32(dir / jr.at("pupil").get<std::string>(), n);
            ms.records.push_back(std::move(r));
        }
        if (m.contains("truth") && !m.at("truth").is_null()) {
            const std::size_t n = ms.config.grid_size;
            const RealRaster re = read_f32(dir / m.at("truth").at("re").get<std::string>(), n);
            const RealRaster im = read_f32(dir / m.at("truth").at("im").get<std::string>(), n);
            ComplexField t(n, Domain::spatial);
            for (std::size_t i = 0; i < re.count(); ++i) t[i] = {re[i], im[i]};
            ms.truth = std::move(t);
        }
    } catch (const json::exception& e) {
        throw IoError("invalid manifest in " + dir.string() + ": " + e.what());
    }
    for (std::size_t i = 0; i < ms.records.size(); ++i)
        if (ms.records[i].index != i)
            throw IoError("manifest records out of order at position " + std::to_string(i));
    ms.validate();
    return ms;
}

}  // namespace isafp
