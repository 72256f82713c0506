#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "isafp/fft.hpp"
#include "isafp/optics.hpp"
#include "isafp/raster.hpp"

namespace isafp {

/// Grayscale source image with values in [0, 1]; need not be square.
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;  // row-major

    double at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }

    static GrayImage filled(std::size_t width, std::size_t height, double value)
    {
        return {width, height, std::vector<double>(width * height, value)};
    }
};

/// Bilinear resampling to an n×n raster (pixel-centre aligned).
inline RealRaster resize_bilinear(const GrayImage& img, std::size_t n)
{
    if (img.width == 0 || img.height == 0 || img.pixels.size() != img.width * img.height)
        throw ValidationError("resize_bilinear: empty or malformed source raster");
    RealRaster out(n);
    const double sy = static_cast<double>(img.height) / static_cast<double>(n);
    const double sx = static_cast<double>(img.width) / static_cast<double>(n);
    auto clampi = [](double v, std::size_t hi) {
        return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(hi - 1)));
    };
    for (std::size_t row = 0; row < n; ++row) {
        const double y = std::clamp((static_cast<double>(row) + 0.5) * sy - 0.5, 0.0,
                                    static_cast<double>(img.height - 1));
        const std::size_t y0 = clampi(std::floor(y), img.height);
        const std::size_t y1 = std::min(y0 + 1, img.height - 1);
        const double fy = y - static_cast<double>(y0);
        for (std::size_t col = 0; col < n; ++col) {
            const double x = std::clamp((static_cast<double>(col) + 0.5) * sx - 0.5, 0.0,
                                        static_cast<double>(img.width - 1));
            const std::size_t x0 = clampi(std::floor(x), img.width);
            const std::size_t x1 = std::min(x0 + 1, img.width - 1);
            const double fx = x - static_cast<double>(x0);
            const double top = img.at(y0, x0) * (1.0 - fx) + img.at(y0, x1) * fx;
            const double bottom = img.at(y1, x0) * (1.0 - fx) + img.at(y1, x1) * fx;
            out(row, col) = top * (1.0 - fy) + bottom * fy;
        }
    }
    return out;
}

/// Amplitude and phase sources for a synthetic complex target.
struct TargetSpec {
    GrayImage amplitude_source;
    GrayImage phase_source;
    double phase_max = std::numbers::pi / 4.0;
};

/// a(s)·exp(i·φ(s)) with a the resampled amplitude source clamped to [0, 1]
/// and φ the resampled phase source mapped onto [0, phase_max].
inline ComplexField build_complex_target(const TargetSpec& spec, std::size_t grid_size)
{
    require_grid_size(grid_size, "build_complex_target");
    if (!(spec.phase_max >= 0.0) || !std::isfinite(spec.phase_max))
        throw ValidationError("build_complex_target: phase_max must be finite and >= 0");
    const RealRaster amp = resize_bilinear(spec.amplitude_source, grid_size);
    const RealRaster ph = resize_bilinear(spec.phase_source, grid_size);
    ComplexField out(grid_size, Domain::spatial);
    for (std::size_t i = 0; i < amp.count(); ++i) {
        const double a = std::clamp(amp[i], 0.0, 1.0);
        const double phi = std::clamp(ph[i], 0.0, 1.0) * spec.phase_max;
        out[i] = std::polar(a, phi);
    }
    return out;
}

enum class GridLayout { grid, axis_scan_x, axis_scan_y, custom };

inline const char* to_string(GridLayout l)
{
    switch (l) {
    case GridLayout::grid: return "grid";
    case GridLayout::axis_scan_x: return "axis_scan_x";
    case GridLayout::axis_scan_y: return "axis_scan_y";
    case GridLayout::custom: return "custom";
    }
    return "custom";
}

inline GridLayout grid_layout_from_string(const std::string& s)
{
    if (s == "grid") return GridLayout::grid;
    if (s == "axis_scan_x") return GridLayout::axis_scan_x;
    if (s == "axis_scan_y") return GridLayout::axis_scan_y;
    if (s == "custom") return GridLayout::custom;
    throw ValidationError("unknown grid layout '" + s + "'");
}

/// Ordered rotation states. Grid order is row-major: y outer, x inner.
struct AngleGrid {
    std::vector<RotationAngle> angles;
    GridLayout layout = GridLayout::custom;
    std::size_t nx = 0;
    std::size_t ny = 0;
};

namespace detail {

// Exactly antisymmetric samples of [-extent, extent]; the middle sample is 0 for odd n.
inline double symmetric_sample(std::size_t i, std::size_t n, double extent)
{
    if (n == 1) return 0.0;
    const double num = 2.0 * static_cast<double>(i) - static_cast<double>(n - 1);
    return extent * num / static_cast<double>(n - 1);
}

}  // namespace detail

inline AngleGrid generate_rotation_grid(std::size_t nx, std::size_t ny, double theta_max)
{
    if (nx < 1 || ny < 1) throw ValidationError("generate_rotation_grid: nx and ny must be >= 1");
    validate(RotationAngle{theta_max, theta_max});
    AngleGrid g;
    g.nx = nx;
    g.ny = ny;
    if (nx > 1 && ny == 1)
        g.layout = GridLayout::axis_scan_x;
    else if (nx == 1 && ny > 1)
        g.layout = GridLayout::axis_scan_y;
    else
        g.layout = GridLayout::grid;
    const double tm = std::abs(theta_max);
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix)
            g.angles.push_back({detail::symmetric_sample(ix, nx, tm), detail::symmetric_sample(iy, ny, tm)});
    return g;
}

enum class NoiseKind { none, gaussian, poisson };

inline const char* to_string(NoiseKind k)
{
    switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::poisson: return "poisson";
    }
    return "none";
}

inline NoiseKind noise_kind_from_string(const std::string& s)
{
    if (s == "none") return NoiseKind::none;
    if (s == "gaussian") return NoiseKind::gaussian;
    if (s == "poisson") return NoiseKind::poisson;
    throw ValidationError("unknown noise kind '" + s + "'");
}

/// Measurement noise model. sigma is relative to the raster maximum; peak is
/// the photon count assigned to the raster maximum.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double sigma = 0.0;
    double peak = 0.0;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (kind == NoiseKind::gaussian && !(sigma >= 0.0))
            throw ValidationError("NoiseSpec: gaussian sigma must be >= 0");
        if (kind == NoiseKind::poisson && !(peak > 0.0))
            throw ValidationError("NoiseSpec: poisson peak must be > 0");
    }

    static NoiseSpec gaussian_relative(double sigma, std::uint64_t seed) { return {NoiseKind::gaussian, sigma, 0.0, seed}; }
    static NoiseSpec poisson_peak(double peak, std::uint64_t seed) { return {NoiseKind::poisson, 0.0, peak, seed}; }
};

/// Noisy copy of a nonnegative raster, clamped at zero. The stream is a pure
/// function of (noise.seed, stream).
inline RealRaster add_noise(const RealRaster& raster, const NoiseSpec& noise, std::uint64_t stream = 0)
{
    noise.validate();
    if (noise.kind == NoiseKind::none) return raster;
    if (noise.kind == NoiseKind::gaussian && noise.sigma == 0.0) return raster;
    const double peak_value = max_value(raster);
    if (!(peak_value > 0.0)) return raster;

    std::seed_seq seq{static_cast<std::uint32_t>(noise.seed), static_cast<std::uint32_t>(noise.seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::mt19937_64 rng(seq);
    RealRaster out(raster.size());
    if (noise.kind == NoiseKind::gaussian) {
        std::normal_distribution<double> dist(0.0, noise.sigma * peak_value);
        for (std::size_t i = 0; i < raster.count(); ++i) out[i] = std::max(0.0, raster[i] + dist(rng));
    } else {
        const double scale = noise.peak / peak_value;
        for (std::size_t i = 0; i < raster.count(); ++i) {
            const double mean = std::max(0.0, raster[i]) * scale;
            double counts = 0.0;
            if (mean > 0.0) {
                std::poisson_distribution<long long> dist(mean);
                counts = static_cast<double>(dist(rng));
            }
            out[i] = counts / scale;
        }
    }
    return out;
}

/// One rotation state: dual-plane intensities plus provenance.
struct MeasurementRecord {
    std::size_t index = 0;
    RotationAngle angle;
    std::optional<WaveVector> true_k;
    RealRaster image_intensity;
    RealRaster pupil_intensity;
};

struct MeasurementSet {
    OpticalConfig config;
    NoiseSpec noise;
    GridLayout layout = GridLayout::custom;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<MeasurementRecord> records;
    std::optional<ComplexField> truth;  // spatial-domain target, synthetic sets only

    std::size_t size() const noexcept { return records.size(); }
    bool synthetic() const
    {
        return !records.empty()
               && std::all_of(records.begin(), records.end(), [](const auto& r) { return r.true_k.has_value(); });
    }

    void validate() const
    {
        config.validate();
        const std::size_t n = config.grid_size;
        for (const auto& r : records) {
            if (r.image_intensity.size() != n || r.pupil_intensity.size() != n)
                throw ValidationError("MeasurementSet: record " + std::to_string(r.index)
                                      + " raster size differs from config.grid_size");
            for (std::size_t i = 0; i < r.image_intensity.count(); ++i)
                if (!(r.image_intensity[i] >= 0.0) || !(r.pupil_intensity[i] >= 0.0))
                    throw ValidationError("MeasurementSet: record " + std::to_string(r.index)
                                          + " has negative or non-finite intensity");
        }
    }
};

// Stored rasters are float32 on disk; keep the in-memory copy identical.
inline void quantize_to_float(RealRaster& r)
{
    for (double& v : r) v = static_cast<double>(static_cast<float>(v));
}

/// Dual-plane measurements of `target` for every rotation in `grid`.
inline MeasurementSet synthesize_dataset(const ComplexField& target, const AngleGrid& grid, const OpticalConfig& cfg,
                                         const NoiseSpec& noise)
{
    cfg.validate();
    noise.validate();
    validate(target);
    require_domain(target, Domain::spatial, "synthesize_dataset");
    if (target.size() != cfg.grid_size)
        throw ValidationError("synthesize_dataset: target size " + std::to_string(target.size())
                              + " does not match config grid size " + std::to_string(cfg.grid_size));

    std::vector<WaveVector> shifts;
    shifts.reserve(grid.angles.size());
    for (const auto& angle : grid.angles) {
        const WaveVector k = round_shift(rotation_to_pixel_shift(angle, cfg));
        if (!on_grid(k, cfg.grid_size, cfg.aperture_radius)) {
            std::ostringstream os;
            os << "synthesize_dataset: angle (" << angle.theta_x << ", " << angle.theta_y << ") maps to k = ("
               << k.kx << ", " << k.ky << "), outside the on-grid bound "
               << max_on_grid_shift(cfg.grid_size, cfg.aperture_radius);
            throw ValidationError(os.str());
        }
        shifts.push_back(k);
    }

    // The stored truth is float32; simulate from exactly that field.
    ComplexField stored_target = target;
    for (cplx& v : stored_target.data)
        v = {static_cast<double>(static_cast<float>(v.real())), static_cast<double>(static_cast<float>(v.imag()))};
    const ComplexField spectrum = fft_centered(stored_target);
    const PupilMask mask = make_circular_mask(cfg.aperture_radius, cfg.grid_size);

    MeasurementSet ms;
    ms.config = cfg;
    ms.noise = noise;
    ms.layout = grid.layout;
    ms.nx = grid.nx;
    ms.ny = grid.ny;
    ms.records.resize(grid.angles.size());
    ms.truth = std::move(stored_target);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(grid.angles.size()); ++j) {
        const auto idx = static_cast<std::size_t>(j);
        MeasurementRecord rec;
        rec.index = idx;
        rec.angle = grid.angles[idx];
        rec.true_k = shifts[idx];
        rec.image_intensity = add_noise(simulate_image_intensity(spectrum, mask, shifts[idx]), noise, 2 * idx);
        rec.pupil_intensity = add_noise(simulate_pupil_intensity(spectrum, mask, shifts[idx]), noise, 2 * idx + 1);
        quantize_to_float(rec.image_intensity);
        quantize_to_float(rec.pupil_intensity);
        ms.records[idx] = std::move(rec);
    }
    return ms;
}

}  // namespace isafp
