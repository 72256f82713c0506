#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "isafp/fft.hpp"
#include "isafp/raster.hpp"

namespace isafp {

/// Physical sampling of the imaging system.
struct OpticalConfig {
    double wavelength = 532e-9;  // meters
    std::size_t grid_size = 256;  // pixels per side
    double pixel_pitch = 100.0 / 256.0;  // meters
    double aperture_radius = 16.0;  // pixels, in the frequency domain

    /// Frequency-domain sampling pitch 1/(N·dx), cycles per meter.
    double frequency_pitch() const { return 1.0 / (static_cast<double>(grid_size) * pixel_pitch); }

    void validate() const
    {
        require_grid_size(grid_size, "OpticalConfig");
        if (!(wavelength > 0.0) || !std::isfinite(wavelength))
            throw ValidationError("OpticalConfig: wavelength must be positive");
        if (!(pixel_pitch > 0.0) || !std::isfinite(pixel_pitch))
            throw ValidationError("OpticalConfig: pixel pitch must be positive");
        if (!(aperture_radius > 0.0) || !(aperture_radius < static_cast<double>(grid_size) / 2.0)) {
            std::ostringstream os;
            os << "OpticalConfig: aperture radius " << aperture_radius << " outside (0, " << grid_size / 2 << ")";
            throw ValidationError(os.str());
        }
    }
};

/// Integer spectrum translation in pixels. kx moves along columns, ky along rows.
struct WaveVector {
    int kx = 0;
    int ky = 0;
    bool operator==(const WaveVector&) const = default;
};

/// Real-valued spectrum translation, before rounding to the pixel grid.
struct PixelShift {
    double kx = 0.0;
    double ky = 0.0;
};

/// Target tilt about the two in-plane axes, radians.
struct RotationAngle {
    double theta_x = 0.0;
    double theta_y = 0.0;
    bool operator==(const RotationAngle&) const = default;
};

inline constexpr double kSmallAngleLimit = 0.01;

inline void validate(const RotationAngle& a)
{
    if (!(std::abs(a.theta_x) < kSmallAngleLimit) || !(std::abs(a.theta_y) < kSmallAngleLimit)) {
        std::ostringstream os;
        os << "RotationAngle (" << a.theta_x << ", " << a.theta_y << ") outside the small-angle regime |theta| < "
           << kSmallAngleLimit;
        throw ValidationError(os.str());
    }
}

/// Largest |kx|, |ky| that keeps a radius-r aperture on an N grid.
inline int max_on_grid_shift(std::size_t grid_size, double radius)
{
    return static_cast<int>(std::floor(static_cast<double>(grid_size) / 2.0 - radius));
}

inline bool on_grid(WaveVector k, std::size_t grid_size, double radius)
{
    const int bound = max_on_grid_shift(grid_size, radius);
    return std::abs(k.kx) <= bound && std::abs(k.ky) <= bound;
}

inline void require_on_grid(WaveVector k, std::size_t grid_size, double radius)
{
    if (!on_grid(k, grid_size, radius)) {
        std::ostringstream os;
        os << "wave vector (" << k.kx << ", " << k.ky << ") moves the radius-" << radius
           << " aperture off the " << grid_size << " grid (bound " << max_on_grid_shift(grid_size, radius) << ")";
        throw ValidationError(os.str());
    }
}

/// Round half away from zero.
inline WaveVector round_shift(PixelShift s)
{
    return {static_cast<int>(std::round(s.kx)), static_cast<int>(std::round(s.ky))};
}

/// Spectrum shift in pixels produced by tilting a reflective target:
/// (2θ/λ)·N·Δx per axis. The factor 2 is the round-trip path difference.
inline PixelShift rotation_to_pixel_shift(RotationAngle angle, const OpticalConfig& cfg)
{
    validate(angle);
    const double scale = 2.0 * static_cast<double>(cfg.grid_size) * cfg.pixel_pitch / cfg.wavelength;
    return {angle.theta_x * scale, angle.theta_y * scale};
}

inline RotationAngle pixel_shift_to_rotation(PixelShift shift, const OpticalConfig& cfg)
{
    const double scale = cfg.wavelength / (2.0 * static_cast<double>(cfg.grid_size) * cfg.pixel_pitch);
    return {shift.kx * scale, shift.ky * scale};
}

inline RotationAngle pixel_shift_to_rotation(WaveVector k, const OpticalConfig& cfg)
{
    return pixel_shift_to_rotation(PixelShift{static_cast<double>(k.kx), static_cast<double>(k.ky)}, cfg);
}

/// Binary disk of the given radius centred on pixel (N/2, N/2).
struct PupilMask {
    RealRaster mask;
    double radius = 0.0;
    std::vector<std::size_t> support;  // flat indices where mask != 0, ascending

    std::size_t size() const noexcept { return mask.size(); }

    /// Mask with every pixel set, used to build identity pipelines.
    static PupilMask full_pass(std::size_t grid_size)
    {
        require_grid_size(grid_size, "PupilMask");
        PupilMask m;
        m.mask = RealRaster(grid_size, 1.0);
        m.radius = std::numeric_limits<double>::infinity();
        m.support.resize(m.mask.count());
        for (std::size_t i = 0; i < m.support.size(); ++i) m.support[i] = i;
        return m;
    }
};

inline PupilMask make_circular_mask(double radius, std::size_t grid_size)
{
    require_grid_size(grid_size, "make_circular_mask");
    if (!(radius > 0.0) || !(radius < static_cast<double>(grid_size) / 2.0)) {
        std::ostringstream os;
        os << "make_circular_mask: radius " << radius << " outside (0, " << grid_size / 2 << ")";
        throw ValidationError(os.str());
    }
    PupilMask m;
    m.mask = RealRaster(grid_size, 0.0);
    m.radius = radius;
    const auto c = static_cast<double>(grid_size / 2);
    const double r2 = radius * radius;
    for (std::size_t row = 0; row < grid_size; ++row) {
        for (std::size_t col = 0; col < grid_size; ++col) {
            const double dy = static_cast<double>(row) - c;
            const double dx = static_cast<double>(col) - c;
            if (dx * dx + dy * dy <= r2) {
                m.mask(row, col) = 1.0;
                m.support.push_back(row * grid_size + col);
            }
        }
    }
    return m;
}

// Radius used for on-grid checks; a full-pass mask only admits k = 0.
inline double effective_radius(const PupilMask& m)
{
    return std::isfinite(m.radius) ? m.radius : static_cast<double>(m.size()) / 2.0;
}

/// Local sub-spectrum seen by the lens for shift k: W(p) = O(p + k)·M(p).
/// Translation is a circular roll of the raster.
inline ComplexRaster extract_window(const ComplexRaster& spectrum, const PupilMask& mask, WaveVector k)
{
    const std::size_t n = spectrum.size();
    ComplexRaster out(n);
    for (std::size_t idx : mask.support) {
        const auto row = static_cast<std::ptrdiff_t>(idx / n);
        const auto col = static_cast<std::ptrdiff_t>(idx % n);
        out[idx] = spectrum(wrap_index(row + k.ky, n), wrap_index(col + k.kx, n)) * mask.mask[idx];
    }
    return out;
}

namespace detail {

inline void check_forward_inputs(const ComplexField& spectrum, const PupilMask& mask, WaveVector k,
                                 const char* what)
{
    validate(spectrum);
    require_domain(spectrum, Domain::frequency, what);
    require_same_size(spectrum, mask, what);
    require_on_grid(k, spectrum.size(), effective_radius(mask));
}

}  // namespace detail

/// Image-plane intensity |F⁻¹{O(p + k)·M(p)}|²: the aperture samples the part
/// of the spectrum centred at +k.
inline RealRaster simulate_image_intensity(const ComplexField& spectrum, const PupilMask& mask, WaveVector k)
{
    detail::check_forward_inputs(spectrum, mask, k, "simulate_image_intensity");
    ComplexRaster field = extract_window(spectrum.data, mask, k);
    ifft_centered_inplace(field);
    return intensity(field);
}

/// Pupil-plane intensity |O(p)·M(p − k)|²: the static spectrum seen through
/// the aperture translated to +k.
inline RealRaster simulate_pupil_intensity(const ComplexField& spectrum, const PupilMask& mask, WaveVector k)
{
    detail::check_forward_inputs(spectrum, mask, k, "simulate_pupil_intensity");
    const std::size_t n = spectrum.size();
    RealRaster out(n, 0.0);
    for (std::size_t idx : mask.support) {
        const auto row = static_cast<std::ptrdiff_t>(idx / n);
        const auto col = static_cast<std::ptrdiff_t>(idx % n);
        const std::size_t r = wrap_index(row + k.ky, n);
        const std::size_t c = wrap_index(col + k.kx, n);
        out(r, c) = std::norm(spectrum(r, c) * mask.mask[idx]);
    }
    return out;
}

}  // namespace isafp
