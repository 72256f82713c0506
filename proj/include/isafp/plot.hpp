#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "isafp/optics.hpp"
#include "isafp/png.hpp"
#include "isafp/raster.hpp"

namespace isafp {

/// 8-bit gray image scaled so the largest value maps to 255.
inline std::vector<std::uint8_t> to_gray8(const RealRaster& values)
{
    const double peak = max_value(values);
    std::vector<std::uint8_t> out(values.count(), 0);
    if (!(peak > 0.0)) return out;
    for (std::size_t i = 0; i < values.count(); ++i)
        out[i] = static_cast<std::uint8_t>(std::lround(std::clamp(values[i] / peak, 0.0, 1.0) * 255.0));
    return out;
}

using Rgb = std::array<std::uint8_t, 3>;

/// Fully saturated hue for an angle; −π and π map to the same colour.
inline Rgb hue_color(double angle)
{
    double h = (angle + std::numbers::pi) / (2.0 * std::numbers::pi);
    h -= std::floor(h);
    const double s6 = h * 6.0;
    const int sector = static_cast<int>(s6) % 6;
    const double f = s6 - std::floor(s6);
    const auto up = static_cast<std::uint8_t>(std::lround(255.0 * f));
    const auto down = static_cast<std::uint8_t>(255 - up);
    switch (sector) {
    case 0: return {255, up, 0};
    case 1: return {down, 255, 0};
    case 2: return {0, 255, up};
    case 3: return {0, down, 255};
    case 4: return {up, 0, 255};
    default: return {255, 0, down};
    }
}

/// Phase raster rendered through the cyclic hue map, after subtracting `offset`.
inline RgbImage phase_to_rgb(const RealRaster& phase, double offset = 0.0)
{
    const std::size_t n = phase.size();
    RgbImage img(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const Rgb col = hue_color(phase(r, c) - offset);
            img.set(static_cast<std::ptrdiff_t>(c), static_cast<std::ptrdiff_t>(r), col[0], col[1], col[2]);
        }
    return img;
}

enum class Marker { square, disc, cross };

struct ScatterSeries {
    std::vector<WaveVector> points;
    Rgb color{0, 0, 0};
    Marker marker = Marker::disc;
};

inline constexpr std::size_t kPlotMargin = 24;

/// k-space scatter on an n×n frequency grid (DC at the centre, +ky down as in
/// the rasters) with a plain frame and tick marks every 16 px.
inline RgbImage kspace_scatter(const std::vector<ScatterSeries>& series, std::size_t n)
{
    const std::size_t side = n + 2 * kPlotMargin;
    RgbImage img(side, side);
    const auto m = static_cast<std::ptrdiff_t>(kPlotMargin);
    const auto sn = static_cast<std::ptrdiff_t>(n);
    const auto c = static_cast<std::ptrdiff_t>(n / 2);

    for (std::ptrdiff_t t = 0; t <= sn; ++t) {
        img.set(m + t, m, 0, 0, 0);
        img.set(m + t, m + sn, 0, 0, 0);
        img.set(m, m + t, 0, 0, 0);
        img.set(m + sn, m + t, 0, 0, 0);
    }
    for (std::ptrdiff_t t = 0; t <= sn; t += 16) {
        const std::ptrdiff_t len = (t - c) % 64 == 0 ? 6 : 3;
        for (std::ptrdiff_t l = 1; l <= len; ++l) {
            img.set(m + t, m + sn + l, 0, 0, 0);
            img.set(m - l, m + t, 0, 0, 0);
        }
    }
    for (std::ptrdiff_t t = 0; t < sn; t += 2) {
        img.set(m + t, m + c, 200, 200, 200);
        img.set(m + c, m + t, 200, 200, 200);
    }

    for (const auto& s : series) {
        for (WaveVector k : s.points) {
            const std::ptrdiff_t x = m + c + k.kx;
            const std::ptrdiff_t y = m + c + k.ky;
            for (std::ptrdiff_t dy = -3; dy <= 3; ++dy)
                for (std::ptrdiff_t dx = -3; dx <= 3; ++dx) {
                    bool on = false;
                    switch (s.marker) {
                    case Marker::square: on = std::max(std::abs(dx), std::abs(dy)) == 3; break;
                    case Marker::disc: on = dx * dx + dy * dy <= 5; break;
                    case Marker::cross: on = dx == dy || dx == -dy; break;
                    }
                    if (on) img.set(x + dx, y + dy, s.color[0], s.color[1], s.color[2]);
                }
        }
    }
    return img;
}

}  // namespace isafp
