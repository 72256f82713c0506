#pragma once

#include <cmath>

#include "isafp/fft.hpp"
#include "isafp/raster.hpp"

namespace isafp {

// Both regularizers are discretisations of continuum functionals over a
// unit-square field of view sampled with pixel spacing h = 1/N:
//
//   L_TV    = h   · Σ sqrt(|Dx o|² + |Dy o|² + ε²)     (∫|∇o| dA, h² area · 1/h slope)
//   L_phase = h²  · Σ arg(o)²                           (∫ arg(o)² dA)
//
// so the weights are resolution independent. Gradients are returned in the
// real-gradient convention g = ∂L/∂Re + i·∂L/∂Im with respect to the
// unitary spectrum, which for a unitary transform is F{∂L/∂Re o + i·∂L/∂Im o}.
// Forward differences are periodic, matching the DFT.

namespace detail {

inline double fov_pixel_spacing(std::size_t n) { return 1.0 / static_cast<double>(n); }

struct ForwardDiffs {
    ComplexRaster dx;
    ComplexRaster dy;
};

inline ForwardDiffs forward_differences(const ComplexRaster& o)
{
    const std::size_t n = o.size();
    ForwardDiffs d{ComplexRaster(n), ComplexRaster(n)};
    for (std::size_t row = 0; row < n; ++row) {
        const std::size_t down = (row + 1) % n;
        for (std::size_t col = 0; col < n; ++col) {
            const std::size_t right = (col + 1) % n;
            d.dx(row, col) = o(row, right) - o(row, col);
            d.dy(row, col) = o(down, col) - o(row, col);
        }
    }
    return d;
}

}  // namespace detail

/// Smoothed total variation of a spatial-domain raster.
inline double tv_objective_spatial(const ComplexRaster& o, double epsilon)
{
    const auto d = detail::forward_differences(o);
    double sum = 0.0;
    for (std::size_t i = 0; i < o.count(); ++i)
        sum += std::sqrt(std::norm(d.dx[i]) + std::norm(d.dy[i]) + epsilon * epsilon);
    return detail::fov_pixel_spacing(o.size()) * sum;
}

/// -div(∇o / |∇o|_ε) scaled by the area element, in the spatial domain.
inline ComplexRaster tv_gradient_spatial(const ComplexRaster& o, double epsilon)
{
    const std::size_t n = o.size();
    auto d = detail::forward_differences(o);
    for (std::size_t i = 0; i < o.count(); ++i) {
        const double w = std::sqrt(std::norm(d.dx[i]) + std::norm(d.dy[i]) + epsilon * epsilon);
        d.dx[i] /= w;
        d.dy[i] /= w;
    }
    // Adjoint of the forward difference is the negative backward difference.
    const double h = detail::fov_pixel_spacing(n);
    ComplexRaster g(n);
    for (std::size_t row = 0; row < n; ++row) {
        const std::size_t up = (row + n - 1) % n;
        for (std::size_t col = 0; col < n; ++col) {
            const std::size_t left = (col + n - 1) % n;
            const cplx div = (d.dx(row, col) - d.dx(row, left)) + (d.dy(row, col) - d.dy(up, col));
            g(row, col) = -h * div;
        }
    }
    return g;
}

inline double phase_objective_spatial(const ComplexRaster& o)
{
    double sum = 0.0;
    for (const cplx& v : o) {
        const double phi = std::arg(v);
        sum += phi * phi;
    }
    const double h = detail::fov_pixel_spacing(o.size());
    return h * h * sum;
}

/// 2·arg(o)·i·o / (|o|² + ε), area-scaled. The chain-rule factor arg(o)
/// makes this the derivative of Σ arg(o)², not of arg(o) itself.
inline ComplexRaster phase_gradient_spatial(const ComplexRaster& o, double epsilon)
{
    const double h = detail::fov_pixel_spacing(o.size());
    const double scale = h * h;
    ComplexRaster g(o.size());
    for (std::size_t i = 0; i < o.count(); ++i) {
        const cplx v = o[i];
        const double phi = std::arg(v);
        g[i] = scale * 2.0 * phi * cplx(0.0, 1.0) * v / (std::norm(v) + epsilon);
    }
    return g;
}

inline double tv_objective(const ComplexField& spectrum, double epsilon)
{
    return tv_objective_spatial(ifft_centered(spectrum).data, epsilon);
}

inline double phase_objective(const ComplexField& spectrum)
{
    return phase_objective_spatial(ifft_centered(spectrum).data);
}

/// Spectrum-domain gradient of the smoothed TV objective.
inline ComplexField tv_gradient(const ComplexField& spectrum, double epsilon)
{
    ComplexField g(tv_gradient_spatial(ifft_centered(spectrum).data, epsilon), Domain::spatial);
    return fft_centered(g);
}

/// Spectrum-domain gradient of the phase-sparsity objective.
inline ComplexField phase_gradient(const ComplexField& spectrum, double epsilon)
{
    ComplexField g(phase_gradient_spatial(ifft_centered(spectrum).data, epsilon), Domain::spatial);
    return fft_centered(g);
}

}  // namespace isafp
