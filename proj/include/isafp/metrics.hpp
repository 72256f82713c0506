#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "isafp/kspace.hpp"
#include "isafp/optics.hpp"
#include "isafp/raster.hpp"

namespace isafp {

inline double amplitude_rmse(const ComplexField& recovered, const ComplexField& truth)
{
    require_same_size(recovered, truth, "amplitude_rmse");
    if (recovered.data.count() == 0) throw ValidationError("amplitude_rmse: empty field");
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.data.count(); ++i) {
        const double d = std::abs(recovered[i]) - std::abs(truth[i]);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(truth.data.count()));
}

/// Wraps an angle to (−π, π].
inline double wrap_phase(double a)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::remainder(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    return a;
}

namespace detail {

// Wrapped per-pixel phase errors, re-centred on their circular mean so the
// cluster cannot straddle the ±π cut. Also returns that centre.
inline std::vector<double> centred_phase_errors(const ComplexField& recovered, const ComplexField& truth,
                                                std::optional<double> min_truth_amplitude, double& centre)
{
    require_same_size(recovered, truth, "phase comparison");
    std::vector<double> err;
    err.reserve(truth.data.count());
    for (std::size_t i = 0; i < truth.data.count(); ++i) {
        if (min_truth_amplitude && !(std::abs(truth[i]) > *min_truth_amplitude)) continue;
        err.push_back(wrap_phase(std::arg(recovered[i]) - std::arg(truth[i])));
    }
    cplx phasor_sum{};
    for (double e : err) phasor_sum += std::polar(1.0, e);
    centre = std::abs(phasor_sum) > 0.0 ? std::arg(phasor_sum) : 0.0;
    for (double& e : err) e = wrap_phase(e - centre);
    return err;
}

}  // namespace detail

/// Global phase offset of `recovered` relative to `truth`.
inline double phase_offset(const ComplexField& recovered, const ComplexField& truth,
                           std::optional<double> min_truth_amplitude = std::nullopt)
{
    double centre = 0.0;
    const auto err = detail::centred_phase_errors(recovered, truth, min_truth_amplitude, centre);
    if (err.empty()) return 0.0;
    double mean = 0.0;
    for (double e : err) mean += e;
    return wrap_phase(centre + mean / static_cast<double>(err.size()));
}

/// Phase RMSE after removing the global offset. Pixels are restricted to
/// |truth| > min_truth_amplitude when given.
///
/// Errors are centred on their circular mean, then the arithmetic mean offset
/// is removed and the residual re-wrapped.
inline double phase_rmse_offset_corrected(const ComplexField& recovered, const ComplexField& truth,
                                          std::optional<double> min_truth_amplitude = std::nullopt)
{
    double centre = 0.0;
    const auto err = detail::centred_phase_errors(recovered, truth, min_truth_amplitude, centre);
    if (err.empty()) return 0.0;
    double mean = 0.0;
    for (double e : err) mean += e;
    mean /= static_cast<double>(err.size());
    double sum = 0.0;
    for (double e : err) {
        const double d = wrap_phase(e - mean);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(err.size()));
}

inline std::vector<double> per_record_k_error(const KSpaceEstimate& estimate, const KSpaceEstimate& truth)
{
    if (estimate.size() != truth.size())
        throw ValidationError("k_rmse: length mismatch (" + std::to_string(estimate.size()) + " vs "
                              + std::to_string(truth.size()) + ")");
    std::vector<double> out(estimate.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double dx = estimate.shifts[j].kx - truth.shifts[j].kx;
        const double dy = estimate.shifts[j].ky - truth.shifts[j].ky;
        out[j] = std::hypot(dx, dy);
    }
    return out;
}

inline double k_rmse(const KSpaceEstimate& estimate, const KSpaceEstimate& truth)
{
    const auto errs = per_record_k_error(estimate, truth);
    if (errs.empty()) return 0.0;
    double sum = 0.0;
    for (double e : errs) sum += e * e;
    return std::sqrt(sum / static_cast<double>(errs.size()));
}

/// Shared area of two radius-r disks whose centres are d apart, relative to πr².
inline double overlap_fraction(double center_distance, double radius)
{
    if (!(center_distance >= 0.0) || !(radius > 0.0))
        throw ValidationError("overlap_fraction: need distance >= 0 and radius > 0");
    const double d = center_distance;
    const double r = radius;
    if (d >= 2.0 * r) return 0.0;
    const double lens = 2.0 * r * r * std::acos(d / (2.0 * r)) - 0.5 * d * std::sqrt(4.0 * r * r - d * d);
    return lens / (std::numbers::pi * r * r);
}

/// Discrete counterpart: pixels shared by two rasterised apertures over the
/// pixel count of one aperture.
inline double overlap_fraction_pixels(const PupilMask& mask, WaveVector a, WaveVector b)
{
    const std::size_t n = mask.size();
    RealRaster cov(n, 0.0);
    std::size_t shared = 0;
    for (WaveVector k : {a, b}) {
        for (std::size_t idx : mask.support) {
            const auto row = static_cast<std::ptrdiff_t>(idx / n);
            const auto col = static_cast<std::ptrdiff_t>(idx % n);
            double& c = cov(wrap_index(row + k.ky, n), wrap_index(col + k.kx, n));
            c += 1.0;
            if (c == 2.0) ++shared;
        }
    }
    return mask.support.empty() ? 0.0 : static_cast<double>(shared) / static_cast<double>(mask.support.size());
}

/// Aperture radius giving the requested neighbour overlap at centre spacing d
/// (bisection; overlap is increasing in r for fixed d).
inline double radius_for_overlap(double center_distance, double target)
{
    if (!(target > 0.0 && target < 1.0) || !(center_distance > 0.0))
        throw ValidationError("radius_for_overlap: need 0 < target < 1 and distance > 0");
    double lo = center_distance / 2.0;
    double hi = center_distance * 1e6;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (overlap_fraction(center_distance, mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline constexpr double kPhaseMaskThreshold = 0.05;

struct EvalReport {
    double amplitude_rmse = 0.0;
    double phase_rmse = 0.0;
    double phase_rmse_masked = 0.0;
    double k_rmse = 0.0;
    std::vector<double> per_record_k_error;
    double overlap_fraction = 0.0;
};

/// Scores a recovered object against truth. k errors are left empty when no
/// reference shifts are known.
inline EvalReport evaluate(const ComplexField& recovered, const ComplexField& truth, const KSpaceEstimate& estimate,
                           const std::optional<KSpaceEstimate>& truth_k, double overlap)
{
    EvalReport r;
    r.amplitude_rmse = amplitude_rmse(recovered, truth);
    r.phase_rmse = phase_rmse_offset_corrected(recovered, truth);
    r.phase_rmse_masked = phase_rmse_offset_corrected(recovered, truth, kPhaseMaskThreshold);
    if (truth_k) {
        r.per_record_k_error = per_record_k_error(estimate, *truth_k);
        r.k_rmse = k_rmse(estimate, *truth_k);
    }
    r.overlap_fraction = overlap;
    return r;
}

}  // namespace isafp
