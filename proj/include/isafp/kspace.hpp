#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <string>
#include <vector>

#include "isafp/fft.hpp"
#include "isafp/optics.hpp"
#include "isafp/raster.hpp"

namespace isafp {

enum class Provenance { ground_truth, classical, external, corrected };

inline const char* to_string(Provenance p)
{
    switch (p) {
    case Provenance::ground_truth: return "ground_truth";
    case Provenance::classical: return "classical";
    case Provenance::external: return "external";
    case Provenance::corrected: return "corrected";
    }
    return "external";
}

inline Provenance provenance_from_string(const std::string& s)
{
    if (s == "ground_truth") return Provenance::ground_truth;
    if (s == "classical") return Provenance::classical;
    if (s == "external") return Provenance::external;
    if (s == "corrected") return Provenance::corrected;
    throw ValidationError("unknown provenance '" + s + "'");
}

/// One integer spectrum shift per measurement record.
struct KSpaceEstimate {
    std::vector<WaveVector> shifts;
    Provenance provenance = Provenance::external;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return shifts.size(); }

    void validate(std::size_t records, std::size_t grid_size, double radius) const
    {
        if (shifts.size() != records)
            throw ValidationError("KSpaceEstimate: " + std::to_string(shifts.size()) + " shifts for "
                                  + std::to_string(records) + " records");
        for (WaveVector k : shifts) require_on_grid(k, grid_size, radius);
    }
};

/// ‖ |F⁻¹{Ô(p + k)·M(p)}|² − I ‖² for one candidate shift.
inline double intensity_misfit(const ComplexRaster& spectrum, const PupilMask& mask, const RealRaster& measured,
                               WaveVector k)
{
    ComplexRaster field = extract_window(spectrum, mask, k);
    ifft_centered_inplace(field);
    double sum = 0.0;
    for (std::size_t i = 0; i < field.count(); ++i) {
        const double r = std::norm(field[i]) - measured[i];
        sum += r * r;
    }
    return sum;
}

namespace detail {

inline bool smooth_size(std::size_t m)
{
    for (std::size_t f : {2U, 3U, 5U, 7U})
        while (m % f == 0) m /= f;
    return m == 1;
}

// Smallest even 7-smooth size holding the autocorrelation support of a
// radius-r aperture without wrap-around.
inline std::size_t band_grid_size(double radius, std::size_t n)
{
    auto m = static_cast<std::size_t>(4.0 * std::ceil(radius) + 2.0);
    while (m % 2 != 0 || !smooth_size(m)) ++m;
    return std::min(m, n);
}

}  // namespace detail

/// Evaluates the intensity misfit of many candidate shifts against one
/// measurement.
///
/// |ψ|² has its spectrum inside the box |q| <= 2r, so by Parseval
///   ‖|ψ|² − I‖² = Σ_box |F{|ψ|²} − F{I}|² + Σ_outside |F{I}|².
/// F{|ψ|²} on the box is obtained from an M×M transform of the aperture
/// window (M >= 4r + 2), scaled by M/N. F{I} on the box and the outside
/// energy are cached per measurement.
class MisfitEvaluator {
public:
    MisfitEvaluator(const PupilMask& mask, const RealRaster& measured)
        : mask_(&mask), n_(measured.size()), m_(detail::band_grid_size(effective_radius(mask), measured.size()))
    {
        if (m_ >= n_ || !std::isfinite(mask.radius)) {
            direct_ = &measured;
            return;
        }
        ComplexRaster spec(n_);
        double total = 0.0;
        for (std::size_t i = 0; i < measured.count(); ++i) {
            spec[i] = measured[i];
            total += measured[i] * measured[i];
        }
        fft_centered_inplace(spec);
        half_ = static_cast<std::ptrdiff_t>(2.0 * std::ceil(effective_radius(mask)));
        const auto cn = static_cast<std::ptrdiff_t>(n_ / 2);
        double inside = 0.0;
        for (std::ptrdiff_t dy = -half_; dy <= half_; ++dy) {
            for (std::ptrdiff_t dx = -half_; dx <= half_; ++dx) {
                const cplx v = spec(static_cast<std::size_t>(cn + dy), static_cast<std::size_t>(cn + dx));
                band_.push_back(v);
                inside += std::norm(v);
            }
        }
        outside_ = std::max(0.0, total - inside);
        // Window pixels relative to the aperture centre.
        for (std::size_t idx : mask.support) {
            offsets_.push_back({static_cast<std::ptrdiff_t>(idx / n_) - cn, static_cast<std::ptrdiff_t>(idx % n_) - cn});
        }
    }

    double operator()(const ComplexRaster& spectrum, WaveVector k) const
    {
        if (direct_) return intensity_misfit(spectrum, *mask_, *direct_, k);
        const auto cm = static_cast<std::ptrdiff_t>(m_ / 2);
        const auto cn = static_cast<std::ptrdiff_t>(n_ / 2);
        ComplexRaster small(m_);
        for (std::size_t s = 0; s < offsets_.size(); ++s) {
            const auto [dy, dx] = offsets_[s];
            const cplx v = spectrum(wrap_index(cn + dy + k.ky, n_), wrap_index(cn + dx + k.kx, n_))
                           * mask_->mask[mask_->support[s]];
            small(static_cast<std::size_t>(cm + dy), static_cast<std::size_t>(cm + dx)) = v;
        }
        ifft_centered_inplace(small);
        for (cplx& v : small) v = std::norm(v);
        fft_centered_inplace(small);
        const double scale = static_cast<double>(m_) / static_cast<double>(n_);
        double sum = outside_;
        std::size_t b = 0;
        for (std::ptrdiff_t dy = -half_; dy <= half_; ++dy)
            for (std::ptrdiff_t dx = -half_; dx <= half_; ++dx, ++b)
                sum += std::norm(scale * small(static_cast<std::size_t>(cm + dy), static_cast<std::size_t>(cm + dx))
                                 - band_[b]);
        return sum;
    }

private:
    const PupilMask* mask_;
    std::size_t n_;
    std::size_t m_;
    const RealRaster* direct_ = nullptr;
    std::ptrdiff_t half_ = 0;
    std::vector<cplx> band_;
    double outside_ = 0.0;
    std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> offsets_;
};

namespace detail {

// Strict ordering used for argmin: misfit, then |δ|², then (δx, δy).
struct Candidate {
    double misfit = std::numeric_limits<double>::infinity();
    int dx = 0;
    int dy = 0;

    bool better_than(const Candidate& o) const noexcept
    {
        if (misfit != o.misfit) return misfit < o.misfit;
        const int n = dx * dx + dy * dy;
        const int on = o.dx * o.dx + o.dy * o.dy;
        if (n != on) return n < on;
        if (dx != o.dx) return dx < o.dx;
        return dy < o.dy;
    }
};

}  // namespace detail

/// Exhaustive search over integer offsets δ ∈ [−radius, radius]² around
/// `center` (optionally on a coarser stride); returns the candidate with the
/// smallest intensity misfit. Off-grid candidates are skipped.
inline WaveVector search_k_window(const ComplexRaster& spectrum, const PupilMask& mask, const RealRaster& measured,
                                  WaveVector center, int radius, int stride = 1)
{
    if (radius <= 0) return center;
    const MisfitEvaluator misfit(mask, measured);
    const std::size_t n = spectrum.size();
    const double r = effective_radius(mask);
    detail::Candidate best;
    bool found = false;
    const int lo = -(radius / stride) * stride;
    for (int dy = lo; dy <= radius; dy += stride) {
        for (int dx = lo; dx <= radius; dx += stride) {
            const WaveVector k{center.kx + dx, center.ky + dy};
            if (!on_grid(k, n, r)) continue;
            detail::Candidate c{misfit(spectrum, k), dx, dy};
            if (!found || c.better_than(best)) {
                best = c;
                found = true;
            }
        }
    }
    if (!found) return center;
    return {center.kx + best.dx, center.ky + best.dy};
}

inline WaveVector local_k_search(const ComplexField& spectrum, const PupilMask& mask, const RealRaster& measured,
                                 WaveVector k_hat, int radius)
{
    validate(spectrum);
    require_domain(spectrum, Domain::frequency, "local_k_search");
    require_same_size(spectrum, mask, "local_k_search");
    require_same_size(spectrum, measured, "local_k_search");
    if (radius < 0) throw ValidationError("local_k_search: radius must be >= 0");
    return search_k_window(spectrum.data, mask, measured, k_hat, radius);
}

/// Linear schedule from delta_max at iteration 0 to delta_min at the last one.
inline int annealed_radius(std::size_t iter, std::size_t total, int delta_max, int delta_min)
{
    if (total == 0 || iter >= total) throw ValidationError("annealed_radius: iteration outside [0, total)");
    if (total == 1) return delta_max;
    const double t = static_cast<double>(iter) / static_cast<double>(total - 1);
    return static_cast<int>(std::round(delta_max + (delta_min - delta_max) * t));
}

}  // namespace isafp
