#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "isafp/fft.hpp"
#include "isafp/optics.hpp"
#include "isafp/raster.hpp"

namespace isafp {

/// ψ = F⁻¹{Ô(p + k)·M(p)}: the image-plane field predicted for shift k.
inline ComplexField image_projection(const ComplexField& spectrum, const PupilMask& mask, WaveVector k)
{
    detail::check_forward_inputs(spectrum, mask, k, "image_projection");
    ComplexField psi(extract_window(spectrum.data, mask, k), Domain::spatial);
    ifft_centered_inplace(psi.data);
    return psi;
}

/// Keeps the phase of `v` and replaces its modulus by sqrt(measured). Where
/// |v|² <= ε the phase is undefined and zero phase is adopted.
inline cplx replace_modulus(cplx v, double measured, double epsilon) noexcept
{
    const double target = std::sqrt(std::max(0.0, measured));
    const double n2 = std::norm(v);
    if (n2 <= epsilon) return {target, 0.0};
    return v * (target / std::sqrt(n2));
}

inline void replace_modulus_inplace(ComplexRaster& field, const RealRaster& measured, double epsilon)
{
    for (std::size_t i = 0; i < field.count(); ++i) field[i] = replace_modulus(field[i], measured[i], epsilon);
}

inline ComplexField apply_image_constraint(const ComplexField& psi, const RealRaster& measured, double epsilon)
{
    require_same_size(psi, measured, "apply_image_constraint");
    require_domain(psi, Domain::spatial, "apply_image_constraint");
    ComplexField out = psi;
    replace_modulus_inplace(out.data, measured, epsilon);
    return out;
}

/// Pupil-plane modulus replacement. Both rasters share one frame.
inline ComplexField apply_pupil_constraint(const ComplexField& pupil_field, const RealRaster& measured,
                                           double epsilon)
{
    require_same_size(pupil_field, measured, "apply_pupil_constraint");
    require_domain(pupil_field, Domain::frequency, "apply_pupil_constraint");
    ComplexField out = pupil_field;
    replace_modulus_inplace(out.data, measured, epsilon);
    return out;
}

/// α(q) = Σ_j |M(q − k_j)| / max|M|: the number of shifted apertures
/// covering q for a binary mask.
inline RealRaster step_size_alpha(const PupilMask& mask, std::span<const WaveVector> shifts)
{
    if (shifts.empty()) throw ValidationError("step_size_alpha: no k estimates");
    const std::size_t n = mask.size();
    const double peak = max_value(mask.mask);
    RealRaster alpha(n, 0.0);
    if (!(peak > 0.0)) return alpha;
    for (WaveVector k : shifts) {
        for (std::size_t idx : mask.support) {
            const auto row = static_cast<std::ptrdiff_t>(idx / n);
            const auto col = static_cast<std::ptrdiff_t>(idx % n);
            alpha(wrap_index(row + k.ky, n), wrap_index(col + k.kx, n)) += std::abs(mask.mask[idx]) / peak;
        }
    }
    return alpha;
}

/// min(α, 1). The data correction is already divided by Σ|M|², so a unit
/// step lands on the average of the constrained fields; larger α over-relaxes
/// and the iteration diverges wherever more than two apertures overlap.
inline RealRaster clip_step_size(RealRaster alpha)
{
    for (double& v : alpha) v = std::min(v, 1.0);
    return alpha;
}

/// Accumulates the batch data correction
///   Σ_j M̄(q − k_j)·(Ô(q) − Ψ_j(q − k_j)) / (Σ_j |M(q − k_j)|² + ε)
/// where Ψ_j is the constrained pupil field of record j in its local frame.
/// Records are added in a fixed order so the sum is reproducible.
class DataAccumulator {
public:
    DataAccumulator(const ComplexField& spectrum, const PupilMask& mask)
        : spectrum_(&spectrum), mask_(&mask), numerator_(spectrum.size(), cplx{}), weight_(spectrum.size(), 0.0)
    {
    }

    /// `local` holds Ψ_j on mask.support, in the same order.
    void add(std::span<const cplx> local, WaveVector k)
    {
        const std::size_t n = spectrum_->size();
        for (std::size_t s = 0; s < mask_->support.size(); ++s) {
            const std::size_t idx = mask_->support[s];
            const auto row = static_cast<std::ptrdiff_t>(idx / n);
            const auto col = static_cast<std::ptrdiff_t>(idx % n);
            const std::size_t q = wrap_index(row + k.ky, n) * n + wrap_index(col + k.kx, n);
            const double m = mask_->mask[idx];
            numerator_[q] += m * (spectrum_->data[q] - local[s]);
            weight_[q] += m * m;
        }
        ++records_;
    }

    std::size_t records() const noexcept { return records_; }

    ComplexField correction(double epsilon) const
    {
        if (records_ == 0) throw ValidationError("data_update: empty record list");
        ComplexField out(spectrum_->size(), Domain::frequency);
        for (std::size_t i = 0; i < out.data.count(); ++i) out[i] = numerator_[i] / (weight_[i] + epsilon);
        return out;
    }

private:
    const ComplexField* spectrum_;
    const PupilMask* mask_;
    ComplexRaster numerator_;
    RealRaster weight_;
    std::size_t records_ = 0;
};

inline std::vector<cplx> gather_support(const ComplexRaster& r, const PupilMask& mask)
{
    std::vector<cplx> out(mask.support.size());
    for (std::size_t s = 0; s < out.size(); ++s) out[s] = r[mask.support[s]];
    return out;
}

/// Constrained pupil field of one record, in the aperture's local frame.
struct ConstrainedRecord {
    ComplexField pupil_field;
    WaveVector k;
};

inline ComplexField data_update(const ComplexField& spectrum, std::span<const ConstrainedRecord> records,
                                const PupilMask& mask, double epsilon)
{
    require_domain(spectrum, Domain::frequency, "data_update");
    DataAccumulator acc(spectrum, mask);
    for (const auto& r : records) {
        require_same_size(spectrum, r.pupil_field, "data_update");
        acc.add(gather_support(r.pupil_field.data, mask), r.k);
    }
    return acc.correction(epsilon);
}

/// Ô ← Ô − α·data − β·tv − γ·phase, elementwise.
inline ComplexField update_spectrum(const ComplexField& spectrum, const ComplexField& data_term,
                                    const ComplexField& tv_term, const ComplexField& phase_term,
                                    const RealRaster& alpha, double beta, double gamma)
{
    require_same_size(spectrum, data_term, "update_spectrum");
    require_same_size(spectrum, tv_term, "update_spectrum");
    require_same_size(spectrum, phase_term, "update_spectrum");
    require_same_size(spectrum, alpha, "update_spectrum");
    ComplexField out = spectrum;
    for (std::size_t i = 0; i < out.data.count(); ++i)
        out[i] = spectrum[i] - alpha[i] * data_term[i] - beta * tv_term[i] - gamma * phase_term[i];
    return out;
}

}  // namespace isafp
