#pragma once

#include <optional>
#include <sstream>
#include <vector>

#include "isafp/fft.hpp"
#include "isafp/kspace.hpp"
#include "isafp/optics.hpp"
#include "isafp/projection.hpp"
#include "isafp/raster.hpp"
#include "isafp/regularizers.hpp"
#include "isafp/sim.hpp"

namespace isafp {

struct SolverParams {
    std::size_t iterations = 100;
    double beta = 1e-1;  // TV weight
    double gamma = 1e-3;  // phase-sparsity weight
    int delta_max = 9;  // pixels
    int delta_min = 1;
    std::size_t search_every = 10;
    double epsilon = 1e-8;
    bool use_pupil_constraint = false;

    bool search_enabled() const noexcept { return delta_max > 0; }

    void validate() const
    {
        auto fail = [](const std::string& m) { throw ValidationError("SolverParams: " + m); };
        if (iterations < 1) fail("iterations must be >= 1");
        if (delta_min < 0 || delta_max < delta_min) fail("need delta_max >= delta_min >= 0");
        if (!(epsilon > 0.0)) fail("epsilon must be > 0");
        if (!(beta >= 0.0) || !(gamma >= 0.0)) fail("weights must be >= 0");
        if (search_every < 1) fail("search_every must be >= 1");
    }
};

struct LossTerms {
    double data = 0.0;
    double tv = 0.0;
    double phase = 0.0;
};

struct ReconstructionResult {
    ComplexField spectrum;
    ComplexField object;
    KSpaceEstimate initial_k;
    KSpaceEstimate corrected_k;
    std::vector<LossTerms> loss_trace;
    SolverParams params;
};

/// Spectrum of sqrt(I) with zero phase for the chosen record.
inline ComplexField initialize_object(const MeasurementSet& ms, std::size_t record_index)
{
    if (record_index >= ms.records.size())
        throw ValidationError("initialize_object: record index " + std::to_string(record_index)
                              + " out of range (" + std::to_string(ms.records.size()) + " records)");
    const RealRaster& I = ms.records[record_index].image_intensity;
    ComplexField o(I.size(), Domain::spatial);
    for (std::size_t i = 0; i < I.count(); ++i) o[i] = std::sqrt(std::max(0.0, I[i]));
    return fft_centered(o);
}

/// Index of the record whose estimate lies nearest k = 0 (first on ties).
inline std::size_t nearest_to_dc(const KSpaceEstimate& k)
{
    if (k.shifts.empty()) throw ValidationError("nearest_to_dc: empty estimate");
    std::size_t best = 0;
    long best_d = -1;
    for (std::size_t j = 0; j < k.shifts.size(); ++j) {
        const long d = static_cast<long>(k.shifts[j].kx) * k.shifts[j].kx + static_cast<long>(k.shifts[j].ky) * k.shifts[j].ky;
        if (best_d < 0 || d < best_d) {
            best = j;
            best_d = d;
        }
    }
    return best;
}

inline ComplexField initialize_object(const MeasurementSet& ms, const KSpaceEstimate& k)
{
    return initialize_object(ms, nearest_to_dc(k));
}

namespace detail {

struct RecordProjection {
    std::vector<cplx> pupil_on_support;
    double misfit = 0.0;
};

// Project → constrain → back-project for one record, reading only the shared
// spectrum snapshot.
inline RecordProjection project_record(const ComplexRaster& spectrum, const PupilMask& mask,
                                       const MeasurementRecord& rec, WaveVector k, const SolverParams& p)
{
    const std::size_t n = spectrum.size();
    ComplexRaster field = extract_window(spectrum, mask, k);
    ifft_centered_inplace(field);
    RecordProjection out;
    for (std::size_t i = 0; i < field.count(); ++i) {
        const double r = std::norm(field[i]) - rec.image_intensity[i];
        out.misfit += r * r;
    }
    replace_modulus_inplace(field, rec.image_intensity, p.epsilon);
    fft_centered_inplace(field);
    out.pupil_on_support.resize(mask.support.size());
    for (std::size_t s = 0; s < mask.support.size(); ++s) {
        const std::size_t idx = mask.support[s];
        cplx v = field[idx];
        if (p.use_pupil_constraint) {
            // The pupil raster is in the global frame, aperture centred at +k.
            const auto row = static_cast<std::ptrdiff_t>(idx / n);
            const auto col = static_cast<std::ptrdiff_t>(idx % n);
            v = replace_modulus(v, rec.pupil_intensity(wrap_index(row + k.ky, n), wrap_index(col + k.kx, n)),
                                p.epsilon);
        }
        out.pupil_on_support[s] = v;
    }
    return out;
}

}  // namespace detail

/// Joint recovery of the spectrum and per-record k shifts, starting from a
/// given spectrum.
inline ReconstructionResult reconstruct(const MeasurementSet& ms, const KSpaceEstimate& init_k,
                                        const SolverParams& params, ComplexField initial_spectrum)
{
    params.validate();
    ms.validate();
    const OpticalConfig& cfg = ms.config;
    const std::size_t n = cfg.grid_size;
    if (init_k.size() != ms.size())
        throw ValidationError("reconstruct: " + std::to_string(init_k.size()) + " k estimates for "
                              + std::to_string(ms.size()) + " records");
    if (ms.records.empty()) throw ValidationError("reconstruct: measurement set is empty");
    init_k.validate(ms.size(), n, cfg.aperture_radius);
    validate(initial_spectrum);
    require_domain(initial_spectrum, Domain::frequency, "reconstruct");
    if (initial_spectrum.size() != n) throw ValidationError("reconstruct: initial spectrum has wrong size");

    const PupilMask mask = make_circular_mask(cfg.aperture_radius, n);
    ComplexField spectrum = std::move(initial_spectrum);
    std::vector<WaveVector> k = init_k.shifts;
    RealRaster alpha = clip_step_size(step_size_alpha(mask, k));

    ReconstructionResult result;
    result.params = params;
    result.initial_k = init_k;
    result.loss_trace.reserve(params.iterations);

    std::vector<detail::RecordProjection> projections(ms.size());
    const auto records = static_cast<std::ptrdiff_t>(ms.size());

    for (std::size_t it = 0; it < params.iterations; ++it) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t j = 0; j < records; ++j) {
            const auto idx = static_cast<std::size_t>(j);
            projections[idx] = detail::project_record(spectrum.data, mask, ms.records[idx], k[idx], params);
        }

        LossTerms loss;
        DataAccumulator acc(spectrum, mask);
        for (std::size_t j = 0; j < ms.size(); ++j) {
            loss.data += projections[j].misfit;
            acc.add(projections[j].pupil_on_support, k[j]);
        }
        const ComplexField data_term = acc.correction(params.epsilon);

        ComplexField object = ifft_centered(spectrum);
        loss.tv = tv_objective_spatial(object.data, params.epsilon);
        loss.phase = phase_objective_spatial(object.data);
        result.loss_trace.push_back(loss);

        ComplexField tv_term(n, Domain::frequency);
        if (params.beta != 0.0) {
            tv_term = ComplexField(tv_gradient_spatial(object.data, params.epsilon), Domain::spatial);
            tv_term = fft_centered(tv_term);
        }
        ComplexField phase_term(n, Domain::frequency);
        if (params.gamma != 0.0) {
            phase_term = ComplexField(phase_gradient_spatial(object.data, params.epsilon), Domain::spatial);
            phase_term = fft_centered(phase_term);
        }

        spectrum = update_spectrum(spectrum, data_term, tv_term, phase_term, alpha, params.beta, params.gamma);

        if (params.search_enabled() && (it + 1) % params.search_every == 0) {
            const int radius = annealed_radius(it, params.iterations, params.delta_max, params.delta_min);
#pragma omp parallel for schedule(dynamic)
            for (std::ptrdiff_t j = 0; j < records; ++j) {
                const auto idx = static_cast<std::size_t>(j);
                k[idx] = search_k_window(spectrum.data, mask, ms.records[idx].image_intensity, k[idx], radius);
            }
            alpha = clip_step_size(step_size_alpha(mask, k));
        }
    }

    result.object = ifft_centered(spectrum);
    result.spectrum = std::move(spectrum);
    result.corrected_k.shifts = std::move(k);
    result.corrected_k.provenance = Provenance::corrected;
    return result;
}

/// Joint recovery starting from the image of the record nearest k = 0.
inline ReconstructionResult reconstruct(const MeasurementSet& ms, const KSpaceEstimate& init_k,
                                        const SolverParams& params)
{
    if (init_k.size() != ms.size())
        throw ValidationError("reconstruct: " + std::to_string(init_k.size()) + " k estimates for "
                              + std::to_string(ms.size()) + " records");
    return reconstruct(ms, init_k, params, initialize_object(ms, init_k));
}

}  // namespace isafp
