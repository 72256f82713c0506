#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "isafp/fft.hpp"
#include "isafp/json_io.hpp"
#include "isafp/kspace.hpp"
#include "isafp/optics.hpp"
#include "isafp/sim.hpp"
#include "isafp/solver.hpp"

namespace isafp {

inline constexpr double kPupilSupportThreshold = 0.1;

namespace detail {

// Matched filter of the binarised pupil raster against the aperture disk.
// Binary input makes the response an integer pixel count, so the maximum can
// be a plateau; its centroid is the estimate.
inline std::optional<WaveVector> locate_pupil_support(const RealRaster& pupil, const PupilMask& mask, int bound)
{
    const std::size_t n = pupil.size();
    const double peak = max_value(pupil);
    if (!(peak > 0.0)) return std::nullopt;
    RealRaster binary(n, 0.0);
    for (std::size_t i = 0; i < pupil.count(); ++i) binary[i] = pupil[i] >= kPupilSupportThreshold * peak ? 1.0 : 0.0;

    const RealRaster response = circular_cross_correlation(binary, mask.mask);
    // Both disks are drawn about N/2, so the response peaks at lag t = k.
    double best = -1.0;
    double sx = 0.0, sy = 0.0, count = 0.0;
    for (int ky = -bound; ky <= bound; ++ky) {
        for (int kx = -bound; kx <= bound; ++kx) {
            const double v = std::round(response(wrap_index(ky, n), wrap_index(kx, n)));
            if (v > best) {
                best = v;
                sx = sy = count = 0.0;
            }
            if (v == best) {
                sx += kx;
                sy += ky;
                count += 1.0;
            }
        }
    }
    return round_shift(PixelShift{sx / count, sy / count});
}

}  // namespace detail

/// Classical estimate from the aperture disk visible in each pupil raster.
inline KSpaceEstimate pupil_support_init(const MeasurementSet& ms)
{
    ms.validate();
    const std::size_t n = ms.config.grid_size;
    const PupilMask mask = make_circular_mask(ms.config.aperture_radius, n);
    const int bound = max_on_grid_shift(n, ms.config.aperture_radius);
    KSpaceEstimate est;
    est.provenance = Provenance::classical;
    est.shifts.resize(ms.size());
    std::vector<char> degenerate(ms.size(), 0);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(ms.size()); ++j) {
        const auto idx = static_cast<std::size_t>(j);
        const auto found = detail::locate_pupil_support(ms.records[idx].pupil_intensity, mask, bound);
        est.shifts[idx] = found.value_or(WaveVector{});
        degenerate[idx] = found ? 0 : 1;
    }
    for (std::size_t j = 0; j < ms.size(); ++j)
        if (degenerate[j]) est.warnings.push_back("record " + std::to_string(j) + ": all-zero pupil raster, estimate set to (0, 0)");
    return est;
}

/// Grid-restricted misfit search: candidates (sx·stride, sy·stride) within
/// [−bound, bound]², scored against `seed_spectrum`.
inline KSpaceEstimate coarse_misfit_init(const MeasurementSet& ms, const ComplexField& seed_spectrum, int stride,
                                         int bound)
{
    ms.validate();
    const std::size_t n = ms.config.grid_size;
    if (stride < 1) throw ValidationError("coarse_misfit_init: stride must be >= 1");
    if (bound < 0) throw ValidationError("coarse_misfit_init: empty candidate grid (bound < 0)");
    if (bound > max_on_grid_shift(n, ms.config.aperture_radius))
        throw ValidationError("coarse_misfit_init: bound " + std::to_string(bound) + " exceeds the on-grid limit "
                              + std::to_string(max_on_grid_shift(n, ms.config.aperture_radius)));
    validate(seed_spectrum);
    require_domain(seed_spectrum, Domain::frequency, "coarse_misfit_init");
    if (seed_spectrum.size() != n) throw ValidationError("coarse_misfit_init: seed spectrum has wrong size");

    const PupilMask mask = make_circular_mask(ms.config.aperture_radius, n);
    KSpaceEstimate est;
    est.provenance = Provenance::classical;
    est.shifts.resize(ms.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(ms.size()); ++j) {
        const auto idx = static_cast<std::size_t>(j);
        est.shifts[idx] = search_k_window(seed_spectrum.data, mask, ms.records[idx].image_intensity, WaveVector{},
                                          bound, stride);
    }
    return est;
}

/// Record with the largest total image intensity; for a natural scene this
/// is the one whose aperture holds the DC term.
inline std::size_t brightest_record(const MeasurementSet& ms)
{
    if (ms.records.empty()) throw ValidationError("brightest_record: measurement set is empty");
    std::size_t best = 0;
    double best_sum = -1.0;
    for (std::size_t j = 0; j < ms.size(); ++j) {
        double s = 0.0;
        for (double v : ms.records[j].image_intensity) s += v;
        if (s > best_sum) {
            best_sum = s;
            best = j;
        }
    }
    return best;
}

/// Coarse search seeded by the spectrum of the brightest record.
inline KSpaceEstimate coarse_misfit_init(const MeasurementSet& ms, int stride, int bound)
{
    return coarse_misfit_init(ms, initialize_object(ms, brightest_record(ms)), stride, bound);
}

inline KSpaceEstimate ground_truth_init(const MeasurementSet& ms)
{
    KSpaceEstimate est;
    est.provenance = Provenance::ground_truth;
    for (const auto& r : ms.records) {
        if (!r.true_k)
            throw ValidationError("ground_truth_init: record " + std::to_string(r.index)
                                  + " has no true_k (not a synthetic set)");
        est.shifts.push_back(*r.true_k);
    }
    return est;
}

/// One externally predicted, real-valued shift.
struct Prediction {
    std::size_t index = 0;
    double kx = 0.0;
    double ky = 0.0;
};

struct PredictionFile {
    std::string source;
    std::vector<Prediction> entries;
};

inline json to_json(const PredictionFile& f)
{
    json preds = json::array();
    for (const auto& p : f.entries) preds.push_back({{"index", p.index}, {"kx", p.kx}, {"ky", p.ky}});
    return {{"source", f.source}, {"predictions", preds}};
}

inline void write_predictions(const fs::path& path, const PredictionFile& f)
{
    write_text_file(path, to_json(f).dump(2) + "\n");
}

inline PredictionFile predictions_from_estimate(const KSpaceEstimate& k, std::string source)
{
    PredictionFile f{std::move(source), {}};
    for (std::size_t j = 0; j < k.size(); ++j)
        f.entries.push_back({j, static_cast<double>(k.shifts[j].kx), static_cast<double>(k.shifts[j].ky)});
    return f;
}

inline PredictionFile parse_predictions(const json& j)
{
    PredictionFile f;
    try {
        f.source = j.at("source").get<std::string>();
        for (const json& e : j.at("predictions"))
            f.entries.push_back({e.at("index").get<std::size_t>(), e.at("kx").get<double>(), e.at("ky").get<double>()});
    } catch (const json::exception& e) {
        throw ValidationError(std::string("prediction file: ") + e.what());
    }
    return f;
}

/// Validates predictions against `ms` and rounds them to integer shifts.
inline KSpaceEstimate estimate_from_predictions(const PredictionFile& f, const MeasurementSet& ms)
{
    const std::size_t records = ms.size();
    const std::size_t n = ms.config.grid_size;
    std::vector<std::optional<WaveVector>> slots(records);
    for (const auto& p : f.entries) {
        if (p.index >= records)
            throw ValidationError("prediction file: index " + std::to_string(p.index) + " outside the "
                                  + std::to_string(records) + "-record set");
        if (slots[p.index]) throw ValidationError("prediction file: duplicate index " + std::to_string(p.index));
        if (!std::isfinite(p.kx) || !std::isfinite(p.ky))
            throw ValidationError("prediction file: record " + std::to_string(p.index) + " has a non-finite value");
        const WaveVector k = round_shift({p.kx, p.ky});
        if (!on_grid(k, n, ms.config.aperture_radius)) {
            std::ostringstream os;
            os << "prediction file: record " << p.index << " value (" << p.kx << ", " << p.ky
               << ") outside the on-grid bound " << max_on_grid_shift(n, ms.config.aperture_radius);
            throw ValidationError(os.str());
        }
        slots[p.index] = k;
    }
    std::vector<std::size_t> missing;
    for (std::size_t j = 0; j < records; ++j)
        if (!slots[j]) missing.push_back(j);
    if (!missing.empty()) {
        std::ostringstream os;
        os << "missing indices: [";
        for (std::size_t i = 0; i < missing.size(); ++i) os << (i ? ", " : "") << missing[i];
        os << "]";
        throw ValidationError(os.str());
    }
    KSpaceEstimate est;
    est.provenance = Provenance::external;
    for (auto& s : slots) est.shifts.push_back(*s);
    return est;
}

inline KSpaceEstimate load_predictions(const fs::path& path, const MeasurementSet& ms)
{
    return estimate_from_predictions(parse_predictions(read_json_file(path)), ms);
}

}  // namespace isafp
