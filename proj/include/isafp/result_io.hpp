#pragma once

#include <string>

#include "isafp/fft.hpp"
#include "isafp/json_io.hpp"
#include "isafp/metrics.hpp"
#include "isafp/solver.hpp"

namespace isafp {

inline constexpr const char* kResultName = "result.json";

inline json to_json(const SolverParams& p)
{
    return {{"iterations", p.iterations},   {"beta", p.beta},       {"gamma", p.gamma},
            {"delta_max", p.delta_max},     {"delta_min", p.delta_min}, {"search_every", p.search_every},
            {"epsilon", p.epsilon},         {"use_pupil_constraint", p.use_pupil_constraint}};
}

inline SolverParams solver_params_from_json(const json& j)
{
    SolverParams p;
    p.iterations = j.at("iterations").get<std::size_t>();
    p.beta = j.at("beta").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.delta_max = j.at("delta_max").get<int>();
    p.delta_min = j.at("delta_min").get<int>();
    p.search_every = j.at("search_every").get<std::size_t>();
    p.epsilon = j.at("epsilon").get<double>();
    p.use_pupil_constraint = j.at("use_pupil_constraint").get<bool>();
    return p;
}

inline json to_json(const KSpaceEstimate& k)
{
    json shifts = json::array();
    for (WaveVector v : k.shifts) shifts.push_back({v.kx, v.ky});
    return {{"provenance", to_string(k.provenance)}, {"shifts", shifts}, {"warnings", k.warnings}};
}

inline KSpaceEstimate kspace_estimate_from_json(const json& j)
{
    KSpaceEstimate k;
    k.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    for (const json& s : j.at("shifts")) k.shifts.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
    if (j.contains("warnings")) k.warnings = j.at("warnings").get<std::vector<std::string>>();
    return k;
}

/// Result directory: result.json plus amplitude, phase and spectrum rasters.
inline void write_result(const ReconstructionResult& r, const fs::path& dir)
{
    const std::size_t n = r.spectrum.size();
    StagedDirectory staged(dir);
    RealRaster re(n), im(n);
    for (std::size_t i = 0; i < re.count(); ++i) {
        re[i] = r.spectrum[i].real();
        im[i] = r.spectrum[i].imag();
    }
    write_f32(staged.path() / "amplitude.f32", amplitude(r.object.data));
    write_f32(staged.path() / "phase.f32", phase(r.object.data));
    write_f32(staged.path() / "spectrum_re.f32", re);
    write_f32(staged.path() / "spectrum_im.f32", im);

    json trace = json::array();
    for (const auto& l : r.loss_trace) trace.push_back({{"data", l.data}, {"tv", l.tv}, {"phase", l.phase}});
    json doc = {{"format", "isafp-result"},
                {"version", 1},
                {"grid_size", n},
                {"params", to_json(r.params)},
                {"initial_k", to_json(r.initial_k)},
                {"corrected_k", to_json(r.corrected_k)},
                {"loss_trace", trace},
                {"files",
                 {{"amplitude", "amplitude.f32"},
                  {"phase", "phase.f32"},
                  {"spectrum_re", "spectrum_re.f32"},
                  {"spectrum_im", "spectrum_im.f32"}}}};
    write_text_file(staged.path() / kResultName, doc.dump(2) + "\n");
    staged.commit();
}

/// Reads a result directory. The object is rebuilt from the stored spectrum.
inline ReconstructionResult read_result(const fs::path& dir)
{
    const fs::path path = dir / kResultName;
    if (!fs::exists(path)) throw IoError("no " + std::string(kResultName) + " in " + dir.string());
    const json doc = read_json_file(path);
    ReconstructionResult r;
    try {
        const std::size_t n = doc.at("grid_size").get<std::size_t>();
        require_grid_size(n, "result");
        r.params = solver_params_from_json(doc.at("params"));
        r.initial_k = kspace_estimate_from_json(doc.at("initial_k"));
        r.corrected_k = kspace_estimate_from_json(doc.at("corrected_k"));
        for (const json& l : doc.at("loss_trace"))
            r.loss_trace.push_back({l.at("data").get<double>(), l.at("tv").get<double>(), l.at("phase").get<double>()});
        const RealRaster re = read_f32(dir / "spectrum_re.f32", n);
        const RealRaster im = read_f32(dir / "spectrum_im.f32", n);
        r.spectrum = ComplexField(n, Domain::frequency);
        for (std::size_t i = 0; i < re.count(); ++i) r.spectrum[i] = {re[i], im[i]};
    } catch (const json::exception& e) {
        throw IoError("invalid " + std::string(kResultName) + " in " + dir.string() + ": " + e.what());
    }
    r.object = ifft_centered(r.spectrum);
    return r;
}

inline json to_json(const EvalReport& e)
{
    return {{"amplitude_rmse", e.amplitude_rmse},
            {"phase_rmse", e.phase_rmse},
            {"phase_rmse_masked", e.phase_rmse_masked},
            {"k_rmse", e.k_rmse},
            {"per_record_k_error", e.per_record_k_error},
            {"overlap_fraction", e.overlap_fraction}};
}

}  // namespace isafp
