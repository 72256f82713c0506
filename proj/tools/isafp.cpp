// isafp: simulate, reconstruct, evaluate and plot inverse synthetic aperture
// Fourier ptychography data sets.

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "isafp/dataset_io.hpp"
#include "isafp/init.hpp"
#include "isafp/metrics.hpp"
#include "isafp/plot.hpp"
#include "isafp/png.hpp"
#include "isafp/result_io.hpp"
#include "isafp/solver.hpp"

using namespace isafp;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct SimulateArgs {
    std::string target;
    std::string phase_target;
    std::string grid = "11x11";
    std::optional<double> theta_max;
    std::optional<double> theta_max_deg;
    std::optional<double> kmax;
    std::size_t n = 256;
    double radius = 16.0;
    double wavelength = 532e-9;
    double fov = 100.0;
    double phase_max = std::numbers::pi / 4.0;
    std::string noise = "none";
    std::uint64_t seed = 0;
    std::string out;
};

struct ReconstructArgs {
    std::string dataset;
    std::string init = "pupil-support";
    std::size_t iters = 100;
    double beta = 1e-1;
    double gamma = 1e-3;
    int dmax = 9;
    int dmin = 1;
    std::size_t search_every = 10;
    double epsilon = 1e-8;
    bool pupil_constraint = false;
    int coarse_stride = 2;
    std::optional<int> coarse_bound;
    std::string out;
};

struct EvaluateArgs {
    std::string result;
    std::string dataset;
    std::string truth_result;
    bool json = false;
    std::string out;
};

struct PlotArgs {
    std::string result;
    std::string dataset;
    bool no_truth = false;
    std::string out;
};

std::pair<std::size_t, std::size_t> parse_grid(const std::string& s)
{
    std::size_t nx = 0, ny = 0;
    char x = 0, extra = 0;
    if (std::sscanf(s.c_str(), "%zu%c%zu%c", &nx, &x, &ny, &extra) != 3 || (x != 'x' && x != 'X'))
        throw ValidationError("--grid expects NXxNY, got '" + s + "'");
    return {nx, ny};
}

NoiseSpec parse_noise(const std::string& s, std::uint64_t seed)
{
    if (s == "none") return {NoiseKind::none, 0.0, 0.0, seed};
    const auto colon = s.find(':');
    const std::string kind = s.substr(0, colon);
    double value = 0.0;
    try {
        if (colon == std::string::npos) throw std::invalid_argument("no value");
        std::size_t used = 0;
        value = std::stod(s.substr(colon + 1), &used);
        if (used != s.size() - colon - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw ValidationError("--noise expects none, gaussian:SIGMA or poisson:PEAK, got '" + s + "'");
    }
    if (kind == "gaussian") return NoiseSpec::gaussian_relative(value, seed);
    if (kind == "poisson") return NoiseSpec::poisson_peak(value, seed);
    throw ValidationError("unknown noise model '" + kind + "'");
}

// Neighbour spacing in pixels implied by the rotation grid, before rounding.
std::optional<double> nominal_spacing(const MeasurementSet& ms)
{
    if (ms.records.size() < 2) return std::nullopt;
    const RotationAngle a = ms.records[0].angle;
    const RotationAngle b = ms.records[1].angle;
    const PixelShift d = rotation_to_pixel_shift({b.theta_x - a.theta_x, b.theta_y - a.theta_y}, ms.config);
    const double spacing = std::hypot(d.kx, d.ky);
    if (!(spacing > 0.0)) return std::nullopt;
    return spacing;
}

double nominal_overlap(const MeasurementSet& ms)
{
    const auto spacing = nominal_spacing(ms);
    return spacing ? overlap_fraction(*spacing, ms.config.aperture_radius) : 0.0;
}

int cmd_simulate(const SimulateArgs& a)
{
    OpticalConfig cfg;
    cfg.wavelength = a.wavelength;
    cfg.grid_size = a.n;
    cfg.aperture_radius = a.radius;
    cfg.pixel_pitch = a.fov / static_cast<double>(a.n);
    cfg.validate();

    double theta = 9e-6 * std::numbers::pi / 180.0;
    if (a.theta_max) theta = *a.theta_max;
    if (a.theta_max_deg) theta = *a.theta_max_deg * std::numbers::pi / 180.0;
    if (a.kmax) theta = pixel_shift_to_rotation(PixelShift{*a.kmax, *a.kmax}, cfg).theta_x;

    const auto [nx, ny] = parse_grid(a.grid);
    const NoiseSpec noise = parse_noise(a.noise, a.seed);
    noise.validate();
    const AngleGrid grid = generate_rotation_grid(nx, ny, theta);

    const GrayImage amp = read_gray_image(a.target);
    const GrayImage ph = a.phase_target.empty() ? amp : read_gray_image(a.phase_target);
    const ComplexField target = build_complex_target({amp, ph, a.phase_max}, cfg.grid_size);

    const MeasurementSet ms = synthesize_dataset(target, grid, cfg, noise);
    write_dataset(ms, a.out);

    double kmax = 0.0;
    for (const auto& r : ms.records) kmax = std::max(kmax, std::hypot(r.true_k->kx, r.true_k->ky));
    std::cout << "records          " << ms.size() << "\n"
              << "max |true_k| px  " << kmax << "\n";
    if (nominal_spacing(ms))
        std::cout << "overlap          " << std::setprecision(4) << nominal_overlap(ms) << "\n";
    else
        std::cout << "overlap          n/a\n";
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

KSpaceEstimate initial_estimate(const ReconstructArgs& a, const MeasurementSet& ms)
{
    if (a.init == "ground-truth") return ground_truth_init(ms);
    if (a.init == "pupil-support") return pupil_support_init(ms);
    if (a.init == "coarse") {
        const int bound = a.coarse_bound.value_or(max_on_grid_shift(ms.config.grid_size, ms.config.aperture_radius));
        return coarse_misfit_init(ms, a.coarse_stride, bound);
    }
    if (a.init.rfind("file:", 0) == 0) {
        const fs::path path = a.init.substr(5);
        if (!fs::exists(path)) throw IoError("prediction file not found: " + path.string());
        return load_predictions(path, ms);
    }
    throw ValidationError("unknown initializer '" + a.init + "' (ground-truth, pupil-support, coarse, file:PATH)");
}

int cmd_reconstruct(const ReconstructArgs& a)
{
    SolverParams p;
    p.iterations = a.iters;
    p.beta = a.beta;
    p.gamma = a.gamma;
    p.delta_max = a.dmax;
    p.delta_min = a.dmin;
    p.search_every = a.search_every;
    p.epsilon = a.epsilon;
    p.use_pupil_constraint = a.pupil_constraint;
    p.validate();

    const MeasurementSet ms = read_dataset(a.dataset);
    const KSpaceEstimate init = initial_estimate(a, ms);
    for (const auto& w : init.warnings) std::cerr << "warning: " << w << "\n";

    const ReconstructionResult r = reconstruct(ms, init, p);
    write_result(r, a.out);

    std::size_t changed = 0;
    for (std::size_t j = 0; j < r.corrected_k.size(); ++j)
        changed += !(r.corrected_k.shifts[j] == r.initial_k.shifts[j]);
    const LossTerms& last = r.loss_trace.back();
    std::cout << std::setprecision(6) << "initializer      " << to_string(init.provenance) << "\n"
              << "final L_data     " << last.data << "\n"
              << "final L_TV       " << last.tv << "\n"
              << "final L_phase    " << last.phase << "\n"
              << "k corrected      " << changed << " of " << r.corrected_k.size() << "\n"
              << "wrote " << a.out << "\n";
    return 0;
}

int cmd_evaluate(const EvaluateArgs& a)
{
    if (a.dataset.empty() == a.truth_result.empty())
        throw ValidationError("evaluate needs exactly one of --dataset or --truth-result");
    const ReconstructionResult r = read_result(a.result);

    EvalReport report;
    if (!a.dataset.empty()) {
        const MeasurementSet ms = read_dataset(a.dataset);
        if (!ms.truth) throw ValidationError("dataset " + a.dataset + " carries no ground truth");
        std::optional<KSpaceEstimate> truth_k;
        if (ms.synthetic()) truth_k = ground_truth_init(ms);
        report = evaluate(r.object, *ms.truth, r.corrected_k, truth_k, nominal_overlap(ms));
    } else {
        const ReconstructionResult ref = read_result(a.truth_result);
        report = evaluate(r.object, ref.object, r.corrected_k, ref.corrected_k, 0.0);
    }

    const json doc = to_json(report);
    if (!a.out.empty()) write_text_file(a.out, doc.dump(2) + "\n");
    if (a.json) {
        std::cout << doc.dump(2) << "\n";
        return 0;
    }
    std::cout << std::setprecision(6) << "amplitude_rmse     " << report.amplitude_rmse << "\n"
              << "phase_rmse         " << report.phase_rmse << "\n"
              << "phase_rmse_masked  " << report.phase_rmse_masked << "\n"
              << "k_rmse             " << report.k_rmse << "\n"
              << "overlap_fraction   " << report.overlap_fraction << "\n";
    return 0;
}

int cmd_plot(const PlotArgs& a)
{
    const ReconstructionResult r = read_result(a.result);
    const std::size_t n = r.spectrum.size();
    std::optional<MeasurementSet> ms;
    if (!a.dataset.empty()) ms = read_dataset(a.dataset);

    const fs::path out = a.out.empty() ? fs::path(a.result) : fs::path(a.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

    write_png_gray(out / "amplitude.png", n, n, to_gray8(amplitude(r.object.data)));

    double offset = 0.0;
    if (ms && ms->truth) offset = phase_offset(r.object, *ms->truth);
    write_png_rgb(out / "phase.png", phase_to_rgb(phase(r.object.data), offset));

    std::vector<ScatterSeries> series{{r.initial_k.shifts, {150, 150, 150}, Marker::square},
                                      {r.corrected_k.shifts, {30, 90, 220}, Marker::disc}};
    if (!a.no_truth && ms && ms->synthetic())
        series.push_back({ground_truth_init(*ms).shifts, {220, 40, 40}, Marker::cross});
    write_png_rgb(out / "kspace.png", kspace_scatter(series, n));

    std::cout << "wrote amplitude.png, phase.png, kspace.png to " << out.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Inverse synthetic aperture Fourier ptychography"};
    app.require_subcommand(1);

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Synthesize a dual-plane measurement set");
    sim->add_option("--target", sa.target, "Amplitude source (8-bit PNG or raw .f32)")->required();
    sim->add_option("--phase-target", sa.phase_target, "Phase source (defaults to --target)");
    sim->add_option("--grid", sa.grid, "Rotation grid NXxNY")->capture_default_str();
    auto* t_rad = sim->add_option("--theta-max", sa.theta_max, "Largest rotation, radians");
    auto* t_deg = sim->add_option("--theta-max-deg", sa.theta_max_deg, "Largest rotation, degrees");
    auto* t_px = sim->add_option("--kmax", sa.kmax, "Largest spectrum shift, pixels");
    t_rad->excludes(t_deg, t_px);
    t_deg->excludes(t_px);
    sim->add_option("--n", sa.n, "Grid size")->capture_default_str();
    sim->add_option("--radius", sa.radius, "Aperture radius, pixels")->capture_default_str();
    sim->add_option("--wavelength", sa.wavelength, "Wavelength, metres")->capture_default_str();
    sim->add_option("--fov", sa.fov, "Target width, metres")->capture_default_str();
    sim->add_option("--phase-max", sa.phase_max, "Phase at source value 1, radians")->capture_default_str();
    sim->add_option("--noise", sa.noise, "none | gaussian:SIGMA | poisson:PEAK")->capture_default_str();
    sim->add_option("--seed", sa.seed, "Noise seed")->capture_default_str();
    sim->add_option("--out", sa.out, "Output dataset directory")->required();

    ReconstructArgs ra;
    auto* rec = app.add_subcommand("reconstruct", "Recover the object spectrum and k shifts");
    rec->add_option("dataset", ra.dataset, "Dataset directory")->required();
    rec->add_option("--init", ra.init, "ground-truth | pupil-support | coarse | file:PATH")->capture_default_str();
    rec->add_option("--iters", ra.iters)->capture_default_str();
    rec->add_option("--beta", ra.beta, "TV weight")->capture_default_str();
    rec->add_option("--gamma", ra.gamma, "Phase weight")->capture_default_str();
    rec->add_option("--dmax", ra.dmax, "Initial search radius")->capture_default_str();
    rec->add_option("--dmin", ra.dmin, "Final search radius")->capture_default_str();
    rec->add_option("--search-every", ra.search_every)->capture_default_str();
    rec->add_option("--epsilon", ra.epsilon)->capture_default_str();
    rec->add_flag("--pupil-constraint", ra.pupil_constraint, "Also enforce the pupil-plane intensity");
    rec->add_option("--coarse-stride", ra.coarse_stride, "Candidate stride for --init coarse")->capture_default_str();
    rec->add_option("--coarse-bound", ra.coarse_bound, "Largest |k| component for --init coarse");
    rec->add_option("--out", ra.out, "Output result directory")->required();

    EvaluateArgs ea;
    auto* ev = app.add_subcommand("evaluate", "Score a result against ground truth");
    ev->add_option("result", ea.result, "Result directory")->required();
    ev->add_option("--dataset", ea.dataset, "Synthetic dataset holding the truth");
    ev->add_option("--truth-result", ea.truth_result, "Another result used as truth");
    ev->add_flag("--json", ea.json, "Print the report as JSON");
    ev->add_option("--out", ea.out, "Also write the JSON report here");

    PlotArgs pa;
    auto* pl = app.add_subcommand("plot", "Write amplitude, phase and k-space PNGs");
    pl->add_option("result", pa.result, "Result directory")->required();
    pl->add_option("--dataset", pa.dataset, "Dataset for truth overlays");
    pl->add_flag("--no-truth", pa.no_truth, "Omit the true k series");
    pl->add_option("--out", pa.out, "Output directory (defaults to the result directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*sim) return cmd_simulate(sa);
        if (*rec) return cmd_reconstruct(ra);
        if (*ev) return cmd_evaluate(ea);
        if (*pl) return cmd_plot(pa);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitValidation;
}
