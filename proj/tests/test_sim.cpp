#include <gtest/gtest.h>

#include "isafp/dataset_io.hpp"
#include "isafp/sim.hpp"
#include "test_util.hpp"

using namespace isafp;
using namespace isafp::test;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("isafp_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

OpticalConfig small_config()
{
    OpticalConfig cfg;
    cfg.grid_size = 64;
    cfg.aperture_radius = 8;
    cfg.pixel_pitch = 100.0 / 64.0;
    return cfg;
}

}  // namespace

TEST(Target, Extremes)
{
    const GrayImage white = GrayImage::filled(10, 7, 1.0);
    const GrayImage black = GrayImage::filled(3, 3, 0.0);
    const ComplexField a = build_complex_target({white, black, std::numbers::pi / 4}, 16);
    for (const auto& v : a.data) EXPECT_EQ(v, cplx(1.0, 0.0));
    const ComplexField b = build_complex_target({white, white, std::numbers::pi / 4}, 16);
    for (const auto& v : b.data) EXPECT_NEAR(std::abs(v - std::polar(1.0, std::numbers::pi / 4)), 0.0, 1e-15);
    const ComplexField c = build_complex_target({black, white, std::numbers::pi / 4}, 16);
    for (const auto& v : c.data) EXPECT_EQ(std::abs(v), 0.0);
    EXPECT_THROW(build_complex_target({GrayImage{}, white, 1.0}, 16), ValidationError);
}

TEST(Target, RangesOnNaturalImage)
{
    const ComplexField t = camera_target(128);
    for (const auto& v : t.data) {
        EXPECT_GE(std::abs(v), 0.0);
        EXPECT_LE(std::abs(v), 1.0 + 1e-15);
        if (std::abs(v) > 0) {
            EXPECT_GE(std::arg(v), -1e-15);
            EXPECT_LE(std::arg(v), std::numbers::pi / 4 + 1e-15);
        }
    }
}

TEST(Resize, BilinearIdentityAndConstant)
{
    GrayImage g{4, 4, {}};
    for (int i = 0; i < 16; ++i) g.pixels.push_back(i / 15.0);
    const RealRaster same = resize_bilinear(g, 4);
    for (std::size_t i = 0; i < 16; ++i) EXPECT_DOUBLE_EQ(same[i], g.pixels[i]);
    const RealRaster up = resize_bilinear(GrayImage::filled(5, 9, 0.3), 8);
    for (double v : up) EXPECT_DOUBLE_EQ(v, 0.3);
}

TEST(Grid, Shapes)
{
    const AngleGrid one = generate_rotation_grid(1, 1, 1e-4);
    ASSERT_EQ(one.angles.size(), 1u);
    EXPECT_EQ(one.angles[0], (RotationAngle{0, 0}));

    const AngleGrid scan = generate_rotation_grid(3, 1, 1e-4);
    EXPECT_EQ(scan.layout, GridLayout::axis_scan_x);
    ASSERT_EQ(scan.angles.size(), 3u);
    EXPECT_EQ(scan.angles[0], (RotationAngle{-1e-4, 0}));
    EXPECT_EQ(scan.angles[1], (RotationAngle{0, 0}));
    EXPECT_EQ(scan.angles[2], (RotationAngle{1e-4, 0}));
}

TEST(Grid, PaperGridIsRegularAndSymmetric)
{
    const double theta = 9e-6 * std::numbers::pi / 180.0;
    const AngleGrid g = generate_rotation_grid(11, 11, theta);
    ASSERT_EQ(g.angles.size(), 121u);
    EXPECT_EQ(g.layout, GridLayout::grid);
    EXPECT_EQ(g.angles[60], (RotationAngle{0, 0}));
    for (std::size_t j = 0; j < 121; ++j) {
        EXPECT_EQ(g.angles[j].theta_x, -g.angles[120 - j].theta_x);
        EXPECT_EQ(g.angles[j].theta_y, -g.angles[120 - j].theta_y);
    }
    const double step = g.angles[1].theta_x - g.angles[0].theta_x;
    for (std::size_t i = 1; i < 11; ++i)
        EXPECT_NEAR(g.angles[i].theta_x - g.angles[i - 1].theta_x, step, 1e-22);
    const OpticalConfig cfg;
    EXPECT_NEAR(rotation_to_pixel_shift(g.angles[120], cfg).kx, 59.05249348852995, 1e-10);
}

TEST(Noise, NoneAndZeroSigmaAreIdentity)
{
    const RealRaster r = random_real(16, 1);
    EXPECT_EQ(add_noise(r, {}), r);
    EXPECT_EQ(add_noise(r, NoiseSpec::gaussian_relative(0.0, 3)), r);
}

TEST(Noise, DeterministicAndNonNegative)
{
    const RealRaster r = random_real(32, 2);
    const NoiseSpec g = NoiseSpec::gaussian_relative(0.5, 42);
    const RealRaster a = add_noise(r, g, 7);
    EXPECT_EQ(a, add_noise(r, g, 7));
    EXPECT_NE(a, add_noise(r, g, 8));
    for (double v : a) EXPECT_GE(v, 0.0);
}

TEST(Noise, PoissonMeanAtHighCount)
{
    const RealRaster r(128, 0.37);
    const RealRaster a = add_noise(r, NoiseSpec::poisson_peak(1e6, 5));
    double mean = 0.0;
    for (double v : a) mean += v;
    mean /= double(a.count());
    EXPECT_LT(std::abs(mean - 0.37) / 0.37, 0.01);
}

TEST(Noise, InvalidParameters)
{
    EXPECT_THROW(add_noise(RealRaster(4, 1.0), NoiseSpec::gaussian_relative(-1, 0)), ValidationError);
    EXPECT_THROW(add_noise(RealRaster(4, 1.0), NoiseSpec::poisson_peak(0, 0)), ValidationError);
}

TEST(Synthesize, ZeroTarget)
{
    const OpticalConfig cfg = small_config();
    const MeasurementSet ms = synthesize_dataset(ComplexField(64, Domain::spatial), generate_rotation_grid(3, 3, 2e-8),
                                                 cfg, {});
    for (const auto& r : ms.records) {
        for (double v : r.image_intensity) EXPECT_EQ(v, 0.0);
        for (double v : r.pupil_intensity) EXPECT_EQ(v, 0.0);
    }
}

TEST(Synthesize, CentreRecordIsLowPass)
{
    const OpticalConfig cfg = small_config();
    const ComplexField target = camera_target(64);
    const MeasurementSet ms = synthesize_dataset(target, generate_rotation_grid(1, 1, 0.0), cfg, {});
    ASSERT_EQ(ms.size(), 1u);
    EXPECT_EQ(*ms.records[0].true_k, (WaveVector{0, 0}));
    ComplexField spec = fft_centered(*ms.truth);
    const PupilMask m = make_circular_mask(cfg.aperture_radius, 64);
    for (std::size_t i = 0; i < spec.data.count(); ++i) spec[i] *= m.mask[i];
    const ComplexField low = ifft_centered(spec);
    for (std::size_t i = 0; i < low.data.count(); ++i)
        EXPECT_NEAR(ms.records[0].image_intensity[i], std::norm(low[i]), 1e-6 * std::max(1.0, std::norm(low[i])));
}

TEST(Synthesize, RecordOrderAndShifts)
{
    const OpticalConfig cfg = small_config();
    const double theta = pixel_shift_to_rotation(PixelShift{20, 20}, cfg).theta_x;
    const MeasurementSet ms = synthesize_dataset(camera_target(64), generate_rotation_grid(3, 2, theta), cfg, {});
    ASSERT_EQ(ms.size(), 6u);
    const WaveVector expect[] = {{-20, -20}, {0, -20}, {20, -20}, {-20, 20}, {0, 20}, {20, 20}};
    for (std::size_t j = 0; j < 6; ++j) {
        EXPECT_EQ(ms.records[j].index, j);
        EXPECT_EQ(*ms.records[j].true_k, expect[j]);
    }
}

TEST(Synthesize, OffGridAngleNamed)
{
    const OpticalConfig cfg = small_config();
    const double theta = pixel_shift_to_rotation(PixelShift{30, 30}, cfg).theta_x;
    try {
        synthesize_dataset(camera_target(64), generate_rotation_grid(3, 3, theta), cfg, {});
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("angle"), std::string::npos);
    }
}

TEST(Synthesize, DeterministicAndResimulable)
{
    const OpticalConfig cfg = small_config();
    const ComplexField t = camera_target(64);
    const AngleGrid g = generate_rotation_grid(3, 3, pixel_shift_to_rotation(PixelShift{10, 10}, cfg).theta_x);
    const MeasurementSet a = synthesize_dataset(t, g, cfg, NoiseSpec::poisson_peak(1e4, 9));
    const MeasurementSet b = synthesize_dataset(t, g, cfg, NoiseSpec::poisson_peak(1e4, 9));
    for (std::size_t j = 0; j < a.size(); ++j) {
        EXPECT_EQ(a.records[j].image_intensity, b.records[j].image_intensity);
        EXPECT_EQ(a.records[j].pupil_intensity, b.records[j].pupil_intensity);
    }

    const MeasurementSet clean = synthesize_dataset(t, g, cfg, {});
    const ComplexField spec = fft_centered(*clean.truth);
    const PupilMask m = make_circular_mask(cfg.aperture_radius, 64);
    for (const auto& r : clean.records) {
        RealRaster img = simulate_image_intensity(spec, m, *r.true_k);
        RealRaster pup = simulate_pupil_intensity(spec, m, *r.true_k);
        quantize_to_float(img);
        quantize_to_float(pup);
        EXPECT_EQ(img, r.image_intensity);
        EXPECT_EQ(pup, r.pupil_intensity);
    }
}

TEST(Synthesize, PupilSupportAtTrueShift)
{
    const OpticalConfig cfg = small_config();
    const MeasurementSet ms = synthesize_dataset(
        camera_target(64), generate_rotation_grid(3, 3, pixel_shift_to_rotation(PixelShift{12, 12}, cfg).theta_x), cfg,
        {});
    for (const auto& r : ms.records) {
        for (std::size_t row = 0; row < 64; ++row)
            for (std::size_t col = 0; col < 64; ++col) {
                const double dx = double(col) - 32.0 - r.true_k->kx;
                const double dy = double(row) - 32.0 - r.true_k->ky;
                if (dx * dx + dy * dy > cfg.aperture_radius * cfg.aperture_radius) {
                    EXPECT_EQ(r.pupil_intensity(row, col), 0.0);
                }
            }
    }
}

TEST(Synthesize, DefaultSceneOverlapGeometry)
{
    const OpticalConfig cfg;
    const double theta = 9e-6 * std::numbers::pi / 180.0;
    const MeasurementSet ms = synthesize_dataset(camera_target(256), generate_rotation_grid(11, 11, theta), cfg, {});
    ASSERT_EQ(ms.size(), 121u);
    int kmax = 0;
    for (const auto& r : ms.records) kmax = std::max({kmax, std::abs(r.true_k->kx), std::abs(r.true_k->ky)});
    EXPECT_EQ(kmax, 59);
}

TEST(DatasetIo, BitExactRoundTrip)
{
    const OpticalConfig cfg = small_config();
    const MeasurementSet ms = synthesize_dataset(
        camera_target(64), generate_rotation_grid(3, 3, pixel_shift_to_rotation(PixelShift{10, 10}, cfg).theta_x), cfg,
        NoiseSpec::gaussian_relative(0.01, 3));
    const fs::path dir = scratch("roundtrip");
    write_dataset(ms, dir);
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
    const MeasurementSet back = read_dataset(dir);
    EXPECT_EQ(back.config.grid_size, cfg.grid_size);
    EXPECT_EQ(back.config.aperture_radius, cfg.aperture_radius);
    EXPECT_EQ(back.config.wavelength, cfg.wavelength);
    EXPECT_EQ(back.config.pixel_pitch, cfg.pixel_pitch);
    EXPECT_EQ(back.noise.kind, NoiseKind::gaussian);
    EXPECT_EQ(back.noise.seed, 3u);
    EXPECT_EQ(back.layout, GridLayout::grid);
    ASSERT_EQ(back.size(), ms.size());
    for (std::size_t j = 0; j < ms.size(); ++j) {
        EXPECT_EQ(back.records[j].angle, ms.records[j].angle);
        EXPECT_EQ(back.records[j].true_k, ms.records[j].true_k);
        EXPECT_EQ(back.records[j].image_intensity, ms.records[j].image_intensity);
        EXPECT_EQ(back.records[j].pupil_intensity, ms.records[j].pupil_intensity);
    }
    ASSERT_TRUE(back.truth.has_value());
    EXPECT_EQ(back.truth->data, ms.truth->data);
    fs::remove_all(dir);
}

TEST(DatasetIo, RawFilesAreLittleEndianFloat32)
{
    const fs::path dir = scratch("raw");
    fs::create_directories(dir);
    RealRaster r(2, 0.0);
    r[0] = 1.0;
    r[3] = -2.5;
    write_f32(dir / "x.f32", r);
    EXPECT_EQ(fs::file_size(dir / "x.f32"), 16u);
    std::ifstream in(dir / "x.f32", std::ios::binary);
    unsigned char bytes[16];
    in.read(reinterpret_cast<char*>(bytes), 16);
    const unsigned char one[4] = {0x00, 0x00, 0x80, 0x3f};
    const unsigned char neg[4] = {0x00, 0x00, 0x20, 0xc0};
    EXPECT_EQ(std::memcmp(bytes, one, 4), 0);
    EXPECT_EQ(std::memcmp(bytes + 12, neg, 4), 0);
    EXPECT_THROW(read_f32(dir / "x.f32", 3), IoError);
    fs::remove_all(dir);
}

TEST(DatasetIo, MissingOrCorrupt)
{
    const fs::path dir = scratch("corrupt");
    EXPECT_THROW(read_dataset(dir), IoError);
    fs::create_directories(dir);
    write_text_file(dir / "manifest.json", "{not json");
    EXPECT_THROW(read_dataset(dir), IoError);
    fs::remove_all(dir);
}

TEST(DatasetIo, FailedWriteLeavesNoDirectory)
{
    const fs::path dir = scratch("partial");
    {
        StagedDirectory staged(dir);
        write_text_file(staged.path() / "a.txt", "x");
    }
    EXPECT_FALSE(fs::exists(dir));
    for (const auto& e : fs::directory_iterator(dir.parent_path()))
        EXPECT_EQ(e.path().filename().string().find("." + dir.filename().string() + ".tmp"), std::string::npos);
}
