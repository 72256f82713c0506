#include <gtest/gtest.h>

#include "isafp/projection.hpp"
#include "isafp/metrics.hpp"
#include "test_util.hpp"

using namespace isafp;
using namespace isafp::test;

TEST(ImageProjection, FullPassIsInverseTransform)
{
    const ComplexField O(random_complex(16, 1), Domain::frequency);
    const ComplexField psi = image_projection(O, PupilMask::full_pass(16), {0, 0});
    EXPECT_EQ(psi.domain, Domain::spatial);
    EXPECT_LT(max_abs_diff(psi.data, ifft_centered(O).data), 1e-15);
}

TEST(ImageProjection, DcImpulseGivesConstant)
{
    ComplexField O(32, Domain::frequency);
    O(16, 16) = 32.0;
    const ComplexField psi = image_projection(O, make_circular_mask(5, 32), {0, 0});
    for (const auto& v : psi.data) EXPECT_NEAR(std::abs(v - cplx(1.0, 0.0)), 0.0, 1e-14);
}

TEST(ImageProjection, EnergyOfMaskedWindow)
{
    const ComplexField O(random_complex(32, 2), Domain::frequency);
    const PupilMask m = make_circular_mask(6, 32);
    const WaveVector k{4, -3};
    const ComplexField psi = image_projection(O, m, k);
    double window = 0.0;
    for (std::size_t idx : m.support) {
        const std::size_t r = idx / 32, c = idx % 32;
        window += std::norm(O(wrap_index(std::ptrdiff_t(r) + k.ky, 32), wrap_index(std::ptrdiff_t(c) + k.kx, 32)));
    }
    EXPECT_LT(std::abs(energy(psi) - window) / window, 1e-12);
    EXPECT_LE(energy(psi), energy(O));
}

TEST(ImageConstraint, Contract)
{
    const ComplexField psi(random_complex(8, 3), Domain::spatial);
    const ComplexField same = apply_image_constraint(psi, intensity(psi.data), 1e-8);
    EXPECT_LT(max_abs_diff(same.data, psi.data) / max_abs(psi.data), 1e-10);

    ComplexField unit(8, Domain::spatial);
    for (std::size_t i = 0; i < unit.data.count(); ++i) unit[i] = std::polar(1.0, 0.1 * double(i));
    const ComplexField scaled = apply_image_constraint(unit, RealRaster(8, 4.0), 1e-8);
    for (std::size_t i = 0; i < unit.data.count(); ++i) EXPECT_NEAR(std::abs(scaled[i] - 2.0 * unit[i]), 0.0, 1e-14);

    const ComplexField zero = apply_image_constraint(ComplexField(8, Domain::spatial), RealRaster(8, 1.0), 1e-8);
    for (const auto& v : zero.data) EXPECT_EQ(v, cplx(1.0, 0.0));

    EXPECT_THROW(apply_image_constraint(psi, RealRaster(4, 1.0), 1e-8), ValidationError);
}

TEST(PupilConstraint, Contract)
{
    const ComplexField P(random_complex(8, 4), Domain::frequency);
    const ComplexField same = apply_pupil_constraint(P, intensity(P.data), 1e-8);
    EXPECT_LT(max_abs_diff(same.data, P.data) / max_abs(P.data), 1e-10);
    const ComplexField z = apply_pupil_constraint(ComplexField(8, Domain::frequency), RealRaster(8, 0.0), 1e-8);
    for (const auto& v : z.data) EXPECT_EQ(v, cplx(0.0, 0.0));
}

TEST(StepSize, SingleAndDisjointApertures)
{
    const PupilMask m = make_circular_mask(5, 64);
    const WaveVector one[] = {{0, 0}};
    EXPECT_EQ(step_size_alpha(m, one), m.mask);

    const WaveVector two[] = {{-15, 0}, {15, 0}};
    const RealRaster a = step_size_alpha(m, two);
    std::size_t ones = 0;
    for (double v : a) {
        EXPECT_TRUE(v == 0.0 || v == 1.0);
        ones += v == 1.0;
    }
    EXPECT_EQ(ones, 2 * m.support.size());
    EXPECT_THROW(step_size_alpha(m, std::span<const WaveVector>{}), ValidationError);
}

TEST(StepSize, OverlappingPairCountsTwoOnLens)
{
    // Spacing 12 with r = 16 is the default scene's ≈54% neighbour overlap.
    const PupilMask m = make_circular_mask(16, 256);
    const WaveVector pair[] = {{0, 0}, {12, 0}};
    const RealRaster a = step_size_alpha(m, pair);
    std::size_t twos = 0;
    for (double v : a) twos += v == 2.0;
    // Lens pixel count from the same disk inequality, counted independently.
    std::size_t lens = 0;
    for (int y = -20; y <= 20; ++y)
        for (int x = -20; x <= 32; ++x)
            lens += (x * x + y * y <= 256) && ((x - 12) * (x - 12) + y * y <= 256);
    EXPECT_EQ(twos, lens);
    EXPECT_NEAR(double(twos) / double(m.support.size()), overlap_fraction(12, 16), 0.02);
    EXPECT_NEAR(overlap_fraction_pixels(m, pair[0], pair[1]), double(lens) / double(m.support.size()), 1e-15);
}

TEST(StepSize, ClipKeepsSupport)
{
    const PupilMask m = make_circular_mask(16, 256);
    const WaveVector pair[] = {{0, 0}, {12, 0}};
    const RealRaster a = clip_step_size(step_size_alpha(m, pair));
    for (double v : a) EXPECT_TRUE(v == 0.0 || v == 1.0);
}

TEST(DataUpdate, PerfectFitGivesZeroCorrection)
{
    const std::size_t n = 64;
    const ComplexField O(random_complex(n, 6), Domain::frequency);
    const PupilMask m = make_circular_mask(8, n);
    std::vector<ConstrainedRecord> recs;
    for (WaveVector k : {WaveVector{0, 0}, WaveVector{6, 0}, WaveVector{0, -6}}) {
        ComplexField w(extract_window(O.data, m, k), Domain::frequency);
        recs.push_back({w, k});
    }
    const ComplexField d = data_update(O, recs, m, 1e-8);
    EXPECT_LT(max_abs(d.data), 1e-14);
}

TEST(DataUpdate, SingleFullPassRecord)
{
    const ComplexField O(random_complex(16, 7), Domain::frequency);
    const ComplexField Psi(random_complex(16, 8), Domain::frequency);
    const ConstrainedRecord rec{Psi, {0, 0}};
    const ComplexField d = data_update(O, std::span(&rec, 1), PupilMask::full_pass(16), 1e-14);
    for (std::size_t i = 0; i < d.data.count(); ++i) EXPECT_NEAR(std::abs(d[i] - (O[i] - Psi[i])), 0.0, 1e-12);
}

TEST(DataUpdate, ZeroOutsideUnionAndAveragedInside)
{
    const std::size_t n = 64;
    const ComplexField O(random_complex(n, 9), Domain::frequency);
    const PupilMask m = make_circular_mask(6, n);
    const ComplexField A(random_complex(n, 10), Domain::frequency);
    const ComplexField B(random_complex(n, 11), Domain::frequency);
    const ConstrainedRecord recs[] = {{A, {0, 0}}, {B, {5, 0}}};
    const ComplexField d = data_update(O, recs, m, 1e-12);
    const WaveVector ks[] = {{0, 0}, {5, 0}};
    const RealRaster cov = step_size_alpha(m, ks);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            if (cov(r, c) == 0.0) {
                EXPECT_EQ(d(r, c), cplx(0.0, 0.0));
                continue;
            }
            // Independent evaluation of Σ M(q−k)(Ô(q) − Ψ(q−k)) / (Σ M² + ε).
            cplx num = 0.0;
            double den = 0.0;
            const ComplexField* fields[] = {&A, &B};
            for (int j = 0; j < 2; ++j) {
                const std::ptrdiff_t lr = std::ptrdiff_t(r) - ks[j].ky, lc = std::ptrdiff_t(c) - ks[j].kx;
                if (lr < 0 || lc < 0 || lr >= std::ptrdiff_t(n) || lc >= std::ptrdiff_t(n)) continue;
                const double mv = m.mask(std::size_t(lr), std::size_t(lc));
                num += mv * (O(r, c) - (*fields[j])(std::size_t(lr), std::size_t(lc)));
                den += mv * mv;
            }
            EXPECT_NEAR(std::abs(d(r, c) - num / (den + 1e-12)), 0.0, 1e-12);
        }
    EXPECT_THROW(data_update(O, std::span<const ConstrainedRecord>{}, m, 1e-8), ValidationError);
}

TEST(UpdateSpectrum, Elementwise)
{
    const std::size_t n = 8;
    const ComplexField O(random_complex(n, 12), Domain::frequency);
    const ComplexField D(random_complex(n, 13), Domain::frequency);
    const ComplexField T(random_complex(n, 14), Domain::frequency);
    const ComplexField P(random_complex(n, 15), Domain::frequency);
    const RealRaster alpha = random_real(n, 16);
    const ComplexField zero(n, Domain::frequency);
    EXPECT_EQ(update_spectrum(O, zero, zero, zero, alpha, 0.3, 0.7).data, O.data);
    const ComplexField u = update_spectrum(O, D, T, P, alpha, 0.3, 0.7);
    for (std::size_t i = 0; i < O.data.count(); ++i)
        EXPECT_EQ(u[i], O[i] - alpha[i] * D[i] - 0.3 * T[i] - 0.7 * P[i]);
    const ComplexField g0 = update_spectrum(O, D, T, P, alpha, 0.0, 0.0);
    const ComplexField t2 = update_spectrum(O, zero, T, zero, alpha, 0.6, 0.0);
    const ComplexField t1 = update_spectrum(O, zero, T, zero, alpha, 0.3, 0.0);
    for (std::size_t i = 0; i < O.data.count(); ++i) {
        EXPECT_EQ(g0[i], O[i] - alpha[i] * D[i]);
        EXPECT_NEAR(std::abs((t2[i] - O[i]) - 2.0 * (t1[i] - O[i])), 0.0, 1e-14);
    }
    EXPECT_THROW(update_spectrum(O, ComplexField(4, Domain::frequency), T, P, alpha, 0, 0), ValidationError);
}
