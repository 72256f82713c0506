#pragma once

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "isafp/raster.hpp"

namespace isafp {

namespace detail {

// FFTW planning is not thread-safe, execution on fresh arrays is. Plans are
// built once per (size, direction) with FFTW_ESTIMATE, which is deterministic,
// and executed through fftw_execute_dft on caller buffers.
class PlanCache {
public:
    static fftw_plan get(std::size_t n, int sign)
    {
        static PlanCache cache;
        return cache.lookup(n, sign);
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan lookup(std::size_t n, int sign)
    {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        ComplexRaster scratch(n);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), buf, buf, sign,
                                          FFTW_ESTIMATE);
        plans_.emplace(key, plan);
        return plan;
    }

    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

// For even N the centered DFT factors as C·DFT·C with C the (-1)^(row+col)
// checkerboard; the residual phase exp(-i·pi·N) is 1.
inline void checkerboard(ComplexRaster& r) noexcept
{
    const std::size_t n = r.size();
    for (std::size_t row = 0; row < n; ++row)
        for (std::size_t col = (row & 1U) ? 0 : 1; col < n; col += 2) r(row, col) = -r(row, col);
}

inline void centered_transform_inplace(ComplexRaster& r, int sign)
{
    const std::size_t n = r.size();
    checkerboard(r);
    auto* buf = reinterpret_cast<fftw_complex*>(r.data());
    fftw_execute_dft(PlanCache::get(n, sign), buf, buf);
    const double scale = 1.0 / static_cast<double>(n);
    for (cplx& v : r) v *= scale;
    checkerboard(r);
}

}  // namespace detail

/// Unitary DFT with the DC bin at (N/2, N/2). Operates in place on a raw raster.
inline void fft_centered_inplace(ComplexRaster& r)
{
    require_grid_size(r.size(), "fft_centered");
    detail::centered_transform_inplace(r, FFTW_FORWARD);
}

inline void ifft_centered_inplace(ComplexRaster& r)
{
    require_grid_size(r.size(), "ifft_centered");
    detail::centered_transform_inplace(r, FFTW_BACKWARD);
}

/// C(t) = Σ_p a(p)·b(p − t) with circular indexing; t is stored at index t mod N.
inline RealRaster circular_cross_correlation(const RealRaster& a, const RealRaster& b)
{
    require_same_size(a, b, "circular_cross_correlation");
    const std::size_t n = a.size();
    require_grid_size(n, "circular_cross_correlation");
    ComplexRaster fa(n), fb(n);
    for (std::size_t i = 0; i < a.count(); ++i) {
        fa[i] = a[i];
        fb[i] = b[i];
    }
    fftw_plan fwd = detail::PlanCache::get(n, FFTW_FORWARD);
    fftw_execute_dft(fwd, reinterpret_cast<fftw_complex*>(fa.data()), reinterpret_cast<fftw_complex*>(fa.data()));
    fftw_execute_dft(fwd, reinterpret_cast<fftw_complex*>(fb.data()), reinterpret_cast<fftw_complex*>(fb.data()));
    // DFT of the correlation is DFT(a)·conj(DFT(b)) for real b.
    for (std::size_t i = 0; i < fa.count(); ++i) fa[i] = fa[i] * std::conj(fb[i]);
    fftw_execute_dft(detail::PlanCache::get(n, FFTW_BACKWARD), reinterpret_cast<fftw_complex*>(fa.data()),
                     reinterpret_cast<fftw_complex*>(fa.data()));
    const double scale = 1.0 / static_cast<double>(n * n);
    RealRaster out(n);
    for (std::size_t i = 0; i < out.count(); ++i) out[i] = fa[i].real() * scale;
    return out;
}

inline ComplexField fft_centered(const ComplexField& field)
{
    validate(field);
    require_domain(field, Domain::spatial, "fft_centered");
    ComplexField out(field.data, Domain::frequency);
    detail::centered_transform_inplace(out.data, FFTW_FORWARD);
    return out;
}

inline ComplexField ifft_centered(const ComplexField& field)
{
    validate(field);
    require_domain(field, Domain::frequency, "ifft_centered");
    ComplexField out(field.data, Domain::spatial);
    detail::centered_transform_inplace(out.data, FFTW_BACKWARD);
    return out;
}

}  // namespace isafp
