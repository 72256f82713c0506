#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace isafp {

using cplx = std::complex<double>;

/// Invariant or precondition violated by caller-supplied data.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Filesystem or format failure while reading/writing artifacts.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 64-byte aligned storage so FFTW can use its SIMD codelets on any raster.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::size_t alignment = 64;

    AlignedAllocator() noexcept = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n)
    {
        std::size_t bytes = ((n * sizeof(T) + alignment - 1) / alignment) * alignment;
        void* p = std::aligned_alloc(alignment, bytes == 0 ? alignment : bytes);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept { std::free(p); }

    template <class U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

/// Square N×N raster, row-major. Row index is y, column index is x.
template <class T>
class Raster {
public:
    using value_type = T;
    using storage = std::vector<T, AlignedAllocator<T>>;

    Raster() = default;
    explicit Raster(std::size_t n, T fill = T{}) : n_(n), values_(n * n, fill) {}

    std::size_t size() const noexcept { return n_; }
    std::size_t count() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    T& operator()(std::size_t row, std::size_t col) noexcept { return values_[row * n_ + col]; }
    const T& operator()(std::size_t row, std::size_t col) const noexcept { return values_[row * n_ + col]; }
    T& operator[](std::size_t i) noexcept { return values_[i]; }
    const T& operator[](std::size_t i) const noexcept { return values_[i]; }

    std::span<T> values() noexcept { return values_; }
    std::span<const T> values() const noexcept { return values_; }
    T* data() noexcept { return values_.data(); }
    const T* data() const noexcept { return values_.data(); }

    auto begin() noexcept { return values_.begin(); }
    auto end() noexcept { return values_.end(); }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    bool operator==(const Raster&) const = default;

private:
    std::size_t n_ = 0;
    storage values_;
};

using RealRaster = Raster<double>;
using ComplexRaster = Raster<cplx>;

enum class Domain { spatial, frequency };

inline const char* to_string(Domain d) { return d == Domain::spatial ? "spatial" : "frequency"; }

/// Complex amplitude raster tagged with the domain it lives in.
struct ComplexField {
    ComplexRaster data;
    Domain domain = Domain::spatial;

    ComplexField() = default;
    ComplexField(std::size_t n, Domain d) : data(n), domain(d) {}
    ComplexField(ComplexRaster values, Domain d) : data(std::move(values)), domain(d) {}

    std::size_t size() const noexcept { return data.size(); }
    cplx& operator()(std::size_t row, std::size_t col) noexcept { return data(row, col); }
    const cplx& operator()(std::size_t row, std::size_t col) const noexcept { return data(row, col); }
    cplx& operator[](std::size_t i) noexcept { return data[i]; }
    const cplx& operator[](std::size_t i) const noexcept { return data[i]; }
};

inline void require_grid_size(std::size_t n, const char* what)
{
    if (n < 2 || n % 2 != 0)
        throw ValidationError(std::string(what) + ": grid size must be even and >= 2, got " + std::to_string(n));
}

inline void validate(const ComplexField& f)
{
    require_grid_size(f.size(), "ComplexField");
    if (f.data.count() != f.size() * f.size()) throw ValidationError("ComplexField: raster is not square");
    for (const cplx& v : f.data)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw ValidationError("ComplexField: non-finite value");
}

inline void require_domain(const ComplexField& f, Domain expected, const char* what)
{
    if (f.domain != expected)
        throw ValidationError(std::string(what) + ": expected " + to_string(expected) + "-domain field, got "
                              + to_string(f.domain));
}

template <class A, class B>
void require_same_size(const A& a, const B& b, const char* what)
{
    if (a.size() != b.size())
        throw ValidationError(std::string(what) + ": shape mismatch (" + std::to_string(a.size()) + " vs "
                              + std::to_string(b.size()) + ")");
}

template <class T>
double energy(const Raster<T>& r)
{
    double e = 0.0;
    for (const T& v : r) e += std::norm(v);
    return e;
}

inline double energy(const ComplexField& f) { return energy(f.data); }

inline RealRaster intensity(const ComplexRaster& r)
{
    RealRaster out(r.size());
    for (std::size_t i = 0; i < r.count(); ++i) out[i] = std::norm(r[i]);
    return out;
}

inline RealRaster amplitude(const ComplexRaster& r)
{
    RealRaster out(r.size());
    for (std::size_t i = 0; i < r.count(); ++i) out[i] = std::abs(r[i]);
    return out;
}

inline RealRaster phase(const ComplexRaster& r)
{
    RealRaster out(r.size());
    for (std::size_t i = 0; i < r.count(); ++i) out[i] = std::arg(r[i]);
    return out;
}

template <class T>
T max_value(const Raster<T>& r)
{
    return r.empty() ? T{} : *std::max_element(r.begin(), r.end());
}

// Index of (row, col) after a circular translation by (dy, dx).
inline std::size_t wrap_index(std::ptrdiff_t v, std::size_t n) noexcept
{
    auto m = static_cast<std::ptrdiff_t>(n);
    v %= m;
    return static_cast<std::size_t>(v < 0 ? v + m : v);
}

}  // namespace isafp
