#ifndef TFGKP_GRID_HPP
#define TFGKP_GRID_HPP

#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace tfgkp {

// Uniform frequency grid omega_j = (j - N/2) / samples_per_fsr, symmetric about 0,
// with N = span * samples_per_fsr a power of two. The conjugate time grid has
// step 2*pi/span and the same index layout.
struct GridSpec {
    int samples_per_fsr = 64;
    double span = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(std::llround(span * samples_per_fsr)); }
    double step() const { return 1.0 / samples_per_fsr; }
    double time_step() const { return 2.0 * std::numbers::pi / span; }
    double omega(std::size_t j) const { return (static_cast<double>(j) - static_cast<double>(size() / 2)) * step(); }
    double time(std::size_t k) const { return (static_cast<double>(k) - static_cast<double>(size() / 2)) * time_step(); }

    // index of the grid point at integer multiple q of the step, relative to omega=0
    std::ptrdiff_t offset_index(std::ptrdiff_t q) const { return static_cast<std::ptrdiff_t>(size() / 2) + q; }

    void validate() const {
        if (samples_per_fsr < 16)
            throw InvalidArgument("samples_per_fsr must be >= 16, got " + std::to_string(samples_per_fsr));
        if (!(span > 0.0) || !std::isfinite(span))
            throw InvalidArgument("grid span must be positive and finite");
        const double n = span * samples_per_fsr;
        const auto ni = size();
        if (std::abs(n - static_cast<double>(ni)) > 1e-9 * n || !std::has_single_bit(ni) || ni < 8)
            throw InvalidArgument("grid sample count span*samples_per_fsr must be a power of two >= 8");
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

    // Smallest power-of-two grid with at least `spf` samples per FSR covering `min_span`.
    static GridSpec covering(double min_span, int spf) {
        const auto need = static_cast<std::size_t>(std::ceil(min_span * spf));
        const std::size_t n = std::bit_ceil(std::max<std::size_t>(need, 8));
        return GridSpec{spf, static_cast<double>(n) / spf};
    }
};

} // namespace tfgkp

#endif
