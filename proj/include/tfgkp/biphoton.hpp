#ifndef TFGKP_BIPHOTON_HPP
#define TFGKP_BIPHOTON_HPP

#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "comb.hpp"
#include "errors.hpp"
#include "parallel.hpp"

namespace tfgkp {

// F(ws, wi) = f+(w+) f-(w-) fcav(ws) fcav(wi), w+- = (ws +- wi)/sqrt 2.
// f+ and f- are Gaussians; fcav is a comb of Gaussian peaks of width cav.peak_width
// on every integer frequency (cav.envelope_width is not used).
struct JsaSpec {
    double pump_width = 0.0; // 0: monochromatic pump, w+ = pump_center exactly
    double pm_width = 7.0;   // phase-matching width of f-
    CombSpec cav = CombSpec::make(5.0, 0.05);
    double pump_center = 0.0; // w_p
    bool cavity = true;       // false: fcav = 1

    void validate() const {
        if (!(pump_width >= 0.0) || !std::isfinite(pump_width))
            throw NonPositiveWidth("pump width must be >= 0");
        if (!(pm_width > 0.0) || !std::isfinite(pm_width))
            throw NonPositiveWidth("phase-matching width must be > 0");
        if (cavity && (!(cav.peak_width > 0.0) || !std::isfinite(cav.peak_width)))
            throw NonPositiveWidth("cavity peak width must be > 0");
        if (!std::isfinite(pump_center))
            throw InvalidArgument("pump centre must be finite");
    }

    // Centre of the signal/idler axes: ws + wi = sqrt 2 w_p.
    double axis_center() const { return pump_center / std::numbers::sqrt2; }

    // Parameters of the equivalent comb on the canonical axis u = w- / sqrt 2.
    double sigma_eff() const { return cav.peak_width / std::numbers::sqrt2; }
    double kappa_eff() const { return pm_width / std::numbers::sqrt2; }
    CombSpec effective_comb() const { return CombSpec::make(kappa_eff(), sigma_eff()); }
};

namespace detail {

inline double cavity_comb(double w, double sigma) {
    const long c = std::lround(w);
    const long m = static_cast<long>(std::ceil(9.0 * sigma)) + 1;
    double s = 0.0;
    for (long n = c - m; n <= c + m; ++n) {
        const double x = (w - n) / sigma;
        s += std::exp(-0.5 * x * x);
    }
    return s;
}

inline double gaussian(double x, double width) {
    const double y = x / width;
    return std::exp(-0.5 * y * y);
}

} // namespace detail

// Collective-variable amplitude F-(w-) f-(w-) fcav((w- + wp)/sqrt 2) fcav((-w- + wp)/sqrt 2),
// expressed on u = w- / sqrt 2.
inline double minus_amplitude(const JsaSpec& spec, double u) {
    const double c = spec.axis_center();
    double v = detail::gaussian(std::numbers::sqrt2 * u, spec.pm_width);
    if (spec.cavity)
        v *= detail::cavity_comb(c + u, spec.cav.peak_width) * detail::cavity_comb(c - u, spec.cav.peak_width);
    return v;
}

struct JsaGrid {
    std::vector<double> omega_s, omega_i; // identical axes c + (j - n/2) d
    Eigen::MatrixXcd amplitude;           // (signal index, idler index)
    bool monochromatic = false;
    double step = 0.0;

    // Monochromatic pump: the antidiagonal cells (j, n - j) as a state on u = w- / sqrt 2.
    SpectralState minus_slice() const {
        if (!monochromatic)
            throw NonMonochromatic("antidiagonal slice needs a monochromatic pump");
        const auto n = static_cast<std::size_t>(amplitude.rows());
        const double spf = 1.0 / step;
        if (!std::has_single_bit(n) || std::abs(spf - std::round(spf)) > 1e-9)
            throw GridMismatch("slice needs a power-of-two grid with an integer number of samples per fsr");
        GridSpec g{static_cast<int>(std::lround(spf)), static_cast<double>(n) * step};
        std::vector<cplx> a(n, 0.0);
        for (std::size_t j = 1; j < n; ++j)
            a[j] = amplitude(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(n - j));
        return normalized(SpectralState(g, std::move(a)));
    }
};

// n x n grid. The step is 1/spf with spf the largest power of two such that the
// axes still cover the envelope; fewer than 4 samples per cavity peak width throw.
inline JsaGrid build_jsa(const JsaSpec& spec, int n, unsigned threads = 1) {
    spec.validate();
    if (n < 64)
        throw InvalidArgument("build_jsa needs n >= 64");
    const double sigma = spec.cav.peak_width;
    const double half = std::ceil(5.0 * spec.kappa_eff()) + (spec.cavity ? 5.0 * sigma : 0.0) +
                        5.0 * spec.pump_width / std::numbers::sqrt2;
    const double per_fsr = n / (2.0 * half);
    if (per_fsr < 1.0)
        throw GridTooCoarse("n too small to cover the phase-matching envelope");
    const double spf = static_cast<double>(std::bit_floor(static_cast<unsigned long>(per_fsr)));
    if (spec.cavity && spf * sigma < 4.0)
        throw GridTooCoarse("fewer than 4 samples per cavity peak width; increase n");

    JsaGrid g;
    g.step = 1.0 / spf;
    g.monochromatic = spec.pump_width == 0.0;
    const double c = spec.axis_center();
    g.omega_s.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        g.omega_s[static_cast<std::size_t>(j)] = c + (j - n / 2) * g.step;
    g.omega_i = g.omega_s;
    g.amplitude = Eigen::MatrixXcd::Zero(n, n);

    if (g.monochromatic) {
        // ws + wi = 2c exactly on cells (j, n - j); u = ws - c
        for (int j = 1; j < n; ++j)
            g.amplitude(j, n - j) = minus_amplitude(spec, g.omega_s[static_cast<std::size_t>(j)] - c);
        const double line = std::numbers::sqrt2 * g.step;
        g.amplitude /= std::sqrt(g.amplitude.squaredNorm() * line);
        return g;
    }

    std::vector<double> cav(static_cast<std::size_t>(n), 1.0);
    if (spec.cavity)
        for (int j = 0; j < n; ++j)
            cav[static_cast<std::size_t>(j)] = detail::cavity_comb(g.omega_s[static_cast<std::size_t>(j)], sigma);
    const double wp = spec.pump_center;
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t a) {
        const double ws = g.omega_s[a];
        for (std::size_t b = 0; b < static_cast<std::size_t>(n); ++b) {
            const double wi = g.omega_i[b];
            const double plus = (ws + wi) / std::numbers::sqrt2, minus = (ws - wi) / std::numbers::sqrt2;
            g.amplitude(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                detail::gaussian(plus - wp, spec.pump_width) * detail::gaussian(minus, spec.pm_width) * cav[a] *
                cav[b];
        }
    });
    g.amplitude /= std::sqrt(g.amplitude.squaredNorm() * g.step * g.step);
    return g;
}

// Monochromatic-pump reduction to a unit-norm state on the canonical axis.
inline SpectralState reduce_to_minus(const JsaSpec& spec, const GridSpec& grid) {
    spec.validate();
    if (spec.pump_width > 0.0)
        throw NonMonochromatic("reduce_to_minus needs pump_width == 0");
    grid.validate();
    std::vector<cplx> a(grid.size());
    for (std::size_t j = 0; j < a.size(); ++j)
        a[j] = minus_amplitude(spec, grid.omega(j));
    return normalized(SpectralState(grid, std::move(a)));
}

} // namespace tfgkp

#endif
