#ifndef TFGKP_ERROR_CORRECTION_HPP
#define TFGKP_ERROR_CORRECTION_HPP

#include <cmath>
#include <numbers>

#include "analytic.hpp"
#include "comb.hpp"
#include "errors.hpp"
#include "fidelity.hpp"

namespace tfgkp {

// Correctable window: |xi| < f fsr in modular frequency and |tau| < f pi / fsr in
// modular time, f = threshold_fraction.
struct ModularSpec {
    CombSpec spec;
    double threshold_fraction = 1.0 / 6.0;

    double zak_norm() const { return std::sqrt(spec.envelope_width / (std::numbers::pi * spec.peak_width)); }

    void validate() const {
        if (!(threshold_fraction > 0.0 && threshold_fraction <= 0.5))
            throw InvalidArgument("threshold_fraction must lie in (0, 1/2]");
        if (!(spec.peak_width > 0.0) || !(spec.envelope_width > 0.0))
            throw NonPositiveWidth("kappa and sigma must be positive");
    }
};

// How the windowed probability mass is normalized.
//   cell: divided by the mass of the full modular cell |xi| < 1/2, |tau| < pi/2,
//         so the result is a probability for every (kappa, sigma).
//   zak:  multiplied by the closed-form Zak norm kappa / (pi sigma), which is only
//         accurate for kappa >> 1 >> sigma and exceeds 1 outside that regime.
enum class KgNormalization { cell, zak };

// erf(a) - erf(b) without cancellation when both arguments share a sign.
inline double erf_diff(double a, double b) {
    if (a > 0 && b > 0)
        return std::erfc(b) - std::erfc(a);
    if (a < 0 && b < 0)
        return std::erfc(-a) - std::erfc(-b);
    return std::erf(a) - std::erf(b);
}

namespace detail {

// sum_{n,m} exp(-kappa^2 pi^2 (m-n)^2 / 4) int_{-f pi}^{f pi} exp(-kappa^2 (tau - (n+m) pi/2)^2) dtau
inline double kg_time_mass(double kappa, double f, long cap, double tol) {
    const double pi = std::numbers::pi;
    const double c = std::sqrt(pi) / (2.0 * kappa);
    return lattice_pair_sum([&](long d) { return std::exp(-kappa * kappa * pi * pi * d * d / 4.0); },
                            [&](long s) { return c * erf_diff(kappa * pi * (f + 0.5 * s), kappa * pi * (0.5 * s - f)); },
                            0.0, cap, tol);
}

// sum_{k,l} exp(-(k-l)^2 / sigma^2) int_{-f}^{f} exp(-(xi - l)^2 / sigma^2) dxi
inline double kg_freq_mass(double sigma, double f, long cap, double tol) {
    const double c = sigma * std::sqrt(std::numbers::pi) / 2.0;
    const double theta = shell_sum([&](long d) { return std::exp(-double(d * d) / (sigma * sigma)); },
                                   [](long) { return 1.0; }, cap, tol);
    const double window =
        centered_sum([&](long l) { return c * erf_diff((l + f) / sigma, (l - f) / sigma); }, 0.0, cap);
    return theta * window;
}

} // namespace detail

inline double p_no_error_exact(const ModularSpec& m, KgNormalization norm = KgNormalization::cell,
                               LatticeSumOptions opt = {}) {
    m.validate();
    const double k = m.spec.envelope_width, s = m.spec.peak_width, f = m.threshold_fraction;
    const long cap = opt.cap ? opt.cap : default_index_cap(k, s);
    const double t = detail::kg_time_mass(k, f, cap, opt.relative_tol);
    const double w = detail::kg_freq_mass(s, f, cap, opt.relative_tol);
    if (norm == KgNormalization::zak)
        return m.zak_norm() * m.zak_norm() * t * w;
    return (t / detail::kg_time_mass(k, 0.5, cap, opt.relative_tol)) *
           (w / detail::kg_freq_mass(s, 0.5, cap, opt.relative_tol));
}

inline double p_no_error_asymptotic(const ModularSpec& m) {
    m.validate();
    const double f = m.threshold_fraction;
    return std::erf(std::numbers::pi * m.spec.envelope_width * f) * std::erf(f / m.spec.peak_width);
}

// P_error = 1 - P_no_error over a (kappa, sigma) grid; non-converged cells are NaN.
inline FidelityMap error_map(const AxisRange& kappa, const AxisRange& sigma, double threshold_fraction = 1.0 / 6.0,
                             KgNormalization norm = KgNormalization::cell, unsigned threads = 1) {
    return sweep_map(kappa, sigma, threads, [&](double k, double s) {
        ModularSpec m;
        m.spec.envelope_width = k;
        m.spec.peak_width = s;
        m.threshold_fraction = threshold_fraction;
        return 1.0 - p_no_error_exact(m, norm);
    });
}

} // namespace tfgkp

#endif
