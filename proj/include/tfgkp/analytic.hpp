#ifndef TFGKP_ANALYTIC_HPP
#define TFGKP_ANALYTIC_HPP

#include <cmath>
#include <numbers>
#include <string>

#include "comb.hpp"
#include "errors.hpp"

namespace tfgkp {

struct LatticeSumOptions {
    double relative_tol = 1e-14;
    long cap = 0; // 0: 10 * max(kappa, 1/sigma) + 16
};

inline long default_index_cap(double kappa, double sigma) {
    return static_cast<long>(std::ceil(10.0 * std::max(kappa, 1.0 / sigma))) + 16;
}

// Sum of g(q) over all integers q, expanding outward from round(center) in both
// directions until the added term is negligible and decreasing. g must be unimodal
// about the centre.
template <class G>
double centered_sum(G&& g, double center, long cap) {
    const long q0 = static_cast<long>(std::floor(center + 0.5));
    double sum = g(q0);
    for (int dir : {+1, -1}) {
        double prev = std::abs(g(q0));
        for (long r = 1;; ++r) {
            const long q = q0 + dir * r;
            if (std::abs(q) > cap)
                throw NonConvergence("lattice sum did not converge within index cap " + std::to_string(cap));
            const double t = g(q);
            sum += t;
            const double at = std::abs(t);
            if (at <= prev && (at <= 1e-17 * std::abs(sum) || at == 0.0))
                break;
            prev = at;
        }
    }
    return sum;
}

// Sum of a(d) over all integers in shells |d| = 0, 1, 2, ... until a shell adds
// less than relative_tol of the running total. weight(d) multiplies each term.
template <class A, class W>
double shell_sum(A&& a, W&& weight, long cap, double relative_tol) {
    double total = a(0) * weight(0);
    for (long r = 1;; ++r) {
        if (r > cap)
            throw NonConvergence("lattice sum did not converge within index cap " + std::to_string(cap));
        const double shell = a(r) * weight(r) + a(-r) * weight(-r);
        total += shell;
        if (std::abs(shell) <= relative_tol * std::abs(total))
            break;
    }
    return total;
}

// Sum over all integer pairs (n, m) of a(n - m) * b(n + m), with b unimodal about
// s_center. Since d = n - m and s = n + m share parity, the inner sum over s only
// depends on the parity of d and is computed once per parity.
template <class A, class B>
double lattice_pair_sum(A&& a, B&& b, double s_center, long cap, double relative_tol = 1e-14) {
    double inner[2];
    for (int parity = 0; parity < 2; ++parity)
        inner[parity] = centered_sum([&](long q) { return b(2 * q + parity); }, (s_center - parity) / 2.0, cap);
    return shell_sum(a, [&](long d) { return inner[d & 1]; }, cap, relative_tol);
}

struct NormalizationFactors {
    double n0_omega = 0, n1_omega = 0, n0_t = 0, n1_t = 0;
};

struct NormalizationReport {
    NormalizationFactors exact;
    NormalizationFactors asymptotic;
    // set when any exact factor differs from its leading-order form by more than 1%
    bool asymptotic_unreliable = false;
};

namespace detail {

inline double gauss(double x) { return std::exp(-x * x); }

inline double freq_prefactor(double k, double s) {
    return std::sqrt(std::numbers::pi * k * k * s * s / (k * k + s * s));
}

} // namespace detail

inline NormalizationReport normalization_factors(const CombSpec& spec, LatticeSumOptions opt = {}) {
    using detail::gauss;
    const double k = spec.envelope_width, s = spec.peak_width;
    const double pi = std::numbers::pi;
    const long cap = opt.cap ? opt.cap : default_index_cap(k, s);
    const double ks = std::sqrt(k * k + s * s);
    const double pf = detail::freq_prefactor(k, s);
    const double pt = std::sqrt(pi) / k;

    const double s0w = lattice_pair_sum([&](long d) { return gauss(d / s); }, [&](long n) { return gauss(n / ks); },
                                        0.0, cap, opt.relative_tol);
    const double s1w = lattice_pair_sum([&](long d) { return gauss(d / s); },
                                        [&](long n) { return gauss((n + 1) / ks); }, -1.0, cap, opt.relative_tol);
    // 2 pi^2 sigma^2 (k^2 + l^2) = pi^2 sigma^2 (s^2 + d^2)
    const double s0t = lattice_pair_sum([&](long d) { return gauss(pi * d * std::sqrt(s * s + k * k)); },
                                        [&](long n) { return gauss(pi * s * n); }, 0.0, cap, opt.relative_tol);
    const double s1t = lattice_pair_sum([&](long d) { return gauss(pi * d * std::sqrt(s * s + k * k)); },
                                        [&](long n) { return gauss(pi * s * (n + 1)); }, -1.0, cap, opt.relative_tol);

    NormalizationReport r;
    r.exact = {1.0 / std::sqrt(pf * s0w), 1.0 / std::sqrt(pf * s1w), 1.0 / std::sqrt(pt * s0t),
               1.0 / std::sqrt(pt * s1t)};
    // 1/N0w^2 -> pi kappa sigma / 2 and 1/N0t^2 -> 1 / (2 kappa sigma)
    const double aw = std::sqrt(2.0 / (pi * k * s)), at = std::sqrt(2.0 * k * s);
    r.asymptotic = {aw, aw, at, at};
    auto off = [](double e, double a) { return std::abs(e / a - 1.0) > 0.01; };
    r.asymptotic_unreliable = off(r.exact.n0_omega, aw) || off(r.exact.n1_omega, aw) || off(r.exact.n0_t, at) ||
                              off(r.exact.n1_t, at);
    return r;
}

// <0_omega|1_omega> of the infinite comb, as an exact lattice sum.
inline double analytic_overlap_freq(const CombSpec& spec, LatticeSumOptions opt = {}) {
    using detail::gauss;
    const double k = spec.envelope_width, s = spec.peak_width;
    const long cap = opt.cap ? opt.cap : default_index_cap(k, s);
    const double ks = std::sqrt(k * k + s * s);
    const auto nf = normalization_factors(spec, opt).exact;
    // peaks at 2n and 2m+1: a(n-m) = exp(-(n-m-1/2)^2/sigma^2), b(n+m) = exp(-(n+m+1/2)^2/(kappa^2+sigma^2))
    const double sum = lattice_pair_sum([&](long d) { return gauss((d - 0.5) / s); },
                                        [&](long n) { return gauss((n + 0.5) / ks); }, -0.5, cap, opt.relative_tol);
    return nf.n0_omega * nf.n1_omega * detail::freq_prefactor(k, s) * sum;
}

// <0_t|1_t> of the infinite comb, as an exact lattice sum.
inline double analytic_overlap_time(const CombSpec& spec, LatticeSumOptions opt = {}) {
    using detail::gauss;
    const double k = spec.envelope_width, s = spec.peak_width;
    const double pi = std::numbers::pi;
    const long cap = opt.cap ? opt.cap : default_index_cap(k, s);
    const auto nf = normalization_factors(spec, opt).exact;
    // (4k^2 + (2l+1)^2) pi^2 sigma^2 / 2 = pi^2 sigma^2 ((s+1/2)^2 + (d-1/2)^2)
    const double sum = lattice_pair_sum([&](long d) { return gauss(pi * (d - 0.5) * std::sqrt(s * s + k * k)); },
                                        [&](long n) { return gauss(pi * s * (n + 0.5)); }, -0.5, cap,
                                        opt.relative_tol);
    return nf.n0_t * nf.n1_t * std::sqrt(pi) / k * sum;
}

// Leading-order forms in the kappa >> fsr >> sigma regime. Both nearest
// neighbours of each peak contribute, hence the factor 2.
inline double overlap_freq_leading_order(const CombSpec& spec) {
    const double s = spec.peak_width;
    return 2.0 * std::exp(-1.0 / (4.0 * s * s));
}

inline double overlap_time_leading_order(const CombSpec& spec) {
    const double k = spec.envelope_width;
    return 2.0 * std::exp(-std::numbers::pi * std::numbers::pi * k * k / 4.0);
}

} // namespace tfgkp

#endif
