#ifndef TFGKP_PROPAGATION_HPP
#define TFGKP_PROPAGATION_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "comb.hpp"
#include "errors.hpp"
#include "fft.hpp"
#include "parallel.hpp"

namespace tfgkp {

// Quadratic spectral phase exp(i beta w^2). beta in units of 1/fsr^2.
struct Chirp {
    static constexpr double beta_T = std::numbers::pi; // Talbot chirp pi / fsr^2
    double beta = 0.0;

    static Chirp talbot(double fraction) { return Chirp{fraction * beta_T}; }
    double talbot_fraction() const { return beta / beta_T; }
};

inline SpectralState apply_chirp(const SpectralState& state, Chirp chirp) {
    if (state.domain() != Domain::frequency)
        throw WrongDomain("apply_chirp needs a frequency-domain state");
    if (!std::isfinite(chirp.beta))
        throw InvalidArgument("chirp beta must be finite");
    std::vector<cplx> a = state.amplitudes();
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double w = state.grid().omega(j);
        a[j] *= std::polar(1.0, chirp.beta * w * w);
    }
    return SpectralState(state.grid(), std::move(a), Domain::frequency);
}

// psi~(t) = int dw / sqrt(2 pi) psi(w) exp(-i w t), sampled at t_k = (k - N/2) 2 pi / span.
// With dw dt = 2 pi / N the kernel becomes (-1)^(j+k) exp(-2 pi i j k / N) for N % 4 == 0.
inline SpectralState to_time_domain(const SpectralState& state) {
    if (state.domain() != Domain::frequency)
        throw WrongDomain("to_time_domain needs a frequency-domain state");
    std::vector<cplx> a = state.amplitudes();
    for (std::size_t j = 1; j < a.size(); j += 2)
        a[j] = -a[j];
    fft::transform(a, fft::Direction::forward);
    const double scale = state.grid().step() / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t k = 0; k < a.size(); ++k)
        a[k] *= (k % 2 ? -scale : scale);
    return SpectralState(state.grid(), std::move(a), Domain::time);
}

inline SpectralState to_freq_domain(const SpectralState& state) {
    if (state.domain() != Domain::time)
        throw WrongDomain("to_freq_domain needs a time-domain state");
    std::vector<cplx> a = state.amplitudes();
    for (std::size_t k = 1; k < a.size(); k += 2)
        a[k] = -a[k];
    fft::transform(a, fft::Direction::backward);
    const double scale = state.grid().time_step() / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t j = 0; j < a.size(); ++j)
        a[j] *= (j % 2 ? -scale : scale);
    return SpectralState(state.grid(), std::move(a), Domain::frequency);
}

// Direct evaluation of psi~(t) at arbitrary times (phase recurrence, resynchronized
// every 256 samples).
inline cplx evaluate_time_domain(const SpectralState& state, double t) {
    if (state.domain() != Domain::frequency)
        throw WrongDomain("evaluate_time_domain needs a frequency-domain state");
    const auto& g = state.grid();
    const std::size_t n = state.size();
    const cplx step = std::polar(1.0, -g.step() * t);
    cplx sum = 0.0, ph;
    for (std::size_t j = 0; j < n; ++j) {
        if (j % 256 == 0)
            ph = std::polar(1.0, -g.omega(j) * t);
        sum += state[j] * ph;
        ph *= step;
    }
    return sum * (g.step() / std::sqrt(2.0 * std::numbers::pi));
}

inline std::vector<cplx> evaluate_time_domain(const SpectralState& state, std::span<const double> times) {
    std::vector<cplx> out(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        out[i] = evaluate_time_domain(state, times[i]);
    return out;
}

struct BetaRange {
    double lo = 0.0, hi = 2.0; // units of beta_T
};

struct TimeWindow {
    double lo = -4.0 * std::numbers::pi, hi = 4.0 * std::numbers::pi;
};

struct TalbotCarpet {
    std::vector<double> t_axis;    // units of 1/fsr
    std::vector<double> beta_axis; // units of beta_T
    Eigen::MatrixXd intensity;     // rows: beta, columns: t
    std::vector<double> raw_norms; // squared norm of each chirped state before renormalization
};

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
}

// Joint temporal intensity |psi~(t, beta)|^2, each row divided by the squared norm
// of its chirped state.
inline TalbotCarpet talbot_carpet(const CombSpec& spec, LogicalLabel label, BetaRange range, int n_beta, int n_t,
                                  TimeWindow window = {}, unsigned threads = 1) {
    if (n_beta < 2 || n_t < 2)
        throw InvalidArgument("talbot_carpet needs n_beta >= 2 and n_t >= 2");
    const auto psi = build_physical_state(label, spec);
    TalbotCarpet c;
    c.beta_axis = linspace(range.lo, range.hi, n_beta);
    c.t_axis = linspace(window.lo, window.hi, n_t);
    c.intensity.resize(n_beta, n_t);
    c.raw_norms.assign(static_cast<std::size_t>(n_beta), 0.0);
    parallel_for(static_cast<std::size_t>(n_beta), threads, [&](std::size_t i) {
        const auto chirped = apply_chirp(psi, Chirp::talbot(c.beta_axis[i]));
        const double nrm = chirped.norm_squared();
        c.raw_norms[i] = nrm;
        for (int k = 0; k < n_t; ++k)
            c.intensity(static_cast<Eigen::Index>(i), k) =
                std::norm(evaluate_time_domain(chirped, c.t_axis[static_cast<std::size_t>(k)])) / nrm;
    });
    return c;
}

} // namespace tfgkp

#endif
