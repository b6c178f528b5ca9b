#ifndef TFGKP_PHASE_SPACE_HPP
#define TFGKP_PHASE_SPACE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comb.hpp"
#include "errors.hpp"
#include "fft.hpp"
#include "fidelity.hpp"
#include "parallel.hpp"
#include "propagation.hpp"

namespace tfgkp {

enum class MapKind { wigner, coincidence, visibility };

struct PhaseSpaceMap {
    std::vector<double> mu_axis;  // units of fsr
    std::vector<double> tau_axis; // units of 1/fsr
    Eigen::MatrixXd values;       // (mu index, tau index)
    MapKind kind = MapKind::wigner;
    double max_imag_residue = 0.0; // largest |Im W| dropped
    double max_clip = 0.0;         // largest clipping applied to the coincidence
    std::vector<std::string> log;
};

namespace detail {

inline std::ptrdiff_t mu_shift_index(const GridSpec& g, double mu) {
    const double q = mu / g.step();
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
        throw GridMismatch("mu = " + std::to_string(mu) + " is not an integer multiple of the grid step");
    return static_cast<std::ptrdiff_t>(r);
}

// g_j = psi[j - p] conj(psi[j + p]), zero outside the grid
inline std::vector<cplx> shifted_product(const SpectralState& s, std::ptrdiff_t p) {
    const auto n = static_cast<std::ptrdiff_t>(s.size());
    std::vector<cplx> g(s.size(), 0.0);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, std::abs(p)), hi = n - std::abs(p);
    for (auto j = lo; j < hi; ++j)
        g[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j - p)] * std::conj(s[static_cast<std::size_t>(j + p)]);
    return g;
}

inline void check_frequency(const SpectralState& s) {
    if (s.domain() != Domain::frequency)
        throw WrongDomain("Wigner distribution needs a frequency-domain state");
}

inline void store_real(PhaseSpaceMap& m, Eigen::Index i, Eigen::Index k, cplx w) {
    m.values(i, k) = w.real();
    m.max_imag_residue = std::max(m.max_imag_residue, std::abs(w.imag()));
}

inline void finish_residue_log(PhaseSpaceMap& m) {
    if (m.max_imag_residue > 1e-9)
        m.log.push_back("discarded imaginary Wigner residue up to " + std::to_string(m.max_imag_residue));
}

} // namespace detail

// W(mu, tau) = int dw exp(2 i w tau) psi(w - mu) conj(psi(w + mu)), direct sum for
// arbitrary tau.
inline PhaseSpaceMap wigner_direct(const SpectralState& state, std::span<const double> mu_axis,
                                   std::span<const double> tau_axis, unsigned threads = 1) {
    detail::check_frequency(state);
    const auto& g = state.grid();
    PhaseSpaceMap m;
    m.mu_axis.assign(mu_axis.begin(), mu_axis.end());
    m.tau_axis.assign(tau_axis.begin(), tau_axis.end());
    m.values.resize(static_cast<Eigen::Index>(mu_axis.size()), static_cast<Eigen::Index>(tau_axis.size()));
    std::vector<double> residue(mu_axis.size(), 0.0);
    parallel_for(mu_axis.size(), threads, [&](std::size_t i) {
        const auto prod = detail::shifted_product(state, detail::mu_shift_index(g, mu_axis[i]));
        for (std::size_t k = 0; k < tau_axis.size(); ++k) {
            const double tau = tau_axis[k];
            const cplx step = std::polar(1.0, 2.0 * g.step() * tau);
            cplx sum = 0.0, ph;
            for (std::size_t j = 0; j < prod.size(); ++j) {
                if (j % 256 == 0)
                    ph = std::polar(1.0, 2.0 * g.omega(j) * tau);
                sum += prod[j] * ph;
                ph *= step;
            }
            const cplx w = sum * g.step();
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = w.real();
            residue[i] = std::max(residue[i], std::abs(w.imag()));
        }
    });
    m.max_imag_residue = residue.empty() ? 0.0 : *std::max_element(residue.begin(), residue.end());
    detail::finish_residue_log(m);
    return m;
}

// Natural tau grid of the FFT route: tau_k = (k - N/2) pi / span.
inline double wigner_tau_step(const GridSpec& g) { return std::numbers::pi / g.span; }

inline bool tau_on_fft_grid(const GridSpec& g, std::span<const double> tau_axis) {
    const double h = wigner_tau_step(g);
    const double half = static_cast<double>(g.size() / 2);
    return std::all_of(tau_axis.begin(), tau_axis.end(), [&](double t) {
        const double q = t / h;
        return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, std::abs(q)) && std::round(q) >= -half &&
               std::round(q) < half;
    });
}

// One FFT per mu column; tau values must lie on the grid tau_k = (k - N/2) pi / span.
inline PhaseSpaceMap wigner_fft(const SpectralState& state, std::span<const double> mu_axis,
                                std::span<const double> tau_axis, unsigned threads = 1) {
    detail::check_frequency(state);
    const auto& g = state.grid();
    if (!tau_on_fft_grid(g, tau_axis))
        throw GridMismatch("tau axis is not on the FFT grid of step pi/span");
    const double h = wigner_tau_step(g);
    const std::size_t n = g.size();
    PhaseSpaceMap m;
    m.mu_axis.assign(mu_axis.begin(), mu_axis.end());
    m.tau_axis.assign(tau_axis.begin(), tau_axis.end());
    m.values.resize(static_cast<Eigen::Index>(mu_axis.size()), static_cast<Eigen::Index>(tau_axis.size()));
    std::vector<double> residue(mu_axis.size(), 0.0);
    parallel_for(mu_axis.size(), threads, [&](std::size_t i) {
        auto prod = detail::shifted_product(state, detail::mu_shift_index(g, mu_axis[i]));
        // exp(2 i w_j tau_k) = (-1)^(j+k) exp(2 pi i j k / N) for N % 4 == 0
        for (std::size_t j = 1; j < n; j += 2)
            prod[j] = -prod[j];
        fft::transform(prod, fft::Direction::backward);
        for (std::size_t k = 0; k < tau_axis.size(); ++k) {
            const auto idx = static_cast<std::size_t>(std::llround(tau_axis[k] / h) + static_cast<long long>(n / 2));
            const cplx w = prod[idx] * ((idx % 2) ? -g.step() : g.step());
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = w.real();
            residue[i] = std::max(residue[i], std::abs(w.imag()));
        }
    });
    m.max_imag_residue = residue.empty() ? 0.0 : *std::max_element(residue.begin(), residue.end());
    detail::finish_residue_log(m);
    return m;
}

// FFT route when the tau axis is on the FFT grid and long enough to pay off.
inline PhaseSpaceMap wigner_minus(const SpectralState& state, std::span<const double> mu_axis,
                                  std::span<const double> tau_axis, unsigned threads = 1) {
    const double log2n = std::log2(static_cast<double>(state.size()));
    if (static_cast<double>(tau_axis.size()) > 4.0 * log2n && tau_on_fft_grid(state.grid(), tau_axis))
        return wigner_fft(state, mu_axis, tau_axis, threads);
    return wigner_direct(state, mu_axis, tau_axis, threads);
}

inline double wigner_at(const SpectralState& state, double mu, double tau) {
    const double m[1] = {mu}, t[1] = {tau};
    return wigner_direct(state, m, t).values(0, 0);
}

// I = (1 - W) / 2, clipped to [0, 1].
inline PhaseSpaceMap coincidence_from_wigner(PhaseSpaceMap w) {
    w.kind = MapKind::coincidence;
    for (Eigen::Index i = 0; i < w.values.rows(); ++i)
        for (Eigen::Index k = 0; k < w.values.cols(); ++k) {
            const double raw = 0.5 * (1.0 - w.values(i, k));
            const double c = std::clamp(raw, 0.0, 1.0);
            w.max_clip = std::max(w.max_clip, std::abs(c - raw));
            w.values(i, k) = c;
        }
    if (w.max_clip > 0.0)
        w.log.push_back("clipped coincidence by up to " + std::to_string(w.max_clip));
    return w;
}

inline PhaseSpaceMap hom_coincidence(const SpectralState& state, std::span<const double> mu_axis,
                                     std::span<const double> tau_axis, unsigned threads = 1) {
    return coincidence_from_wigner(wigner_minus(state, mu_axis, tau_axis, threads));
}

// Ideal-comb Wigner lattice. Points sit at tau = S pi/2, mu = K/2 for integers S, K.
// The sign follows from the period-2 comb coefficients c_a of each codeword:
// W ~ exp(i K pi S / 2) (c_0 conj(c_K) + (-1)^S c_1 conj(c_{1+K})), and the weight is
// its modulus relative to |c_0|^2 + |c_1|^2.
struct IdealLattice {
    LogicalLabel label = LogicalLabel::Zero_t;
    static constexpr double tau_pitch = std::numbers::pi / 2;
    static constexpr double mu_pitch = 0.5;
    int s_min = -4, s_max = 4; // tau index window
    int k_min = -2, k_max = 2; // mu index window
    Eigen::MatrixXi sign;      // (K - k_min, S - s_min), values in {-1, 0, +1}
    Eigen::MatrixXd weight;
};

namespace detail {

inline std::array<cplx, 2> comb_coefficients(LogicalLabel label) {
    using L = LogicalLabel;
    const cplx i(0, 1);
    switch (canonical(label)) {
    case L::Zero_t: return {1.0, 1.0};
    case L::One_t: return {1.0, -1.0};
    case L::PlusI_t: return {1.0 + i, 1.0 - i};
    case L::MinusI_t: return {1.0 - i, 1.0 + i};
    case L::Zero_omega: return {1.0, 0.0};
    case L::One_omega: return {0.0, 1.0};
    default: throw InvalidArgument("no coefficients for label");
    }
}

inline cplx ideal_lattice_value(LogicalLabel label, long s, long k) {
    const auto c = comb_coefficients(label);
    auto at = [&](long a) { return c[static_cast<std::size_t>(((a % 2) + 2) % 2)]; };
    const double norm = std::norm(c[0]) + std::norm(c[1]);
    const cplx p = at(0) * std::conj(at(k)) + ((s % 2) ? -1.0 : 1.0) * at(1) * std::conj(at(1 + k));
    // exp(i pi k s / 2) is a power of i
    static constexpr std::array<cplx, 4> powers{cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
    return powers[static_cast<std::size_t>((((k * s) % 4) + 4) % 4)] * p / norm;
}

inline bool lattice_index(double x, double pitch, long& out) {
    const double q = x / pitch;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
        return false;
    out = static_cast<long>(r);
    return true;
}

} // namespace detail

// Sign of the ideal Wigner distribution at (tau, mu); 0 when off the lattice.
inline int sign_at(LogicalLabel label, double tau, double mu) {
    long s = 0, k = 0;
    if (!detail::lattice_index(tau, IdealLattice::tau_pitch, s) || !detail::lattice_index(mu, IdealLattice::mu_pitch, k))
        return 0;
    const cplx v = detail::ideal_lattice_value(label, s, k);
    if (std::abs(v) < 1e-12)
        return 0;
    return v.real() > 0 ? 1 : -1;
}

inline double weight_at(LogicalLabel label, double tau, double mu) {
    long s = 0, k = 0;
    if (!detail::lattice_index(tau, IdealLattice::tau_pitch, s) || !detail::lattice_index(mu, IdealLattice::mu_pitch, k))
        return 0.0;
    return std::abs(detail::ideal_lattice_value(label, s, k));
}

inline IdealLattice ideal_lattice(LogicalLabel label, int s_min = -4, int s_max = 4, int k_min = -2, int k_max = 2) {
    if (s_max < s_min || k_max < k_min)
        throw InvalidArgument("empty lattice window");
    IdealLattice l;
    l.label = label;
    l.s_min = s_min;
    l.s_max = s_max;
    l.k_min = k_min;
    l.k_max = k_max;
    l.sign.resize(k_max - k_min + 1, s_max - s_min + 1);
    l.weight.resize(k_max - k_min + 1, s_max - s_min + 1);
    for (int k = k_min; k <= k_max; ++k)
        for (int s = s_min; s <= s_max; ++s) {
            const double tau = s * IdealLattice::tau_pitch, mu = k * IdealLattice::mu_pitch;
            l.sign(k - k_min, s - s_min) = sign_at(label, tau, mu);
            l.weight(k - k_min, s - s_min) = weight_at(label, tau, mu);
        }
    return l;
}

// max |W_beta(mu, tau) - W_0(mu, tau - 2 beta mu)| over the map.
inline double shear_check(const SpectralState& state, Chirp chirp, std::span<const double> mu_axis,
                          std::span<const double> tau_axis, unsigned threads = 1) {
    const auto after = wigner_direct(apply_chirp(state, chirp), mu_axis, tau_axis, threads);
    double dev = 0.0;
    for (std::size_t i = 0; i < mu_axis.size(); ++i) {
        std::vector<double> shifted(tau_axis.size());
        for (std::size_t k = 0; k < tau_axis.size(); ++k)
            shifted[k] = tau_axis[k] - 2.0 * chirp.beta * mu_axis[i];
        const double mu[1] = {mu_axis[i]};
        const auto before = wigner_direct(state, mu, shifted, threads);
        for (std::size_t k = 0; k < tau_axis.size(); ++k)
            dev = std::max(dev, std::abs(after.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) -
                                         before.values(0, static_cast<Eigen::Index>(k))));
    }
    return dev;
}

// Lattice point (tau, mu) = (s pi/2, k/2).
struct LatticePoint {
    int s = 1, k = 1;
    double tau() const { return s * IdealLattice::tau_pitch; }
    double mu() const { return k * IdealLattice::mu_pitch; }
};

// V = |1/2 - I| / (1/2) = |W|
inline double visibility(const SpectralState& state, LatticePoint p) {
    return std::abs(wigner_at(state, p.mu(), p.tau()));
}

// Visibility of chirp(initial) at a lattice point over a (kappa, sigma) grid.
inline FidelityMap visibility_sweep(Chirp chirp, LogicalLabel initial, LatticePoint p, const AxisRange& kappa,
                                    const AxisRange& sigma, unsigned threads = 1) {
    auto m = sweep_map(kappa, sigma, threads, [&](double k, double s) {
        return visibility(apply_chirp(build_physical_state(initial, CombSpec::make(k, s)), chirp), p);
    });
    m.beta = chirp.talbot_fraction();
    return m;
}

} // namespace tfgkp

#endif
