#ifndef TFGKP_COMB_HPP
#define TFGKP_COMB_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"

namespace tfgkp {

using cplx = std::complex<double>;

// Physical comb parameters in units of the free spectral range (fsr == 1).
struct CombSpec {
    static constexpr double fsr = 1.0;
    double peak_width = 0.05;     // sigma
    double envelope_width = 10.0; // kappa
    int n_max = 50;
    GridSpec grid;

    // Default truncation and grid: n_max = ceil(5 kappa), at least 64 samples per
    // FSR and at least 4 samples per sigma, span >= 2 (n_max + 5 sigma).
    static CombSpec make(double kappa, double sigma, std::optional<int> n_max = {},
                         std::optional<int> samples_per_fsr = {}) {
        check_widths(kappa, sigma);
        CombSpec s;
        s.envelope_width = kappa;
        s.peak_width = sigma;
        s.n_max = n_max.value_or(std::max(1, static_cast<int>(std::ceil(5.0 * kappa))));
        s.grid = GridSpec::covering(min_span(s.n_max, sigma), samples_per_fsr.value_or(default_samples_per_fsr(sigma)));
        return s;
    }

    static int default_samples_per_fsr(double sigma) {
        int spf = 64;
        while (spf * sigma < 4.0 && spf < (1 << 20))
            spf *= 2;
        return spf;
    }

    static double min_span(int n_max, double sigma) { return 2.0 * (n_max + 5.0 * sigma); }

    void validate() const {
        check_widths(envelope_width, peak_width);
        if (n_max < 1)
            throw InvalidArgument("n_max must be >= 1");
        grid.validate();
        if (grid.span < min_span(n_max, peak_width) - 1e-12)
            throw GridTooNarrow("grid span " + std::to_string(grid.span) + " < 2(n_max + 5 sigma) = " +
                                std::to_string(min_span(n_max, peak_width)));
    }

    // Adjacent peaks overlap; leading-order closed forms are unreliable.
    bool overlapping_peaks() const { return peak_width >= 0.5; }

    friend bool operator==(const CombSpec&, const CombSpec&) = default;

private:
    static void check_widths(double kappa, double sigma) {
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw NonPositiveWidth("peak width sigma must be positive and finite");
        if (!(kappa > 0.0) || !std::isfinite(kappa))
            throw NonPositiveWidth("envelope width kappa must be positive and finite");
    }
};

enum class LogicalLabel {
    Zero_t,
    One_t,
    PlusI_t,
    MinusI_t,
    Zero_omega,
    One_omega,
    Plus_omega,
    Minus_omega,
    Plus_t,
    Minus_t,
};

inline constexpr std::array<LogicalLabel, 6> codewords{LogicalLabel::Zero_t,     LogicalLabel::One_t,
                                                       LogicalLabel::PlusI_t,    LogicalLabel::MinusI_t,
                                                       LogicalLabel::Zero_omega, LogicalLabel::One_omega};

// Name of the same state in the conjugate basis (0_t = +_omega, 0_omega = +_t, ...).
// The +-i_t states have no alias in the label set and map to themselves.
constexpr LogicalLabel dual(LogicalLabel l) {
    using L = LogicalLabel;
    switch (l) {
    case L::Zero_t: return L::Plus_omega;
    case L::Plus_omega: return L::Zero_t;
    case L::One_t: return L::Minus_omega;
    case L::Minus_omega: return L::One_t;
    case L::Zero_omega: return L::Plus_t;
    case L::Plus_t: return L::Zero_omega;
    case L::One_omega: return L::Minus_t;
    case L::Minus_t: return L::One_omega;
    default: return l;
    }
}

// Representative among the six codewords.
constexpr LogicalLabel canonical(LogicalLabel l) {
    using L = LogicalLabel;
    switch (l) {
    case L::Plus_omega: return L::Zero_t;
    case L::Minus_omega: return L::One_t;
    case L::Plus_t: return L::Zero_omega;
    case L::Minus_t: return L::One_omega;
    default: return l;
    }
}

inline constexpr std::array<std::pair<LogicalLabel, std::string_view>, 10> label_names{{
    {LogicalLabel::Zero_t, "zero_t"},
    {LogicalLabel::One_t, "one_t"},
    {LogicalLabel::PlusI_t, "plus_i_t"},
    {LogicalLabel::MinusI_t, "minus_i_t"},
    {LogicalLabel::Zero_omega, "zero_omega"},
    {LogicalLabel::One_omega, "one_omega"},
    {LogicalLabel::Plus_omega, "plus_omega"},
    {LogicalLabel::Minus_omega, "minus_omega"},
    {LogicalLabel::Plus_t, "plus_t"},
    {LogicalLabel::Minus_t, "minus_t"},
}};

inline std::string to_string(LogicalLabel l) {
    for (auto& [lab, name] : label_names)
        if (lab == l)
            return std::string(name);
    return "?";
}

inline LogicalLabel parse_label(std::string_view s) {
    for (auto& [lab, name] : label_names)
        if (name == s)
            return lab;
    throw InvalidArgument("unknown logical label '" + std::string(s) + "'");
}

enum class Domain { frequency, time };

// Sampled wavefunction on a GridSpec, in the frequency or the time domain.
class SpectralState {
public:
    SpectralState(GridSpec grid, std::vector<cplx> amplitudes, Domain domain = Domain::frequency)
        : grid_(grid), amp_(std::move(amplitudes)), domain_(domain) {
        if (amp_.size() != grid_.size())
            throw GridMismatch("amplitude array length " + std::to_string(amp_.size()) + " != grid size " +
                               std::to_string(grid_.size()));
    }

    const GridSpec& grid() const { return grid_; }
    Domain domain() const { return domain_; }
    const std::vector<cplx>& amplitudes() const { return amp_; }
    std::size_t size() const { return amp_.size(); }
    cplx operator[](std::size_t j) const { return amp_[j]; }

    double step() const { return domain_ == Domain::frequency ? grid_.step() : grid_.time_step(); }
    double coordinate(std::size_t j) const { return domain_ == Domain::frequency ? grid_.omega(j) : grid_.time(j); }

    // Periodic trapezoidal rule.
    double norm_squared() const {
        double s = 0.0;
        for (auto& a : amp_)
            s += std::norm(a);
        return s * step();
    }
    double norm() const { return std::sqrt(norm_squared()); }

private:
    GridSpec grid_;
    std::vector<cplx> amp_;
    Domain domain_;
};

inline SpectralState normalized(const SpectralState& s) {
    const double n = s.norm();
    if (!(n > 0.0))
        throw InvalidArgument("cannot normalize a zero state");
    std::vector<cplx> a = s.amplitudes();
    for (auto& x : a)
        x /= n;
    return SpectralState(s.grid(), std::move(a), s.domain());
}

inline cplx overlap(const SpectralState& a, const SpectralState& b) {
    if (!(a.grid() == b.grid()) || a.domain() != b.domain())
        throw GridMismatch("overlap of states on different grids or domains");
    cplx s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        s += std::conj(a[j]) * b[j];
    return s * a.step();
}

struct CombPeak {
    int position; // in units of fsr
    double coefficient;
};

// Peak recipe of the real-coefficient codewords; +-i are built from 0_t and 1_t.
inline std::vector<CombPeak> comb_peaks(LogicalLabel label, int n_max) {
    using L = LogicalLabel;
    std::vector<CombPeak> peaks;
    for (int p = -n_max; p <= n_max; ++p) {
        const bool even = (p % 2) == 0;
        switch (canonical(label)) {
        case L::Zero_omega:
            if (even)
                peaks.push_back({p, 1.0});
            break;
        case L::One_omega:
            if (!even)
                peaks.push_back({p, 1.0});
            break;
        case L::Zero_t: peaks.push_back({p, 1.0}); break;
        case L::One_t: peaks.push_back({p, even ? 1.0 : -1.0}); break;
        default: throw InvalidArgument("no real peak recipe for " + to_string(label));
        }
    }
    return peaks;
}

namespace detail {

inline std::vector<cplx> comb_samples(const std::vector<CombPeak>& peaks, const CombSpec& spec) {
    const auto& g = spec.grid;
    const std::size_t n = g.size();
    const double sigma = spec.peak_width, kappa = spec.envelope_width;
    const double cut = 12.0 * sigma;
    const double h = g.step();
    std::vector<double> psi(n, 0.0);
    for (const auto& pk : peaks) {
        const double c = pk.position;
        auto lo = static_cast<std::ptrdiff_t>(std::floor((c - cut) / h)) + static_cast<std::ptrdiff_t>(n / 2);
        auto hi = static_cast<std::ptrdiff_t>(std::ceil((c + cut) / h)) + static_cast<std::ptrdiff_t>(n / 2);
        lo = std::max<std::ptrdiff_t>(lo, 0);
        hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(n) - 1);
        for (auto j = lo; j <= hi; ++j) {
            const double x = (g.omega(static_cast<std::size_t>(j)) - c) / sigma;
            psi[static_cast<std::size_t>(j)] += pk.coefficient * std::exp(-0.5 * x * x);
        }
    }
    std::vector<cplx> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double w = g.omega(j) / kappa;
        out[j] = psi[j] * std::exp(-0.5 * w * w);
    }
    return out;
}

} // namespace detail

// Envelope exp(-w^2 / 2 kappa^2) times Gaussian peaks of width sigma, unit norm,
// frequency domain.
inline SpectralState build_physical_state(LogicalLabel label, const CombSpec& spec) {
    spec.validate();
    using L = LogicalLabel;
    const auto c = canonical(label);
    if (c == L::PlusI_t || c == L::MinusI_t) {
        const auto zero = build_physical_state(L::Zero_t, spec);
        const auto one = build_physical_state(L::One_t, spec);
        const cplx phase = c == L::PlusI_t ? cplx(0, 1) : cplx(0, -1);
        std::vector<cplx> a(zero.size());
        for (std::size_t j = 0; j < a.size(); ++j)
            a[j] = zero[j] + phase * one[j];
        return normalized(SpectralState(spec.grid, std::move(a)));
    }
    return normalized(SpectralState(spec.grid, detail::comb_samples(comb_peaks(label, spec.n_max), spec)));
}

} // namespace tfgkp

#endif
