#ifndef TFGKP_FIDELITY_HPP
#define TFGKP_FIDELITY_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comb.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "propagation.hpp"

namespace tfgkp {

enum class BasisTag { raw_logical, orthonormalized };

struct GateMatrix {
    Eigen::Matrix2cd entries = Eigen::Matrix2cd::Identity();
    BasisTag basis = BasisTag::orthonormalized;
};

namespace gates {

inline GateMatrix identity() { return {}; }

inline GateMatrix x_t() {
    GateMatrix g;
    g.entries << 0, 1, 1, 0;
    return g;
}

// S = diag(exp(-i pi/4), exp(i pi/4))
inline GateMatrix s() {
    GateMatrix g;
    g.entries << std::polar(1.0, -std::numbers::pi / 4), 0, 0, std::polar(1.0, std::numbers::pi / 4);
    return g;
}

// R_y(theta) = exp(-i theta Y)
inline GateMatrix ry(double theta) {
    GateMatrix g;
    g.entries << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return g;
}

// S R_y(-pi/4) S^dagger = [[1, -i], [-i, 1]] / sqrt 2, the half-Talbot gate up to a global phase.
inline GateMatrix s_ry_sdag() {
    GateMatrix g;
    g.entries = s().entries * ry(-std::numbers::pi / 4).entries * s().entries.adjoint();
    return g;
}

inline GateMatrix parse(const std::string& name) {
    if (name == "identity")
        return identity();
    if (name == "x_t")
        return x_t();
    if (name == "s_ry_sdag")
        return s_ry_sdag();
    throw InvalidArgument("unknown gate target '" + name + "' (identity, x_t, s_ry_sdag)");
}

} // namespace gates

inline double state_fidelity(const SpectralState& a, const SpectralState& b) { return std::norm(overlap(a, b)); }

struct LogicalBasis {
    SpectralState e0;
    SpectralState e1;
    cplx raw_overlap; // <0_t|1_t>
};

inline LogicalBasis orthonormal_logical_basis(const CombSpec& spec) {
    auto zero = build_physical_state(LogicalLabel::Zero_t, spec);
    auto one = build_physical_state(LogicalLabel::One_t, spec);
    const cplx c = overlap(zero, one);
    if (std::abs(c) > 1.0 - 1e-6)
        throw DegenerateBasis("|<0_t|1_t>| = " + std::to_string(std::abs(c)) + " exceeds 1 - 1e-6");
    std::vector<cplx> v = one.amplitudes();
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] -= c * zero[j];
    auto e1 = normalized(SpectralState(spec.grid, std::move(v)));
    // one Gram-Schmidt pass leaves O(eps / |1 - |c|^2|) residue; a second pass removes it
    const cplx r = overlap(zero, e1);
    std::vector<cplx> w = e1.amplitudes();
    for (std::size_t j = 0; j < w.size(); ++j)
        w[j] -= r * zero[j];
    return {std::move(zero), normalized(SpectralState(spec.grid, std::move(w))), c};
}

// W_ij = <e_i| exp(i beta w^2) |e_j>
inline GateMatrix implemented_gate(Chirp chirp, const LogicalBasis& basis) {
    const auto u0 = apply_chirp(basis.e0, chirp);
    const auto u1 = apply_chirp(basis.e1, chirp);
    GateMatrix w;
    w.entries << overlap(basis.e0, u0), overlap(basis.e0, u1), overlap(basis.e1, u0), overlap(basis.e1, u1);
    return w;
}

// |Tr(T^dag W)|^2 / (Tr(W^dag W) Tr(T^dag T))
inline double gate_fidelity(const Eigen::Matrix2cd& w, const Eigen::Matrix2cd& target) {
    const double num = std::norm((target.adjoint() * w).trace());
    const double den = (w.adjoint() * w).trace().real() * (target.adjoint() * target).trace().real();
    return den > 0.0 ? num / den : 0.0;
}

inline double gate_fidelity(Chirp chirp, const GateMatrix& target, const CombSpec& spec) {
    return gate_fidelity(implemented_gate(chirp, orthonormal_logical_basis(spec)).entries, target.entries);
}

// <-i|U|e0> / <+i|U|e1> for U the half-Talbot chirp, with +-i = (e0 +- i e1)/sqrt 2.
// Tends to i for ideal combs.
inline cplx half_talbot_phase_ratio(const CombSpec& spec) {
    const auto w = implemented_gate(Chirp::talbot(0.5), orthonormal_logical_basis(spec)).entries;
    const cplx i(0, 1);
    return (w(0, 0) + i * w(1, 0)) / (w(0, 1) - i * w(1, 1));
}

struct AxisRange {
    double lo = 0, hi = 0;
    int n = 1;
    bool log = false;

    std::vector<double> samples() const {
        if (n < 1)
            throw InvalidArgument("axis needs at least one sample");
        if (!log)
            return linspace(lo, hi, n);
        if (!(lo > 0 && hi > 0))
            throw InvalidArgument("log axis needs positive bounds");
        auto v = linspace(std::log(lo), std::log(hi), n);
        for (auto& x : v)
            x = std::exp(x);
        if (n > 1) {
            v.front() = lo;
            v.back() = hi;
        }
        return v;
    }
};

struct CellWarning {
    std::size_t i = 0, j = 0;
    std::string message;
    bool non_convergence = false;
};

struct FidelityMap {
    std::vector<double> kappa_axis, sigma_axis;
    Eigen::MatrixXd values; // (kappa index, sigma index)
    double beta = 0.0;      // units of beta_T
    std::vector<CellWarning> warnings;
};

enum class SweepMetric { gate, state };

struct SweepTarget {
    SweepMetric metric = SweepMetric::gate;
    GateMatrix gate;                            // gate metric
    LogicalLabel initial = LogicalLabel::Zero_t; // state metric: F(chirp(initial), expected)
    LogicalLabel expected = LogicalLabel::One_t;
};

// Evaluates cell(kappa, sigma) on the grid; exceptions become NaN cells with a warning.
template <class Cell>
FidelityMap sweep_map(const AxisRange& kappa, const AxisRange& sigma, unsigned threads, Cell&& cell) {
    FidelityMap m;
    m.kappa_axis = kappa.samples();
    m.sigma_axis = sigma.samples();
    const std::size_t nk = m.kappa_axis.size(), ns = m.sigma_axis.size();
    m.values.resize(static_cast<Eigen::Index>(nk), static_cast<Eigen::Index>(ns));
    std::vector<std::string> errors(nk * ns);
    std::vector<char> diverged(nk * ns, 0);
    parallel_for(nk * ns, threads, [&](std::size_t idx) {
        const std::size_t i = idx / ns, j = idx % ns;
        double v;
        try {
            v = cell(m.kappa_axis[i], m.sigma_axis[j]);
        } catch (const Error& e) {
            v = std::numeric_limits<double>::quiet_NaN();
            errors[idx] = e.what();
            diverged[idx] = dynamic_cast<const NonConvergence*>(&e) != nullptr;
        }
        m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    });
    for (std::size_t idx = 0; idx < errors.size(); ++idx)
        if (!errors[idx].empty())
            m.warnings.push_back({idx / ns, idx % ns, errors[idx], diverged[idx] != 0});
    return m;
}

inline FidelityMap fidelity_sweep(Chirp chirp, const SweepTarget& target, const AxisRange& kappa,
                                  const AxisRange& sigma, unsigned threads = 1) {
    auto m = sweep_map(kappa, sigma, threads, [&](double k, double s) {
        const auto spec = CombSpec::make(k, s);
        if (target.metric == SweepMetric::gate)
            return gate_fidelity(chirp, target.gate, spec);
        const auto a = apply_chirp(build_physical_state(target.initial, spec), chirp);
        return state_fidelity(a, build_physical_state(target.expected, spec));
    });
    m.beta = chirp.talbot_fraction();
    return m;
}

} // namespace tfgkp

#endif
