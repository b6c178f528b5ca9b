#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <tfgkp/analytic.hpp>
#include <tfgkp/comb.hpp>
#include <tfgkp/propagation.hpp>

#include "oracle.hpp"

using namespace tfgkp;
using L = LogicalLabel;

namespace {

std::size_t index_at(const GridSpec& g, double w) {
    return static_cast<std::size_t>(g.offset_index(std::lround(w * g.samples_per_fsr)));
}

} // namespace

TEST(CombSpec, DefaultsFollowTruncationAndGridPolicy) {
    const auto s = CombSpec::make(10, 0.05);
    EXPECT_EQ(s.n_max, 50);
    EXPECT_EQ(s.grid.samples_per_fsr, 128);
    EXPECT_GE(s.grid.span, 2 * (50 + 5 * 0.05));
    EXPECT_EQ(s.grid.size(), 16384u);
    EXPECT_NO_THROW(s.validate());
    EXPECT_EQ(CombSpec::make(3, 0.3).grid.samples_per_fsr, 64);
    EXPECT_EQ(CombSpec::make(5, 1e-3).grid.samples_per_fsr, 4096);
}

TEST(CombSpec, RejectsBadWidthsAndNarrowGrids) {
    EXPECT_THROW(CombSpec::make(10, 0.0), NonPositiveWidth);
    EXPECT_THROW(CombSpec::make(10, -0.1), NonPositiveWidth);
    EXPECT_THROW(CombSpec::make(0.0, 0.1), NonPositiveWidth);
    EXPECT_THROW(CombSpec::make(INFINITY, 0.1), NonPositiveWidth);
    auto s = CombSpec::make(4, 0.1);
    s.grid = GridSpec{64, 32.0};
    EXPECT_THROW(build_physical_state(L::Zero_t, s), GridTooNarrow);
    s.grid = GridSpec{64, 40.0};
    EXPECT_THROW(s.validate(), InvalidArgument); // 2560 samples is not a power of two
    s.grid = GridSpec{8, 64.0};
    EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(CombSpec, FlagsOverlappingPeaks) {
    EXPECT_TRUE(CombSpec::make(3, 0.6).overlapping_peaks());
    EXPECT_FALSE(CombSpec::make(3, 0.3).overlapping_peaks());
}

TEST(LogicalLabel, DualMapIsAnInvolutionOnStates) {
    for (auto& [l, name] : label_names) {
        EXPECT_EQ(dual(dual(l)), l) << name;
        EXPECT_EQ(canonical(dual(l)), canonical(l)) << name;
        EXPECT_EQ(parse_label(name), l);
    }
    EXPECT_EQ(dual(L::Zero_t), L::Plus_omega);
    EXPECT_EQ(dual(L::Zero_omega), L::Plus_t);
    EXPECT_EQ(dual(L::One_t), L::Minus_omega);
    EXPECT_THROW(parse_label("zero"), InvalidArgument);
}

TEST(BuildState, EveryLabelHasUnitNorm) {
    for (auto spec : {CombSpec::make(10, 0.05), CombSpec::make(2, 0.3), CombSpec::make(0.7, 0.6)})
        for (auto& [l, name] : label_names) {
            const auto s = build_physical_state(l, spec);
            EXPECT_NEAR(s.norm(), 1.0, 1e-9) << name;
            EXPECT_EQ(s.size(), spec.grid.size());
            EXPECT_EQ(s.domain(), Domain::frequency);
        }
}

TEST(BuildState, ZeroOmegaHasMaximaOnlyAtEvenMultiples) {
    const auto spec = CombSpec::make(10, 0.05);
    const auto s = build_physical_state(L::Zero_omega, spec);
    const auto& a = s.amplitudes();
    for (std::size_t j = 1; j + 1 < a.size(); ++j) {
        const double v = std::abs(a[j]);
        if (v > 1e-3 && v >= std::abs(a[j - 1]) && v >= std::abs(a[j + 1])) {
            const double w = s.coordinate(j);
            EXPECT_NEAR(w, std::round(w), 1e-12);
            EXPECT_EQ(std::lround(w) % 2, 0) << w;
        }
    }
}

TEST(BuildState, ParityStructureOfZeroOmega) {
    const auto spec = CombSpec::make(10, 0.05);
    const auto s = build_physical_state(L::Zero_omega, spec);
    double mx = 0;
    for (auto& x : s.amplitudes())
        mx = std::max(mx, std::abs(x));
    for (int p = -spec.n_max; p <= spec.n_max; ++p)
        if (p % 2 != 0) {
            EXPECT_LT(std::abs(s[index_at(spec.grid, p)]), 1e-10 * mx) << p;
        }
}

TEST(BuildState, MinusOmegaAlternatesSign) {
    const auto spec = CombSpec::make(10, 0.05);
    const auto s = build_physical_state(L::Minus_omega, spec);
    const double a0 = s[index_at(spec.grid, 0)].real(), a1 = s[index_at(spec.grid, 1)].real();
    EXPECT_GT(a0, 0);
    EXPECT_LT(a1, 0);
}

TEST(BuildState, PlusOmegaNamesTheSameStateAsZeroT) {
    const auto spec = CombSpec::make(4, 0.1);
    EXPECT_NEAR(std::abs(overlap(build_physical_state(L::Zero_t, spec), build_physical_state(L::Plus_omega, spec))),
                1.0, 1e-12);
}

TEST(Overlap, SelfOverlapAndHermitianSymmetry) {
    const auto spec = CombSpec::make(3, 0.2);
    for (auto a : codewords)
        for (auto b : codewords) {
            const auto sa = build_physical_state(a, spec), sb = build_physical_state(b, spec);
            const cplx ab = overlap(sa, sb), ba = overlap(sb, sa);
            EXPECT_NEAR(std::abs(ab - std::conj(ba)), 0.0, 1e-12);
            EXPECT_LE(std::abs(ab), 1.0 + 1e-9);
            if (a == b) {
                EXPECT_NEAR(ab.real(), 1.0, 1e-12);
            }
        }
}

TEST(Overlap, RejectsMismatchedGridsAndDomains) {
    const auto a = build_physical_state(L::Zero_t, CombSpec::make(3, 0.2));
    const auto b = build_physical_state(L::Zero_t, CombSpec::make(3, 0.2, {}, 128));
    EXPECT_THROW(overlap(a, b), GridMismatch);
    EXPECT_THROW(overlap(a, to_time_domain(a)), GridMismatch);
}

// Trapezoid quadrature on the grid against the grid-free Gaussian integral oracle.
TEST(Overlap, QuadratureMatchesClosedFormOracle) {
    for (auto spec : {CombSpec::make(3, 0.2), CombSpec::make(1.5, 0.45), CombSpec::make(6, 0.08)})
        for (auto a : codewords)
            for (auto b : codewords) {
                const cplx num = overlap(build_physical_state(a, spec), build_physical_state(b, spec));
                const cplx ref = oracle::chirp_overlap(oracle::codeword(a, spec), oracle::codeword(b, spec), 0.0);
                EXPECT_NEAR(std::abs(num - ref), 0.0, 1e-11) << to_string(a) << " " << to_string(b);
            }
}

// Exact lattice sums against the closed-form oracle of the truncated comb.
TEST(AnalyticSums, OverlapsMatchOracle) {
    for (auto spec : {CombSpec::make(3, 0.3), CombSpec::make(1.0, 0.2), CombSpec::make(0.6, 0.4)}) {
        const double f = oracle::chirp_overlap(oracle::codeword(L::Zero_omega, spec),
                                               oracle::codeword(L::One_omega, spec), 0.0)
                             .real();
        const double t =
            oracle::chirp_overlap(oracle::codeword(L::Zero_t, spec), oracle::codeword(L::One_t, spec), 0.0).real();
        EXPECT_NEAR(analytic_overlap_freq(spec), f, 1e-9 * std::max(1.0, f));
        EXPECT_NEAR(analytic_overlap_time(spec), t, 1e-9);
    }
}

TEST(AnalyticSums, FrequencyOverlapAtNarrowPeaks) {
    // exact value is 2 exp(-1/(4 sigma^2)): both nearest neighbours contribute
    const auto spec = CombSpec::make(50, 0.1);
    const double exact = analytic_overlap_freq(spec);
    EXPECT_NEAR(exact / std::exp(-25.0), 2.0, 2e-3);
    EXPECT_NEAR(exact / overlap_freq_leading_order(spec), 1.0, 1e-3);
    const double num =
        overlap(build_physical_state(L::Zero_omega, spec), build_physical_state(L::One_omega, spec)).real();
    EXPECT_NEAR(num / exact, 1.0, 1e-6);
}

TEST(AnalyticSums, FrequencyOverlapInTheOverlappingPeakRegime) {
    const auto spec = CombSpec::make(10, 0.3);
    EXPECT_NEAR(analytic_overlap_freq(spec), 0.124349, 1e-5);
    EXPECT_NEAR(analytic_overlap_freq(spec) / (2 * std::exp(-1 / 0.36)), 1.0, 0.01);
}

TEST(AnalyticSums, TimeOverlapValues) {
    EXPECT_NEAR(analytic_overlap_time(CombSpec::make(2, 0.01)), 1.034209e-4, 1e-9);
    EXPECT_NEAR(analytic_overlap_time(CombSpec::make(2, 0.01)) / (2 * std::exp(-std::numbers::pi * std::numbers::pi)),
                1.0, 1e-3);
    EXPECT_NEAR(analytic_overlap_time(CombSpec::make(1, 0.01)), 0.1695506, 1e-6);
    EXPECT_NEAR(analytic_overlap_time(CombSpec::make(0.5, 0.01)), 0.9292172, 1e-6);
}

TEST(AnalyticSums, TimeOverlapMatchesNumericalBelowLeadingOrderRegime) {
    for (double k : {0.5, 1.0, 2.0}) {
        const auto spec = CombSpec::make(k, 0.01);
        const double num = overlap(build_physical_state(L::Zero_t, spec), build_physical_state(L::One_t, spec)).real();
        EXPECT_NEAR(num / analytic_overlap_time(spec), 1.0, 1e-6) << k;
    }
}

TEST(AnalyticSums, OrthogonalityLimits) {
    EXPECT_LT(analytic_overlap_freq(CombSpec::make(10, 1e-3)), 1e-300);
    EXPECT_LT(analytic_overlap_time(CombSpec::make(20, 0.05)), 1e-300);
}

TEST(AnalyticSums, AsymptoticAgreementForNarrowPeaksAndWideEnvelopes) {
    for (double k : {20.0, 30.0})
        for (double s : {0.05, 0.1}) {
            const auto spec = CombSpec::make(k, s);
            const double num =
                overlap(build_physical_state(L::Zero_omega, spec), build_physical_state(L::One_omega, spec)).real();
            const double ex = analytic_overlap_freq(spec);
            if (std::abs(num) > 1e-12 || ex > 1e-12) {
                EXPECT_NEAR(num / ex, 1.0, 0.05) << k << " " << s;
            }
        }
}

TEST(NormalizationFactors, MatchLeadingOrderAtTheOperatingPoint) {
    const auto r = normalization_factors(CombSpec::make(10, 0.05));
    EXPECT_NEAR(r.exact.n0_omega, std::sqrt(2 / (std::numbers::pi * 0.5)), 0.01 * 1.128);
    EXPECT_NEAR(r.exact.n0_omega / r.asymptotic.n0_omega, 1.0, 0.01);
    EXPECT_NEAR(r.exact.n0_t / r.asymptotic.n0_t, 1.0, 0.01);
    EXPECT_NEAR(r.exact.n0_omega / r.exact.n1_omega, 1.0, 1e-3);
    EXPECT_FALSE(r.asymptotic_unreliable);
}

TEST(NormalizationFactors, TimeFactorScalesAsSqrtTwoKappaSigma) {
    const auto r = normalization_factors(CombSpec::make(2, 0.01));
    EXPECT_NEAR(r.exact.n0_t, std::sqrt(2 * 2 * 0.01), 1e-6);
    EXPECT_NEAR(r.exact.n1_t, r.exact.n0_t, 1e-6);
}

TEST(NormalizationFactors, FlagWhenPeaksAreWide) {
    const auto r = normalization_factors(CombSpec::make(10, 0.8));
    EXPECT_TRUE(r.asymptotic_unreliable);
    EXPECT_GT(r.exact.n0_omega, 0);
}

TEST(NormalizationFactors, ExactSumsNormalizeTheClosedFormStates) {
    const auto spec = CombSpec::make(1.3, 0.35, 40);
    const auto nf = normalization_factors(spec).exact;
    // unnormalized oracle combs of 0_omega and the time-domain 0_t
    auto raw = oracle::codeword(L::Zero_omega, spec);
    for (auto& c : raw.coeff)
        c = 1.0;
    EXPECT_NEAR(nf.n0_omega * std::sqrt(oracle::chirp_overlap(raw, raw, 0).real()), 1.0, 1e-10);
    double sum = 0;
    const double dt = 1e-3;
    for (double t = -60; t < 60; t += dt)
        sum += std::pow(oracle::time_comb(t, spec.envelope_width, spec.peak_width, 0), 2) * dt;
    EXPECT_NEAR(nf.n0_t * nf.n0_t * sum, 1.0, 1e-8);
}

TEST(LatticeSums, NonConvergenceAtTinyCap) {
    LatticeSumOptions opt;
    opt.cap = 3;
    EXPECT_THROW(normalization_factors(CombSpec::make(20, 0.05), opt), NonConvergence);
}

// The Fourier transform of the frequency-domain 0_t (1_t) is the discrete-envelope
// time comb with peaks at 2k pi ((2k+1) pi).
TEST(DualConsistency, TimeDomainMatchesClosedFormComb) {
    for (auto spec : {CombSpec::make(10, 0.05), CombSpec::make(5, 0.02)})
        for (int shift : {0, 1}) {
            const auto psi = to_time_domain(build_physical_state(shift ? L::One_t : L::Zero_t, spec));
            std::vector<cplx> ref(psi.size());
            for (std::size_t k = 0; k < ref.size(); ++k)
                ref[k] = oracle::time_comb(psi.coordinate(k), spec.envelope_width, spec.peak_width, shift);
            const auto r = normalized(SpectralState(spec.grid, ref, Domain::time));
            EXPECT_GT(std::norm(overlap(psi, r)), 1 - 1e-6);
        }
}
