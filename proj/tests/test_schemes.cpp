#include <doctest.h>

#include <array>
#include <cmath>

#include "gmac/rng.hpp"
#include "gmac/schemes.hpp"

using namespace gmac;

namespace {

const SourceParams kUnitHalf{1.0, 0.5};

// Small dense solver for the test-side model oracle.
std::array<double, 3> solve3x3(double k[3][3], const std::array<double, 3>& c) {
    double m[3][4];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) m[i][j] = k[i][j];
        m[i][3] = c[i];
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row) {
            if (std::fabs(m[row][col]) > std::fabs(m[piv][col])) piv = row;
        }
        for (int j = col; j < 4; ++j) std::swap(m[piv][j], m[col][j]);
        for (int row = col + 1; row < 3; ++row) {
            const double f = m[row][col] / m[col][col];
            for (int j = col; j < 4; ++j) m[row][j] -= f * m[col][j];
        }
    }
    std::array<double, 3> x{};
    for (int i = 2; i >= 0; --i) {
        double s = m[i][3];
        for (int j = i + 1; j < 3; ++j) s -= m[i][j] * x[j];
        x[i] = s / m[i][i];
    }
    return x;
}

}  // namespace

TEST_CASE("pt2pt_uncoded symmetric weights") {
    // alpha = beta collapses to sigma2 (P(1-rho)+2N) / (2(P+N)).
    const auto d = pt2pt_uncoded(0.7, 0.7, kUnitHalf, 1.0, 2.0);
    CHECK(d.d1 == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(d.d2 == doctest::Approx(0.75).epsilon(1e-12));

    const auto d2 = pt2pt_uncoded(1.3, 1.3, SourceParams{1.0, 0.0}, 1.0, 1.0);
    CHECK(d2.d1 == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(d2.d2 == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("pt2pt_uncoded with beta = 0 degenerates to a scalar AWGN link") {
    const double p = 1.7, n = 0.9;
    const auto d = pt2pt_uncoded(0.4, 0.0, kUnitHalf, p, n);
    CHECK(d.d1 == doctest::Approx(n / (p + n)).epsilon(1e-12));
    CHECK(d.d2 == doctest::Approx((p * 0.75 + n) / (p + n)).epsilon(1e-12));
    CHECK_THROWS_AS(pt2pt_uncoded(0.0, 0.0, kUnitHalf, 1.0, 1.0), ZeroInput);
}

TEST_CASE("pt2pt_threshold_gamma values") {
    CHECK(pt2pt_threshold_gamma(0.375, kUnitHalf) == doctest::Approx(2.0 + 1.0 / 3.0));
    CHECK(std::isinf(pt2pt_threshold_gamma(0.8, kUnitHalf)));
    CHECK(std::isinf(pt2pt_threshold_gamma(0.75, kUnitHalf)));
    CHECK_THROWS_AS(pt2pt_threshold_gamma(0.0, kUnitHalf), OutOfDomain);
}

TEST_CASE("symmetric threshold consistency with the uncoded point") {
    // At P/N = 2 rho/(1-rho) the symmetric uncoded distortion meets the
    // threshold with equality.
    for (double rho : {0.25, 0.5, 0.75}) {
        const SourceParams src{1.0, rho};
        const double snr = 2.0 * rho / (1.0 - rho);
        const double p = snr, n = 1.0;
        const double d_sym = (p * (1.0 - rho) + 2.0 * n) / (2.0 * (p + n));
        CHECK(pt2pt_threshold_gamma(d_sym, src) == doctest::Approx(snr).epsilon(1e-12));
    }
}

TEST_CASE("mac_uncoded distortions") {
    const auto d = mac_uncoded(kUnitHalf, MacChannel{1.0, 1.0, 2.0});
    CHECK(d.d1 == doctest::Approx(0.55).epsilon(1e-12));
    CHECK(d.d2 == doctest::Approx(0.55).epsilon(1e-12));

    const auto da = mac_uncoded(kUnitHalf, MacChannel{1.0, 4.0, 1.0});
    CHECK(da.d1 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(da.d2 == doctest::Approx(0.21875).epsilon(1e-12));

    // rho = 0 and symmetric: sigma2 (P+N)/(2P+N).
    const auto dz = mac_uncoded(SourceParams{1.0, 0.0}, MacChannel{2.0, 2.0, 1.0});
    CHECK(dz.d1 == doctest::Approx(3.0 / 5.0).epsilon(1e-12));

    // High-SNR limit does not vanish.
    const auto dh = mac_uncoded(kUnitHalf, MacChannel{1e9, 1e9, 1.0});
    CHECK(dh.d1 == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("mac_uncoded_is_optimal condition") {
    const auto yes = mac_uncoded_is_optimal(kUnitHalf, MacChannel{1.0, 1.0, 2.0});
    CHECK(yes.optimal);
    CHECK(yes.slack == doctest::Approx(1.75 - 1.125).epsilon(1e-12));

    const auto no = mac_uncoded_is_optimal(kUnitHalf, MacChannel{1.0, 1.0, 0.1});
    CHECK_FALSE(no.optimal);

    // rho = 0 is never optimal (right side vanishes).
    const auto nz = mac_uncoded_is_optimal(SourceParams{1.0, 0.0}, MacChannel{1.0, 1.0, 5.0});
    CHECK_FALSE(nz.optimal);
    CHECK(nz.slack < 0.0);
}

TEST_CASE("mac uncoded equals pt2pt uncoded with the matched weights") {
    CounterRng rng(3);
    for (int i = 0; i < 50; ++i) {
        const SourceParams src{0.5 + 2.0 * rng.uniform01(), 0.9 * rng.uniform01()};
        const MacChannel ch{0.2 + 3.0 * rng.uniform01(), 0.2 + 3.0 * rng.uniform01(),
                            0.2 + 2.0 * rng.uniform01()};
        const double alpha = std::sqrt(ch.p1 / src.sigma2);
        const double beta = std::sqrt(ch.p2 / src.sigma2);
        const double p = ch.p1 + ch.p2 + 2.0 * src.rho * std::sqrt(ch.p1 * ch.p2);
        const auto via_pt2pt = pt2pt_uncoded(alpha, beta, src, p, ch.noise);
        const auto direct = mac_uncoded(src, ch);
        CHECK(via_pt2pt.d1 == doctest::Approx(direct.d1).epsilon(1e-12));
        CHECK(via_pt2pt.d2 == doctest::Approx(direct.d2).epsilon(1e-12));
    }
}

TEST_CASE("rho_tilde") {
    CHECK(rho_tilde({0.0, 0.0}, 0.5) == doctest::Approx(0.0));
    CHECK(rho_tilde({1.0, 1.0}, 0.5) == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(rho_tilde({40.0, 40.0}, 0.5) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("vq_distortions") {
    const auto d = vq_distortions({1.0, 1.0}, kUnitHalf);
    CHECK(d.d1 == doctest::Approx(0.203125 / 0.859375).epsilon(1e-12));
    CHECK(d.d2 == doctest::Approx(d.d1).epsilon(1e-12));

    const auto d0 = vq_distortions({0.0, 0.0}, kUnitHalf);
    CHECK(d0.d1 == doctest::Approx(1.0));
    CHECK(d0.d2 == doctest::Approx(1.0));

    const auto dz = vq_distortions({0.75, 1.5}, SourceParams{2.0, 0.0});
    CHECK(dz.d1 == doctest::Approx(2.0 * std::exp2(-1.5)).epsilon(1e-12));
    CHECK(dz.d2 == doctest::Approx(2.0 * std::exp2(-3.0)).epsilon(1e-12));
}

TEST_CASE("vq_rate_feasible around the symmetric sum-constraint boundary") {
    // R1 = R2 = 1, rho = 0.5: rho_tilde = 0.375 and the sum constraint
    // flips where (2P(1+0.375)+N)/(N(1-0.140625)) = 2^4, i.e. at
    // P/N = (16*0.859375 - 1)/2.75 = 4.6363...
    const RatePair r{1.0, 1.0};
    const double flip = (16.0 * 0.859375 - 1.0) / 2.75;
    const auto below = vq_rate_feasible(r, kUnitHalf, MacChannel{flip - 0.05, flip - 0.05, 1.0});
    CHECK_FALSE(below.feasible);
    CHECK(below.slacks[2] < 0.0);
    const auto above = vq_rate_feasible(r, kUnitHalf, MacChannel{flip + 0.05, flip + 0.05, 1.0});
    CHECK(above.feasible);
    // P/N = 5 sits above the flip: feasible with all three slacks positive.
    const auto at5 = vq_rate_feasible(r, kUnitHalf, MacChannel{5.0, 5.0, 1.0});
    CHECK(at5.feasible);
    CHECK(at5.slacks[0] > 0.0);
    CHECK(at5.slacks[1] > 0.0);
    CHECK(at5.slacks[2] > 0.0);

    CHECK(vq_rate_feasible({0.0, 0.0}, kUnitHalf, MacChannel{0.01, 0.01, 1.0}).feasible);
    CHECK_FALSE(vq_rate_feasible({30.0, 30.0}, kUnitHalf, MacChannel{10.0, 10.0, 1.0}).feasible);
}

TEST_CASE("vq distortions vanish and feasibility dies as the rates grow") {
    const MacChannel ch{4.0, 4.0, 1.0};
    double prev1 = 2.0, prev2 = 2.0;
    bool was_feasible = true;
    for (double r = 0.25; r <= 16.0; r *= 2.0) {
        const auto d = vq_distortions({r, r}, kUnitHalf);
        CHECK(d.d1 < prev1);
        CHECK(d.d2 < prev2);
        prev1 = d.d1;
        prev2 = d.d2;
        const bool feasible = vq_rate_feasible({r, r}, kUnitHalf, ch).feasible;
        CHECK((was_feasible || !feasible));  // feasibility never comes back
        was_feasible = feasible;
    }
    CHECK(prev1 < 1e-6);
    CHECK_FALSE(was_feasible);
}

TEST_CASE("vq_estimator_coeffs") {
    const auto v = vq_estimator_coeffs({1.0, 1.0}, 0.5);
    CHECK(v.gamma11 == doctest::Approx(0.8125 / 0.859375).epsilon(1e-12));
    CHECK(v.gamma12 == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(v.gamma21 == doctest::Approx(v.gamma11));
    CHECK(v.gamma22 == doctest::Approx(v.gamma12));

    const auto vz = vq_estimator_coeffs({1.0, 2.0}, 0.0);
    CHECK(vz.gamma11 == doctest::Approx(1.0));
    CHECK(vz.gamma12 == doctest::Approx(0.0));
}

TEST_CASE("gamma bounds hold on random rate/correlation draws") {
    CounterRng rng(19);
    for (int i = 0; i < 300; ++i) {
        const double rho = 0.01 + 0.97 * rng.uniform01();
        const RatePair r{0.05 + 4.0 * rng.uniform01(), 0.05 + 4.0 * rng.uniform01()};
        const auto v = vq_estimator_coeffs(r, rho);
        CHECK(v.gamma11 > 0.0);
        CHECK(v.gamma11 <= 1.0 + 1e-12);
        CHECK(v.gamma21 > 0.0);
        CHECK(v.gamma21 <= 1.0 + 1e-12);
        CHECK(v.gamma12 > 0.0);
        CHECK(v.gamma12 <= rho + 1e-12);
        CHECK(v.gamma22 > 0.0);
        CHECK(v.gamma22 <= rho + 1e-12);
    }
}

TEST_CASE("vq_derived fills the channel scalings") {
    const auto v = vq_derived({1.0, 1.0}, kUnitHalf, MacChannel{3.0, 1.0, 1.0});
    CHECK(v.alpha1 == doctest::Approx(std::sqrt(3.0 / 0.75)).epsilon(1e-12));
    CHECK(v.alpha2 == doctest::Approx(std::sqrt(1.0 / 0.75)).epsilon(1e-12));
}

TEST_CASE("sp_derive rejects out-of-range inputs") {
    const MacChannel ch{1.0, 1.0, 1.0};
    CHECK_THROWS_AS(sp_derive({{1.0, 1.0}, 1.5, 0.0}, kUnitHalf, ch), InfeasibleAlpha);
    CHECK_THROWS_AS(sp_derive({{1.0, 1.0}, -0.1, 0.0}, kUnitHalf, ch), InfeasibleAlpha);
    CHECK_THROWS_AS(sp_derive({{1e-9, 1.0}, 0.1, 0.1}, kUnitHalf, ch), SingularK);
}

TEST_CASE("sp_derive: alpha at the upper endpoint zeroes beta") {
    const MacChannel ch{2.0, 2.0, 1.0};
    const double amax = std::sqrt(2.0);
    const auto der = sp_derive({{0.8, 0.8}, amax, amax}, kUnitHalf, ch);
    CHECK(der.beta1 == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(der.beta2 == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("sp_derive matches the symmetric-case reductions") {
    const MacChannel ch{1.0, 1.0, 1.0};
    for (double r : {0.3, 0.8, 1.5}) {
        for (double alpha : {0.0, 0.3, 0.7}) {
            const auto der = sp_derive({{r, r}, alpha, alpha}, kUnitHalf, ch);
            const double t = std::exp2(-2.0 * r);
            const double e = 1.0 - t;
            const double rho = 0.5;
            const double rt = rho * e;
            const double rt2 = rt * rt;
            // a = rho 2^{-2R} / (1 - rho_tilde^2)
            CHECK(der.a1 == doctest::Approx(rho * t / (1.0 - rt2)).epsilon(1e-12));
            CHECK(der.a2 == doctest::Approx(der.a1).epsilon(1e-12));
            // beta' = alpha (1 + rho 2^{-2R} (1-rho_tilde)/(1-rho_tilde^2)) + beta
            const double expect_bp =
                alpha * (1.0 + rho * t * (1.0 - rt) / (1.0 - rt2)) + der.beta1;
            CHECK(der.beta1p == doctest::Approx(expect_bp).epsilon(1e-12));
            // nu1 = sigma2 2^{-2R} (1 - rho rho_tilde)/(1 - rho_tilde^2)
            CHECK(der.nu1 == doctest::Approx(t * (1.0 - rho * rt) / (1.0 - rt2)).epsilon(1e-10));
            CHECK(der.nu2 == doctest::Approx(der.nu1).epsilon(1e-12));
            // nu3 = sigma2 rho 2^{-4R}/(1 - rho_tilde^2)
            CHECK(der.nu3 == doctest::Approx(rho * t * t / (1.0 - rt2)).epsilon(1e-10));
            // N' = 2 alpha^2 (nu1 + nu3) + N
            CHECK(der.n_prime ==
                  doctest::Approx(2.0 * alpha * alpha * (der.nu1 + der.nu3) + 1.0).epsilon(1e-12));
            // k33 written with the symmetric shorthand 2 alpha c3 + 2 beta k3 + N.
            const double k1 = e;
            const double k2 = rho * e * e;
            const double k3 = (alpha + der.beta1 + alpha * rho) * k1 + der.beta1 * k2;
            const double c3s = (alpha * 1.0 + der.beta1 * k1) * (1.0 + rho);
            CHECK(der.k13 == doctest::Approx(k3).epsilon(1e-12));
            CHECK(der.k33 ==
                  doctest::Approx(2.0 * alpha * c3s + 2.0 * der.beta1 * k3 + 1.0).epsilon(1e-10));
            CHECK(der.residual1 <= 1e-10);
            CHECK(der.residual2 <= 1e-10);
        }
    }
}

TEST_CASE("sp_derive agrees with a jointly-Gaussian model oracle") {
    // Model: U_i = e_i S_i + V_i with V_i independent of everything,
    // Var V_i = sigma2 e_i (1 - e_i); Y = alpha1 S1 + beta1 U1 +
    // alpha2 S2 + beta2 U2 + Z. Build K = cov(U1, U2, Y) and
    // c_i = E[S_i (U1, U2, Y)] from first principles and compare.
    CounterRng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const double s2 = 0.5 + 2.0 * rng.uniform01();
        const double rho = 0.05 + 0.9 * rng.uniform01();
        const SourceParams src{s2, rho};
        const MacChannel ch{0.3 + 2.0 * rng.uniform01(), 0.3 + 2.0 * rng.uniform01(),
                            0.2 + 1.5 * rng.uniform01()};
        const RatePair r{0.2 + 2.0 * rng.uniform01(), 0.2 + 2.0 * rng.uniform01()};
        const double a1 = std::sqrt(ch.p1 / s2) * rng.uniform01();
        const double a2 = std::sqrt(ch.p2 / s2) * rng.uniform01();
        const auto der = sp_derive({r, a1, a2}, src, ch);

        const double e1 = 1.0 - std::exp2(-2.0 * r.r1);
        const double e2 = 1.0 - std::exp2(-2.0 * r.r2);
        const double b1 = der.beta1, b2 = der.beta2;
        // Second moments in the model.
        const double uu11 = s2 * e1;
        const double uu22 = s2 * e2;
        const double uu12 = s2 * rho * e1 * e2;
        const double su11 = s2 * e1;        // E[S1 U1]
        const double su12 = s2 * rho * e2;  // E[S1 U2]
        const double su21 = s2 * rho * e1;  // E[S2 U1]
        const double su22 = s2 * e2;
        const double y_u1 = a1 * su11 + b1 * uu11 + a2 * su21 + b2 * uu12;
        const double y_u2 = a1 * su12 + b1 * uu12 + a2 * su22 + b2 * uu22;
        const double y_s1 = a1 * s2 + b1 * su11 + a2 * rho * s2 + b2 * su12;
        const double y_s2 = a1 * rho * s2 + b1 * su21 + a2 * s2 + b2 * su22;
        const double y_y = a1 * a1 * s2 + a2 * a2 * s2 + 2.0 * a1 * a2 * rho * s2 +
                           b1 * b1 * uu11 + b2 * b2 * uu22 + 2.0 * b1 * b2 * uu12 +
                           2.0 * a1 * b1 * su11 + 2.0 * a1 * b2 * su12 + 2.0 * a2 * b1 * su21 +
                           2.0 * a2 * b2 * su22 + ch.noise;

        CHECK(der.k11 == doctest::Approx(uu11).epsilon(1e-12));
        CHECK(der.k12 == doctest::Approx(uu12).epsilon(1e-12));
        CHECK(der.k22 == doctest::Approx(uu22).epsilon(1e-12));
        CHECK(der.k13 == doctest::Approx(y_u1).epsilon(1e-11));
        CHECK(der.k23 == doctest::Approx(y_u2).epsilon(1e-11));
        CHECK(der.k33 == doctest::Approx(y_y).epsilon(1e-11));
        CHECK(der.c1[0] == doctest::Approx(su11).epsilon(1e-12));
        CHECK(der.c1[1] == doctest::Approx(su12).epsilon(1e-12));
        CHECK(der.c1[2] == doctest::Approx(y_s1).epsilon(1e-11));
        CHECK(der.c2[0] == doctest::Approx(su21).epsilon(1e-12));
        CHECK(der.c2[1] == doctest::Approx(su22).epsilon(1e-12));
        CHECK(der.c2[2] == doctest::Approx(y_s2).epsilon(1e-11));

        // MMSE distortions from the model against sp_distortions.
        double K[3][3] = {{uu11, uu12, y_u1}, {uu12, uu22, y_u2}, {y_u1, y_u2, y_y}};
        const auto g1 = solve3x3(K, {su11, su12, y_s1});
        const double mmse1 = s2 - (g1[0] * su11 + g1[1] * su12 + g1[2] * y_s1);
        const auto d = sp_distortions(der, src);
        CHECK(d.d1 == doctest::Approx(mmse1).epsilon(1e-9));
        CHECK(d.d1 > 0.0);
        CHECK(d.d1 <= s2 + 1e-12);
        CHECK(d.d2 > 0.0);
        CHECK(d.d2 <= s2 + 1e-12);
        CHECK(der.n_prime >= ch.noise - 1e-9);
    }
}

TEST_CASE("superposition with alpha = 0 reduces to the vector quantizer") {
    for (int i = 1; i <= 10; ++i) {
        for (int j = 1; j <= 10; ++j) {
            const double r = 0.15 * i;
            const double snr = 0.2 * std::pow(1.8, j);
            const MacChannel ch{snr, 0.7 * snr, 1.0};
            const RatePair rp{r, 0.8 * r};
            const auto der = sp_derive({rp, 0.0, 0.0}, kUnitHalf, ch);
            CHECK(der.n_prime == doctest::Approx(1.0).epsilon(1e-12));
            const auto dsp = sp_distortions(der, kUnitHalf);
            const auto dvq = vq_distortions(rp, kUnitHalf);
            CHECK(dsp.d1 == doctest::Approx(dvq.d1).epsilon(1e-9));
            CHECK(dsp.d2 == doctest::Approx(dvq.d2).epsilon(1e-9));
            const auto fsp = sp_rate_feasible(der, kUnitHalf);
            const auto fvq = vq_rate_feasible(rp, kUnitHalf, ch);
            CHECK(fsp.feasible == fvq.feasible);
            for (int k = 0; k < 3; ++k) {
                CHECK(fsp.slacks[k] == doctest::Approx(fvq.slacks[k]).epsilon(1e-9));
            }
        }
    }
}
