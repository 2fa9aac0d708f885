#include <doctest.h>

#include <cmath>

#include "gmac/model.hpp"
#include "gmac/rng.hpp"

using namespace gmac;

TEST_CASE("normalize_source keeps already-normalized sources") {
    auto [src, sb] = normalize_source(1.0, 1.0, 0.5);
    CHECK(src.sigma2 == doctest::Approx(1.0));
    CHECK(src.rho == doctest::Approx(0.5));
    CHECK(sb.alpha1 == doctest::Approx(1.0));
    CHECK(sb.alpha2 == doctest::Approx(1.0));
    CHECK(sb.rho_sign == 1);
}

TEST_CASE("normalize_source scales the second variance and strips the sign") {
    auto [src, sb] = normalize_source(1.0, 4.0, -0.5);
    CHECK(src.sigma2 == doctest::Approx(1.0));
    CHECK(src.rho == doctest::Approx(0.5));
    CHECK(sb.alpha2 == doctest::Approx(0.25));
    CHECK(sb.rho_sign == -1);
}

TEST_CASE("normalize_source keeps the common variance free") {
    auto [src, sb] = normalize_source(2.0, 2.0, 0.0);
    CHECK(src.sigma2 == doctest::Approx(2.0));
    CHECK(src.rho == doctest::Approx(0.0));
    CHECK(sb.alpha2 == doctest::Approx(1.0));
    CHECK(sb.rho_sign == 1);  // zero maps to +1
}

TEST_CASE("normalize_source rejects bad inputs") {
    CHECK_THROWS_AS(normalize_source(0.0, 1.0, 0.5), NonPositiveVariance);
    CHECK_THROWS_AS(normalize_source(1.0, -2.0, 0.5), NonPositiveVariance);
    CHECK_THROWS_AS(normalize_source(1.0, 1.0, 1.0), DegenerateCorrelation);
    CHECK_THROWS_AS(normalize_source(1.0, 1.0, -1.0), DegenerateCorrelation);
}

TEST_CASE("denormalize_distortions inverts the variance scaling") {
    ScaleBack identity;
    const DistortionPair d{0.5, 0.5};
    const auto r1 = denormalize_distortions(d, identity);
    CHECK(r1.d1 == doctest::Approx(0.5));
    CHECK(r1.d2 == doctest::Approx(0.5));

    ScaleBack sb;
    sb.alpha2 = 0.25;
    const auto r2 = denormalize_distortions(d, sb);
    CHECK(r2.d1 == doctest::Approx(0.5));
    CHECK(r2.d2 == doctest::Approx(2.0));
}

TEST_CASE("normalize then denormalize is the identity on distortions") {
    CounterRng rng(42);
    for (int i = 0; i < 200; ++i) {
        const double s1 = 0.1 + 5.0 * rng.uniform01();
        const double s2 = 0.1 + 5.0 * rng.uniform01();
        const double rho = 1.9 * rng.uniform01() - 0.95;
        auto [src, sb] = normalize_source(s1, s2, rho);
        CHECK(src.rho >= 0.0);
        CHECK(src.rho < 1.0);
        // A distortion pair stated in original coordinates maps into the
        // normalized frame by the forward scaling and back exactly.
        const DistortionPair orig{s1 * rng.uniform01(), s2 * rng.uniform01()};
        const DistortionPair normed{orig.d1 * sb.alpha1, orig.d2 * sb.alpha2};
        const DistortionPair back = denormalize_distortions(normed, sb);
        CHECK(back.d1 == doctest::Approx(orig.d1).epsilon(1e-12));
        CHECK(back.d2 == doctest::Approx(orig.d2).epsilon(1e-12));
    }
}

TEST_CASE("timeshare endpoints and midpoint") {
    const DistortionPair da{0.2, 0.6};
    const MacChannel cha{1.0, 1.0, 1.0};
    const DistortionPair db{0.6, 0.2};
    const MacChannel chb{3.0, 3.0, 1.0};

    auto [d1, c1] = timeshare(da, cha, db, chb, 1.0);
    CHECK(d1.d1 == doctest::Approx(0.2));
    CHECK(c1.p1 == doctest::Approx(1.0));

    auto [d0, c0] = timeshare(da, cha, db, chb, 0.0);
    CHECK(d0.d2 == doctest::Approx(0.2));
    CHECK(c0.p2 == doctest::Approx(3.0));

    auto [dm, cm] = timeshare(da, cha, db, chb, 0.5);
    CHECK(dm.d1 == doctest::Approx(0.4));
    CHECK(dm.d2 == doctest::Approx(0.4));
    CHECK(cm.p1 == doctest::Approx(2.0));
    CHECK(cm.p2 == doctest::Approx(2.0));
}

TEST_CASE("timeshare rejects mismatched noise and stays on the segment") {
    const DistortionPair da{0.2, 0.6};
    const DistortionPair db{0.6, 0.2};
    CHECK_THROWS_AS(timeshare(da, MacChannel{1, 1, 1}, db, MacChannel{1, 1, 2}, 0.5),
                    MismatchedNoise);

    CounterRng rng(7);
    const MacChannel cha{1.0, 2.0, 1.0};
    const MacChannel chb{3.0, 0.5, 1.0};
    for (int i = 0; i < 100; ++i) {
        const double lambda = rng.uniform01();
        auto [d, ch] = timeshare(da, cha, db, chb, lambda);
        CHECK(d.d1 >= std::min(da.d1, db.d1) - 1e-15);
        CHECK(d.d1 <= std::max(da.d1, db.d1) + 1e-15);
        CHECK(d.d2 >= std::min(da.d2, db.d2) - 1e-15);
        CHECK(d.d2 <= std::max(da.d2, db.d2) + 1e-15);
        CHECK(ch.p1 >= std::min(cha.p1, chb.p1) - 1e-15);
        CHECK(ch.p1 <= std::max(cha.p1, chb.p1) + 1e-15);
    }
}
