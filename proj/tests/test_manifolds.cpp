#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hypershift/manifolds.hpp"

using namespace hypershift;
using Catch::Approx;

TEST_CASE("unstable curves of the dyadic family") {
    auto fam = make_dyadic_family(12);

    SECTION("the all-ones history keeps the bottom edge fixed") {
        Word ones;
        for (int k = 0; k < 10; ++k) ones.symbols.push_back(1);
        for (int depth : {1, 4, 10}) {
            auto c = unstable_curve(fam, ones, depth);
            CHECK(c.graph.max_value() == Approx(0.0).margin(1e-14));
            CHECK(c.graph.min_value() == Approx(0.0).margin(1e-14));
        }
    }
    SECTION("history (2) sends the seed to the branch-2 strip bottom") {
        auto c = unstable_curve(fam, Word{2}, 1);
        CHECK(c.value_at(0.3) == Approx(0.25).margin(1e-13));
        CHECK(c.value_at(0.9) == Approx(0.25).margin(1e-13));
    }
    SECTION("curves of shear-free families are exactly horizontal with slope 0") {
        auto pe = make_perturbed_family(12, 0.1, PerturbedDecay::geometric, 0.0);
        auto c = unstable_curve(pe, Word{3, 1, 2}, 3, 0.7);
        const double y = c.value_at(0.5);
        for (double t : {0.0, 0.25, 0.61, 1.0}) {
            CHECK(c.value_at(t) == Approx(y).margin(1e-13));
            CHECK(c.slope_at(t) == Approx(0.0).margin(1e-14));
        }
    }
    SECTION("depth beyond the history is rejected") {
        CHECK_THROWS_AS(unstable_curve(fam, Word{1, 2}, 3), std::invalid_argument);
    }
}

TEST_CASE("stable curves") {
    auto fam = make_dyadic_family(12);

    SECTION("all-ones futures converge to the left edge with gap 2^-n") {
        for (int n : {2, 4, 8}) {
            Word w;
            for (int k = 0; k < n; ++k) w.symbols.push_back(1);
            auto c = stable_curve(fam, w);
            CHECK(c.value_at(0.5) <= std::ldexp(1.0, -n));
            CHECK(c.value_at(0.5) >= 0.0);
        }
    }
    SECTION("dyadic stable curves are exactly vertical") {
        auto c = stable_curve(fam, Word{3, 1, 2});
        CHECK(c.max_abs_slope() == Approx(0.0).margin(1e-12));
    }
    SECTION("shear bends stable curves while the slope bound holds") {
        auto pe = make_perturbed_family(12, 0.1, PerturbedDecay::geometric, 0.15);
        auto c = stable_curve(pe, Word{2, 1, 1, 2});
        double spread = 0.0;
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0})
            spread = std::max(spread, std::abs(c.value_at(t) - c.value_at(0.0)));
        CHECK(spread > 1e-6);                       // genuinely curved
        CHECK(c.max_abs_slope() <= pe.alpha + 1e-9);
    }
}

TEST_CASE("graph-transform contraction") {
    for (auto fam : {make_dyadic_family(12),
                     make_perturbed_family(12, 0.1, PerturbedDecay::geometric, 0.1)}) {
        const double bound = 1.0 / (fam.K0 * fam.K0) + fam.alpha * fam.alpha;
        Word history = detail::repeat_pattern({1, 2}, 9);
        double prev = -1.0;
        for (int d = 1; d + 1 <= 9; ++d) {
            auto cd = unstable_curve(fam, history, d, 0.8);
            auto cd1 = unstable_curve(fam, history, d + 1, 0.8);
            double dist = 0.0;
            for (std::size_t k = 0; k < cd.graph.size(); ++k)
                dist = std::max(dist, std::abs(cd.graph.values[k] - cd1.graph.values[k]));
            if (prev > 1e-300 && dist > 1e-300) CHECK(dist / prev <= bound + 1e-9);
            prev = dist;
        }
    }
}

TEST_CASE("stable and unstable curves cross exactly once") {
    auto fam = make_perturbed_family(10, 0.1, PerturbedDecay::geometric, 0.1);
    auto sc = stable_curve(fam, Word{2, 1, 2, 1, 1});
    auto uc = unstable_curve(fam, Word{1, 2, 2}, 3, 0.4);
    const Point z = curve_crossing(sc, uc);
    CHECK(z.x == Approx(sc.value_at(z.y)).margin(1e-10));
    CHECK(z.y == Approx(uc.value_at(z.x)).margin(1e-10));
    const Point z2 = curve_crossing(sc, uc);
    CHECK(dist_max(z, z2) < 1e-12);
}

TEST_CASE("slope field gaps") {
    SECTION("shear-free families have exactly zero gap at every depth") {
        for (auto fam : {make_dyadic_family(10),
                         make_perturbed_family(10, 0.1, PerturbedDecay::geometric, 0.0)}) {
            for (int m : {1, 2, 4}) {
                auto rect = build_mixed(fam, detail::repeat_pattern({1, 2}, m), Word{1, 2});
                auto rep = slope_field_gap(fam, rect, 6, 99);
                CHECK(rep.maxGap == Approx(0.0).margin(1e-15));
            }
        }
    }
    SECTION("sheared family: gaps decay geometrically with fitted theta0 < 1") {
        auto fam = make_perturbed_family(10, 0.1, PerturbedDecay::geometric, 0.1);
        auto fit = fit_slope_gap_decay(fam, 6, 6, 2027);
        REQUIRE(fit.valid);
        REQUIRE_FALSE(fit.exactZero);
        CHECK(fit.theta0 < 1.0);
        CHECK(fit.theta0 > 0.0);
        CHECK(fit.residual < 0.10);
    }
}

TEST_CASE("variation of log D^u F") {
    SECTION("identically zero on rectangles of the affine family") {
        auto fam = make_dyadic_family(10);
        for (int k : {1, 2, 3}) {
            auto rect = build_mixed(fam, detail::repeat_pattern({2, 1}, k),
                                    detail::repeat_pattern({1, 2}, k));
            CHECK(variation_log_Du(fam, rect, 8, 5) == Approx(0.0).margin(1e-12));
        }
    }
    SECTION("bounded on full-height rectangles of the geometric family") {
        auto fam = make_perturbed_family(10, 0.1, PerturbedDecay::geometric, 0.0);
        for (int i = 1; i <= 6; ++i) {
            auto rect = build_mixed(fam, Word{}, Word{i});
            CHECK(variation_log_Du(fam, rect, 10, 7) < 0.25);
        }
    }
    SECTION("decays along nested rectangles with fitted theta < 1") {
        auto fam = make_perturbed_family(10, 0.1, PerturbedDecay::geometric, 0.1);
        auto fit = fit_variation_decay(fam, 6, 8, 11);
        REQUIRE(fit.valid);
        REQUIRE_FALSE(fit.exactZero);
        CHECK(fit.theta0 < 1.0);
        CHECK(fit.residual < 0.10);
    }
    SECTION("affine family fits report the exact-zero degenerate case") {
        auto fam = make_dyadic_family(10);
        auto fit = fit_variation_decay(fam, 4, 6, 3);
        REQUIRE(fit.valid);
        CHECK(fit.exactZero);
        CHECK(fit.theta0 == 0.0);
        CHECK(fit.residual == 0.0);
    }
}

TEST_CASE("bounded ratio suite") {
    SECTION("all ratios are exactly 1 for the affine family") {
        auto rep = bounded_ratio_suite(make_dyadic_family(12), 4);
        CHECK(rep.fxRatio == Approx(1.0).margin(1e-12));
        CHECK(rep.widthRatio == Approx(1.0).margin(1e-12));
        CHECK(rep.duRatio == Approx(1.0).margin(1e-12));
        CHECK(rep.crossSectionRatio == Approx(1.0).margin(1e-12));
        CHECK(rep.deepCrossSectionRatio == Approx(1.0).margin(1e-10));
    }
    SECTION("geometric-decay family stays below exp(0.25)") {
        auto rep = bounded_ratio_suite(make_perturbed_family(12, 0.1, PerturbedDecay::geometric, 0.1), 5);
        const double bound = std::exp(0.25);
        CHECK(rep.fxRatio <= bound);
        CHECK(rep.duRatio <= bound);
        CHECK(rep.widthRatio <= bound);
        CHECK(rep.deepCrossSectionRatio <= bound);
    }
    SECTION("constant-decay family shows systematically larger distortion") {
        auto cons = bounded_ratio_suite(make_perturbed_family(12, 0.1, PerturbedDecay::constant, 0.1), 5);
        auto geo = bounded_ratio_suite(make_perturbed_family(12, 0.1, PerturbedDecay::geometric, 0.1), 5);
        CHECK(cons.fxRatio > geo.fxRatio);
        CHECK(cons.duRatio > geo.duRatio);
        CHECK(cons.fxRatio > 1.2);   // (1 + eps(1+s)) / (1 - eps(1+s)) at every branch
    }
}

TEST_CASE("curve CSV serialization") {
    auto fam = make_dyadic_family(8);
    auto c = stable_curve(fam, Word{2, 1});
    auto csv = curve_to_csv(c);
    CHECK(csv.rfind("kind,word,abscissa,ordinate,slope\n", 0) == 0);
    CHECK(csv.find("stable,2-1,") != std::string::npos);
}
