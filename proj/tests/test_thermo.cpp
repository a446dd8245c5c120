#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hypershift/thermo.hpp"

using namespace hypershift;
using Catch::Approx;

namespace {

const double kLog2 = std::log(2.0);

PotentialContext dyadic_ctx(int truncN = 20) {
    return make_potential_context(make_dyadic_family(truncN));
}

// Two-branch family whose second coordinate is the identity: vertical
// distances never contract, so the telescoped series cannot decay. Built
// through the public branch contract to exercise the holder_error path.
MapFamily non_contracting_family() {
    MapFamily fam;
    fam.name = "non-contracting";
    fam.truncN = 2;
    fam.alpha = 0.5;
    fam.K0 = 2.0;
    fam.C0 = 1.0;
    for (int i = 1; i <= 2; ++i) {
        const double l = (i - 1) * 0.5;
        BranchMap b;
        b.index = i;
        const int m = kDefaultGraphSamples;
        std::vector<double> left(m, l), right(m);
        for (int k = 0; k < m; ++k) {
            const double y = static_cast<double>(k) / (m - 1);
            right[static_cast<std::size_t>(k)] = l + 1.0 / (2.0 * (1.0 + 0.02 * y));
        }
        b.domain.index = i;
        b.domain.left = SampledGraph(std::move(left));
        b.domain.right = SampledGraph(std::move(right));
        b.strip.bottom = SampledGraph::constant(0.0);
        b.strip.top = SampledGraph::constant(1.0);
        b.eval = [l](Point z) {
            Jet2 j;
            const double g = 1.0 + 0.02 * z.y;
            j.f1 = 2.0 * (z.x - l) * g;
            j.f2 = z.y;
            j.f1x = 2.0 * g;
            j.f1y = 0.04 * (z.x - l);
            j.f2y = 1.0;
            j.f1xy = 0.04;
            return j;
        };
        b.inverse = [l](Point p) {
            return Point{l + p.x / (2.0 * (1.0 + 0.02 * p.y)), p.y};
        };
        fam.branches.push_back(std::move(b));
    }
    return finalize_family(std::move(fam));
}

}  // namespace

TEST_CASE("the potential on the dyadic family") {
    auto ctx = dyadic_ctx();
    CHECK(phi(ctx, {0.3, 0.7}, 0.0) == Approx(-kLog2).margin(1e-14));
    CHECK(phi(ctx, {0.6, 0.1}, 0.25) == Approx(-2.0 * kLog2).margin(1e-14));
    CHECK(phi(ctx, {0.8, 0.5}, -0.5) == Approx(-3.0 * kLog2).margin(1e-14));
    CHECK_THROWS_AS(phi(ctx, {0.5, 0.5}, 0.0), numerical_error);   // boundary point

    SECTION("perturbed families stay within the derivative band") {
        auto pe = make_potential_context(make_perturbed_family(12, 0.1, PerturbedDecay::geometric, 0.1));
        Rng rng(3);
        for (int trial = 0; trial < 100; ++trial) {
            const int i = rng.uniform_int(1, 8);
            const auto& b = pe.family.branch(i);
            Point z{rng.uniform(b.domain.left(0.5), b.domain.right(0.5)), rng.uniform01()};
            const double v = phi(pe, z, 0.0);
            CHECK(v > -(i + 1) * kLog2 - 0.3);
            CHECK(v < -i * kLog2 + 0.3);
        }
    }
}

TEST_CASE("reference points realize words") {
    auto ctx = dyadic_ctx(12);
    for (Word w : {Word{2, 2, 1}, Word{1, 3}, Word{4, 1, 2, 2}}) {
        const Point z = reference_point(ctx, w);
        auto it = itinerary(ctx.family, z, static_cast<int>(w.size()));
        REQUIRE_FALSE(it.escapedAt.has_value());
        CHECK(it.word == w);
        CHECK(z.y == Approx(0.0).margin(1e-14));   // the reference leaf is the bottom edge
    }
}

TEST_CASE("the telescoped series") {
    SECTION("vanishes for shear-free product families") {
        for (auto fam : {make_dyadic_family(12),
                         make_perturbed_family(12, 0.1, PerturbedDecay::geometric, 0.0)}) {
            auto ctx = make_potential_context(fam);
            for (Word w : {Word{1}, Word{2}, Word{1, 2}}) {
                const Point p = periodic_point(fam, w);
                CHECK(u_series(ctx, p) == Approx(0.0).margin(1e-12));
            }
        }
    }
    SECTION("is small and finite for the sheared family") {
        auto ctx = make_potential_context(make_perturbed_family(12, 0.1, PerturbedDecay::geometric, 0.1));
        for (Word w : {Word{2, 1}, Word{1, 2, 2}, Word{3, 1}}) {
            const Point p = periodic_point(ctx.family, w);
            CHECK(std::abs(u_series(ctx, p)) < 1.0);
        }
    }
    SECTION("raises holder_error when vertical distances cannot contract") {
        auto ctx = make_potential_context(non_contracting_family());
        CHECK_THROWS_AS(u_series(ctx, Point{0.2, 0.7}), holder_error);
    }
}

TEST_CASE("the symbolic potential") {
    SECTION("equals minus the branch expansion rate on the dyadic family") {
        auto ctx = dyadic_ctx(12);
        CHECK(phi_u(ctx, Word{1, 1, 2}) == Approx(-kLog2).margin(1e-12));
        CHECK(phi_u(ctx, Word{2, 1}) == Approx(-2.0 * kLog2).margin(1e-12));
        CHECK(phi_u(ctx, Word{5, 3, 1, 2}) == Approx(-5.0 * kLog2).margin(1e-12));
        CHECK_THROWS_AS(phi_u(ctx, Word{1}), std::invalid_argument);
    }
    SECTION("tightening the series tolerance moves values by less than 1e-9") {
        auto fam = make_perturbed_family(10, 0.1, PerturbedDecay::geometric, 0.1);
        auto loose = make_potential_context(fam, 1e-10);
        auto tight = make_potential_context(fam, 1e-13);
        for (Word w : {Word{2, 1, 1}, Word{1, 2, 3}}) {
            CHECK(std::abs(phi_u(loose, w) - phi_u(tight, w)) < 1e-9);
        }
    }
}

TEST_CASE("symbolic Holder variation") {
    SECTION("dyadic variation is exactly zero at every depth") {
        auto ctx = dyadic_ctx(12);
        auto est = holder_variation(ctx, 5, 8, 42);
        REQUIRE(est.valid);
        CHECK(est.exactZero);
        for (const auto& [n, v] : est.perN) CHECK(v == 0.0);
    }
    SECTION("shear-free nonlinear variation decays about like 1/K0") {
        auto ctx = make_potential_context(make_perturbed_family(18, 0.1, PerturbedDecay::geometric, 0.0));
        auto est = holder_variation(ctx, 6, 16, 7);
        REQUIRE(est.valid);
        REQUIRE_FALSE(est.exactZero);
        CHECK(est.fittedTheta < 0.65);
        CHECK(est.fittedTheta > 0.3);
    }
    SECTION("V_n is monotone nonincreasing") {
        auto ctx = make_potential_context(make_perturbed_family(18, 0.1, PerturbedDecay::geometric, 0.1));
        auto est = holder_variation(ctx, 6, 12, 11);
        for (std::size_t k = 0; k + 1 < est.perN.size(); ++k)
            CHECK(est.perN[k].second >= est.perN[k + 1].second);
    }
}

TEST_CASE("periodic points") {
    auto fam = make_dyadic_family(12);
    SECTION("single-symbol fixed points") {
        auto p1 = periodic_point(fam, Word{1});
        CHECK(p1.x == Approx(0.0).margin(1e-12));
        CHECK(p1.y == Approx(0.0).margin(1e-12));
        auto p2 = periodic_point(fam, Word{2});
        CHECK(p2.x == Approx(2.0 / 3.0).margin(1e-12));
        CHECK(p2.y == Approx(2.0 / 7.0).margin(1e-12));
    }
    SECTION("two-cycle of (1,2)") {
        auto p = periodic_point(fam, Word{1, 2});
        CHECK(p.x == Approx(2.0 / 7.0).margin(1e-12));
        CHECK(p.y == Approx(8.0 / 31.0).margin(1e-12));
    }
    SECTION("random words return genuine cycles") {
        auto pe = make_perturbed_family(10, 0.1, PerturbedDecay::geometric, 0.1);
        Rng rng(13);
        for (int trial = 0; trial < 30; ++trial) {
            Word w;
            const int len = rng.uniform_int(1, 5);
            for (int k = 0; k < len; ++k) w.symbols.push_back(rng.uniform_int(1, 6));
            Point z = periodic_point(pe, w);
            Point orbit = z;
            double expansion = 1.0;
            for (int s : w.symbols) {
                auto j = pe.branch(s).eval(orbit);
                expansion *= std::abs(j.f1x);
                orbit = j.image();
            }
            // the contracting coordinate closes tightly; the expanding one
            // only up to the cycle expansion times machine precision
            REQUIRE(std::abs(orbit.y - z.y) < 1e-10);
            REQUIRE(std::abs(orbit.x - z.x) < std::max(1e-10, expansion * 1e-14));
        }
    }
    SECTION("alphabet bound enforced") {
        CHECK_THROWS_AS(periodic_point(fam, Word{1, 40}), std::invalid_argument);
    }
}

TEST_CASE("partition sums") {
    auto ctx = dyadic_ctx(20);
    const double kept = 1.0 - std::ldexp(1.0, -20);

    SECTION("closed forms on the dyadic family") {
        CHECK(partition_sum(ctx, 1, 1) == Approx(0.5).margin(1e-15));
        CHECK(partition_sum(ctx, 1, 3) == Approx(0.5 * kept * kept).epsilon(1e-12));
        for (int n : {2, 4, 6})
            CHECK(partition_sum(ctx, 3, n) ==
                  Approx(0.125 * std::pow(kept, n - 1)).epsilon(1e-12));
    }
    SECTION("factorized path agrees with explicit periodic-orbit enumeration") {
        auto small = dyadic_ctx(8);
        auto forced = dyadic_ctx(8);
        forced.branchConstantState = 0;   // disable the factorization shortcut
        for (int n : {1, 2, 3, 4}) {
            const double fast = partition_sum(small, 1, n);
            const double slow = partition_sum(forced, 1, n);
            CHECK(fast == Approx(slow).epsilon(1e-10));
        }
    }
    SECTION("budget guard raises on large nonfactorizable sums") {
        auto pe = make_potential_context(make_perturbed_family(20, 0.1, PerturbedDecay::geometric, 0.1));
        pe.enumerationBudget = 1000;
        CHECK_THROWS_AS(partition_sum(pe, 1, 6), numerical_error);
    }
    SECTION("sums grow with the truncation level") {
        auto c10 = dyadic_ctx(10);
        auto c16 = dyadic_ctx(16);
        for (int n : {2, 4})
            CHECK(partition_sum(c10, 1, n) <= partition_sum(c16, 1, n));
    }
}

TEST_CASE("pressure") {
    auto ctx = dyadic_ctx(20);

    SECTION("vanishes up to the truncation scale, with a tight recurrence band") {
        auto est = pressure(ctx, 1, 8);
        CHECK(est.P <= 0.0);
        CHECK(est.P >= -2e-6);
        CHECK_FALSE(est.diverged);
        CHECK(est.bandLo >= 0.49);
        CHECK(est.bandHi <= 0.51);
        CHECK(est.lambda == Approx(1.0).margin(2e-6));
    }
    SECTION("anchor independence") {
        const double p1 = pressure(ctx, 1, 8).P;
        const double p2 = pressure(ctx, 2, 8).P;
        const double p3 = pressure(ctx, 3, 8).P;
        CHECK(std::abs(p1 - p2) <= 1e-6);
        CHECK(std::abs(p1 - p3) <= 1e-6);
    }
    SECTION("estimates increase toward zero with the truncation level") {
        CHECK(pressure(dyadic_ctx(10), 1, 6).P < pressure(dyadic_ctx(16), 1, 6).P);
        CHECK(pressure(dyadic_ctx(16), 1, 6).P < 0.0);
    }
    SECTION("a shifted potential moves the pressure off zero") {
        auto shifted = dyadic_ctx(12);
        shifted.potentialShift = 0.5;
        shifted.branchConstantState = -1;
        auto est = pressure(shifted, 1, 6);
        CHECK(est.P == Approx(0.5 + std::log(1.0 - std::ldexp(1.0, -12))).margin(1e-9));
        CHECK(est.lambda > 1.5);
    }
    SECTION("preconditions") {
        CHECK_THROWS_AS(pressure(ctx, 1, 2), std::invalid_argument);
        CHECK_THROWS_AS(partition_sum(ctx, 0, 3), std::invalid_argument);
    }
}

TEST_CASE("Ruelle operator") {
    auto ctx = dyadic_ctx(20);
    auto one = [](const Word&) { return 1.0; };
    auto zero = [](const Word&) { return 0.0; };

    SECTION("applied to the constant 1 it sums the branch weights") {
        const double expected = 1.0 - std::ldexp(1.0, -20);
        CHECK(ruelle_apply(ctx, one, Word{1, 1}, 20) == Approx(expected).margin(1e-9));
        CHECK(ruelle_apply(ctx, one, Word{3, 2, 1}, 20) == Approx(expected).margin(1e-9));
    }
    SECTION("linearity at zero") {
        CHECK(ruelle_apply(ctx, zero, Word{2, 1}, 20) == 0.0);
    }
    SECTION("truncation bound enforced") {
        CHECK_THROWS_AS(ruelle_apply(ctx, one, Word{1, 1}, 21), std::invalid_argument);
    }
}

TEST_CASE("hypotheses for exponential decay") {
    SECTION("dyadic family passes all four") {
        auto rep = verify_hypotheses(dyadic_ctx(12), 5, 10, 0.05, 3);
        CHECK(rep.mixingAndFinitelyManyImages);
        CHECK(rep.distinctRows == 1);
        CHECK(rep.holder);
        CHECK(rep.pressureFinite);
        CHECK(rep.ruelleBounded);
        CHECK(rep.all());
    }
    SECTION("sheared geometric family passes all four") {
        auto ctx = make_potential_context(make_perturbed_family(8, 0.1, PerturbedDecay::geometric, 0.1));
        auto rep = verify_hypotheses(ctx, 5, 10, 0.05, 5);
        CHECK(rep.all());
    }
    SECTION("a shifted potential fails the pressure hypothesis") {
        auto ctx = dyadic_ctx(12);
        ctx.potentialShift = 0.5;
        ctx.branchConstantState = -1;
        auto rep = verify_hypotheses(ctx, 5, 10, 0.05, 7);
        CHECK_FALSE(rep.pressureFinite);
        CHECK_FALSE(rep.all());
        CHECK(rep.mixingAndFinitelyManyImages);   // the failure is isolated to (c)
    }
}

TEST_CASE("coboundary cancellation on periodic words") {
    for (auto fam : {make_dyadic_family(12),
                     make_perturbed_family(12, 0.1, PerturbedDecay::geometric, 0.1)}) {
        auto ctx = make_potential_context(fam);
        for (Word w : {Word{1}, Word{2}, Word{1, 2}, Word{2, 1, 1}, Word{1, 2, 2, 1}}) {
            CHECK(coboundary_residual(ctx, w) < 1e-8);
        }
    }
}

TEST_CASE("periodic weights match reference-leaf section lengths") {
    for (auto fam : {make_dyadic_family(12),
                     make_perturbed_family(12, 0.1, PerturbedDecay::geometric, 0.1)}) {
        auto ctx = make_potential_context(fam);
        Rng rng(9);
        for (int trial = 0; trial < 25; ++trial) {
            Word w;
            const int len = rng.uniform_int(1, 4);
            for (int k = 0; k < len; ++k) w.symbols.push_back(rng.uniform_int(1, 5));
            const double weight = std::exp(periodic_orbit_potential_sum(ctx, w));
            const double length = reference_section_length(ctx, w);
            const double ratio = weight / length;
            CHECK(ratio >= 0.5);
            CHECK(ratio <= 2.0);
        }
    }
}

TEST_CASE("thermo CSV serialization") {
    auto ctx = dyadic_ctx(12);
    auto est = pressure(ctx, 1, 4);
    auto csv = pressure_to_csv(est);
    CHECK(csv.rfind("n,z_n,log_z_n_over_n,z_over_lambda_n\n", 0) == 0);
    auto hold = holder_variation(ctx, 3, 4, 1);
    CHECK(holder_to_csv(hold).rfind("n,v_n\n", 0) == 0);
}
