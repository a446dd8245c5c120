#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hypershift/symbolic.hpp"

using namespace hypershift;
using Catch::Approx;

TEST_CASE("itineraries") {
    auto fam = make_dyadic_family(20);

    SECTION("the origin is the branch-1 fixed point") {
        auto it = itinerary(fam, {0.0, 0.0}, 5);
        REQUIRE_FALSE(it.escapedAt.has_value());
        CHECK(it.word == Word{1, 1, 1, 1, 1});
    }
    SECTION("(2/3, 2/7) is the branch-2 fixed point") {
        auto it = itinerary(fam, {2.0 / 3.0, 2.0 / 7.0}, 4);
        REQUIRE_FALSE(it.escapedAt.has_value());
        CHECK(it.word == Word{2, 2, 2, 2});
    }
    SECTION("boundary points escape immediately") {
        auto it = itinerary(fam, {0.5, 0.1}, 4);
        REQUIRE(it.escapedAt.has_value());
        CHECK(*it.escapedAt == 0);
        CHECK(it.word.empty());
    }
}

TEST_CASE("cylinders of the dyadic family") {
    auto fam = make_dyadic_family(12);

    SECTION("single-symbol cylinders are the domains themselves") {
        for (int i : {1, 2, 5}) {
            auto cyl = build_cylinder(fam, Word{i});
            CHECK(cyl.left(0.3) == Approx(fam.branch(i).domain.left(0.3)).margin(1e-14));
            CHECK(cyl.right(0.8) == Approx(fam.branch(i).domain.right(0.8)).margin(1e-14));
        }
    }
    SECTION("word (1,1) pulls back to x in [0, 0.25]") {
        auto cyl = build_cylinder(fam, Word{1, 1});
        CHECK(cyl.left(0.5) == Approx(0.0).margin(1e-12));
        CHECK(cyl.right(0.5) == Approx(0.25).margin(1e-12));
    }
    SECTION("word (1,2) pulls back to x in [0.25, 0.375]") {
        auto cyl = build_cylinder(fam, Word{1, 2});
        CHECK(cyl.left(0.1) == Approx(0.25).margin(1e-12));
        CHECK(cyl.right(0.9) == Approx(0.375).margin(1e-12));
    }
    SECTION("symbols beyond the alphabet are rejected") {
        CHECK_THROWS_AS(build_cylinder(fam, Word{1, 13}), std::invalid_argument);
        CHECK_THROWS_AS(build_cylinder(fam, Word{}), std::invalid_argument);
    }
}

TEST_CASE("strips of the dyadic family") {
    auto fam = make_dyadic_family(12);

    SECTION("single-symbol strip is the branch image") {
        auto s = build_strip(fam, Word{1});
        CHECK(s.bottom(0.4) == Approx(0.0).margin(1e-12));
        CHECK(s.top(0.4) == Approx(0.25).margin(1e-12));
    }
    SECTION("word (1,1) pushes to [0, 0.0625]") {
        auto s = build_strip(fam, Word{1, 1});
        CHECK(s.bottom(0.2) == Approx(0.0).margin(1e-12));
        CHECK(s.top(0.7) == Approx(0.0625).margin(1e-12));
    }
    SECTION("word (2,1) pushes to [0.0625, 0.09375]") {
        auto s = build_strip(fam, Word{2, 1});
        CHECK(s.bottom(0.5) == Approx(0.0625).margin(1e-12));
        CHECK(s.top(0.5) == Approx(0.09375).margin(1e-12));
    }
}

TEST_CASE("mixed rectangles") {
    auto fam = make_dyadic_family(12);

    SECTION("history (1) with future (1) is [0, 0.5] x [0, 0.25]") {
        auto r = build_mixed(fam, Word{1}, Word{1});
        CHECK(r.left(0.1) == Approx(0.0).margin(1e-12));
        CHECK(r.right(0.1) == Approx(0.5).margin(1e-12));
        CHECK(r.bottom(0.4) == Approx(0.0).margin(1e-12));
        CHECK(r.top(0.4) == Approx(0.25).margin(1e-12));
    }
    SECTION("empty history gives the full-height cylinder") {
        auto r = build_mixed(fam, Word{}, Word{3});
        CHECK(r.bottom(0.5) == Approx(0.0).margin(1e-15));
        CHECK(r.top(0.5) == Approx(1.0).margin(1e-15));
        CHECK(r.left(0.5) == Approx(fam.branch(3).domain.left(0.5)).margin(1e-13));
    }
    SECTION("diameters shrink like the affine contraction rates") {
        for (auto famVariant : {make_dyadic_family(12),
                                make_perturbed_family(12, 0.1, PerturbedDecay::geometric, 0.1)}) {
            double prev = 10.0;
            for (int k = 1; k <= 8; ++k) {
                Word neg, pos;
                for (int j = 0; j < k; ++j) {
                    neg.symbols.push_back(j % 2 == 0 ? 1 : 2);
                    pos.symbols.push_back(j % 2 == 0 ? 2 : 1);
                }
                auto r = build_mixed(famVariant, neg, pos);
                const double d = r.diameter();
                CHECK(d < prev);
                CHECK(d <= 4.0 * std::max(std::ldexp(1.0, -k), std::pow(famVariant.K0, -k)));
                prev = d;
            }
        }
    }
}

TEST_CASE("cylinder nesting property") {
    auto fam = make_dyadic_family(8);
    Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        Word w;
        const int len = rng.uniform_int(1, 4);
        for (int k = 0; k < len; ++k) w.symbols.push_back(rng.uniform_int(1, 6));
        auto parent = build_cylinder(fam, w);
        auto child = build_cylinder(fam, w.appended(rng.uniform_int(1, 6)));
        for (std::size_t k = 0; k < parent.left.size(); ++k) {
            REQUIRE(child.left.values[k] >= parent.left.values[k] - 1e-10);
            REQUIRE(child.right.values[k] <= parent.right.values[k] + 1e-10);
        }
    }
}

TEST_CASE("Markov refinement: the first branch maps its cylinder over the shifted cylinder") {
    for (auto fam : {make_dyadic_family(8),
                     make_perturbed_family(8, 0.1, PerturbedDecay::geometric, 0.1)}) {
        Rng rng(23);
        for (int trial = 0; trial < 20; ++trial) {
            Word w;
            const int len = rng.uniform_int(1, 3);
            for (int k = 0; k < len; ++k) w.symbols.push_back(rng.uniform_int(1, 5));
            const int i = rng.uniform_int(1, 5);
            auto whole = build_cylinder(fam, w.prepended(i));
            auto target = build_cylinder(fam, w);
            const auto& b = fam.branch(i);
            // map boundary samples forward and compare at the image heights
            for (std::size_t k = 0; k < whole.left.size(); k += 16) {
                const double y = static_cast<double>(k) / static_cast<double>(whole.left.size() - 1);
                auto jl = b.eval({whole.left.values[k], y});
                auto jr = b.eval({whole.right.values[k], y});
                REQUIRE(jl.f1 <= target.left(jl.f2) + 1e-9);
                REQUIRE(jr.f1 >= target.right(jr.f2) - 1e-9);
            }
        }
    }
}

TEST_CASE("cylinder width decay") {
    auto fam = make_perturbed_family(8, 0.1, PerturbedDecay::geometric, 0.1);
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        Word w;
        const int len = rng.uniform_int(2, 6);
        for (int k = 0; k < len; ++k) w.symbols.push_back(rng.uniform_int(1, 4));
        auto cyl = build_cylinder(fam, w);
        const double bound =
            2.0 * fam.branch(w[0]).domain.width_max() * std::pow(fam.K0, -(len - 1));
        REQUIRE(cyl.width_max() <= bound);
    }
}

TEST_CASE("topological mixing predicate") {
    SECTION("full shift connects from |C1| onward") {
        auto ts = TransitionStructure::full_shift(6);
        auto rep = check_topological_mixing(ts, Word{1, 2}, Word{3, 1}, 12);
        CHECK(rep.mixing);
        CHECK(rep.first == 2);
    }
    SECTION("a row of zeros blocks mixing") {
        TransitionStructure ts;
        ts.alphabet = 2;
        ts.rows = {{1, 1}, {0, 0}};
        auto rep = check_topological_mixing(ts, Word{2}, Word{1}, 10);
        CHECK_FALSE(rep.mixing);
    }
    SECTION("period-2 structure fails for half of the lags") {
        TransitionStructure ts;
        ts.alphabet = 2;
        ts.rows = {{0, 1}, {1, 0}};
        CHECK_FALSE(check_topological_mixing(ts, Word{1}, Word{1}, 10).mixing);
        CHECK_FALSE(check_topological_mixing(ts, Word{1}, Word{1}, 11).mixing);
    }
}

TEST_CASE("finitely many images") {
    SECTION("full shift has one row class") {
        CHECK(check_finitely_many_images(TransitionStructure::full_shift(8)) == 1);
    }
    SECTION("alternating rows give two classes") {
        TransitionStructure ts;
        ts.alphabet = 4;
        ts.rows = {{1, 1, 0, 0}, {0, 0, 1, 1}, {1, 1, 0, 0}, {0, 0, 1, 1}};
        CHECK(check_finitely_many_images(ts) == 2);
    }
    SECTION("built-in families are full shifts with one class") {
        auto fam = make_dyadic_family(10);
        CHECK(check_finitely_many_images(transition_structure(fam)) == 1);
    }
}

TEST_CASE("rectangle CSV serialization") {
    auto fam = make_dyadic_family(8);
    auto cyl = build_cylinder(fam, Word{1, 2});
    auto csv = cylinder_to_csv(cyl);
    CHECK(csv.rfind("kind,word,grid_index,coord\n", 0) == 0);
    CHECK(csv.find("cylinder_left,1-2,0,") != std::string::npos);
    auto strip = build_strip(fam, Word{2, 1});
    auto scsv = strip_to_csv(strip);
    CHECK(scsv.find("strip_top,2-1,") != std::string::npos);
}
