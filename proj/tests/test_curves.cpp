#include <doctest.h>

#include "smallforms/curves.hpp"
#include "smallforms/errors.hpp"
#include "smallforms/rng.hpp"

using namespace smallforms;
using namespace smallforms::curves;

TEST_CASE("veronese evaluation and derivatives") {
    CurveMap c = veronese_curve(2, Rat(-1), Rat(1));
    CHECK(c.eval(0, 0, Rat(1, 2)) == Rat(1));
    CHECK(c.eval(1, 0, Rat(1, 2)) == Rat(1, 2));
    CHECK(c.eval(2, 0, Rat(1, 2)) == Rat(1, 4));
    CHECK(c.eval(0, 1, Rat(1, 2)) == Rat(0));
    CHECK(c.eval(1, 1, Rat(1, 2)) == Rat(1));
    CHECK(c.eval(2, 1, Rat(1, 2)) == Rat(1));

    CurveMap l = veronese_curve(1, Rat(-1), Rat(1));
    CHECK(l.eval(0, 2, Rat(1, 3)) == Rat(0));
    CHECK(l.eval(1, 2, Rat(1, 3)) == Rat(0));
}

TEST_CASE("system matrix stacks exact rows") {
    SystemMap s1 = veronese_system(2, 1, Rat(-1), Rat(1));
    auto Y = evaluate_system_matrix(s1, {Rat(0)}, 0);
    CHECK(Y[0].at(0, 0) == Rat(1));
    CHECK(Y[0].at(0, 1) == Rat(0));
    CHECK(Y[0].at(0, 2) == Rat(0));

    SystemMap s2 = veronese_system(2, 2, Rat(-2), Rat(2));
    auto Y2 = evaluate_system_matrix(s2, {Rat(0), Rat(1)}, 0);
    CHECK(Y2[0].at(1, 0) == Rat(1));
    CHECK(Y2[0].at(1, 1) == Rat(1));
    CHECK(Y2[0].at(1, 2) == Rat(1));

    SystemMap s3 = veronese_system(2, 1, Rat(-3), Rat(3));
    auto Y3 = evaluate_system_matrix(s3, {Rat(2)}, 1);
    CHECK(Y3[1].at(0, 0) == Rat(0));
    CHECK(Y3[1].at(0, 1) == Rat(1));
    CHECK(Y3[1].at(0, 2) == Rat(4));

    CHECK_THROWS_AS(evaluate_system_matrix(s1, {Rat(2)}, 0), ConfigError);
}

TEST_CASE("wronskian of the veronese curve is a constant factorial product") {
    CurveMap c2 = veronese_curve(2, Rat(-1), Rat(1));
    for (Rat x : {Rat(0), Rat(1, 3), Rat(-2, 5)}) CHECK(wronskian(c2, x) == Rat(2));

    CurveMap c3 = veronese_curve(3, Rat(-3), Rat(3));
    for (Rat x : {Rat(0), Rat(1), Rat(-2)}) CHECK(wronskian(c3, x) == Rat(12));

    // dependent coordinates are rejected at load
    std::vector<Poly> bad{Poly::constant(Rat(1)), Poly::monomial(Rat(1), 1),
                          Poly::monomial(Rat(1), 1)};
    CHECK_THROWS_AS(CurveMap(std::move(bad), Rat(-1), Rat(1)), DegenerateInputError);
}

TEST_CASE("square system matrix layout") {
    SystemMap s = veronese_system(2, 1, Rat(-1), Rat(1));
    SquareSystemSpec spec{{2}};
    RatMatrix G = square_system_matrix(s, spec, {Rat(1, 2)});
    CHECK(G.at(0, 2) == Rat(1, 4));
    CHECK(G.at(1, 2) == Rat(1));   // first derivative row
    CHECK(G.at(2, 2) == Rat(2));   // second derivative row
    CHECK(G.det() == Rat(2));

    SquareSystemSpec bad{{1}};
    CHECK_THROWS_AS(square_system_matrix(s, bad, {Rat(0)}), ConfigError);
}

TEST_CASE("nondegeneracy report on reference systems") {
    SystemMap s = veronese_system(2, 1, Rat(-1, 2), Rat(1, 2));
    auto rep = nondegeneracy_report(s, 5);
    CHECK(rep.c0_wronskian == 2.0);
    CHECK(rep.M_estimate == 2.0);
    CHECK(rep.M_certified >= rep.M_estimate);
    CHECK(rep.refinement_checked);
    CHECK(rep.refinement_stable);

    // two curves on the same interval vanish on the diagonal
    SystemMap s2 = veronese_system(2, 2, Rat(0), Rat(1));
    auto rep2 = nondegeneracy_report(s2, 5, {.check_refinement = false});
    CHECK(rep2.c0_minor_m == 0.0);
    bool found = false;
    for (const auto& nz : rep2.near_zero_locations)
        if (nz.which == "minor_m" && nz.value == 0.0) found = true;
    CHECK(found);
}

TEST_CASE("grid refinement never lowers the derivative-bound estimate") {
    CurveMap c({Poly::constant(Rat(1)), Poly::monomial(Rat(1), 1), Poly::monomial(Rat(1), 3)},
               Rat(1, 10), Rat(1));
    SystemMap s({c});
    double prev = 0.0;
    for (int grid : {2, 3, 5, 9, 17}) {
        auto rep = nondegeneracy_report(s, grid, {.check_refinement = false});
        CHECK(rep.M_estimate >= prev - 1e-300);
        prev = rep.M_estimate;
    }
}

TEST_CASE("parallel and serial scans agree") {
    SystemMap s = veronese_system(3, 2, Rat(-1, 2), Rat(1, 2));
    auto a = nondegeneracy_report(s, 7, {.check_refinement = false, .parallel = true});
    auto b = nondegeneracy_report_serial(s, 7, {.check_refinement = false});
    CHECK(a.M_estimate == b.M_estimate);
    CHECK(a.c0_wronskian == b.c0_wronskian);
    CHECK(a.c0_minor_m == b.c0_minor_m);
    CHECK(a.c0_minor_m_plus_1 == b.c0_minor_m_plus_1);
    CHECK(a.near_zero_locations.size() == b.near_zero_locations.size());
}

TEST_CASE("fiber substitution composes monomial arcs") {
    // f = (1, x1, x2), u = (1, 3), D = 2: exponents 1 + 4 = 5 and 2 + 4 = 6
    std::vector<MPoly> f(3);
    for (auto& p : f) p.vars = 2;
    f[0].terms = {{Rat(1), {0, 0}}};
    f[1].terms = {{Rat(1), {1, 0}}};
    f[2].terms = {{Rat(1), {0, 1}}};
    std::vector<std::pair<Rat, Rat>> box{{Rat(-1), Rat(1)}, {Rat(-1), Rat(1)}};
    auto res = fiber_substitution(f, {Rat(1), Rat(3)}, box, 2);
    CHECK(res.used_D == 2);
    const auto& phi = res.curve.coords();
    CHECK(phi[0] == Poly::constant(Rat(1)));
    CHECK(phi[1] == Poly::monomial(Rat(1), 5));
    CHECK(phi[2] == Poly::monomial(Rat(3), 6));
    // image stays inside the box on [tb/2, tb]
    Rat tb = res.curve.hi();
    CHECK(Rat(3) * tb * tb * tb * tb * tb * tb <= Rat(1));

    // product coordinate gets the summed exponent
    std::vector<MPoly> g(2);
    for (auto& p : g) p.vars = 2;
    g[0].terms = {{Rat(1), {0, 0}}};
    g[1].terms = {{Rat(1), {1, 1}}};
    auto res2 = fiber_substitution(g, {Rat(1), Rat(3)}, box, 2);
    CHECK(res2.curve.coords()[1] == Poly::monomial(Rat(3), 11));
}

TEST_CASE("fiber substitution rejects bad directions") {
    std::vector<MPoly> f(2);
    for (auto& p : f) p.vars = 2;
    f[0].terms = {{Rat(1), {0, 0}}};
    f[1].terms = {{Rat(1), {1, 0}}};
    std::vector<std::pair<Rat, Rat>> box{{Rat(-1), Rat(1)}, {Rat(-1), Rat(1)}};
    CHECK_THROWS_AS(fiber_substitution(f, {Rat(1), Rat(0)}, box, 2), ConfigError);
    CHECK_THROWS_AS(fiber_substitution(f, {Rat(2), Rat(1)}, box, 2), ConfigError);
    CHECK_THROWS_AS(fiber_substitution(f, {Rat(1), Rat(1)}, box, 1), ConfigError);
}

TEST_CASE("fiber substitution reports exhausted D search") {
    // two coordinates that collapse onto the same exponent for every D:
    // f = (x1, 2 x1) is linearly dependent, so no D can work
    std::vector<MPoly> f(2);
    for (auto& p : f) p.vars = 2;
    f[0].terms = {{Rat(1), {1, 0}}};
    f[1].terms = {{Rat(2), {1, 0}}};
    std::vector<std::pair<Rat, Rat>> box{{Rat(-1), Rat(1)}, {Rat(-1), Rat(1)}};
    CHECK_THROWS_AS(fiber_substitution(f, {Rat(1), Rat(1)}, box, 2, 4), DegenerateInputError);
}

TEST_CASE("cramer lower bound check") {
    RatMatrix I2(2, 2);
    I2.at(0, 0) = 1;
    I2.at(1, 1) = 1;
    auto r = cramer_lower_bound_check(I2, {Int(3), Int(-5)}, Rat(1), Rat(1));
    CHECK(r.preconditions_ok);
    CHECK(r.holds);
    CHECK(r.lhs == Rat(5));
    CHECK(r.rhs == Rat(5, 2));

    RatMatrix D(2, 2);
    D.at(0, 0) = 1;
    D.at(1, 1) = 2;
    auto r2 = cramer_lower_bound_check(D, {Int(1), Int(0)}, Rat(2), Rat(2));
    CHECK(r2.preconditions_ok);
    CHECK(r2.holds);
    CHECK(r2.lhs == Rat(1));
    CHECK(r2.rhs == Rat(1, 2));

    auto bad = cramer_lower_bound_check(D, {Int(1), Int(0)}, Rat(3), Rat(2));
    CHECK_FALSE(bad.preconditions_ok);
    CHECK(bad.precondition_failure == "|det G| < C1");
}

TEST_CASE("cramer bound holds on a random integer sweep") {
    SplitMix64 rng(4242);
    int tested = 0;
    while (tested < 1000) {
        RatMatrix G(3, 3);
        Int det_check;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) G.at(i, j) = Rat((long)rng.next_int(-10, 10));
        if (abs(G.det()) < 1) continue;
        std::vector<Int> a{Int((long)rng.next_int(-50, 50)), Int((long)rng.next_int(-50, 50)),
                           Int((long)rng.next_int(-50, 50))};
        if (a[0] == 0 && a[1] == 0 && a[2] == 0) continue;
        auto r = cramer_lower_bound_check(G, a, Rat(1), Rat(10));
        REQUIRE(r.preconditions_ok);
        CHECK(r.holds);
        ++tested;
    }
}

TEST_CASE("system matrix entries survive a float round trip to 1 ulp") {
    SystemMap s = veronese_system(3, 1, Rat(-1, 2), Rat(1, 2));
    std::vector<Rat> x{Rat(1, 7)};
    auto Y = evaluate_system_matrix(s, x, 1);
    for (int i = 0; i <= 1; ++i)
        for (int k = 0; k <= 3; ++k) {
            double d = rat_to_double(Y[i].at(0, k));
            Rat back = rat_from_double(d);
            double ulp = std::abs(d) * 2.3e-16 + 1e-300;
            CHECK(abs(Rat(back - Y[i].at(0, k))) <= rat_from_double(ulp));
        }
}
