#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "smallforms/errors.hpp"
#include "smallforms/measure.hpp"
#include "smallforms/rng.hpp"

using namespace smallforms;
using namespace smallforms::measure;
using approx::ApproxFunction;
using curves::veronese_system;
using solver::Form;

TEST_CASE("theta diagnostics on the reference tuples") {
    // single group (2^-4, 2^-1, 2^3)
    auto d = theta_diagnostics(ThetaTuple::from_groups({{0.0625, 0.5, 8.0}}));
    CHECK(d.theta_pow_k == 0.25);
    CHECK(d.property_M_ok);
    CHECK(d.bound_applicable);
    CHECK(d.theta_hat_bound == 0.25);
    CHECK(d.theta0 == 0.0625);
    CHECK(d.theta_inf == 8.0);

    auto ones = theta_diagnostics(ThetaTuple::from_groups({{1.0, 1.0}, {1.0}}));
    CHECK(ones.theta == 1.0);
    CHECK(ones.bound_applicable);
    CHECK(ones.theta_hat_bound == 1.0);

    auto bad = theta_diagnostics(ThetaTuple::from_groups({{2.0, 0.5}}));
    CHECK_FALSE(bad.group_property_M[0]);
    CHECK_FALSE(bad.bound_applicable);

    CHECK_THROWS_AS(ThetaTuple::from_groups({{1.0, -2.0}}), ConfigError);
}

TEST_CASE("theta is permutation invariant within groups and scales linearly") {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> g;
        for (int i = 0; i < 4; ++i) g.push_back(rng.next_in(0.1, 3.0));
        auto base = theta_diagnostics(ThetaTuple::from_groups({g}));
        std::vector<double> p = g;
        std::swap(p[0], p[3]);
        std::swap(p[1], p[2]);
        auto perm = theta_diagnostics(ThetaTuple::from_groups({p}));
        CHECK(base.theta == doctest::Approx(perm.theta).epsilon(1e-14));

        double c = rng.next_in(0.5, 2.0);
        std::vector<double> sc = g;
        for (double& v : sc) v *= c;
        auto scaled = theta_diagnostics(ThetaTuple::from_groups({sc}));
        CHECK(scaled.theta == doctest::Approx(c * base.theta).epsilon(1e-12));
    }
}

TEST_CASE("membership at the unit lattice") {
    auto s = veronese_system(1, 1, Rat(-1, 2), Rat(1, 2));
    curves::SquareSystemSpec spec{{1}};

    // G at x = 0 is the identity; theta = (1/2, 1/2) admits nothing
    auto res = small_form_membership(s, spec, {Rat(0)}, ThetaTuple::from_groups({{0.5, 0.5}}));
    CHECK_FALSE(res.member);

    // large theta admits e_1
    auto res2 = small_form_membership(s, spec, {Rat(0)}, ThetaTuple::from_groups({{2.0, 2.0}}));
    CHECK(res2.member);
    REQUIRE(res2.witness.has_value());

    // vanishing theta admits nothing
    auto res3 =
        small_form_membership(s, spec, {Rat(0)}, ThetaTuple::from_groups({{1e-9, 1e-9}}));
    CHECK_FALSE(res3.member);
}

TEST_CASE("membership respects the non-strict inequality") {
    auto s = veronese_system(1, 1, Rat(-1, 2), Rat(1, 2));
    curves::SquareSystemSpec spec{{1}};
    // |a_0| <= 1 exactly at theta = 1: e_1 qualifies with equality
    auto res = small_form_membership(s, spec, {Rat(0)}, ThetaTuple::from_groups({{1.0, 1.0}}));
    CHECK(res.member);
}

TEST_CASE("monte carlo membership measure is seeded and reproducible") {
    auto s = veronese_system(2, 1, Rat(-1, 2), Rat(1, 2));
    curves::SquareSystemSpec spec{{2}};
    SampleRegion region;
    region.box = {{Rat(-1, 4), Rat(1, 4)}};
    region.samples = 200;
    region.seed = 99;
    auto tuple = ThetaTuple::from_groups({{0.9, 0.9, 2.5}});
    auto a = monte_carlo_membership_measure(s, spec, tuple, region);
    auto b = monte_carlo_membership_measure(s, spec, tuple, region);
    CHECK(a.estimate == b.estimate);
    CHECK(a.hits == b.hits);
    CHECK(a.ci_lo <= a.estimate);
    CHECK(a.estimate <= a.ci_hi);
}

TEST_CASE("cells of x^2 - 2 around sqrt(2)") {
    auto s = veronese_system(2, 1, Rat(1), Rat(2));
    auto psi = ApproxFunction::power_law(1.0, 2.0);
    Form f{{Int(-2), Int(0), Int(1)}};
    auto cd = solution_cells(f, s, psi, 0);
    CHECK(cd.psi_H == Rat(1, 4));
    REQUIRE(cd.intervals.size() == 1);
    const auto& ci = cd.intervals[0];
    CHECK(ci.length() == doctest::Approx(0.17712).epsilon(1e-4));
    // right endpoint is the rational root 3/2 of x^2 - 2.25
    CHECK(ci.right.exact);
    CHECK(ci.right.lo == Rat(3, 2));
    // length bound 2 psi / inf|F'|
    Rat bound_rhs = Rat(2) * cd.psi_H;
    CHECK(ci.length_outer() * ci.inf_deriv <= bound_rhs + Rat(1, Int("100000000000000000")));
    CHECK(rat_to_double(ci.inf_deriv) == doctest::Approx(2.64575).epsilon(1e-4));
}

TEST_CASE("cells of a tight linear form") {
    auto s = veronese_system(1, 1, Rat(-1), Rat(1));
    auto psi = ApproxFunction::power_law(0.1, 0.0);
    Form f{{Int(0), Int(1)}};
    auto cd = solution_cells(f, s, psi, 0);
    REQUIRE(cd.intervals.size() == 1);
    const auto& ci = cd.intervals[0];
    CHECK(ci.length() == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(ci.inf_deriv == Rat(1));
    // the 2 psi / inf bound is tight here, up to bracket tolerance
    CHECK(ci.length_inner() <= Rat(2) * cd.psi_H);
    CHECK(ci.length_outer() <= Rat(2) * cd.psi_H + Rat(1, Int("1000000000000000000")));
}

TEST_CASE("a generous psi swallows the whole interval") {
    auto s = veronese_system(1, 1, Rat(-1), Rat(1));
    auto psi = ApproxFunction::power_law(3.0, 0.0);
    Form f{{Int(0), Int(1)}};
    auto cd = solution_cells(f, s, psi, 0);
    REQUIRE(cd.intervals.size() == 1);
    CHECK(cd.intervals[0].left.lo == Rat(-1));
    CHECK(cd.intervals[0].right.hi == Rat(1));
}

TEST_CASE("degenerate coordinate form is rejected") {
    auto s = veronese_system(2, 1, Rat(-1), Rat(1));
    auto psi = ApproxFunction::power_law(1.0, 1.0);
    // no nonzero integer combination of (1, x, x^2) vanishes identically,
    // so build the rejection through the zero form precondition instead
    Form zero{{Int(0), Int(0), Int(0)}};
    CHECK_THROWS_AS(solution_cells(zero, s, psi, 0), Error);
}

TEST_CASE("cell structure invariants at small heights") {
    auto s = veronese_system(2, 1, Rat(-1, 2), Rat(1, 2));
    auto psi = ApproxFunction::power_law(1.0, 1.5);
    Poly coords_check;
    for (long a0 = -6; a0 <= 6; ++a0)
        for (long a1 = -6; a1 <= 6; ++a1)
            for (long a2 = -6; a2 <= 6; ++a2) {
                if (a0 == 0 && a1 == 0 && a2 == 0) continue;
                std::vector<Int> a{Int(a0), Int(a1), Int(a2)};
                if (solver::Form::canonical(a) != a) continue;
                auto cd = solution_cells(Form{a}, s, psi, 0);
                CHECK((int)cd.intervals.size() <= cd.K_bound);
                Poly F;
                for (int i = 0; i <= 2; ++i)
                    F = F + s.curve(0).coords()[i] * Rat(a[i]);
                for (size_t k = 0; k < cd.intervals.size(); ++k) {
                    const auto& ci = cd.intervals[k];
                    // the certified inside point really is inside, exactly
                    CHECK(abs(F.eval(ci.inside_point)) < cd.psi_H);
                    // the length bound
                    CHECK(ci.length_outer() * ci.inf_deriv <=
                          Rat(2) * cd.psi_H + Rat(1, Int("100000000000000000")));
                    // gap midpoints between consecutive intervals sit outside
                    if (k + 1 < cd.intervals.size()) {
                        Rat gap_mid = (ci.right.hi + cd.intervals[k + 1].left.lo) / 2;
                        CHECK(abs(F.eval(gap_mid)) >= cd.psi_H);
                    }
                }
            }
}

TEST_CASE("borel-cantelli hand case at height one") {
    auto s = veronese_system(1, 1, Rat(-1, 2), Rat(1, 2));
    auto psi = ApproxFunction::power_law(1.0, 1.0);
    SampleRegion region;
    region.box = {{Rat(-1, 2), Rat(1, 2)}};
    auto [cells, comparison] = borel_cantelli_partial_sum(s, psi, region, 1);
    // forms (0,1): full box; (1,-1): (0,1/2]; (1,1): [-1/2,0); (1,0): empty
    CHECK(cells == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(comparison == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("borel-cantelli of the zero function vanishes") {
    auto s = veronese_system(1, 1, Rat(-1, 2), Rat(1, 2));
    auto psi = ApproxFunction::tabulated({{1, 0.0}});
    SampleRegion region;
    region.box = {{Rat(-1, 4), Rat(1, 4)}};
    auto [cells, comparison] = borel_cantelli_partial_sum(s, psi, region, 16);
    CHECK(cells == 0.0);
    CHECK(comparison == 0.0);
}

TEST_CASE("borel-cantelli against a direct per-form oracle") {
    auto s = veronese_system(2, 1, Rat(-1, 2), Rat(1, 2));
    auto psi = ApproxFunction::power_law(1.0, 2.0);
    SampleRegion region;
    region.box = {{Rat(1, 8), Rat(3, 8)}};
    long long H = 6;
    auto [cells, comparison] = borel_cantelli_partial_sum(s, psi, region, H);
    // direct oracle: loop every canonical form and sum exact cell lengths
    double want = 0.0;
    for (long a0 = -6; a0 <= 6; ++a0)
        for (long a1 = -6; a1 <= 6; ++a1)
            for (long a2 = -6; a2 <= 6; ++a2) {
                std::vector<Int> a{Int(a0), Int(a1), Int(a2)};
                if (sup_norm(a) == 0 || sup_norm(a) > (long)H) continue;
                if (solver::Form::canonical(a) != a) continue;
                auto cd = solution_cells_on(Form{a}, s, psi, 0, region.box[0].first,
                                            region.box[0].second);
                for (const auto& ci : cd.intervals)
                    want += rat_to_double(Rat((ci.length_outer() + ci.length_inner()) / 2));
            }
    CHECK(cells == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("dichotomy of the zero function never hits") {
    auto s = veronese_system(2, 1, Rat(-1, 2), Rat(1, 2));
    auto psi = ApproxFunction::tabulated({{1, 0.0}});
    SampleRegion region;
    region.box = {{Rat(-1, 4), Rat(1, 4)}};
    region.samples = 50;
    region.seed = 5;
    DichotomyConfig cfg;
    cfg.t_max = 3;
    auto res = dichotomy_experiment(s, psi, region, cfg);
    CHECK(res.points_ok == 50);
    for (const auto& r : res.rows) {
        CHECK(r.hit_fraction == 0.0);
        CHECK(r.mean_count == 0.0);
    }
}

TEST_CASE("a generous constant psi hits every point in block zero") {
    auto s = veronese_system(2, 1, Rat(-1, 2), Rat(1, 2));
    auto psi = ApproxFunction::power_law(3.0, 0.0);
    SampleRegion region;
    region.box = {{Rat(-1, 4), Rat(1, 4)}};
    region.samples = 60;
    region.seed = 11;
    DichotomyConfig cfg;
    cfg.t_max = 2;
    auto res = dichotomy_experiment(s, psi, region, cfg);
    CHECK(res.rows[0].hit_fraction == 1.0);
}

TEST_CASE("dichotomy is reproducible and matches the serial reference") {
    auto s = veronese_system(2, 1, Rat(-1, 2), Rat(1, 2));
    auto psi = ApproxFunction::power_law(1.0, 2.0);
    SampleRegion region;
    region.box = {{Rat(-1, 4), Rat(1, 4)}};
    region.samples = 40;
    region.seed = 314;
    DichotomyConfig cfg;
    cfg.t_max = 4;
    auto a = dichotomy_experiment(s, psi, region, cfg);
    auto b = dichotomy_experiment(s, psi, region, cfg);
    auto c = dichotomy_experiment_serial(s, psi, region, cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    for (size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].hit_fraction == b.rows[i].hit_fraction);
        CHECK(a.rows[i].mean_count == b.rows[i].mean_count);
        CHECK(a.rows[i].hit_fraction == c.rows[i].hit_fraction);
        CHECK(a.rows[i].mean_count == c.rows[i].mean_count);
    }
}

TEST_CASE("dichotomy agrees with direct enumeration on sampled points") {
    auto s = veronese_system(2, 1, Rat(-1, 2), Rat(1, 2));
    auto psi = ApproxFunction::power_law(1.0, 1.5);
    SampleRegion region;
    region.box = {{Rat(-2, 5), Rat(2, 5)}};
    region.samples = 15;
    region.seed = 2718;
    DichotomyConfig cfg;
    cfg.t_max = 3;
    auto res = dichotomy_experiment(s, psi, region, cfg);
    // re-derive the per-point counts the same way the experiment samples them
    long long hits0 = 0;
    for (long long p = 0; p < region.samples; ++p) {
        SplitMix64 rng = stream_for(region.seed, (uint64_t)p);
        double lo = rat_to_double(region.box[0].first), hi = rat_to_double(region.box[0].second);
        double scale = std::ldexp(1.0, cfg.point_precision_bits);
        double v = std::round(rng.next_in(lo, hi) * scale) / scale;
        std::vector<Rat> x{rat_from_double(v)};
        auto rows = solver::count_by_dyadic_block(s, x, psi, cfg.t_max, cfg.solver);
        if (rows[0].count > 0) ++hits0;
    }
    CHECK(res.rows[0].hit_fraction == doctest::Approx(double(hits0) / 15.0));
}

TEST_CASE("monte carlo cell measure brackets the exact union length") {
    SplitMix64 rng(909090);
    auto s = veronese_system(2, 1, Rat(-1, 2), Rat(1, 2));
    auto psi = ApproxFunction::power_law(1.0, 0.8);
    Rat blo(-1, 2), bhi(1, 2);
    int within = 0, total = 0;
    while (total < 100) {
        std::vector<Int> a{Int((long)rng.next_int(-9, 9)), Int((long)rng.next_int(-9, 9)),
                           Int((long)rng.next_int(-9, 9))};
        if (sup_norm(a) == 0) continue;
        a = solver::Form::canonical(a);
        ++total;
        auto cd = solution_cells(Form{a}, s, psi, 0);
        Rat exact(0);
        for (const auto& ci : cd.intervals)
            exact += (ci.length_outer() + ci.length_inner()) / 2;

        // plain hit sampling of {|F| < psi(H)} over the box
        Poly F;
        for (int i = 0; i <= 2; ++i) F = F + s.curve(0).coords()[i] * Rat(a[i]);
        long long hits = 0, samples = 400;
        SplitMix64 point_rng = stream_for(4242, (uint64_t)total);
        for (long long k = 0; k < samples; ++k) {
            Rat x = rat_from_double(point_rng.next_in(-0.5, 0.5));
            if (abs(F.eval(x)) < cd.psi_H) ++hits;
        }
        auto ci95 = wilson95(hits, samples);
        double ex = rat_to_double(exact);
        if (ci95.lo <= ex && ex <= ci95.hi) ++within;
    }
    CHECK(within >= 85);  // nominal 95% coverage, wide slack against bad luck
}
