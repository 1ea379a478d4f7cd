#include <doctest.h>

#include <cmath>

#include "smallforms/errors.hpp"
#include "smallforms/rng.hpp"
#include "smallforms/ubiquity.hpp"

using namespace smallforms;
using namespace smallforms::ubiquity;
using approx::ApproxFunction;
using curves::veronese_system;
using solver::Form;

namespace {

UbiquityConfig omega1(double delta0 = 0.0) {
    UbiquityConfig cfg;
    cfg.omega = {{Rat(-1, 2), Rat(1, 2)}};
    cfg.delta0 = delta0;
    return cfg;
}

}  // namespace

TEST_CASE("resonant points of the linear veronese system at level one") {
    auto s = veronese_system(1, 1, Rat(-1), Rat(1));
    auto set = resonant_points(s, omega1(1.0), 1);
    // canonical forms with H <= 2 and a root in omega:
    // (0,1) and (0,2) at 0, (1,2) at -1/2, (1,-2) at 1/2
    REQUIRE(set.points.size() == 4);
    int at_zero = 0, at_half = 0, at_minus_half = 0;
    for (const auto& rp : set.points) {
        CHECK(rp.level_t == 1);
        CHECK(rp.beta == doctest::Approx(double(rp.height)));
        Rat mid = rp.gammas[0].mid();
        if (mid == Rat(0)) ++at_zero;
        if (mid == Rat(1, 2)) ++at_half;
        if (mid == Rat(-1, 2)) ++at_minus_half;
    }
    CHECK(at_zero == 2);
    CHECK(at_half == 1);
    CHECK(at_minus_half == 1);
}

TEST_CASE("forms without roots in omega contribute nothing") {
    auto s = veronese_system(2, 1, Rat(-1), Rat(1));
    auto set = resonant_points(s, omega1(1.0), 1);
    for (const auto& rp : set.points)
        CHECK_FALSE(rp.form.a == std::vector<Int>{Int(-2), Int(0), Int(1)});
}

TEST_CASE("tuple counts multiply across coordinates") {
    // F = 4x^3 - x has roots {0, +-1/2}; omega_1 holds all three, omega_2 two
    auto s = veronese_system(3, 2, Rat(-1), Rat(1));
    UbiquityConfig cfg;
    cfg.omega = {{Rat(-3, 5), Rat(3, 5)}, {Rat(-1, 10), Rat(3, 5)}};
    cfg.delta0 = 1.0;
    auto set = resonant_points(s, cfg, 2);  // H <= 4
    std::vector<Int> target{Int(0), Int(1), Int(0), Int(-4)};  // canonical sign
    int count = 0;
    for (const auto& rp : set.points)
        if (rp.form.a == target) ++count;
    CHECK(count == 6);
}

TEST_CASE("resonant residuals meet the refinement target and brackets are certified") {
    auto s = veronese_system(2, 1, Rat(-1), Rat(1));
    auto cfg = omega1();  // default delta0 = ((n+1)M)^-1
    auto set = resonant_points(s, cfg, 6);
    CHECK(set.points.size() > 0);
    Rat tol(1, Int("1000000000000000000000000000000"));
    for (const auto& rp : set.points) {
        Poly F;
        for (int i = 0; i <= 2; ++i) F = F + s.curve(0).coords()[i] * Rat(rp.form.a[i]);
        const RootBracket& br = rp.gammas[0];
        CHECK(abs(F.eval(br.mid())) <= tol);
        if (!br.exact) {
            CHECK(br.width() <= tol);
            Int den;
            IntPoly sf = square_free_part(int_poly_from(F, den));
            CHECK(int_poly_sign_at(sf, br.lo) * int_poly_sign_at(sf, br.hi) < 0);
        } else {
            CHECK(F.eval(br.lo) == Rat(0));
        }
    }
}

TEST_CASE("levels are nested: J(t) grows with t") {
    auto s = veronese_system(2, 1, Rat(-1), Rat(1));
    auto cfg = omega1();
    size_t prev = 0;
    for (int t = 5; t <= 8; ++t) {
        auto set = resonant_points(s, cfg, t);
        CHECK(set.points.size() >= prev);
        prev = set.points.size();
    }
}

TEST_CASE("a single centered point with a big radius covers the ball") {
    auto s = veronese_system(1, 1, Rat(-1), Rat(1));
    auto cfg = omega1(1.0);
    cfg.eta = 1.0;  // rho(2^1) = 2 * 2^-2 = 1/2 >= ball half-width
    ResonantPoint rp;
    rp.form.a = {Int(0), Int(1)};
    rp.gammas = {RootBracket{Rat(0), Rat(0), true}};
    rp.height = 1;
    rp.beta = 1.0;
    rp.level_t = 1;
    std::vector<std::pair<Rat, Rat>> ball{{Rat(-1, 4), Rat(1, 4)}};
    auto cov = covering_fraction({rp}, s, cfg, 1, ball);
    CHECK(cov.exact);
    CHECK(cov.fraction == 1.0);
    CHECK(cov.fraction_lower == 1.0);
}

TEST_CASE("empty resonant sets cover nothing and warn") {
    auto s = veronese_system(1, 1, Rat(-1), Rat(1));
    auto cfg = omega1(1.0);
    std::vector<std::pair<Rat, Rat>> ball{{Rat(-1, 4), Rat(1, 4)}};
    auto cov = covering_fraction({}, s, cfg, 3, ball);
    CHECK(cov.fraction == 0.0);
    CHECK(cov.empty_warning);
}

TEST_CASE("covering grows with the radius and with the level") {
    auto s = veronese_system(2, 1, Rat(-1), Rat(1));
    auto base = omega1();
    std::vector<std::pair<Rat, Rat>> ball{{Rat(-1, 2), Rat(1, 2)}};
    auto pts6 = resonant_points(s, base, 6).points;
    double prev = 2.0;
    for (double eta : {0.0625, 0.25, 1.0, 4.0}) {  // larger eta, smaller rho
        UbiquityConfig cfg = base;
        cfg.eta = eta;
        auto cov = covering_fraction(pts6, s, cfg, 6, ball);
        CHECK(cov.fraction <= prev + 1e-12);
        prev = cov.fraction;
    }
    // more points at the same radius never cover less
    auto pts7 = resonant_points(s, base, 7).points;
    UbiquityConfig cfg = base;
    cfg.eta = 0.25;
    auto c6 = covering_fraction(pts6, s, cfg, 6, ball);
    auto c67 = covering_fraction(pts7, s, cfg, 6, ball);
    CHECK(c67.fraction >= c6.fraction - 1e-12);
}

TEST_CASE("mvt inclusion at the root itself") {
    auto s = veronese_system(1, 1, Rat(-1), Rat(1));
    auto cfg = omega1();
    auto psi = ApproxFunction::power_law(1.0, 2.0);
    ResonantPoint rp;
    rp.form.a = {Int(1), Int(-2)};
    rp.gammas = {RootBracket{Rat(1, 2), Rat(1, 2), true}};
    rp.height = 2;
    rp.beta = 2.0 / cfg.effective_delta0(s);
    auto chk = mvt_inclusion_check({Rat(1, 2)}, rp, psi, s, cfg);
    CHECK(chk.status == MvtCheck::Status::Ok);
    CHECK(chk.holds);
    CHECK(chk.max_residual == 0.0);
}

TEST_CASE("mvt inclusion on the worked linear example") {
    auto s = veronese_system(1, 1, Rat(-1), Rat(1));
    auto cfg = omega1();  // M = 1, delta0 = 1/2
    CHECK(cfg.effective_delta0(s) == doctest::Approx(0.5));
    auto psi = ApproxFunction::power_law(1.0, 2.0);
    ResonantPoint rp;
    rp.form.a = {Int(-1), Int(4)};
    rp.gammas = {RootBracket{Rat(1, 4), Rat(1, 4), true}};
    rp.height = 4;
    rp.beta = 8.0;
    // x = 1/4 + Phi(beta)/2 with Phi(8) = 8^-3 = 1/512
    std::vector<Rat> x{Rat(1, 4) + Rat(1, 1024)};
    auto chk = mvt_inclusion_check(x, rp, psi, s, cfg);
    CHECK(chk.status == MvtCheck::Status::Ok);
    CHECK(chk.holds);
    CHECK(chk.max_residual == doctest::Approx(4.0 / 1024.0));
    CHECK(chk.phi_beta == doctest::Approx(1.0 / 512.0));
    CHECK(chk.predicted_bound == doctest::Approx(psi.evaluate(4)));

    // sup-distance at (or beyond) Phi(beta) violates the precondition
    std::vector<Rat> far{Rat(1, 4) + Rat(1, 512)};
    CHECK(mvt_inclusion_check(far, rp, psi, s, cfg).status ==
          MvtCheck::Status::PreconditionViolated);
    std::vector<Rat> outside{Rat(9, 10)};
    CHECK(mvt_inclusion_check(outside, rp, psi, s, cfg).status ==
          MvtCheck::Status::OutsideDomain);
}

TEST_CASE("regularity report constants") {
    auto psi = ApproxFunction::power_law(1.0, 2.0);
    auto g = approx::DimensionFunction::power(1.0);
    auto rep = regularity_and_condensation(2, 1, 1, 1.0, psi, g, 20);
    CHECK(rep.rho_ratio == 0.125);
    for (size_t i = 1; i < rep.rho.size(); ++i)
        CHECK(rep.rho[i] / rep.rho[i - 1] == doctest::Approx(0.125).epsilon(1e-14));
    // psi = h^-(n+1-m)/m makes the condensed terms identically one
    CHECK(rep.sum_condensed == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(rep.sum_lemma ==
          doctest::Approx(20.0 * rep.per_term_const).epsilon(1e-12));
    CHECK(rep.max_term_ratio_error < 1e-12);

    auto zero = ApproxFunction::tabulated({{1, 0.0}});
    auto repz = regularity_and_condensation(2, 1, 1, 1.0, zero, g, 5);
    CHECK(repz.sum_lemma == 0.0);
    CHECK(repz.sum_condensed == 0.0);
}

TEST_CASE("eta calibration walks the dyadic sweep") {
    auto s = veronese_system(1, 1, Rat(-1), Rat(1));
    auto cfg = omega1();
    std::vector<std::pair<Rat, Rat>> ball{{Rat(-1, 2), Rat(1, 2)}};
    double eta = calibrate_eta(s, cfg, {5, 6}, ball);
    CHECK(eta >= std::ldexp(1.0, -4));
    CHECK(eta <= std::ldexp(1.0, 4));
    // the calibrated eta really achieves the target at both levels
    UbiquityConfig got = cfg;
    got.eta = eta;
    for (int t : {5, 6}) {
        auto pts = resonant_points(s, got, t).points;
        auto cov = covering_fraction(pts, s, got, t, ball);
        CHECK(cov.fraction_lower >= got.effective_k0(s));
    }
}
