#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kdvlab/error.hpp"
#include "kdvlab/invariants.hpp"

#include <cmath>
#include <sstream>

using namespace kdvlab;

namespace {

const SolitonParams kOne = SolitonParams::finite({1.0}, {std::sqrt(2.0)});

SolitonParams sample_params() {
    return SolitonParams::finite({1.3, 0.9, 0.55, 0.3}, {0.7, 1.9, 0.4, 1.1});
}

}  // namespace

TEST_CASE("chi ladder: polynomial forms") {
    // V, V', ..., V^(6) at an arbitrary point
    const std::vector<double> d{-0.7, 0.3, 1.1, -2.0, 0.45, 3.2, -1.7};
    const double v = d[0], v1 = d[1], v2 = d[2], v3 = d[3], v4 = d[4], v5 = d[5], v6 = d[6];
    const auto chi = chi_values(d, 7);
    REQUIRE(chi.size() == 7);
    CHECK(chi[0] == v);
    CHECK(chi[1] == -v1);
    CHECK(chi[2] == doctest::Approx(v2 - v * v));
    CHECK(chi[3] == doctest::Approx(-v3 + 4 * v * v1));
    CHECK(chi[4] == doctest::Approx(v4 - 5 * v1 * v1 - 6 * v * v2 + 2 * v * v * v));
    CHECK(chi[5] == doctest::Approx(-v5 + 8 * v * v3 + 18 * v1 * v2 - 16 * v * v * v1));
    CHECK(chi[6] == doctest::Approx(v6 - 10 * v * v4 - 28 * v1 * v3 - 19 * v2 * v2 + 30 * v * v * v2 +
                                    50 * v * v1 * v1 - 5 * v * v * v * v));
    const auto zero = chi_values(std::vector<double>(7, 0.0), 7);
    for (double c : zero) CHECK(c == 0.0);
    CHECK_THROWS_AS((void)chi_values({1.0, 2.0}, 3), Error);
    CHECK_THROWS_AS((void)chi_values(std::vector<double>(8, 0.0), 8), Error);
}

TEST_CASE("trace relations: one soliton") {
    const auto r = trace_relations(kOne, 1, 0.0, 2);
    REQUIRE(r.size() == 3);
    CHECK(r[0].lhs == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r[1].lhs == doctest::Approx(16.0 / 3.0).epsilon(1e-12));
    CHECK(r[2].lhs == doctest::Approx(64.0 / 5.0).epsilon(1e-12));
    CHECK(r[0].rhs == 4.0);
    CHECK(r[1].rhs == doctest::Approx(16.0 / 3.0));
    for (const auto& e : r) CHECK(e.defect <= 1e-12);
}

TEST_CASE("trace relations: empty truncation") {
    const auto r = trace_relations(kOne, 0, 0.0, 2);
    for (const auto& e : r) {
        CHECK(e.lhs == 0.0);
        CHECK(e.rhs == 0.0);
        CHECK(e.defect == 0.0);
    }
}

TEST_CASE("trace relations: multi-soliton, both routes, conserved in t") {
    const auto p = sample_params();
    for (auto route : {JetRoute::Determinant, JetRoute::Eigenfunction}) {
        TraceOptions o;
        o.route = route;
        const auto a = trace_relations(p, 4, 0.0, 3, o);
        const auto b = trace_relations(p, 4, 1.0, 3, o);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].defect <= 1e-9);
            CHECK(b[i].defect <= 1e-9);
            CHECK(std::abs(a[i].lhs - b[i].lhs) <= 1e-9 * std::abs(a[i].rhs));
        }
    }
}

TEST_CASE("even-order densities integrate to zero") {
    const auto p = sample_params();
    const auto w = trace_window(p, 4, 0.3, 1);
    const auto grid = simpson_sinh(w.span.lo, w.span.hi, w.center, w.scale, 20000);
    const auto ladder = chi_ladder(p, 4, 0.3, grid, 7);
    REQUIRE(ladder.size() == 7);
    for (const auto& d : ladder) {
        if (d.order % 2 == 0) CHECK(std::abs(d.integral) <= 1e-10);
    }
    // chi_1 = V and chi_2 = -V_x node for node
    for (std::size_t i = 0; i < grid.size(); i += 97) {
        const auto vd = potential_x_derivatives(p, 4, 0.3, grid.x[i], 1, JetRoute::Determinant);
        CHECK(ladder[0].values[i] == doctest::Approx(vd[0]).epsilon(1e-13));
        CHECK(ladder[1].values[i] == doctest::Approx(-vd[1]).epsilon(1e-13));
    }
}

TEST_CASE("trace relation refusals") {
    InvariantDensity d;
    d.order = 2;
    CHECK_THROWS_AS((void)trace_relation(kOne, 1, d), Error);
    auto q = generate(TailRule::geometric(0.5, 0.5), 4);
    q.summability = Summability::LinfSummable;
    d.order = 3;
    try {
        (void)trace_relation(q, 4, d);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ClassMismatch);
    }
    CHECK_THROWS_AS((void)trace_relations(q, 4, 0.0, 1), Error);
    CHECK_THROWS_AS((void)trace_rhs(kOne, 1, 4), Error);
}

TEST_CASE("trace window keeps the dominant solitons") {
    const auto p = generate(TailRule::geometric(0.5, 0.5), 32);
    const auto w1 = trace_window(p, 32, 0.0, 1);
    const auto w5 = trace_window(p, 32, 0.0, 5);
    CHECK(w1.kept == 32);
    CHECK(w5.kept < 32);
    CHECK(w5.dropped_power <= 1e-10 * 1.0);
    CHECK(w1.span.width() > w5.span.width());
    CHECK(w5.scale == doctest::Approx(2.0));
}

TEST_CASE("bound check saturates for reflectionless fields") {
    const auto p = generate(TailRule::geometric(0.5, 0.5), 8);
    const auto b = bound_check(p, 8, 0.0, 0, 1e-7);
    CHECK(b.upper.order == 1);
    CHECK(b.lower.order == 3);
    CHECK(b.upper_holds);
    CHECK(b.lower_holds);
    CHECK(b.saturated);
    const auto z = bound_check(kOne, 0, 0.0, 0, 1e-7);
    CHECK(z.upper_holds);
    CHECK(z.lower_holds);
    CHECK(z.upper.lhs == 0.0);
}

TEST_CASE("trace csv") {
    std::ostringstream os;
    write_csv(trace_relations(kOne, 1, 0.0, 0), os);
    const std::string s = os.str();
    CHECK(s.rfind("order,t,lhs,rhs,defect,tail_budget\n1,0,", 0) == 0);
}
