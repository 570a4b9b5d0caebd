#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kdvlab/error.hpp"
#include "kdvlab/field.hpp"
#include "kdvlab/grid.hpp"

#include <cmath>
#include <sstream>

using namespace kdvlab;

namespace {

const SolitonParams kOne = SolitonParams::finite({1.0}, {std::sqrt(2.0)});

SolitonParams sample_params() {
    return SolitonParams::finite({1.3, 0.9, 0.55, 0.3}, {0.7, 1.9, 0.4, 1.1});
}

double sech(double y) { return 1.0 / std::cosh(y); }

// -2 kappa^2 sech^2(kappa (x - x0) - 4 kappa^3 t), x0 = log(c^2 / 2 kappa) / 2 kappa
double one_soliton(double kappa, double c, double t, double x) {
    const double x0 = std::log(c * c / (2 * kappa)) / (2 * kappa);
    const double s = sech(kappa * (x - x0) - 4 * kappa * kappa * kappa * t);
    return -2 * kappa * kappa * s * s;
}

}  // namespace

TEST_CASE("potential_det: one soliton examples") {
    CHECK(potential_det(kOne, 1, 0.0, 0.0) == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(potential_det(kOne, 1, 0.0, 5.0) == doctest::Approx(-2 * std::pow(sech(5.0), 2)).epsilon(1e-12));
    CHECK(potential_det(kOne, 1, 0.0, 5.0) == doctest::Approx(-3.6317e-4).epsilon(1e-4));
    CHECK(potential_det(kOne, 0, 0.3, 1.0) == 0.0);
}

TEST_CASE("potential_det: closed form for several kappa, c, t") {
    for (double kappa : {0.3, 1.0, 1.7})
        for (double c : {0.2, 1.0, 5.0})
            for (double t : {-0.5, 0.0, 0.4})
                for (double x = -8; x <= 8; x += 0.25) {
                    const auto p = SolitonParams::finite({kappa}, {c});
                    CHECK(std::abs(potential_det(p, 1, t, x) - one_soliton(kappa, c, t, x)) <= 1e-10);
                }
}

TEST_CASE("eigenfunctions: one soliton") {
    const auto e = eigenfunctions(kOne, 1, 0.0, 0.0);
    REQUIRE(e.psi.size() == 1);
    CHECK(e.psi[0] == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(e.dpsi_dx[0] == doctest::Approx(0.0).scale(1));
    for (double x = -6; x <= 6; x += 0.5) {
        const auto f = eigenfunctions(kOne, 1, 0.0, x);
        CHECK(f.psi[0] == doctest::Approx(sech(x) / std::sqrt(2.0)).epsilon(1e-13));
        CHECK(f.dpsi_dx[0] == doctest::Approx(-sech(x) * std::tanh(x) / std::sqrt(2.0)).scale(1).epsilon(1e-13));
    }
    CHECK(eigenfunctions(kOne, 0, 0.0, 0.0).psi.size() == 0);
    CHECK(potential_sq(kOne, 1, 0.0, 0.0) == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(potential_sq(kOne, 0, 0.0, 0.0) == 0.0);
}

TEST_CASE("eigenfunctions solve the linear system") {
    const auto p = sample_params();
    for (double t : {-0.3, 0.0, 0.5})
        for (double x : {-4.0, -1.0, 0.0, 2.0, 6.0}) {
            const auto m = CauchyMatrix::build(p, 4, t, x);
            const auto e = eigenfunctions(p, 4, t, x);
            Eigen::VectorXd psi0(4);
            for (int j = 0; j < 4; ++j)
                psi0[j] = p.norming[j] * std::exp(4 * std::pow(p.kappas[j], 3) * t - p.kappas[j] * x);
            const Eigen::VectorXd r = e.psi + m.entries() * e.psi - psi0;
            CHECK(r.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, psi0.cwiseAbs().maxCoeff()));

            // (1 + C) Psi' = -D Psi0 - C_x Psi
            const auto d = derivative_tensors(m);
            Eigen::VectorXd k = Eigen::Map<const Eigen::VectorXd>(p.kappas.data(), 4);
            const Eigen::VectorXd r2 = e.dpsi_dx + m.entries() * e.dpsi_dx + k.cwiseProduct(psi0) + d.cx * e.psi;
            CHECK(r2.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, psi0.cwiseAbs().maxCoeff()));
        }
}

TEST_CASE("eigenfunction derivative matches finite differences") {
    const auto p = sample_params();
    const double h = 1e-5;
    for (double x : {-3.0, 0.2, 2.7}) {
        const auto jet = eigenfunction_jet(CauchyMatrix::build(p, 4, 0.1, x), 3);
        const auto jp = eigenfunction_jet(CauchyMatrix::build(p, 4, 0.1, x + h), 3);
        const auto jm = eigenfunction_jet(CauchyMatrix::build(p, 4, 0.1, x - h), 3);
        for (int k = 0; k < 3; ++k) {
            const Eigen::VectorXd fd = (jp.derivative(k) - jm.derivative(k)) / (2 * h);
            CHECK((fd - jet.derivative(k + 1)).cwiseAbs().maxCoeff() <= 1e-6);
        }
    }
}

TEST_CASE("Schrodinger residual of the eigenfunctions") {
    const auto p = generate(TailRule::geometric(0.5, 1.0), 6);
    const auto pk = sample_params();
    for (const auto* params : {&p, &pk}) {
        const std::size_t n = params->size();
        for (double t : {0.0, 0.5})
            for (double x = -15; x <= 15; x += 0.75) {
                const auto jet = eigenfunction_jet(CauchyMatrix::build(*params, n, t, x), 2);
                const double v = potential_det(*params, n, t, x);
                for (std::size_t j = 0; j < n; ++j) {
                    const double kj = params->kappas[j];
                    const double res = -jet.derivative(2)[j] + v * jet.derivative(0)[j] + kj * kj * jet.derivative(0)[j];
                    CHECK(std::abs(res) <= 1e-10);
                }
            }
    }
}

TEST_CASE("eigenfunctions are normalized") {
    const auto p = sample_params();
    const auto g = simpson_uniform(-150, 150, 30000);
    for (double t : {0.0, 0.3}) {
        std::vector<std::vector<double>> sq(4, std::vector<double>(g.size()));
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto e = eigenfunctions(p, 4, t, g.x[i]);
            for (int j = 0; j < 4; ++j) sq[j][i] = e.psi[j] * e.psi[j];
        }
        for (int j = 0; j < 4; ++j) CHECK(g.integrate(sq[j]) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("determinant and squared-eigenfunction potentials agree") {
    const auto p = generate(TailRule::geometric(0.5, 0.5), 64);
    for (std::size_t n : {1u, 2u, 8u, 32u, 64u})
        for (double t : {-1.0, 0.0, 0.5})
            for (double x = -20; x <= 20; x += 0.5) {
                const double a = potential_det(p, n, t, x);
                const double b = potential_sq(p, n, t, x);
                CHECK(std::abs(a - b) <= 1e-9 * (1 + std::abs(a)));
            }
}

TEST_CASE("x-derivative routes agree") {
    const auto p = sample_params();
    for (double x : {-5.0, -1.0, 0.0, 3.0}) {
        const auto a = potential_x_derivatives(p, 4, 0.2, x, 6, JetRoute::Determinant);
        const auto b = potential_x_derivatives(p, 4, 0.2, x, 6, JetRoute::Eigenfunction);
        REQUIRE(a.size() == 7);
        for (int d = 0; d <= 6; ++d)
            CHECK(std::abs(a[d] - b[d]) <= 1e-10 * std::max(1.0, std::abs(a[d])));
    }
}

TEST_CASE("KdV residual vanishes") {
    CHECK(kdv_residual(kOne, 0, 0.0, 0.0) == 0.0);
    for (double t : {-0.5, 0.0, 0.7})
        for (double x = -8; x <= 8; x += 0.5) {
            const auto k = kdv_terms(kOne, 1, t, x);
            CHECK(std::abs(k.residual) <= 1e-8 * std::max(1.0, std::abs(k.vxxx)));
        }
    const auto p = sample_params();
    for (double t : {-0.5, 0.0, 0.7})
        for (double x = -8; x <= 8; x += 0.5) {
            const auto k = kdv_terms(p, 4, t, x);
            CHECK(std::abs(k.residual) <= 1e-9 * std::max(1.0, std::abs(k.vxxx)));
        }
}

TEST_CASE("KdV terms match the one-soliton closed form") {
    // V = -2 sech^2(x - 4t): V_t = -4 V_x
    for (double x : {-2.0, 0.3, 1.5}) {
        const auto k = kdv_terms(kOne, 1, 0.0, x);
        const double s = sech(x), th = std::tanh(x);
        CHECK(k.v == doctest::Approx(-2 * s * s).epsilon(1e-13));
        CHECK(k.vx == doctest::Approx(4 * s * s * th).epsilon(1e-13));
        CHECK(k.vt == doctest::Approx(-4 * k.vx).epsilon(1e-13));
    }
}

TEST_CASE("sample_field: single node and derivatives") {
    const auto p = sample_params();
    const auto f = sample_field(p, 4, {{0.25}, {1.5}}, {true, true, true, true});
    CHECK(f.v.size() == 1);
    CHECK(f.v[0] == doctest::Approx(potential_det(p, 4, 0.25, 1.5)).epsilon(1e-15));
    const auto k = kdv_terms(p, 4, 0.25, 1.5);
    CHECK(f.vt[0] == doctest::Approx(k.vt).epsilon(1e-14));
    CHECK(f.vx[0] == doctest::Approx(k.vx).epsilon(1e-14));
    CHECK(f.vxxx[0] == doctest::Approx(k.vxxx).epsilon(1e-14));
    CHECK(f.residual[0] == doctest::Approx(k.residual).scale(1).epsilon(1e-14));
    CHECK(f.truncation == 4);
    CHECK(f.eps_tail == doctest::Approx(tail_trace_bound(p, 5, 0.25, 1.5)));
    CHECK_THROWS_AS((void)sample_field(p, 4, {{}, {1.0}}), Error);
    CHECK_THROWS_AS((void)sample_field(p, 5, {{0.0}, {1.0}}), Error);
}

TEST_CASE("sample_field: one soliton grid") {
    const auto f = sample_field(kOne, 1, {{0.0, 0.2}, linspace(-8, 8, 161)});
    for (std::size_t it = 0; it < 2; ++it)
        for (std::size_t ix = 0; ix < f.x_values.size(); ++ix)
            CHECK(std::abs(f.at(it, ix) - one_soliton(1.0, std::sqrt(2.0), f.t_values[it], f.x_values[ix])) <= 1e-10);
    CHECK(f.slice(1).size() == 161);
    CHECK(f.slice(1)[80] == f.at(1, 80));
}

TEST_CASE("sample_field: translation covariance") {
    const auto p = sample_params();
    const double a = 0.75;
    auto q = p;
    for (std::size_t j = 0; j < q.size(); ++j) q.norming[j] *= std::exp(q.kappas[j] * a);
    const auto xs = linspace(-10, 10, 81);  // spacing 0.25 divides a
    const auto fp = sample_field(p, 4, {{0.0, 0.3}, xs});
    const auto fq = sample_field(q, 4, {{0.0, 0.3}, xs});
    for (std::size_t it = 0; it < 2; ++it)
        for (std::size_t ix = 0; ix + 3 < xs.size(); ++ix)
            CHECK(fq.at(it, ix + 3) == doctest::Approx(fp.at(it, ix)).scale(1).epsilon(1e-12));
}

TEST_CASE("sample_field: decay on the right") {
    const auto p = generate(TailRule::geometric(0.5, 1.0), 8);
    const auto f = sample_field(p, 8, {{0.0}, linspace(20, 120, 101)});
    for (std::size_t ix = 1; ix < f.x_values.size(); ++ix) CHECK(std::abs(f.at(0, ix)) <= std::abs(f.at(0, ix - 1)));
    for (double v : f.v) CHECK(std::isfinite(v));
}

TEST_CASE("csv export") {
    const auto f = sample_field(kOne, 1, {{0.0, 1.0}, {-1.0, 0.0}}, {false, true, false, true});
    std::ostringstream os;
    write_csv(f, os);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,x,V,Vx,kdv_residual");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].rfind("0,-1,", 0) == 0);
    CHECK(rows[1].rfind("0,0,-2,", 0) == 0);
    CHECK(rows[2].rfind("1,-1,", 0) == 0);
    CHECK(rows[3].rfind("1,0,", 0) == 0);
    // identical input gives byte-identical output
    std::ostringstream os2;
    write_csv(sample_field(kOne, 1, {{0.0, 1.0}, {-1.0, 0.0}}, {false, true, false, true}), os2);
    CHECK(os.str() == os2.str());
}
