#include "doctest.h"

#include <random>

#include "nphoton/error.hpp"
#include "nphoton/liouville.hpp"

using namespace nphoton;

namespace {

DenseMat random_matrix(int d, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    DenseMat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = cplx(nd(rng), nd(rng));
    return m;
}

// Direct evaluation of the master-equation right-hand side.
DenseMat reference_rhs(const MasterEquation& me, const DenseMat& rho) {
    const cplx I(0.0, 1.0);
    const DenseMat h = me.hamiltonian().matrix();
    DenseMat out = I * (rho * h - h * rho);
    for (const auto& d : me.dissipators()) {
        const DenseMat c = d.collapse.matrix();
        const DenseMat cd = c.adjoint();
        out += 0.5 * d.rate * (2.0 * c * rho * cd - cd * c * rho - rho * cd * c);
    }
    return out;
}

}  // namespace

TEST_CASE("qubit decay spectrum") {
    auto s = make_space({FactorSpec::qubit("q")});
    const double g = 0.7;
    MasterEquation me(zero_operator(s), {{g, annihilator(s, "q")}});
    Liouvillian L = build_liouvillian(me);
    Eigen::ComplexEigenSolver<DenseMat> es(DenseMat(L.superop()));
    std::vector<double> ev;
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(es.eigenvalues()[i].imag()) < 1e-14);
        ev.push_back(es.eigenvalues()[i].real());
    }
    std::sort(ev.begin(), ev.end());
    CHECK(ev[0] == doctest::Approx(-g));
    CHECK(ev[1] == doctest::Approx(-g / 2));
    CHECK(ev[2] == doctest::Approx(-g / 2));
    CHECK(std::abs(ev[3]) < 1e-14);
}

TEST_CASE("superoperator matches the direct right-hand side") {
    auto s = make_space({FactorSpec::boson("a", 3), FactorSpec::qubit("sigma")});
    Operator a = annihilator(s, "a");
    Operator sm = annihilator(s, "sigma");
    Operator h = 1.3 * number(s, "a") + 0.4 * (adjoint(a) * sm + adjoint(sm) * a);
    MasterEquation me(h, {{0.2, a}, {0.05, sm}, {0.01, adjoint(sm)}});
    const DenseMat rho = random_matrix(s->dim(), 3);
    const DenseMat ref = reference_rhs(me, rho);
    CHECK((build_liouvillian(me).apply(rho) - ref).norm() < 1e-12 * ref.norm());

    Eigen::VectorXd grading(s->dim());
    for (int i = 0; i < s->dim(); ++i) grading[i] = std::pow(10.0, -s->level(i, 1));
    Liouvillian G = build_liouvillian(me, grading);
    CHECK(G.graded());
    CHECK((G.apply(rho) - ref).norm() < 1e-12 * ref.norm());
}

TEST_CASE("invariant blocks follow excitation number") {
    auto s = make_space({FactorSpec::boson("a", 3), FactorSpec::qubit("sigma")});
    Operator a = annihilator(s, "a");
    Operator sm = annihilator(s, "sigma");
    MasterEquation me(adjoint(a) * sm + adjoint(sm) * a, {{0.1, a}, {0.1, sm}});
    Liouvillian L = build_liouvillian(me);
    CHECK(L.blocks().size() > 1);
    std::size_t total = 0;
    for (const auto& b : L.blocks()) total += b.index.size();
    CHECK(total == static_cast<std::size_t>(L.dim()));
    // rho(0,0) and rho(1,1) share a block, the coherence rho(0,1) does not.
    const int d = s->dim();
    CHECK(L.block_of(0) == L.block_of(1 + d));
    CHECK(L.block_of(0) != L.block_of(0 + d));
}

TEST_CASE("pumped qubit steady state") {
    auto s = make_space({FactorSpec::qubit("q")});
    const double g = 1.0, p = 0.25;
    Operator sm = annihilator(s, "q");
    MasterEquation me(zero_operator(s), {{g, sm}, {p, adjoint(sm)}});
    DensityMatrix rho = steady_state(build_liouvillian(me));
    CHECK(expectation(rho, number(s, "q")).real() == doctest::Approx(p / (p + g)).epsilon(1e-12));
    CHECK(rho.matrix().trace().real() == doctest::Approx(1.0));
}

TEST_CASE("thermal cavity occupation") {
    const double ga = 1.0, pa = 0.5;
    auto s = make_space({FactorSpec::boson("a", 60)});
    Operator a = annihilator(s, "a");
    MasterEquation me(number(s, "a"), {{ga, a}, {pa, adjoint(a)}});
    DensityMatrix rho = steady_state(build_liouvillian(me));
    CHECK(expectation(rho, number(s, "a")).real() == doctest::Approx(pa / (ga - pa)).epsilon(1e-10));
    // geometric distribution
    const double r = pa / ga;
    CHECK(rho.matrix()(3, 3).real() == doctest::Approx((1 - r) * r * r * r).epsilon(1e-10));
}

TEST_CASE("graded steady state agrees with the plain one") {
    auto s = make_space({FactorSpec::boson("a", 4), FactorSpec::qubit("sigma")});
    Operator a = annihilator(s, "a");
    Operator sm = annihilator(s, "sigma");
    MasterEquation me(adjoint(a) * sm + adjoint(sm) * a, {{0.1, a}, {0.01, sm}, {0.01, adjoint(sm)}});
    Eigen::VectorXd grading(s->dim());
    for (int i = 0; i < s->dim(); ++i) grading[i] = std::pow(0.2, s->level(i, 0));
    DensityMatrix r1 = steady_state(build_liouvillian(me));
    DensityMatrix r2 = steady_state(build_liouvillian(me, grading));
    CHECK((r1.matrix() - r2.matrix()).norm() < 1e-10);
}

TEST_CASE("input validation") {
    auto s = make_space({FactorSpec::qubit("q")});
    Operator sm = annihilator(s, "q");
    CHECK_THROWS_AS(MasterEquation(sm, {}), InvalidArgument);
    CHECK_THROWS_AS(MasterEquation(zero_operator(s), {{-1.0, sm}}), InvalidArgument);
    MasterEquation me(zero_operator(s), {{1.0, sm}, {0.0, adjoint(sm)}});
    CHECK(me.smallest_rate() == 1.0);
}

TEST_CASE("degenerate steady state is reported") {
    auto s = make_space({FactorSpec::boson("a", 2), FactorSpec::qubit("q")});
    Operator sm = annihilator(s, "q");
    // the boson is decoupled and undamped
    MasterEquation me(zero_operator(s), {{1.0, sm}});
    CHECK_THROWS_AS(steady_state(build_liouvillian(me)), ComputationError);
}
