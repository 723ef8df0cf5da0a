#include "doctest.h"

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "nphoton/error.hpp"
#include "nphoton/regression.hpp"

using namespace nphoton;

TEST_CASE("delay grid validation") {
    CHECK_NOTHROW(DelayGrid::make({0.0, 0.5, 0.5, 2.0}));
    CHECK_THROWS_AS(DelayGrid::make({}), InvalidArgument);
    CHECK_THROWS_AS(DelayGrid::make({-1.0, 0.0}), InvalidArgument);
    CHECK_THROWS_AS(DelayGrid::make({1.0, 0.5}), InvalidArgument);
    CHECK_THROWS_AS(DelayGrid::make({0.0, NAN}), InvalidArgument);
}

TEST_CASE("krylov exponential against dense exponential") {
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    const int n = 80;
    DenseMat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cplx(nd(rng), nd(rng)) / std::sqrt(double(n));
    a -= 1.5 * DenseMat::Identity(n, n);
    DenseVec v(n);
    for (int i = 0; i < n; ++i) v[i] = cplx(nd(rng), nd(rng));
    const SparseMat s = a.sparseView();
    const double t = 3.0;
    const DenseVec ref = (a * cplx(t)).exp() * v;
    const DenseVec got = detail::krylov_expv(s, a.cwiseAbs().rowwise().sum().maxCoeff(), v, t, 1e-10, 0.0);
    CHECK((got - ref).norm() < 1e-8 * ref.norm());
}

TEST_CASE("qubit decay propagation") {
    auto s = make_space({FactorSpec::qubit("q")});
    const double g = 0.3;
    MasterEquation me(0.8 * number(s, "q"), {{g, annihilator(s, "q")}});
    Liouvillian L = build_liouvillian(me);
    DenseMat rho0(2, 2);
    rho0 << 0.5, 0.5, 0.5, 0.5;
    CHECK((propagate(L, rho0, 0.0) - rho0).norm() == 0.0);
    const double t = 4.0;
    DenseMat r = propagate(L, rho0, t, 1e-10);
    CHECK(r(1, 1).real() == doctest::Approx(0.5 * std::exp(-g * t)).epsilon(1e-9));
    // rho(1,0) rotates with exp(-i w t) under d rho/dt = i[rho, H]
    const cplx expect = 0.5 * std::exp(cplx(-g / 2, -0.8) * t);
    CHECK(std::abs(r(1, 0) - expect) < 1e-9);
    CHECK_THROWS_AS(propagate(L, rho0, -1.0), InvalidArgument);
}

TEST_CASE("marching equals direct propagation") {
    auto s = make_space({FactorSpec::boson("a", 6), FactorSpec::qubit("sigma")});
    Operator a = annihilator(s, "a");
    Operator sm = annihilator(s, "sigma");
    MasterEquation me(adjoint(a) * sm + adjoint(sm) * a, {{0.1, a}, {0.05, sm}, {0.05, adjoint(sm)}});
    Liouvillian L = build_liouvillian(me);
    DensityMatrix rho = steady_state(L);
    const DenseMat seed = a.matrix() * rho.matrix() * adjoint(a).matrix();
    Propagator p(L, seed, 1e-10);
    for (double t : {0.5, 1.7, 5.0}) p.advance_to(t);
    CHECK((p.state() - propagate(L, seed, 5.0, 1e-10)).norm() < 1e-8 * seed.norm());
    CHECK_THROWS_AS(p.advance_to(1.0), InvalidArgument);
}

TEST_CASE("thermal light bunching") {
    // g2(tau) = 1 + exp(-(ga - pa) tau) for a thermal mode
    const double ga = 1.0, pa = 0.3;
    auto s = make_space({FactorSpec::boson("a", 40)});
    Operator a = annihilator(s, "a");
    MasterEquation me(number(s, "a"), {{ga, a}, {pa, adjoint(a)}});
    Liouvillian L = build_liouvillian(me);
    DensityMatrix rho = steady_state(L);
    const auto grid = DelayGrid::make({0.0, 0.5, 1.0, 3.0});
    const auto g2 = colorblind_g2(L, rho, a, grid);
    for (std::size_t i = 0; i < g2.size(); ++i)
        CHECK(g2[i] == doctest::Approx(1.0 + std::exp(-(ga - pa) * grid.delays[i])).epsilon(1e-6));
}

TEST_CASE("zero population is an error") {
    auto s = make_space({FactorSpec::boson("a", 3)});
    Operator a = annihilator(s, "a");
    MasterEquation me(number(s, "a"), {{1.0, a}});
    Liouvillian L = build_liouvillian(me);
    CHECK_THROWS_AS(colorblind_g2(L, steady_state(L), a, DelayGrid::make({0.0})), ComputationError);
}
