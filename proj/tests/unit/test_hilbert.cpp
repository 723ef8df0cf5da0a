#include "doctest.h"

#include <sstream>

#include "nphoton/error.hpp"
#include "nphoton/hilbert.hpp"

using namespace nphoton;

TEST_CASE("composite space layout") {
    auto s = make_space({FactorSpec::boson("a", 3), FactorSpec::qubit("sigma")});
    CHECK(s->dim() == 8);
    CHECK(s->stride(0) == 2);
    CHECK(s->stride(1) == 1);
    CHECK(s->level(5, 0) == 2);
    CHECK(s->level(5, 1) == 1);
    CHECK(s->index_of("sigma") == 1);
    CHECK_THROWS_AS(s->index_of("b"), InvalidArgument);
    CHECK_THROWS_AS(make_space({FactorSpec::qubit("x"), FactorSpec::qubit("x")}), InvalidArgument);
    CHECK_THROWS_AS(make_space({FactorSpec::boson("a", 0)}), InvalidArgument);
    CHECK_THROWS_AS(make_space({}), InvalidArgument);
}

TEST_CASE("ladder operators") {
    auto s = make_space({FactorSpec::boson("a", 4)});
    Operator a = annihilator(s, "a");
    CHECK(a.matrix().coeff(2, 3) == cplx(std::sqrt(3.0)));
    Operator comm = a * adjoint(a) - adjoint(a) * a;
    for (int n = 0; n < 4; ++n) CHECK(std::abs(comm.matrix().coeff(n, n) - 1.0) < 1e-14);
    // truncation edge
    CHECK(std::abs(comm.matrix().coeff(4, 4) + 4.0) < 1e-14);
    Operator n = number(s, "a");
    CHECK(max_abs(SparseMat((adjoint(a) * a - n).matrix())) < 1e-14);

    auto q = make_space({FactorSpec::qubit("sigma")});
    Operator sm = annihilator(q, "sigma");
    CHECK(sm.matrix().coeff(0, 1) == cplx(1.0));
    CHECK(sm.matrix().nonZeros() == 1);
}

TEST_CASE("operators on factors commute and embed") {
    auto s = make_space({FactorSpec::boson("a", 2), FactorSpec::qubit("sigma")});
    Operator a = annihilator(s, "a");
    Operator sm = annihilator(s, "sigma");
    CHECK(max_abs(SparseMat((a * sm - sm * a).matrix())) == 0.0);

    auto small = make_space({FactorSpec::boson("a", 2)});
    auto big = extend_space(*s, {FactorSpec::qubit("sensor1")});
    Operator e = embed(annihilator(small, "a"), big);
    CHECK(max_abs(SparseMat((e - annihilator(big, "a")).matrix())) == 0.0);
    Operator e2 = embed(sm, big);
    CHECK(max_abs(SparseMat((e2 - annihilator(big, "sigma")).matrix())) == 0.0);
    CHECK_THROWS_AS(embed(annihilator(big, "a"), s), InvalidArgument);
    CHECK_THROWS_AS(a + annihilator(big, "a"), InvalidArgument);
}

TEST_CASE("coordinate list output") {
    auto s = make_space({FactorSpec::qubit("q")});
    std::ostringstream os;
    write_coordinate_list(os, annihilator(s, "q").matrix());
    CHECK(os.str() == "0 1 1.0000000000000000e+00 0.0000000000000000e+00\n");
}
