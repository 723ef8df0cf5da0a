#include "doctest.h"

#include <unsupported/Eigen/MatrixFunctions>

#include "nphoton/error.hpp"
#include "nphoton/models.hpp"
#include "nphoton/sensors.hpp"
#include "thermal_ref.hpp"

using namespace nphoton;
using namespace nphoton::testing;

namespace {

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

SensorSpec at(double omega, double gamma) { return SensorSpec{omega, gamma, std::nullopt}; }

struct Thermal {
    ThermalRef ref{dilute()};
    MasterEquation me = thermal_cavity(dilute());
    Operator a = annihilator(me.space(), "a");
};

}  // namespace

TEST_CASE("attach_sensors validation and automatic epsilon") {
    Thermal t;
    CHECK_THROWS_AS(attach_sensors(t.me, t.a, {}), InvalidArgument);
    CHECK_THROWS_AS(attach_sensors(t.me, t.a, std::vector<SensorSpec>(5, at(0, 1))), InvalidArgument);
    CHECK_THROWS_AS(attach_sensors(t.me, t.a, {at(0, 0.0)}), InvalidArgument);
    CHECK_THROWS_AS(attach_sensors(t.me, t.a, {at(0, 1), at(0, 1)}, kDefaultChi, SensorKind::Harmonic),
                    InvalidArgument);

    const auto ss = attach_sensors(t.me, t.a, {at(0.3, 0.5), at(-0.2, 2.0)}, 0.02);
    // Smallest nonzero system rate is P_a = 0.2.
    CHECK(ss.gamma_q() == doctest::Approx(0.2));
    CHECK(ss.epsilons()[0] == doctest::Approx(0.02 * std::sqrt(0.5 * 0.2 / 2)));
    CHECK(ss.epsilons()[1] == doctest::Approx(0.02 * std::sqrt(2.0 * 0.2 / 2)));
    CHECK(ss.space()->dim() == t.me.space()->dim() * 4);

    SensorSpec loud = at(0.0, 1.0);
    loud.epsilon = 0.5;
    CHECK_THROWS_WITH_AS(attach_sensors(t.me, t.a, {loud}), doctest::Contains("back-action"), InvalidArgument);
}

TEST_CASE("sensor spectrum of thermal light") {
    Thermal t;
    const std::vector<double> omegas = {-2.0, -0.5, 0.0, 0.7, 3.0};
    for (double gamma : {0.2, 1.0}) {
        const auto coarse = sensor_spectrum(t.me, t.a, omegas, gamma, 1e-2);
        const auto fine = sensor_spectrum(t.me, t.a, omegas, gamma, 5e-3);
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            const double want = t.ref.spectrum(omegas[i], gamma);
            const double e1 = rel(coarse[i].value, want), e2 = rel(fine[i].value, want);
            CHECK(e1 < 1e-3);
            // Back-action error is O(epsilon^2): halving chi quarters it.
            CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
        }
    }
}

TEST_CASE("filtered thermal light: g2 = 2 and g3 = 6 for identical sensors") {
    Thermal t;
    for (double w : {0.0, 0.6}) {
        const auto g2 = gn_zero_delay(attach_sensors(t.me, t.a, {at(w, 0.5), at(w, 0.5)}));
        CHECK(rel(g2.value, 2.0) < 1e-3);
        CHECK(g2.flags.empty());
        const auto g3 = gn_zero_delay(attach_sensors(t.me, t.a, {at(w, 0.5), at(w, 0.5), at(w, 0.5)}));
        CHECK(rel(g3.value, 6.0) < 1e-3);
    }
}

TEST_CASE("filtered thermal light at two frequencies") {
    Thermal t;
    for (auto [w1, w2] : std::vector<std::pair<double, double>>{{0.3, -0.4}, {1.0, 0.0}}) {
        const FilterSpec f1{w1, 0.8}, f2{w2, 0.8};
        const double got = gn_zero_delay(attach_sensors(t.me, t.a, {at(w1, 0.8), at(w2, 0.8)})).value;
        CHECK(rel(got, t.ref.g2_zero(f1, f2)) < 1e-3);
    }
}

TEST_CASE("harmonic sensor equals two degenerate two-level sensors") {
    Thermal t;
    const double two_level = gn_zero_delay(attach_sensors(t.me, t.a, {at(0.4, 0.5), at(0.4, 0.5)})).value;
    const double harmonic =
        gn_zero_delay(attach_sensors(t.me, t.a, {at(0.4, 0.5)}, kDefaultChi, SensorKind::Harmonic)).value;
    CHECK(rel(harmonic, two_level) < 1e-3);
}

TEST_CASE("permutation symmetry of the zero-delay correlation") {
    JCParams p;
    p.n_max = 5;
    const auto me = jaynes_cummings(p);
    const Operator a = annihilator(me.space(), "a");
    const double g = jc_linewidth(p, 2);
    const auto ss = attach_sensors(me, a, {at(resolve_token("R", p), g), at(resolve_token("-R2+", p), g),
                                           at(resolve_token("R3-", p), g)});
    const double base = gn_zero_delay(ss).value;
    for (const std::vector<int>& order : {std::vector<int>{1, 0, 2}, {2, 1, 0}, {1, 2, 0}}) {
        CHECK(rel(gn_zero_delay(ss.permuted(order)).value, base) < 1e-10);
        std::vector<SensorSpec> specs;
        for (int k : order) specs.push_back(ss.sensors()[k]);
        CHECK(rel(gn_zero_delay(attach_sensors(me, a, specs)).value, base) < 1e-10);
    }
}

TEST_CASE("epsilon-squared scaling of the two-photon correlation") {
    JCParams p;
    const auto me = jaynes_cummings(p);
    const Operator a = annihilator(me.space(), "a");
    const double g = jc_linewidth(p, 2);
    const auto ss = attach_sensors(me, a, {at(resolve_token("R", p), g), at(resolve_token("R2-", p), g)});
    const double v1 = gn_zero_delay(ss).value;
    const double v2 = gn_zero_delay(ss.rescaled(0.5)).value;
    const double v4 = gn_zero_delay(ss.rescaled(0.25)).value;
    // Richardson: successive differences shrink by 4 for an O(eps^2) error.
    CHECK((v1 - v2) / (v2 - v4) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("starved sensors") {
    JCParams p;
    p.P_s = 0.0;
    const auto me = jaynes_cummings(p);
    const Operator a = annihilator(me.space(), "a");
    CHECK_THROWS_WITH_AS(gn_zero_delay(attach_sensors(me, a, {at(1.0, 0.2), at(1.0, 0.2)})),
                         doctest::Contains("sensor starved"), ComputationError);
    const auto s = sensor_spectrum(me, a, {0.0, 1.0}, 0.2);
    CHECK(s[0].value == 0.0);
    CHECK(s[0].has_flag("starved"));
}

TEST_CASE("delayed correlations") {
    Thermal t;
    SUBCASE("thermal light, identical sensors") {
        for (double w0 : {0.0, 0.7}) {
            const double gamma = 0.5;
            const auto ss = attach_sensors(t.me, t.a, {at(w0, gamma), at(w0, gamma)});
            const std::vector<double> taus = {0.0, 0.2, 1.0, 4.0, 60.0};
            const auto got = gn_delays(ss, DelayGrid::make(taus, 1e-10));
            CHECK(got[0].value == doctest::Approx(gn_zero_delay(ss).value).epsilon(1e-12));
            for (std::size_t i = 0; i < taus.size(); ++i)
                CHECK_MESSAGE(rel(got[i].value, t.ref.g2_tau(w0, gamma, taus[i])) < 1e-3, "tau=" << taus[i]);
            CHECK(got.back().value == doctest::Approx(1.0).epsilon(1e-3));
        }
    }
    SUBCASE("signed delays swap the detection order") {
        const auto ss = attach_sensors(t.me, t.a, {at(0.5, 0.4), at(-0.3, 1.2)});
        const auto both = g2_signed_delays(ss, {-2.0, -0.5, 0.0, 0.5, 2.0}, 1e-10);
        const auto fwd = gn_delays(ss, DelayGrid::make({0.5, 2.0}, 1e-10));
        const auto rev = gn_delays(ss.permuted({1, 0}), DelayGrid::make({0.5, 2.0}, 1e-10));
        CHECK(both[3].value == doctest::Approx(fwd[0].value).epsilon(1e-12));
        CHECK(both[4].value == doctest::Approx(fwd[1].value).epsilon(1e-12));
        CHECK(both[1].value == doctest::Approx(rev[0].value).epsilon(1e-12));
        CHECK(both[0].value == doctest::Approx(rev[1].value).epsilon(1e-12));
        CHECK_THROWS_AS(g2_signed_delays(ss, {1.0, 0.0}), InvalidArgument);
    }
    SUBCASE("both regression forms against dense propagation") {
        ThermalParams tp = dilute();
        tp.n_max = 6;
        const auto me = thermal_cavity(tp);
        const auto ss = attach_sensors(me, annihilator(me.space(), "a"), {at(0.5, 0.4), at(-0.3, 1.2)});
        const DenseMat L(build_liouvillian(ss.enlarged()).superop());
        const DenseMat rho = ss.steady().matrix();
        const DenseMat s1 = ss.lowering(0).matrix(), n1 = ss.number_op(0).matrix(), n2 = ss.number_op(1).matrix();
        const double norm = (n1 * rho).trace().real() * (n2 * rho).trace().real();
        const auto grid = DelayGrid::make({0.0, 1.0, 5.0}, 1e-12);
        const auto sandwich = gn_delays(ss, grid);
        const auto number_form = g2_delays_number_form(ss, grid);
        for (std::size_t i = 0; i < grid.delays.size(); ++i) {
            const DenseMat e = (L * grid.delays[i]).exp();
            auto evolve = [&](const DenseMat& x) {
                const DenseVec v = e * Eigen::Map<const DenseVec>(x.data(), x.size());
                return DenseMat(Eigen::Map<const DenseMat>(v.data(), x.rows(), x.cols()));
            };
            const double want_s = (n2 * evolve(s1 * rho * s1.adjoint())).trace().real() / norm;
            const double want_n = (n2 * evolve(n1 * rho)).trace().real() / norm;
            CHECK(rel(sandwich[i].value, want_s) < 1e-9);
            CHECK(rel(number_form[i], want_n) < 1e-9);
        }
        // The forms coincide at zero delay only.
        CHECK(number_form[0] == doctest::Approx(sandwich[0].value).epsilon(1e-12));
    }
    SUBCASE("three sensors with a fixed intermediate time") {
        const auto ss = attach_sensors(t.me, t.a, {at(0.0, 0.5), at(0.0, 0.5), at(0.0, 0.5)});
        CHECK_THROWS_AS(gn_delays(ss, DelayGrid::make({1.0})), InvalidArgument);
        CHECK_THROWS_AS(gn_delays(ss, DelayGrid::make({0.5, 1.0}), {0.8}), InvalidArgument);
        const auto zero = gn_delays(ss, DelayGrid::make({0.0}), {0.0});
        CHECK(zero[0].value == doctest::Approx(gn_zero_delay(ss).value).epsilon(1e-10));
        const auto far = gn_delays(ss, DelayGrid::make({200.0}), {100.0});
        CHECK(far[0].value == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("epsilon convergence policy") {
    Thermal t;
    const auto ss = attach_sensors(t.me, t.a, {at(0.0, 0.5), at(0.0, 0.5)});
    const auto c = converge_epsilon([&](double scale) { return gn_zero_delay(ss.rescaled(scale)); }, 1e-4);
    CHECK(c.convergence_estimate < 1e-4);
    CHECK(rel(c.value, 2.0) < 1e-4);
    CHECK_THROWS_WITH_AS(converge_epsilon(
                             [](double scale) {
                                 CorrelationResult r;
                                 r.value = 1.0 + scale;
                                 return r;
                             },
                             1e-3),
                         doctest::Contains("epsilon not converged"), ComputationError);
}
