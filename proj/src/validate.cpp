#include "nphoton/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "nphoton/error.hpp"
#include "nphoton/models.hpp"
#include "nphoton/sensors.hpp"

namespace nphoton {

ValidationLevel parse_validation_level(const std::string& s) {
    if (s == "quick") return ValidationLevel::Quick;
    if (s == "full") return ValidationLevel::Full;
    throw InvalidArgument(fmt::format("unknown validation level '{}' (expected quick or full)", s));
}

bool ValidationReport::passed() const {
    if (checks.empty()) return false;
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string ValidationReport::table() const {
    std::string out = fmt::format("{:<44} {:>12} {:>10}  {}\n", "check", "rel. error", "tolerance", "result");
    for (const auto& c : checks)
        out += fmt::format("{:<44} {:>12.3e} {:>10.1e}  {}\n", c.name, c.error, c.tolerance, c.pass ? "PASS" : "FAIL");
    out += fmt::format("{} of {} checks passed ({:.1f} s)\n",
                       std::count_if(checks.begin(), checks.end(), [](const auto& c) { return c.pass; }), checks.size(),
                       seconds);
    return out;
}

namespace {

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

ValidationCheck make_check(std::string name, double err, double tol) {
    return ValidationCheck{std::move(name), err, tol, std::isfinite(err) && err < tol};
}

FilterSpec first(const ValidationHooks& h, const FilterSpec& f) {
    return h.oracle_first_filter ? h.oracle_first_filter(f) : f;
}

void thermal_spectrum(ValidationReport& rep, const ValidationHooks& hooks) {
    const ThermalParams p{};
    const MasterEquation me = thermal_cavity(p);
    const Liouvillian L = build_liouvillian(me);
    const DensityMatrix rho = steady_state(L);
    const Operator a = annihilator(me.space(), kProbeLabel);
    const double gamma = p.gamma_a - p.P_a;
    std::vector<double> omegas;
    for (int i = 0; i < 20; ++i) omegas.push_back(-3.0 + 6.0 * i / 19.0);
    const auto sensed = sensor_spectrum(me, a, omegas, gamma);
    double err = 0.0;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        const double want = filtered_spectrum(L, rho, a, first(hooks, FilterSpec{omegas[i], gamma})).value;
        err = std::max(err, rel(sensed[i].value, want));
    }
    rep.checks.push_back(make_check("N=1 spectrum, thermal cavity, 20 points", err, 1e-3));
}

void jc_two_photon(ValidationReport& rep, const ValidationHooks& hooks) {
    JCParams p;
    p.n_max = 3;
    const MasterEquation me = jaynes_cummings(p);
    const Liouvillian L = build_liouvillian(me);
    const DensityMatrix rho = steady_state(L);
    const Operator a = annihilator(me.space(), kProbeLabel);
    const double gamma = jc_linewidth(p, 2);
    constexpr double tol = 1e-2;

    auto oracle_norm = [&](const FilterSpec& f1, const FilterSpec& f2) {
        return filtered_spectrum(L, rho, a, f1).value * filtered_spectrum(L, rho, a, f2).value;
    };

    const std::vector<std::pair<std::string, std::string>> pairs = {{"R", "R2-"}, {"R", "-R"}};
    for (const auto& [t1, t2] : pairs) {
        const FilterSpec f1{resolve_token(t1, p), gamma}, f2{resolve_token(t2, p), gamma};
        const double sensed = gn_zero_delay(attach_sensors(me, a, {{f1.omega, gamma, std::nullopt}, {f2.omega, gamma, std::nullopt}})).value;
        const FilterSpec o1 = first(hooks, f1);
        const double want = s2_zero_delay(L, rho, a, o1, f2) / oracle_norm(o1, f2);
        rep.checks.push_back(make_check(fmt::format("N=2 tau=0, JC ({}, {})", t1, t2), rel(sensed, want), tol));
    }

    const EigenLiouvillian eig = eigendecompose(L);
    const FilterSpec f1{resolve_token("R", p), gamma}, f2{resolve_token("R2-", p), gamma};
    const SensedSystem ss = attach_sensors(me, a, {{f1.omega, gamma, std::nullopt}, {f2.omega, gamma, std::nullopt}});
    std::vector<double> taus;
    for (double t : {0.1, 0.5, 1.0, 5.0, 20.0}) taus.push_back(t / gamma);
    const auto sensed = gn_delays(ss, DelayGrid::make(taus));
    const FilterSpec o1 = first(hooks, f1);
    const double norm = oracle_norm(o1, f2);
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const double want = s2_tau(eig, rho, a, o1, f2, taus[i]) / norm;
        rep.checks.push_back(make_check(fmt::format("N=2 tau={:g}/gamma2, JC (R, R2-)", taus[i] * gamma),
                                        rel(sensed[i].value, want), tol));
    }
}

}  // namespace

ValidationReport run_validation(ValidationLevel level, const ValidationHooks& hooks) {
    const auto t0 = std::chrono::steady_clock::now();
    ValidationReport rep;
    thermal_spectrum(rep, hooks);
    if (level == ValidationLevel::Full) jc_two_photon(rep, hooks);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace nphoton
