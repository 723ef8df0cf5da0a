#pragma once

// Ready-made master equations and the Jaynes-Cummings ladder.
// All rates are in units of the coupling g.

#include <string>
#include <variant>
#include <vector>

#include "nphoton/liouville.hpp"

namespace nphoton {

struct JCParams {
    double g = 1.0;
    double gamma_a = 0.1;
    double gamma_s = 0.01;
    double P_s = 0.01;
    int n_max = 4;

    void validate() const;
};

struct ThermalParams {
    double P_a = 0.5;
    double gamma_a = 1.0;
    int n_max = 30;

    void validate() const;
};

struct DrivenParams {
    double Omega = 0.1;
    double gamma_a = 1.0;
    int n_max = 8;

    void validate() const;
};

using ModelSpec = std::variant<JCParams, ThermalParams, DrivenParams>;

/// Boson "a" (n_max) (x) qubit "sigma"; H = g(a^+ sigma + a sigma^+);
/// dissipators gamma_a L_a, gamma_s L_sigma, P_s L_sigma^+.
MasterEquation jaynes_cummings(const JCParams& p);

/// H = 0, dissipators P_a L_a^+, gamma_a L_a. Throws
/// InvalidArgument("no steady state (thermal divergence)") for P_a >= gamma_a.
MasterEquation thermal_cavity(const ThermalParams& p);

/// H = Omega (a + a^+), dissipator gamma_a L_a. Requires n_max >= 8 <n>.
MasterEquation driven_cavity(const DrivenParams& p);

MasterEquation build_model(const ModelSpec& m);

/// Every model exposes its emitted field as the boson factor "a".
inline constexpr const char* kProbeLabel = "a";

std::string model_name(const ModelSpec& m);

/// Default cavity truncation for an N-photon computation.
int default_n_max(int n_photons);

/// Population of the highest Fock level of factor `label` relative to the
/// mean occupation of that factor.
double top_level_ratio(const DensityMatrix& rho, const std::string& label);

struct Transition {
    int rung = 1;
    std::string branch;  // upper-rung branch then lower-rung branch, e.g. "+-"
    double frequency = 0.0;
    double linewidth = 0.0;
    std::string label;  // "R", "-R", "R2+", "-R2-", ...
};

double jc_x(const JCParams& p);
/// R = sqrt(g^2 - x^2).
double jc_rabi(const JCParams& p);
/// gamma_1 = (gamma_a + gamma_s)/2, gamma_n = 2(n-1)gamma_a + gamma_s for n >= 2.
double jc_linewidth(const JCParams& p, int rung);

/// All +-R and +-R_n^+- for n = 2..max_rung. Throws
/// ComputationError("transition overdamped at rung n") in weak coupling.
std::vector<Transition> jc_ladder(const JCParams& p, int max_rung);

/// Numeric value of a symbolic token: frequency labels as in jc_ladder
/// ("R", "-R", "R3-", ...), linewidths "gamma1", "gamma2", ..., or a plain
/// number. Throws InvalidArgument on unknown tokens.
double resolve_token(const std::string& token, const JCParams& p);

}  // namespace nphoton
