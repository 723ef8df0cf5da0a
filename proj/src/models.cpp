#include "nphoton/models.hpp"

#include <cmath>
#include <regex>

#include <fmt/format.h>

#include "nphoton/error.hpp"

namespace nphoton {

namespace {

void require_rate(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument(fmt::format("{} must be finite and >= 0, got {}", name, v));
}

}  // namespace

void JCParams::validate() const {
    if (!std::isfinite(g) || g <= 0.0) throw InvalidArgument(fmt::format("g must be > 0, got {}", g));
    require_rate(gamma_a, "gamma_a");
    require_rate(gamma_s, "gamma_s");
    require_rate(P_s, "P_s");
    if (n_max < 1) throw InvalidArgument(fmt::format("n_max must be >= 1, got {}", n_max));
}

void ThermalParams::validate() const {
    require_rate(P_a, "P_a");
    require_rate(gamma_a, "gamma_a");
    if (n_max < 1) throw InvalidArgument(fmt::format("n_max must be >= 1, got {}", n_max));
    if (P_a >= gamma_a) throw InvalidArgument("no steady state (thermal divergence): P_a >= gamma_a");
}

void DrivenParams::validate() const {
    if (!std::isfinite(Omega)) throw InvalidArgument("Omega must be finite");
    require_rate(gamma_a, "gamma_a");
    if (gamma_a <= 0.0) throw InvalidArgument("driven cavity needs gamma_a > 0");
    const double n = 4.0 * Omega * Omega / (gamma_a * gamma_a);
    if (n_max < 1 || n_max < 8.0 * n)
        throw InvalidArgument(fmt::format("driven cavity needs n_max >= 8<n> = {:.3g}, got {}", 8.0 * n, n_max));
}

MasterEquation jaynes_cummings(const JCParams& p) {
    p.validate();
    auto s = make_space({FactorSpec::boson("a", p.n_max), FactorSpec::qubit("sigma")});
    Operator a = annihilator(s, "a");
    Operator sm = annihilator(s, "sigma");
    Operator h = p.g * (adjoint(a) * sm + adjoint(sm) * a);
    return MasterEquation(h, {{p.gamma_a, a}, {p.gamma_s, sm}, {p.P_s, adjoint(sm)}});
}

MasterEquation thermal_cavity(const ThermalParams& p) {
    p.validate();
    auto s = make_space({FactorSpec::boson("a", p.n_max)});
    Operator a = annihilator(s, "a");
    return MasterEquation(zero_operator(s), {{p.P_a, adjoint(a)}, {p.gamma_a, a}});
}

MasterEquation driven_cavity(const DrivenParams& p) {
    p.validate();
    auto s = make_space({FactorSpec::boson("a", p.n_max)});
    Operator a = annihilator(s, "a");
    return MasterEquation(p.Omega * (a + adjoint(a)), {{p.gamma_a, a}});
}

MasterEquation build_model(const ModelSpec& m) {
    struct Visitor {
        MasterEquation operator()(const JCParams& p) const { return jaynes_cummings(p); }
        MasterEquation operator()(const ThermalParams& p) const { return thermal_cavity(p); }
        MasterEquation operator()(const DrivenParams& p) const { return driven_cavity(p); }
    };
    return std::visit(Visitor{}, m);
}

std::string model_name(const ModelSpec& m) {
    switch (m.index()) {
        case 0: return "jaynes_cummings";
        case 1: return "thermal_cavity";
        default: return "driven_cavity";
    }
}

int default_n_max(int n_photons) {
    if (n_photons <= 2) return 4;
    return n_photons + 2;
}

double top_level_ratio(const DensityMatrix& rho, const std::string& label) {
    const auto& s = *rho.space();
    const int k = s.index_of(label);
    const int top = s.factors()[k].local_dim() - 1;
    double p_top = 0.0, mean = 0.0;
    for (int i = 0; i < s.dim(); ++i) {
        const double p = rho.matrix()(i, i).real();
        const int n = s.level(i, k);
        mean += n * p;
        if (n == top) p_top += p;
    }
    return mean > 0.0 ? p_top / mean : 0.0;
}

double jc_x(const JCParams& p) { return (p.gamma_a - p.gamma_s) / 4.0; }

namespace {

double rung_root(const JCParams& p, int n) {
    const double x = jc_x(p);
    const double arg = n * p.g * p.g - x * x;
    if (arg <= 0.0) throw ComputationError(fmt::format("transition overdamped at rung {}", n));
    return std::sqrt(arg);
}

}  // namespace

double jc_rabi(const JCParams& p) { return rung_root(p, 1); }

double jc_linewidth(const JCParams& p, int rung) {
    if (rung < 1) throw InvalidArgument("rung must be >= 1");
    if (rung == 1) return 0.5 * (p.gamma_a + p.gamma_s);
    return 2.0 * (rung - 1) * p.gamma_a + p.gamma_s;
}

std::vector<Transition> jc_ladder(const JCParams& p, int max_rung) {
    p.validate();
    if (max_rung < 1) throw InvalidArgument("max_rung must be >= 1");
    std::vector<Transition> out;
    const double r = jc_rabi(p);
    const double g1 = jc_linewidth(p, 1);
    out.push_back({1, "+", r, g1, "R"});
    out.push_back({1, "-", -r, g1, "-R"});
    for (int n = 2; n <= max_rung; ++n) {
        const double hi = rung_root(p, n);
        const double lo = rung_root(p, n - 1);
        const double gn = jc_linewidth(p, n);
        const std::string idx = std::to_string(n);
        out.push_back({n, "+-", hi + lo, gn, "R" + idx + "+"});
        out.push_back({n, "-+", -(hi + lo), gn, "-R" + idx + "+"});
        out.push_back({n, "++", hi - lo, gn, "R" + idx + "-"});
        out.push_back({n, "--", -(hi - lo), gn, "-R" + idx + "-"});
    }
    return out;
}

double resolve_token(const std::string& token, const JCParams& p) {
    static const std::regex freq(R"(^\s*(-?)R([0-9]+)?([+-])?\s*$)");
    static const std::regex width(R"(^\s*gamma([0-9]+)\s*$)");
    std::smatch m;
    if (std::regex_match(token, m, freq)) {
        const bool neg = m[1].length() > 0;
        const int n = m[2].matched ? std::stoi(m[2].str()) : 1;
        if (n == 1 && m[3].matched) throw InvalidArgument(fmt::format("token '{}': rung 1 has no +/- branch", token));
        if (n >= 2 && !m[3].matched) throw InvalidArgument(fmt::format("token '{}': rung {} needs a +/- branch", token, n));
        double v;
        if (n == 1) {
            v = jc_rabi(p);
        } else {
            const double hi = rung_root(p, n), lo = rung_root(p, n - 1);
            v = m[3].str() == "+" ? hi + lo : hi - lo;
        }
        return neg ? -v : v;
    }
    if (std::regex_match(token, m, width)) return jc_linewidth(p, std::stoi(m[1].str()));
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &used);
    } catch (const std::exception&) {
        throw InvalidArgument(fmt::format("unknown token '{}'", token));
    }
    if (token.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v))
        throw InvalidArgument(fmt::format("unknown token '{}'", token));
    return v;
}

}  // namespace nphoton
