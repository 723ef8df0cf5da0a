#include "nphoton/sensors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "nphoton/error.hpp"

namespace nphoton {

bool CorrelationResult::has_flag(const std::string& f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

SensedSystem attach_sensors(const MasterEquation& me, const Operator& probe, std::vector<SensorSpec> sensors,
                            double chi, SensorKind kind) {
    const int n = static_cast<int>(sensors.size());
    if (n < 1 || n > 4) throw InvalidArgument(fmt::format("between 1 and 4 sensors are supported, got {}", n));
    if (kind == SensorKind::Harmonic && n != 1) throw InvalidArgument("a harmonic sensor must be used alone");
    if (!(*probe.space() == *me.space())) throw InvalidArgument("probe operator acts on a different space");
    if (!(chi > 0.0) || !std::isfinite(chi)) throw InvalidArgument(fmt::format("chi must be > 0, got {}", chi));

    SensedSystem ss;
    ss.gamma_q_ = me.smallest_rate();
    ss.chi_ = chi;
    ss.kind_ = kind;
    for (int i = 0; i < n; ++i) {
        auto& s = sensors[i];
        if (!std::isfinite(s.omega)) throw InvalidArgument(fmt::format("sensor {}: omega must be finite", i + 1));
        if (!(s.gamma > 0.0) || !std::isfinite(s.gamma))
            throw InvalidArgument(fmt::format("sensor {}: gamma must be > 0, got {}", i + 1, s.gamma));
        const double bound = std::sqrt(s.gamma * ss.gamma_q_ / 2.0);
        const double eps = s.epsilon ? *s.epsilon : chi * bound;
        if (s.epsilon && (!(eps > 0.0) || !std::isfinite(eps)))
            throw InvalidArgument(fmt::format("sensor {}: epsilon must be > 0, got {}", i + 1, eps));
        if (!(eps < bound))
            throw InvalidArgument(fmt::format("sensor back-action regime: sensor {} has epsilon = {:.3e} >= "
                                              "sqrt(gamma gamma_Q / 2) = {:.3e}",
                                              i + 1, eps, bound));
        s.epsilon = eps;
        ss.eps_.push_back(eps);
    }
    ss.sensors_ = sensors;

    std::vector<FactorSpec> extra;
    for (int i = 0; i < n; ++i) {
        const std::string label = fmt::format("sensor{}", i + 1);
        extra.push_back(kind == SensorKind::Harmonic ? FactorSpec::boson(label, 2) : FactorSpec::qubit(label));
    }
    const SpacePtr space = extend_space(*me.space(), extra);
    const Operator a = embed(probe, space);
    const Operator ad = adjoint(a);

    Operator h = embed(me.hamiltonian(), space);
    std::vector<Dissipator> diss;
    for (const auto& d : me.dissipators()) diss.push_back({d.rate, embed(d.collapse, space)});
    const int base_factors = static_cast<int>(me.space()->factors().size());
    for (int i = 0; i < n; ++i) {
        const std::string label = extra[i].label;
        Operator b = annihilator(space, label);
        Operator nb = number(space, label);
        h = h + sensors[i].omega * nb + ss.eps_[i] * (a * adjoint(b) + ad * b);
        diss.push_back({sensors[i].gamma, b});
        ss.lowering_.push_back(b);
        ss.number_.push_back(nb);
    }

    // Graded basis: each sensor quantum carries a factor 1/epsilon.
    Eigen::VectorXd grading(space->dim());
    for (int k = 0; k < space->dim(); ++k) {
        double w = 1.0;
        for (int i = 0; i < n; ++i) w *= std::pow(ss.eps_[i], -space->level(k, base_factors + i));
        grading[k] = w;
    }

    ss.base_ = std::make_shared<const MasterEquation>(me);
    ss.probe_ = std::make_shared<const Operator>(probe);
    ss.enlarged_ = std::make_shared<const MasterEquation>(h, std::move(diss));
    ss.L_ = std::make_shared<const Liouvillian>(build_liouvillian(*ss.enlarged_, grading));
    return ss;
}

const DensityMatrix& SensedSystem::steady() const {
    std::call_once(lazy_->once, [this] {
        try {
            // Uniqueness is decided on the bare system: sensors always decay.
            steady_state(build_liouvillian(*base_));
            lazy_->rho.emplace(steady_state(*L_, false));
        } catch (...) {
            lazy_->error = std::current_exception();
        }
    });
    if (lazy_->error) std::rethrow_exception(lazy_->error);
    return *lazy_->rho;
}

SensedSystem SensedSystem::rescaled(double factor) const {
    std::vector<SensorSpec> s = sensors_;
    for (std::size_t i = 0; i < s.size(); ++i) s[i].epsilon = eps_[i] * factor;
    return attach_sensors(*base_, *probe_, std::move(s), chi_, kind_);
}

SensedSystem SensedSystem::permuted(const std::vector<int>& order) const {
    if (order.size() != sensors_.size()) throw InvalidArgument("permutation has the wrong length");
    std::vector<SensorSpec> s;
    for (int k : order) s.push_back(sensors_.at(k));
    for (std::size_t i = 0; i < s.size(); ++i) s[i].epsilon = eps_[order[i]];
    return attach_sensors(*base_, *probe_, std::move(s), chi_, kind_);
}

namespace {

// Mean level of each sensor factor and checks on their magnitude.
std::vector<double> sensor_populations(const SensedSystem& ss, const DenseMat& rho) {
    const auto& space = *ss.space();
    const int base = static_cast<int>(ss.base().space()->factors().size());
    std::vector<double> pops(ss.size(), 0.0);
    for (int k = 0; k < space.dim(); ++k) {
        const double p = rho(k, k).real();
        for (int i = 0; i < ss.size(); ++i) pops[i] += p * space.level(k, base + i);
    }
    return pops;
}

void check_populations(const SensedSystem& ss, const std::vector<double>& pops) {
    for (int i = 0; i < ss.size(); ++i) {
        if (!(pops[i] >= kStarvedPopulation))
            throw ComputationError(fmt::format("sensor starved (no emission at omega = {:.6g}): <n{}> = {:.3e}",
                                               ss.sensors()[i].omega, i + 1, pops[i]));
        if (pops[i] > kMaxSensorPopulation)
            throw ComputationError(fmt::format("epsilon too large: <n{}> = {:.3e} exceeds {:.0e}", i + 1, pops[i],
                                               kMaxSensorPopulation));
    }
}

CorrelationResult make_result(const SensedSystem& ss, double value, const std::vector<double>& pops) {
    CorrelationResult r;
    r.epsilon_used = ss.epsilons();
    r.populations = pops;
    if (value < 0.0) {
        r.flags.push_back("clamped");
        value = 0.0;
    }
    r.value = value;
    return r;
}

double product(const std::vector<double>& v) {
    double p = 1.0;
    for (double x : v) p *= x;
    return p;
}

DenseMat sandwich(const Operator& b, const DenseMat& sigma) {
    const SparseMat bd = b.matrix().adjoint();
    DenseMat left = b.matrix() * sigma;
    return left * bd;
}

std::vector<CorrelationResult> delays_in_order(const SensedSystem& ss, const std::vector<int>& order,
                                               const DelayGrid& grid, const std::vector<double>& fixed) {
    const int n = ss.size();
    if (ss.kind() != SensorKind::TwoLevel) throw InvalidArgument("delayed correlations need two-level sensors");
    if (n < 2) throw InvalidArgument("delayed correlations need at least two sensors");
    if (static_cast<int>(fixed.size()) != n - 2)
        throw InvalidArgument(fmt::format("{} sensors need {} fixed intermediate delays, got {}", n, n - 2, fixed.size()));
    for (std::size_t k = 0; k < fixed.size(); ++k) {
        if (!std::isfinite(fixed[k]) || fixed[k] < 0.0 || (k > 0 && fixed[k] < fixed[k - 1]))
            throw InvalidArgument("fixed delays must be finite, >= 0 and in detection order");
    }
    const double t0 = fixed.empty() ? 0.0 : fixed.back();
    if (grid.delays.front() < t0)
        throw InvalidArgument("delay grid starts before the last fixed detection time");

    const DensityMatrix& rho = ss.steady();
    const auto pops = sensor_populations(ss, rho.matrix());
    check_populations(ss, pops);
    const double norm = product(pops);

    DenseMat sigma = sandwich(ss.lowering(order[0]), rho.matrix());
    double t = 0.0;
    for (int k = 1; k <= n - 2; ++k) {
        sigma = propagate(ss.liouvillian(), sigma, fixed[k - 1] - t, grid.rtol);
        t = fixed[k - 1];
        sigma = sandwich(ss.lowering(order[k]), sigma);
    }
    Propagator prop(ss.liouvillian(), sigma, grid.rtol);
    const Operator& last = ss.number_op(order[n - 1]);
    std::vector<CorrelationResult> out;
    for (double tau : grid.delays) {
        prop.advance_to(tau - t);
        out.push_back(make_result(ss, prop.trace_with(last).real() / norm, pops));
    }
    return out;
}

}  // namespace

CorrelationResult gn_zero_delay(const SensedSystem& ss) {
    const DensityMatrix& rho = ss.steady();
    const auto pops = sensor_populations(ss, rho.matrix());
    check_populations(ss, pops);
    const auto& space = *ss.space();
    const int base = static_cast<int>(ss.base().space()->factors().size());
    double joint = 0.0;
    for (int k = 0; k < space.dim(); ++k) {
        double w = 1.0;
        if (ss.kind() == SensorKind::Harmonic) {
            const int l = space.level(k, base);
            w = l * (l - 1);
        } else {
            for (int i = 0; i < ss.size(); ++i) w *= space.level(k, base + i);
        }
        if (w != 0.0) joint += w * rho.matrix()(k, k).real();
    }
    const double norm = ss.kind() == SensorKind::Harmonic ? pops[0] * pops[0] : product(pops);
    return make_result(ss, joint / norm, pops);
}

std::vector<CorrelationResult> gn_delays(const SensedSystem& ss, const DelayGrid& grid,
                                         const std::vector<double>& fixed) {
    std::vector<int> order(ss.size());
    for (int i = 0; i < ss.size(); ++i) order[i] = i;
    return delays_in_order(ss, order, grid, fixed);
}

std::vector<CorrelationResult> g2_signed_delays(const SensedSystem& ss, const std::vector<double>& taus,
                                                double rtol) {
    if (ss.size() != 2) throw InvalidArgument("signed delays need exactly two sensors");
    if (taus.empty()) throw InvalidArgument("delay list is empty");
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!std::isfinite(taus[i])) throw InvalidArgument("delays must be finite");
        if (i > 0 && taus[i] < taus[i - 1]) throw InvalidArgument("delays must be in ascending order");
    }
    std::vector<double> neg, pos;
    for (double t : taus) (t < 0.0 ? neg : pos).push_back(t);
    std::vector<CorrelationResult> out;
    if (!neg.empty()) {
        std::vector<double> mag;
        for (auto it = neg.rbegin(); it != neg.rend(); ++it) mag.push_back(-*it);
        auto r = delays_in_order(ss, {1, 0}, DelayGrid::make(mag, rtol), {});
        out.insert(out.end(), r.rbegin(), r.rend());
    }
    if (!pos.empty()) {
        auto r = delays_in_order(ss, {0, 1}, DelayGrid::make(pos, rtol), {});
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

std::vector<double> g2_delays_number_form(const SensedSystem& ss, const DelayGrid& grid) {
    if (ss.size() != 2 || ss.kind() != SensorKind::TwoLevel) throw InvalidArgument("need two two-level sensors");
    const DensityMatrix& rho = ss.steady();
    const auto pops = sensor_populations(ss, rho.matrix());
    check_populations(ss, pops);
    const DenseMat seed = ss.number_op(0).matrix() * rho.matrix();
    Propagator prop(ss.liouvillian(), seed, grid.rtol);
    std::vector<double> out;
    for (double tau : grid.delays) {
        prop.advance_to(tau);
        out.push_back(prop.trace_with(ss.number_op(1)).real() / (pops[0] * pops[1]));
    }
    return out;
}

std::vector<CorrelationResult> sensor_spectrum(const MasterEquation& me, const Operator& probe,
                                               const std::vector<double>& omegas, double gamma, double chi,
                                               std::optional<double> epsilon) {
    std::vector<CorrelationResult> out;
    out.reserve(omegas.size());
    for (double w : omegas) {
        SensedSystem ss = attach_sensors(me, probe, {SensorSpec{w, gamma, epsilon}}, chi);
        const auto pops = sensor_populations(ss, ss.steady().matrix());
        CorrelationResult r;
        r.epsilon_used = ss.epsilons();
        r.populations = pops;
        if (!(pops[0] >= kStarvedPopulation)) {
            r.value = 0.0;
            r.flags.push_back("starved");
        } else {
            check_populations(ss, pops);
            const double eps = ss.epsilons()[0];
            r.value = gamma * pops[0] / (2.0 * M_PI * eps * eps);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<CorrelationResult> converge_epsilon(const EpsilonComputation& computation, double tol) {
    if (!(tol > 0.0)) throw InvalidArgument("convergence tolerance must be > 0");
    auto prev = computation(1.0);
    double change = 0.0;
    for (int k = 1; k <= 6; ++k) {
        auto cur = computation(std::ldexp(1.0, -k));
        if (cur.size() != prev.size()) throw InvalidArgument("computation changed its number of points");
        change = 0.0;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            const double denom = std::max(std::abs(cur[i].value), std::abs(prev[i].value));
            const double c = denom > 0.0 ? std::abs(cur[i].value - prev[i].value) / denom : 0.0;
            cur[i].convergence_estimate = c;
            change = std::max(change, c);
        }
        if (change < tol) return cur;
        prev = std::move(cur);
    }
    throw ComputationError(
        fmt::format("epsilon not converged after 6 halvings (last relative change {:.3e}, tolerance {:.1e})", change, tol));
}

CorrelationResult converge_epsilon(const std::function<CorrelationResult(double)>& computation, double tol) {
    auto r = converge_epsilon([&](double s) { return std::vector<CorrelationResult>{computation(s)}; }, tol);
    return r.front();
}

}  // namespace nphoton
