#pragma once

// Frequency-resolved photon correlations from weakly coupled sensors.
//
// Each sensor is a two-level system at frequency omega with linewidth gamma,
// coupled to the probed system operator a by epsilon (a s^+ + a^+ s). As
// epsilon -> 0 the steady-state sensor intensity correlations equal the
// frequency-filtered N-photon correlations of the system.

#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nphoton/liouville.hpp"
#include "nphoton/regression.hpp"

namespace nphoton {

inline constexpr double kDefaultChi = 1e-2;
inline constexpr double kStarvedPopulation = 1e-30;
inline constexpr double kMaxSensorPopulation = 1e-3;

struct SensorSpec {
    double omega = 0.0;
    double gamma = 1.0;
    std::optional<double> epsilon;
};

enum class SensorKind {
    TwoLevel,
    /// Bosonic sensor truncated at two excitations (single sensor only).
    Harmonic,
};

struct CorrelationResult {
    double value = 0.0;
    std::vector<double> epsilon_used;
    /// Relative change of value under the last epsilon halving; NaN when no
    /// halving was performed.
    double convergence_estimate = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> populations;
    std::vector<std::string> flags;

    bool has_flag(const std::string& f) const;
};

class SensedSystem {
public:
    const MasterEquation& base() const { return *base_; }
    const Operator& probe() const { return *probe_; }
    const std::vector<SensorSpec>& sensors() const { return sensors_; }
    const std::vector<double>& epsilons() const { return eps_; }
    int size() const { return static_cast<int>(sensors_.size()); }
    double gamma_q() const { return gamma_q_; }
    double chi() const { return chi_; }
    SensorKind kind() const { return kind_; }

    const MasterEquation& enlarged() const { return *enlarged_; }
    const Liouvillian& liouvillian() const { return *L_; }
    const SpacePtr& space() const { return enlarged_->space(); }

    /// Sensor lowering operator / number operator on the enlarged space.
    const Operator& lowering(int i) const { return lowering_.at(i); }
    const Operator& number_op(int i) const { return number_.at(i); }

    /// Steady state of the enlarged system, computed once on first use.
    const DensityMatrix& steady() const;

    /// Same system with every epsilon multiplied by `factor`.
    SensedSystem rescaled(double factor) const;

    /// Same system with the sensor list permuted (new sensor k = old order[k]).
    SensedSystem permuted(const std::vector<int>& order) const;

private:
    friend SensedSystem attach_sensors(const MasterEquation&, const Operator&, std::vector<SensorSpec>, double,
                                       SensorKind);
    SensedSystem() = default;

    std::shared_ptr<const MasterEquation> base_;
    std::shared_ptr<const Operator> probe_;
    std::vector<SensorSpec> sensors_;
    std::vector<double> eps_;
    double gamma_q_ = 0.0;
    double chi_ = kDefaultChi;
    SensorKind kind_ = SensorKind::TwoLevel;
    std::shared_ptr<const MasterEquation> enlarged_;
    std::shared_ptr<const Liouvillian> L_;
    std::vector<Operator> lowering_;
    std::vector<Operator> number_;

    struct Lazy {
        std::once_flag once;
        std::optional<DensityMatrix> rho;
        std::exception_ptr error;
    };
    std::shared_ptr<Lazy> lazy_ = std::make_shared<Lazy>();
};

/// Enlarge `me` by one sensor per spec (factors "sensor1", "sensor2", ...).
/// Missing epsilons follow epsilon = chi sqrt(gamma gamma_Q / 2), with gamma_Q
/// the smallest nonzero system rate. Throws
/// InvalidArgument("sensor back-action regime") if epsilon is not below
/// sqrt(gamma gamma_Q / 2).
SensedSystem attach_sensors(const MasterEquation& me, const Operator& probe, std::vector<SensorSpec> sensors,
                            double chi = kDefaultChi, SensorKind kind = SensorKind::TwoLevel);

/// <n_1 ... n_N> / (<n_1> ... <n_N>) in the steady state. For a harmonic
/// sensor: <b^+2 b^2> / <b^+ b>^2.
CorrelationResult gn_zero_delay(const SensedSystem& ss);

/// Delayed correlations. Detections happen in sensor-list order at times
/// 0 <= t_2 <= ... <= t_N. `fixed` holds t_2..t_{N-1} (N-2 entries); the grid
/// scans t_N and must not start before the last fixed time.
std::vector<CorrelationResult> gn_delays(const SensedSystem& ss, const DelayGrid& grid,
                                         const std::vector<double>& fixed = {});

/// Two sensors, signed delays in ascending order: tau >= 0 means sensor 1
/// detects first, tau < 0 means sensor 2 detects first.
std::vector<CorrelationResult> g2_signed_delays(const SensedSystem& ss, const std::vector<double>& taus,
                                                double rtol = kDefaultRtol);

/// Re Tr[n_2 exp(L tau)(n_1 rho)] / (<n_1><n_2>): the number-operator form of
/// the two-sensor delayed correlation.
std::vector<double> g2_delays_number_form(const SensedSystem& ss, const DelayGrid& grid);

/// Physical spectrum S(omega) = gamma <n> / (2 pi epsilon^2) from a single
/// sensor scanned over `omegas`. Starved points return 0 with flag "starved".
std::vector<CorrelationResult> sensor_spectrum(const MasterEquation& me, const Operator& probe,
                                               const std::vector<double>& omegas, double gamma,
                                               double chi = kDefaultChi,
                                               std::optional<double> epsilon = std::nullopt);

/// Repeats `computation(scale)` with all epsilons scaled by 2^-k, k = 0..6,
/// until the largest relative change across points is below tol. Throws
/// ComputationError("epsilon not converged") otherwise.
using EpsilonComputation = std::function<std::vector<CorrelationResult>(double scale)>;
std::vector<CorrelationResult> converge_epsilon(const EpsilonComputation& computation, double tol = 1e-3);
CorrelationResult converge_epsilon(const std::function<CorrelationResult(double)>& computation, double tol = 1e-3);

}  // namespace nphoton
