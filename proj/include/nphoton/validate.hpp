#pragma once

// Self-check: sensor-method correlations against the resolvent oracle.

#include <functional>
#include <string>
#include <vector>

#include "nphoton/oracle.hpp"

namespace nphoton {

enum class ValidationLevel { Quick, Full };

ValidationLevel parse_validation_level(const std::string& s);

struct ValidationCheck {
    std::string name;
    double error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    double seconds = 0.0;

    bool passed() const;
    /// Fixed-width pass/fail table, one row per check.
    std::string table() const;
};

struct ValidationHooks {
    /// Applied to the first filter before every oracle call. Tests use it to
    /// plant a deliberate bug and confirm that the suite notices.
    std::function<FilterSpec(const FilterSpec&)> oracle_first_filter;
};

/// quick: one-photon spectrum of the thermal cavity, 20 frequencies, tol 1e-3.
/// full: additionally two-photon correlations of the Jaynes-Cummings model
/// (n_max = 3, gamma = gamma_2) at zero delay and at five positive delays, tol 1e-2.
ValidationReport run_validation(ValidationLevel level, const ValidationHooks& hooks = {});

}  // namespace nphoton
