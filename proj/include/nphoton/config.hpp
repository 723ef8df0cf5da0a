#pragma once

// Run configuration files: INI/TOML-style sections with `key = value` lines.
// All frequencies, rates and inverse delays are in units of the coupling g.
//
//   [model]    name = jc | thermal | driven, then the model rates
//   [sensors]  omega = [...], gamma = [...], optional epsilon, chi
//   [scan]     mode, axis, scanned, grid, grid2, fixed_delays, method, rtol, seed
//   [epsilon]  policy = chi | converge, chi, tol
//   [output]   directory, basename
//
// Numeric entries accept JC ladder tokens ("R", "-R2+", "gamma2", ...) and
// simple products or quotients with a number ("0.5/gamma2", "2*R").

#include <optional>
#include <string>
#include <vector>

#include "nphoton/sweep.hpp"

namespace nphoton {

struct Config {
    ScanRequest request;
    bool mode_given = false;
    std::string directory = ".";
    std::string basename = "nphoton";
    std::optional<int> workers;
};

/// Parses configuration text; `source` names it in error messages.
/// Throws InvalidArgument naming the offending section and key.
Config parse_config(const std::string& text, const std::string& source = "config");

Config load_config(const std::string& path);

/// A grid: "linspace(a, b, n)", "logspace(a, b, n)" (decimal exponents a..b),
/// "[x1, x2, ...]" or a single value.
std::vector<double> parse_grid(const std::string& text, const ModelSpec& model);

/// One numeric entry (number or token expression).
double parse_number(const std::string& text, const ModelSpec& model);

}  // namespace nphoton
