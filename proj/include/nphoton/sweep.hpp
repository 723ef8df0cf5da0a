#pragma once

// Parameter scans over frequencies, linewidths and delays, run on a worker
// pool, with CSV + JSON checkpoints that can be resumed.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "nphoton/models.hpp"
#include "nphoton/sensors.hpp"

namespace nphoton {

enum class ScanMode { Spectrum, GnZero, GnTau, G2Map };
enum class ScanAxis { Omega1, Gamma, Tau, Omega12 };
enum class ScanMethod { Sensors, Oracle };

std::string to_string(ScanMode m);
std::string to_string(ScanAxis a);
std::string to_string(ScanMethod m);
ScanMode parse_mode(const std::string& s);
ScanAxis parse_axis(const std::string& s);
ScanMethod parse_method(const std::string& s);

struct EpsilonPolicy {
    enum class Kind { FixedChi, Converge };
    Kind kind = Kind::FixedChi;
    double chi = kDefaultChi;
    double tol = 1e-3;
};

struct ScanRequest {
    ModelSpec model = JCParams{};
    ScanMode mode = ScanMode::GnZero;
    /// Sensor list; the scanned quantity overwrites the relevant field per
    /// point. Spectrum mode uses the gamma of the first entry.
    std::vector<SensorSpec> sensors;
    ScanAxis axis = ScanAxis::Omega1;
    /// Zero-based index of the sensor whose omega is scanned (Omega1 axis).
    int scanned_sensor = 0;
    /// Omega1, Gamma or Tau values; first axis of a G2Map.
    std::vector<double> grid;
    /// Second axis (omega2) of a G2Map.
    std::vector<double> grid2;
    /// Intermediate detection times for gn_tau with N > 2.
    std::vector<double> fixed_delays;
    EpsilonPolicy epsilon;
    ScanMethod method = ScanMethod::Sensors;
    double rtol = kDefaultRtol;
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t points() const;
};

/// Point status written to the flag column.
namespace flag {
inline constexpr const char* ok = "ok";
inline constexpr const char* starved = "starved";
inline constexpr const char* clamped = "clamped";
inline constexpr const char* not_converged = "not_converged";
inline constexpr const char* failed = "failed";
inline constexpr const char* pending = "pending";
}  // namespace flag

struct ScanResult {
    ScanRequest request;
    std::vector<double> axis1;
    std::vector<double> axis2;  // G2Map only, same length as axis1
    std::vector<double> values;
    std::vector<std::string> flags;
    std::vector<std::string> messages;
    std::vector<std::vector<double>> epsilon_used;
    std::vector<double> convergence;
    std::vector<double> wall_time;

    bool complete() const;
    /// Column name of the value column, e.g. "S", "g2", "g3".
    std::string value_column() const;
    std::vector<std::string> axis_columns() const;
};

struct RunOptions {
    int workers = 1;
    /// Checkpoint base path (without extension); empty disables.
    std::string checkpoint;
    /// Write the checkpoint every this many finished points (0: at the end only).
    int checkpoint_every = 0;
    /// Stop after this many finished points and leave the rest pending
    /// (negative: run everything). Used to emulate an interrupted run.
    int stop_after = -1;
};

/// Evaluates every pending point. Errors at single points are recorded in
/// the flags; ComputationError is thrown only if every point failed.
ScanResult run(const ScanRequest& req, const RunOptions& opt = {});

/// Continues a partially computed result: only points flagged pending,
/// failed or not_converged are recomputed.
ScanResult run(ScanResult partial, const RunOptions& opt);

ScanResult empty_result(const ScanRequest& req);

/// Writes <base>.csv and <base>.meta.json.
void checkpoint(const ScanResult& res, const std::string& base);

/// Reads a checkpoint back; throws ComputationError("checkpoint unreadable")
/// on missing/corrupt files or checksum mismatch.
ScanResult load_checkpoint(const std::string& base);

/// load_checkpoint followed by run on the remaining points.
ScanResult resume(const std::string& base, const RunOptions& opt);

/// CSV text exactly as written by checkpoint().
std::string to_csv(const ScanResult& res);

nlohmann::json request_to_json(const ScanRequest& req);
ScanRequest request_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelSpec& m);
ModelSpec model_from_json(const nlohmann::json& j);

/// Number of sensors taking part in a request's computation.
int photon_order(const ScanRequest& req);

}  // namespace nphoton
