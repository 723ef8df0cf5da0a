#include "nphoton/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <limits>
#include <mutex>
#include <queue>
#include <sstream>
#include <thread>

#include <boost/crc.hpp>
#include <fmt/format.h>

#include "nphoton/error.hpp"
#include "nphoton/oracle.hpp"

namespace nphoton {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename E>
struct Names {
    E value;
    const char* name;
};

constexpr Names<ScanMode> kModes[] = {{ScanMode::Spectrum, "spectrum"},
                                      {ScanMode::GnZero, "gn_zero"},
                                      {ScanMode::GnTau, "gn_tau"},
                                      {ScanMode::G2Map, "g2_map"}};
constexpr Names<ScanAxis> kAxes[] = {{ScanAxis::Omega1, "omega1"},
                                     {ScanAxis::Gamma, "gamma"},
                                     {ScanAxis::Tau, "tau"},
                                     {ScanAxis::Omega12, "omega12"}};
constexpr Names<ScanMethod> kMethods[] = {{ScanMethod::Sensors, "sensors"}, {ScanMethod::Oracle, "oracle"}};

template <typename E, std::size_t N>
std::string name_of(const Names<E> (&table)[N], E v) {
    for (const auto& e : table)
        if (e.value == v) return e.name;
    return "?";
}

template <typename E, std::size_t N>
E parse_name(const Names<E> (&table)[N], const std::string& s, const char* what) {
    for (const auto& e : table)
        if (s == e.name) return e.value;
    std::string allowed;
    for (const auto& e : table) allowed += (allowed.empty() ? "" : ", ") + std::string(e.name);
    throw InvalidArgument(fmt::format("unknown {} '{}' (expected one of: {})", what, s, allowed));
}

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw InvalidArgument(fmt::format("{} contains non-finite values", what));
}

}  // namespace

std::string to_string(ScanMode m) { return name_of(kModes, m); }
std::string to_string(ScanAxis a) { return name_of(kAxes, a); }
std::string to_string(ScanMethod m) { return name_of(kMethods, m); }
ScanMode parse_mode(const std::string& s) { return parse_name(kModes, s, "scan mode"); }
ScanAxis parse_axis(const std::string& s) { return parse_name(kAxes, s, "scan axis"); }
ScanMethod parse_method(const std::string& s) { return parse_name(kMethods, s, "method"); }

int photon_order(const ScanRequest& req) {
    return req.mode == ScanMode::Spectrum ? 1 : static_cast<int>(req.sensors.size());
}

void ScanRequest::validate() const {
    std::visit([](const auto& p) { p.validate(); }, model);
    if (grid.empty()) throw InvalidArgument("scan grid is empty");
    require_finite(grid, "scan grid");
    require_finite(grid2, "second scan grid");
    require_finite(fixed_delays, "fixed delays");
    if (sensors.empty()) throw InvalidArgument("at least one sensor is required (it sets the linewidth gamma)");
    if (sensors.size() > 4) throw InvalidArgument("at most 4 sensors are supported");
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        if (!std::isfinite(sensors[i].omega)) throw InvalidArgument(fmt::format("sensor {}: omega must be finite", i + 1));
        if (!(sensors[i].gamma > 0.0) || !std::isfinite(sensors[i].gamma))
            throw InvalidArgument(fmt::format("sensor {}: gamma must be > 0", i + 1));
    }
    if (!(epsilon.chi > 0.0)) throw InvalidArgument("chi must be > 0");
    if (!(epsilon.tol > 0.0)) throw InvalidArgument("convergence tolerance must be > 0");
    if (!(rtol > 0.0)) throw InvalidArgument("rtol must be > 0");
    const int n = static_cast<int>(sensors.size());

    auto need_axis = [&](std::initializer_list<ScanAxis> ok) {
        for (ScanAxis a : ok)
            if (a == axis) return;
        throw InvalidArgument(fmt::format("axis '{}' is not valid for mode '{}'", to_string(axis), to_string(mode)));
    };
    switch (mode) {
        case ScanMode::Spectrum:
            need_axis({ScanAxis::Omega1});
            break;
        case ScanMode::GnZero:
            need_axis({ScanAxis::Omega1, ScanAxis::Gamma});
            if (n < 2) throw InvalidArgument("gn_zero needs at least two sensors");
            if (axis == ScanAxis::Omega1 && (scanned_sensor < 0 || scanned_sensor >= n))
                throw InvalidArgument(fmt::format("scanned sensor index {} is out of range", scanned_sensor + 1));
            if (axis == ScanAxis::Gamma)
                for (double g : grid)
                    if (!(g > 0.0)) throw InvalidArgument("gamma grid values must be > 0");
            break;
        case ScanMode::GnTau:
            need_axis({ScanAxis::Tau});
            if (n < 2) throw InvalidArgument("gn_tau needs at least two sensors");
            for (std::size_t i = 1; i < grid.size(); ++i)
                if (grid[i] < grid[i - 1]) throw InvalidArgument("delay grid must be in ascending order");
            if (n == 2) {
                if (!fixed_delays.empty()) throw InvalidArgument("two sensors take no fixed delays");
            } else {
                if (static_cast<int>(fixed_delays.size()) != n - 2)
                    throw InvalidArgument(fmt::format("{} sensors need {} fixed delays", n, n - 2));
                const double last = fixed_delays.back();
                if (grid.front() < last) throw InvalidArgument("delay grid starts before the last fixed delay");
            }
            break;
        case ScanMode::G2Map:
            need_axis({ScanAxis::Omega12});
            if (n != 2) throw InvalidArgument("g2_map needs exactly two sensors");
            if (grid2.empty()) throw InvalidArgument("g2_map needs a second grid (omega2)");
            break;
    }
    if (method == ScanMethod::Oracle) {
        if (photon_order(*this) > 2) throw InvalidArgument("the oracle method supports one or two photons only");
        if (mode == ScanMode::GnTau && n == 2 && !fixed_delays.empty()) throw InvalidArgument("unexpected fixed delays");
    }
}

std::size_t ScanRequest::points() const {
    return mode == ScanMode::G2Map ? grid.size() * grid2.size() : grid.size();
}

bool ScanResult::complete() const {
    for (const auto& f : flags)
        if (f == flag::pending) return false;
    return true;
}

std::string ScanResult::value_column() const {
    if (request.mode == ScanMode::Spectrum) return "S";
    return fmt::format("g{}", photon_order(request));
}

std::vector<std::string> ScanResult::axis_columns() const {
    if (request.mode == ScanMode::G2Map) return {"omega1", "omega2"};
    return {to_string(request.axis)};
}

ScanResult empty_result(const ScanRequest& req) {
    req.validate();
    ScanResult r;
    r.request = req;
    const std::size_t n = req.points();
    if (req.mode == ScanMode::G2Map) {
        for (double w1 : req.grid)
            for (double w2 : req.grid2) {
                r.axis1.push_back(w1);
                r.axis2.push_back(w2);
            }
    } else {
        r.axis1 = req.grid;
    }
    r.values.assign(n, kNaN);
    r.flags.assign(n, flag::pending);
    r.messages.assign(n, "");
    r.epsilon_used.assign(n, {});
    r.convergence.assign(n, kNaN);
    r.wall_time.assign(n, 0.0);
    return r;
}

namespace {

// Shared, read-only inputs of a scan.
struct Context {
    const ScanRequest& req;
    MasterEquation me;
    Operator probe;
    // Oracle method only.
    std::unique_ptr<Liouvillian> L;
    std::unique_ptr<DensityMatrix> rho;
    std::unique_ptr<EigenLiouvillian> eig;

    explicit Context(const ScanRequest& r)
        : req(r), me(build_model(r.model)), probe(annihilator(me.space(), kProbeLabel)) {
        if (r.method == ScanMethod::Oracle) {
            L = std::make_unique<Liouvillian>(build_liouvillian(me));
            rho = std::make_unique<DensityMatrix>(steady_state(*L));
            if (r.mode == ScanMode::GnTau) eig = std::make_unique<EigenLiouvillian>(eigendecompose(*L));
        }
    }
};

struct PointOutput {
    std::size_t index = 0;
    double value = kNaN;
    std::string flag = flag::ok;
    std::string message;
    std::vector<double> eps;
    double convergence = kNaN;
    double wall = 0.0;
};

std::vector<SensorSpec> sensors_at(const ScanRequest& req, const ScanResult& base, std::size_t i) {
    std::vector<SensorSpec> s = req.sensors;
    switch (req.axis) {
        case ScanAxis::Omega1:
            s[req.mode == ScanMode::Spectrum ? 0 : req.scanned_sensor].omega = base.axis1[i];
            break;
        case ScanAxis::Gamma:
            for (auto& x : s) x.gamma = base.axis1[i];
            break;
        case ScanAxis::Omega12:
            s[0].omega = base.axis1[i];
            s[1].omega = base.axis2[i];
            break;
        case ScanAxis::Tau:
            break;
    }
    return s;
}

std::vector<SensorSpec> scaled(std::vector<SensorSpec> s, double scale) {
    for (auto& x : s)
        if (x.epsilon) x.epsilon = *x.epsilon * scale;
    return s;
}

std::string classify(const std::string& what) {
    if (what.find("sensor starved") != std::string::npos) return flag::starved;
    if (what.find("epsilon not converged") != std::string::npos) return flag::not_converged;
    return flag::failed;
}

PointOutput from_correlation(const CorrelationResult& c) {
    PointOutput p;
    p.value = c.value;
    p.eps = c.epsilon_used;
    p.convergence = c.convergence_estimate;
    if (c.has_flag("starved"))
        p.flag = flag::starved;
    else if (c.has_flag("clamped"))
        p.flag = flag::clamped;
    return p;
}

CorrelationResult sensors_point(const Context& ctx, const std::vector<SensorSpec>& s, double scale) {
    const double chi = ctx.req.epsilon.chi * scale;
    if (ctx.req.mode == ScanMode::Spectrum)
        return sensor_spectrum(ctx.me, ctx.probe, {s[0].omega}, s[0].gamma, chi,
                               s[0].epsilon ? std::optional<double>(*s[0].epsilon * scale) : std::nullopt)
            .front();
    return gn_zero_delay(attach_sensors(ctx.me, ctx.probe, scaled(s, scale), chi));
}

double oracle_s1(const Context& ctx, const SensorSpec& s) {
    return filtered_spectrum(*ctx.L, *ctx.rho, ctx.probe, FilterSpec{s.omega, s.gamma}).value;
}

double oracle_g2_tau(const Context& ctx, const std::vector<SensorSpec>& s, double tau) {
    const FilterSpec f1{s[0].omega, s[0].gamma}, f2{s[1].omega, s[1].gamma};
    const double norm = oracle_s1(ctx, s[0]) * oracle_s1(ctx, s[1]);
    if (!(norm > 0.0)) throw ComputationError("sensor starved (no emission at the filter frequency)");
    if (tau == 0.0) return s2_zero_delay(*ctx.L, *ctx.rho, ctx.probe, f1, f2) / norm;
    if (tau > 0.0) return s2_tau(*ctx.eig, *ctx.rho, ctx.probe, f1, f2, tau) / norm;
    return s2_tau(*ctx.eig, *ctx.rho, ctx.probe, f2, f1, -tau) / norm;
}

PointOutput single_point(const Context& ctx, const ScanResult& base, std::size_t i) {
    const auto s = sensors_at(ctx.req, base, i);
    PointOutput out;
    if (ctx.req.method == ScanMethod::Oracle) {
        if (ctx.req.mode == ScanMode::Spectrum) {
            const auto v = filtered_spectrum(*ctx.L, *ctx.rho, ctx.probe, FilterSpec{s[0].omega, s[0].gamma});
            out.value = v.value;
            if (!v.flags.empty()) out.flag = flag::clamped;
        } else {
            out.value = oracle_g2_tau(ctx, s, 0.0);
        }
        return out;
    }
    if (ctx.req.epsilon.kind == EpsilonPolicy::Kind::Converge) {
        const auto c = converge_epsilon([&](double scale) { return sensors_point(ctx, s, scale); }, ctx.req.epsilon.tol);
        return from_correlation(c);
    }
    return from_correlation(sensors_point(ctx, s, 1.0));
}

std::vector<PointOutput> tau_job(const Context& ctx, const ScanResult& base) {
    const auto& req = ctx.req;
    const std::size_t n = base.axis1.size();
    std::vector<PointOutput> out(n);
    if (req.method == ScanMethod::Oracle) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i].value = oracle_g2_tau(ctx, req.sensors, base.axis1[i]);
        }
        return out;
    }
    auto compute = [&](double scale) {
        SensedSystem ss = attach_sensors(ctx.me, ctx.probe, scaled(req.sensors, scale), req.epsilon.chi * scale);
        if (req.sensors.size() == 2) return g2_signed_delays(ss, base.axis1, req.rtol);
        return gn_delays(ss, DelayGrid::make(base.axis1, req.rtol), req.fixed_delays);
    };
    const auto results = req.epsilon.kind == EpsilonPolicy::Kind::Converge
                             ? converge_epsilon(EpsilonComputation(compute), req.epsilon.tol)
                             : compute(1.0);
    for (std::size_t i = 0; i < n; ++i) out[i] = from_correlation(results[i]);
    return out;
}

struct Job {
    std::vector<std::size_t> indices;
};

int default_workers(int requested) {
    if (requested > 0) return requested;
    return 1;
}

void store(ScanResult& res, const PointOutput& p) {
    res.values[p.index] = p.value;
    res.flags[p.index] = p.flag;
    res.messages[p.index] = p.message;
    res.epsilon_used[p.index] = p.eps;
    res.convergence[p.index] = p.convergence;
    res.wall_time[p.index] = p.wall;
}

}  // namespace

ScanResult run(const ScanRequest& req, const RunOptions& opt) { return run(empty_result(req), opt); }

ScanResult run(ScanResult res, const RunOptions& opt) {
    const ScanRequest& req = res.request;
    req.validate();
    if (res.values.size() != req.points()) throw InvalidArgument("result does not match its request");

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < res.flags.size(); ++i) {
        const auto& f = res.flags[i];
        if (f == flag::pending || f == flag::failed || f == flag::not_converged) todo.push_back(i);
    }
    if (todo.empty()) return res;

    const Context ctx(req);
    std::vector<Job> jobs;
    if (req.mode == ScanMode::GnTau) {
        // Delays are marched in one propagation: a single job covers the grid.
        Job j;
        for (std::size_t i = 0; i < req.points(); ++i) j.indices.push_back(i);
        jobs.push_back(std::move(j));
    } else {
        for (std::size_t i : todo) jobs.push_back(Job{{i}});
    }

    std::mutex mtx;
    std::condition_variable cv;
    std::queue<std::vector<PointOutput>> finished;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};

    auto worker = [&] {
        for (;;) {
            if (stop.load()) return;
            const std::size_t k = next.fetch_add(1);
            if (k >= jobs.size()) return;
            const Job& job = jobs[k];
            const auto t0 = std::chrono::steady_clock::now();
            std::vector<PointOutput> outs;
            try {
                if (req.mode == ScanMode::GnTau) {
                    outs = tau_job(ctx, res);
                } else {
                    outs.push_back(single_point(ctx, res, job.indices[0]));
                }
            } catch (const std::exception& e) {
                outs.assign(job.indices.size(), PointOutput{});
                for (auto& o : outs) {
                    o.value = kNaN;
                    o.flag = classify(e.what());
                    o.message = e.what();
                }
            }
            const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            for (std::size_t j = 0; j < outs.size(); ++j) {
                outs[j].index = job.indices[j];
                outs[j].wall = dt / static_cast<double>(outs.size());
                if (outs[j].flag == flag::starved && req.mode != ScanMode::Spectrum) outs[j].value = kNaN;
            }
            {
                std::lock_guard<std::mutex> lock(mtx);
                finished.push(std::move(outs));
            }
            cv.notify_one();
        }
    };

    const int nworkers = std::max(1, std::min<int>(default_workers(opt.workers), static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);

    // Single writer: only this thread touches `res` from here on.
    std::size_t jobs_done = 0;
    int points_done = 0;
    int since_checkpoint = 0;
    while (jobs_done < jobs.size()) {
        std::vector<PointOutput> outs;
        {
            std::unique_lock<std::mutex> lock(mtx);
            cv.wait(lock, [&] { return !finished.empty(); });
            outs = std::move(finished.front());
            finished.pop();
        }
        ++jobs_done;
        if (opt.stop_after >= 0 && points_done >= opt.stop_after) continue;
        for (const auto& o : outs) {
            if (opt.stop_after >= 0 && points_done >= opt.stop_after) break;
            store(res, o);
            ++points_done;
            ++since_checkpoint;
        }
        if (opt.stop_after >= 0 && points_done >= opt.stop_after) stop = true;
        if (!opt.checkpoint.empty() && opt.checkpoint_every > 0 && since_checkpoint >= opt.checkpoint_every) {
            checkpoint(res, opt.checkpoint);
            since_checkpoint = 0;
        }
        if (stop.load()) {
            // Drain: jobs already running are discarded, as after a kill.
            std::size_t started = std::min(next.load(), jobs.size());
            if (jobs_done >= started) break;
        }
    }
    for (auto& t : pool) t.join();
    if (!opt.checkpoint.empty()) checkpoint(res, opt.checkpoint);

    bool any_good = false;
    std::string first_error;
    for (std::size_t i = 0; i < res.flags.size(); ++i) {
        const auto& f = res.flags[i];
        if (f == flag::ok || f == flag::starved || f == flag::clamped || f == flag::pending) any_good = true;
        if ((f == flag::failed || f == flag::not_converged) && first_error.empty()) {
            const auto cols = res.axis_columns();
            std::string where = fmt::format("{} = {:.6g}", cols[0], res.axis1[i]);
            if (cols.size() > 1) where += fmt::format(", {} = {:.6g}", cols[1], res.axis2[i]);
            first_error = fmt::format("at {}: {}", where, res.messages[i]);
        }
    }
    if (!any_good) throw ComputationError(first_error);
    return res;
}

// ---------------------------------------------------------------- JSON

json model_to_json(const ModelSpec& m) {
    json j;
    j["name"] = model_name(m);
    if (const auto* p = std::get_if<JCParams>(&m)) {
        j["g"] = p->g;
        j["gamma_a"] = p->gamma_a;
        j["gamma_s"] = p->gamma_s;
        j["P_s"] = p->P_s;
        j["n_max"] = p->n_max;
    } else if (const auto* t = std::get_if<ThermalParams>(&m)) {
        j["P_a"] = t->P_a;
        j["gamma_a"] = t->gamma_a;
        j["n_max"] = t->n_max;
    } else if (const auto* d = std::get_if<DrivenParams>(&m)) {
        j["Omega"] = d->Omega;
        j["gamma_a"] = d->gamma_a;
        j["n_max"] = d->n_max;
    }
    return j;
}

ModelSpec model_from_json(const json& j) {
    const std::string name = j.at("name").get<std::string>();
    if (name == "jaynes_cummings") {
        JCParams p;
        p.g = j.at("g").get<double>();
        p.gamma_a = j.at("gamma_a").get<double>();
        p.gamma_s = j.at("gamma_s").get<double>();
        p.P_s = j.at("P_s").get<double>();
        p.n_max = j.at("n_max").get<int>();
        return p;
    }
    if (name == "thermal_cavity") {
        ThermalParams p;
        p.P_a = j.at("P_a").get<double>();
        p.gamma_a = j.at("gamma_a").get<double>();
        p.n_max = j.at("n_max").get<int>();
        return p;
    }
    if (name == "driven_cavity") {
        DrivenParams p;
        p.Omega = j.at("Omega").get<double>();
        p.gamma_a = j.at("gamma_a").get<double>();
        p.n_max = j.at("n_max").get<int>();
        return p;
    }
    throw InvalidArgument(fmt::format("unknown model '{}'", name));
}

json request_to_json(const ScanRequest& req) {
    json j;
    j["model"] = model_to_json(req.model);
    j["mode"] = to_string(req.mode);
    j["axis"] = to_string(req.axis);
    j["method"] = to_string(req.method);
    json sensors = json::array();
    for (const auto& s : req.sensors) {
        json e{{"omega", s.omega}, {"gamma", s.gamma}};
        e["epsilon"] = s.epsilon ? json(*s.epsilon) : json(nullptr);
        sensors.push_back(e);
    }
    j["sensors"] = sensors;
    j["scanned_sensor"] = req.scanned_sensor + 1;
    j["grid"] = req.grid;
    j["grid2"] = req.grid2;
    j["fixed_delays"] = req.fixed_delays;
    j["epsilon"] = {{"policy", req.epsilon.kind == EpsilonPolicy::Kind::Converge ? "converge" : "chi"},
                    {"chi", req.epsilon.chi},
                    {"tol", req.epsilon.tol}};
    j["rtol"] = req.rtol;
    j["seed"] = req.seed;
    return j;
}

ScanRequest request_from_json(const json& j) {
    ScanRequest r;
    r.model = model_from_json(j.at("model"));
    r.mode = parse_mode(j.at("mode").get<std::string>());
    r.axis = parse_axis(j.at("axis").get<std::string>());
    r.method = parse_method(j.at("method").get<std::string>());
    for (const auto& e : j.at("sensors")) {
        SensorSpec s;
        s.omega = e.at("omega").get<double>();
        s.gamma = e.at("gamma").get<double>();
        if (!e.at("epsilon").is_null()) s.epsilon = e.at("epsilon").get<double>();
        r.sensors.push_back(s);
    }
    r.scanned_sensor = j.at("scanned_sensor").get<int>() - 1;
    r.grid = j.at("grid").get<std::vector<double>>();
    r.grid2 = j.at("grid2").get<std::vector<double>>();
    r.fixed_delays = j.at("fixed_delays").get<std::vector<double>>();
    const auto& e = j.at("epsilon");
    r.epsilon.kind = e.at("policy").get<std::string>() == "converge" ? EpsilonPolicy::Kind::Converge
                                                                       : EpsilonPolicy::Kind::FixedChi;
    r.epsilon.chi = e.at("chi").get<double>();
    r.epsilon.tol = e.at("tol").get<double>();
    r.rtol = j.at("rtol").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
}

// ---------------------------------------------------------------- files

namespace {

std::string format_value(double v) {
    if (std::isnan(v)) return "nan";
    return fmt::format("{:.16e}", v);
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::uint32_t crc32(const std::string& s) {
    boost::crc_32_type crc;
    crc.process_bytes(s.data(), s.size());
    return crc.checksum();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ComputationError(fmt::format("checkpoint unreadable: cannot open {}", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ComputationError(fmt::format("cannot write {}", path));
        out << text;
        if (!out) throw ComputationError(fmt::format("cannot write {}", path));
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw ComputationError(fmt::format("cannot write {}", path));
}

json ladder_json(const ModelSpec& m) {
    json out = json::array();
    const auto* p = std::get_if<JCParams>(&m);
    if (!p) return out;
    for (int rung = 4; rung >= 1; --rung) {
        try {
            for (const auto& t : jc_ladder(*p, rung))
                out.push_back({{"rung", t.rung},
                               {"branch", t.branch},
                               {"label", t.label},
                               {"frequency", t.frequency},
                               {"linewidth", t.linewidth}});
            break;
        } catch (const ComputationError&) {
            out = json::array();
        }
    }
    return out;
}

double parse_double(const std::string& s) {
    if (s == "nan") return kNaN;
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
}

}  // namespace

std::string to_csv(const ScanResult& res) {
    std::string out;
    for (const auto& c : res.axis_columns()) out += c + ",";
    out += res.value_column() + ",flag\n";
    const bool map = res.request.mode == ScanMode::G2Map;
    for (std::size_t i = 0; i < res.values.size(); ++i) {
        out += format_value(res.axis1[i]) + ",";
        if (map) out += format_value(res.axis2[i]) + ",";
        out += format_value(res.values[i]) + "," + res.flags[i] + "\n";
    }
    return out;
}

void checkpoint(const ScanResult& res, const std::string& base) {
    const std::string csv = to_csv(res);
    json meta;
    meta["version"] = NPHOTON_VERSION;
    meta["request"] = request_to_json(res.request);
    meta["model"] = model_to_json(res.request.model);
    meta["ladder"] = ladder_json(res.request.model);
    meta["units"] = "all frequencies, rates and inverse delays in units of the coupling g";
    json cols = json::array();
    for (const auto& c : res.axis_columns()) cols.push_back(c);
    cols.push_back(res.value_column());
    cols.push_back("flag");
    meta["columns"] = cols;
    meta["points"] = res.values.size();
    json eps = json::array(), conv = json::array(), wall = json::array(), msgs = json::array();
    for (std::size_t i = 0; i < res.values.size(); ++i) {
        eps.push_back(res.epsilon_used[i]);
        conv.push_back(nullable(res.convergence[i]));
        wall.push_back(res.wall_time[i]);
        msgs.push_back(res.messages[i]);
    }
    meta["epsilon_used"] = eps;
    meta["convergence"] = conv;
    meta["wall_time"] = wall;
    meta["messages"] = msgs;
    meta["complete"] = res.complete();
    meta["csv_crc32"] = fmt::format("{:08x}", crc32(csv));
    write_file(base + ".csv", csv);
    write_file(base + ".meta.json", meta.dump(2) + "\n");
}

ScanResult load_checkpoint(const std::string& base) {
    const std::string csv = read_file(base + ".csv");
    json meta;
    try {
        meta = json::parse(read_file(base + ".meta.json"));
    } catch (const json::exception& e) {
        throw ComputationError(fmt::format("checkpoint unreadable: {}", e.what()));
    }
    try {
        const std::string want = meta.at("csv_crc32").get<std::string>();
        const std::string got = fmt::format("{:08x}", crc32(csv));
        if (want != got)
            throw ComputationError(fmt::format("checkpoint unreadable: checksum mismatch (expected {}, found {})", want, got));
        ScanResult res = empty_result(request_from_json(meta.at("request")));
        std::istringstream in(csv);
        std::string line;
        std::getline(in, line);
        const bool map = res.request.mode == ScanMode::G2Map;
        std::size_t i = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (i >= res.values.size()) throw ComputationError("checkpoint unreadable: too many rows");
            std::vector<std::string> f;
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) f.push_back(cell);
            if (f.size() != (map ? 4u : 3u)) throw ComputationError("checkpoint unreadable: bad row");
            const double x1 = parse_double(f[0]);
            if (x1 != res.axis1[i] || (map && parse_double(f[1]) != res.axis2[i]))
                throw ComputationError("checkpoint unreadable: axis does not match the request");
            res.values[i] = parse_double(f[map ? 2 : 1]);
            res.flags[i] = f.back();
            ++i;
        }
        if (i != res.values.size()) throw ComputationError("checkpoint unreadable: missing rows");
        const auto& eps = meta.at("epsilon_used");
        const auto& conv = meta.at("convergence");
        const auto& wall = meta.at("wall_time");
        const auto& msgs = meta.at("messages");
        for (std::size_t k = 0; k < res.values.size(); ++k) {
            res.epsilon_used[k] = eps.at(k).get<std::vector<double>>();
            res.convergence[k] = conv.at(k).is_null() ? kNaN : conv.at(k).get<double>();
            res.wall_time[k] = wall.at(k).get<double>();
            res.messages[k] = msgs.at(k).get<std::string>();
        }
        return res;
    } catch (const ComputationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ComputationError(fmt::format("checkpoint unreadable: {}", e.what()));
    }
}

ScanResult resume(const std::string& base, const RunOptions& opt) {
    RunOptions o = opt;
    if (o.checkpoint.empty()) o.checkpoint = base;
    return run(load_checkpoint(base), o);
}

}  // namespace nphoton
