#include "nphoton/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "nphoton/config.hpp"
#include "nphoton/error.hpp"
#include "nphoton/models.hpp"
#include "nphoton/sweep.hpp"
#include "nphoton/validate.hpp"

namespace nphoton {

namespace {

struct ScanFlags {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::string> basename;
    std::optional<int> workers;
    std::optional<double> chi;
    std::optional<double> converge_eps;
    std::optional<std::string> method;
    bool resume = false;
    int checkpoint_every = 0;
};

void add_scan_flags(CLI::App* cmd, ScanFlags& f) {
    cmd->add_option("--config", f.config, "Configuration file (rates in units of g)")->required();
    cmd->add_option("--out", f.out, "Output directory (overrides [output] directory)");
    cmd->add_option("--basename", f.basename, "Output file stem (overrides [output] basename)");
    cmd->add_option("--workers", f.workers, "Worker threads (default: NPHOTON_WORKERS or 1)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--chi", f.chi, "Sensor coupling ratio chi for automatic epsilons")->check(CLI::PositiveNumber);
    cmd->add_option("--converge-eps", f.converge_eps, "Halve epsilon until results change by less than this")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--method", f.method, "sensors or oracle");
    cmd->add_flag("--resume", f.resume, "Continue from existing output files");
    cmd->add_option("--checkpoint-every", f.checkpoint_every, "Write output every n finished points")
        ->check(CLI::NonNegativeNumber);
}

int env_workers() {
    const char* env = std::getenv("NPHOTON_WORKERS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096) throw InvalidArgument(fmt::format("NPHOTON_WORKERS must be a positive integer, got '{}'", env));
    return static_cast<int>(v);
}

int cmd_scan(ScanMode mode, const ScanFlags& f, std::ostream& out, std::ostream& err) {
    Config cfg = load_config(f.config);
    ScanRequest& req = cfg.request;
    if (cfg.mode_given && req.mode != mode)
        throw InvalidArgument(fmt::format("{}: [scan] mode is '{}' but the command runs '{}'", f.config,
                                          to_string(req.mode), to_string(mode)));
    if (!cfg.mode_given) {
        req.mode = mode;
        if (mode == ScanMode::GnTau) req.axis = ScanAxis::Tau;
        if (mode == ScanMode::G2Map) req.axis = ScanAxis::Omega12;
    }
    if (f.chi) req.epsilon.chi = *f.chi;
    if (f.converge_eps) {
        req.epsilon.kind = EpsilonPolicy::Kind::Converge;
        req.epsilon.tol = *f.converge_eps;
    }
    if (f.method) req.method = parse_method(*f.method);
    req.validate();

    RunOptions opt;
    opt.workers = f.workers ? *f.workers : cfg.workers ? *cfg.workers : env_workers();
    const std::filesystem::path dir = f.out ? *f.out : cfg.directory;
    const std::string base = (dir / (f.basename ? *f.basename : cfg.basename)).string();
    std::filesystem::create_directories(dir);
    opt.checkpoint = base;
    opt.checkpoint_every = f.checkpoint_every;

    ScanResult res;
    if (f.resume && std::filesystem::exists(base + ".csv")) {
        const ScanResult prior = load_checkpoint(base);
        if (request_to_json(prior.request) != request_to_json(req))
            throw InvalidArgument(fmt::format("{}: existing output was produced by a different request", base));
        res = run(prior, opt);
    } else {
        res = run(req, opt);
    }

    std::map<std::string, int> counts;
    for (const auto& fl : res.flags) ++counts[fl];
    std::string summary;
    for (const auto& [k, v] : counts) summary += fmt::format("{}{} {}", summary.empty() ? "" : ", ", v, k);
    out << fmt::format("{} points ({}) -> {}.csv, {}.meta.json\n", res.values.size(), summary, base, base);
    for (std::size_t i = 0; i < res.flags.size(); ++i) {
        if (res.messages[i].empty()) continue;
        const auto cols = res.axis_columns();
        std::string where = fmt::format("{}={:.6g}", cols[0], res.axis1[i]);
        if (cols.size() > 1) where += fmt::format(", {}={:.6g}", cols[1], res.axis2[i]);
        err << fmt::format("warning: {} at {}: {}\n", res.flags[i], where, res.messages[i]);
    }
    return kExitOk;
}

int cmd_ladder(const JCParams& p, int rungs, std::ostream& out) {
    const auto ladder = jc_ladder(p, rungs);
    out << fmt::format("# R = {:.10g}, x = {:.10g} (units of g)\n", jc_rabi(p), jc_x(p));
    out << fmt::format("{:<6} {:>4} {:>6} {:>18} {:>18}\n", "label", "rung", "branch", "frequency", "linewidth");
    for (const auto& t : ladder)
        out << fmt::format("{:<6} {:>4} {:>6} {:>18.10e} {:>18.10e}\n", t.label, t.rung, t.branch, t.frequency,
                           t.linewidth);
    out << fmt::format("{} transitions\n", ladder.size());
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Frequency-resolved N-photon correlations of open quantum systems"};
    app.set_version_flag("--version", std::string("nphoton ") + NPHOTON_VERSION);
    app.require_subcommand(1);

    struct Entry {
        const char* name;
        const char* help;
        ScanMode mode;
        ScanFlags flags;
        CLI::App* cmd = nullptr;
    };
    std::vector<Entry> scans = {
        {"spectrum", "Filtered emission spectrum S(omega) (one sensor)", ScanMode::Spectrum, {}},
        {"gn", "Zero-delay N-photon correlation g(N) over omega1 or gamma", ScanMode::GnZero, {}},
        {"gtau", "Delayed correlation g(N)(tau)", ScanMode::GnTau, {}},
        {"g2map", "Two-photon correlation g2 on an (omega1, omega2) grid", ScanMode::G2Map, {}},
    };
    for (auto& e : scans) {
        e.cmd = app.add_subcommand(e.name, e.help);
        add_scan_flags(e.cmd, e.flags);
    }

    JCParams lp;
    std::string model = "jc";
    int rungs = 3;
    auto* ladder = app.add_subcommand("ladder", "Jaynes-Cummings transition frequencies and linewidths");
    ladder->add_option("--model", model, "Model (only jc has a ladder)");
    ladder->add_option("--g", lp.g, "Coupling g");
    ladder->add_option("--gamma-a", lp.gamma_a, "Cavity decay rate");
    ladder->add_option("--gamma-s", lp.gamma_s, "Emitter decay rate");
    ladder->add_option("--P-s", lp.P_s, "Emitter pump rate");
    ladder->add_option("--rungs", rungs, "Highest rung")->check(CLI::PositiveNumber);

    std::string level = "quick";
    auto* validate = app.add_subcommand("validate", "Compare the sensor method against the resolvent oracle");
    validate->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << "nphoton " << NPHOTON_VERSION << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        for (auto& s : scans)
            if (s.cmd->parsed()) err << s.cmd->help();
        return kExitInvalid;
    }

    try {
        for (auto& e : scans)
            if (e.cmd->parsed()) return cmd_scan(e.mode, e.flags, out, err);
        if (ladder->parsed()) {
            if (model != "jc") throw InvalidArgument(fmt::format("model '{}' has no ladder (use jc)", model));
            return cmd_ladder(lp, rungs, out);
        }
        if (validate->parsed()) {
            const auto rep = run_validation(parse_validation_level(level));
            out << rep.table();
            return rep.passed() ? kExitOk : kExitCheckFailed;
        }
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const ComputationError& e) {
        err << "computation error: " << e.what() << "\n";
        return kExitComputation;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitInvalid;
}

}  // namespace nphoton
