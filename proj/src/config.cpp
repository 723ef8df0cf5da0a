#include "nphoton/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "nphoton/error.hpp"

namespace nphoton {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
    s = trim(s);
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
    return s;
}

// Drops '#' comments outside quotes so the INI reader sees plain key = value lines.
std::string strip_comments(const std::string& text) {
    std::istringstream in(text);
    std::string out, line;
    while (std::getline(in, line)) {
        char quote = 0;
        std::size_t cut = line.size();
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quote) {
                if (c == quote) quote = 0;
            } else if (c == '"' || c == '\'') {
                quote = c;
            } else if (c == '#') {
                cut = i;
                break;
            }
        }
        out += line.substr(0, cut) + "\n";
    }
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::string s = trim(text);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') throw InvalidArgument(fmt::format("unterminated list '{}'", text));
        s = s.substr(1, s.size() - 2);
    }
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(unquote(item));
    return out;
}

double plain_number(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw InvalidArgument(fmt::format("not a number: '{}'", s));
    return v;
}

double token_value(const std::string& s, const ModelSpec& model) {
    try {
        return plain_number(s);
    } catch (const InvalidArgument&) {
    }
    if (const auto* jc = std::get_if<JCParams>(&model)) return resolve_token(s, *jc);
    throw InvalidArgument(fmt::format("'{}' is not a number (ladder tokens need the jc model)", s));
}

class Reader {
public:
    Reader(const pt::ptree& tree, std::string source) : tree_(tree), source_(std::move(source)) {}

    const pt::ptree* section(const std::string& name) const {
        const auto it = tree_.find(name);
        return it == tree_.not_found() ? nullptr : &it->second;
    }

    std::optional<std::string> get(const std::string& sec, const std::string& key) {
        used_.insert(sec + "." + key);
        const auto* s = section(sec);
        if (!s) return std::nullopt;
        const auto v = s->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return unquote(*v);
    }

    std::string require(const std::string& sec, const std::string& key) {
        auto v = get(sec, key);
        if (!v) throw InvalidArgument(fmt::format("{}: missing field [{}] {}", source_, sec, key));
        return *v;
    }

    template <typename F>
    auto wrap(const std::string& sec, const std::string& key, F&& f) -> decltype(f()) {
        try {
            return f();
        } catch (const std::exception& e) {
            throw InvalidArgument(fmt::format("{}: [{}] {}: {}", source_, sec, key, e.what()));
        }
    }

    double number(const std::string& sec, const std::string& key, const ModelSpec& model) {
        const std::string v = require(sec, key);
        return wrap(sec, key, [&] { return parse_number(v, model); });
    }

    std::optional<double> maybe_number(const std::string& sec, const std::string& key, const ModelSpec& model) {
        const auto v = get(sec, key);
        if (!v) return std::nullopt;
        return wrap(sec, key, [&] { return parse_number(*v, model); });
    }

    std::optional<int> maybe_int(const std::string& sec, const std::string& key) {
        const auto v = get(sec, key);
        if (!v) return std::nullopt;
        return wrap(sec, key, [&] {
            const double d = plain_number(*v);
            if (d != std::floor(d) || std::abs(d) > 1e9) throw InvalidArgument("expected an integer");
            return static_cast<int>(d);
        });
    }

    void check_unknown() const {
        for (const auto& [sec, body] : tree_) {
            if (body.empty() && !body.data().empty())
                throw InvalidArgument(fmt::format("{}: key '{}' outside of any section", source_, sec));
            for (const auto& [key, value] : body)
                if (!used_.count(sec + "." + key))
                    throw InvalidArgument(fmt::format("{}: unknown field [{}] {}", source_, sec, key));
        }
    }

    const std::string& source() const { return source_; }

private:
    const pt::ptree& tree_;
    std::string source_;
    std::set<std::string> used_;
};

ModelSpec read_model(Reader& r, bool& n_max_given) {
    const std::string name = r.require("model", "name");
    const ModelSpec none = ThermalParams{};
    auto num = [&](const char* key) { return r.number("model", key, none); };
    if (name == "jc" || name == "jaynes_cummings") {
        JCParams p;
        if (auto g = r.maybe_number("model", "g", none)) p.g = *g;
        p.gamma_a = num("gamma_a");
        p.gamma_s = num("gamma_s");
        p.P_s = num("P_s");
        const auto n_max = r.maybe_int("model", "n_max");
        n_max_given = n_max.has_value();
        p.n_max = n_max.value_or(p.n_max);
        return p;
    }
    if (name == "thermal" || name == "thermal_cavity") {
        ThermalParams p;
        p.P_a = num("P_a");
        p.gamma_a = num("gamma_a");
        p.n_max = r.maybe_int("model", "n_max").value_or(p.n_max);
        return p;
    }
    if (name == "driven" || name == "driven_cavity") {
        DrivenParams p;
        p.Omega = num("Omega");
        p.gamma_a = num("gamma_a");
        p.n_max = r.maybe_int("model", "n_max").value_or(p.n_max);
        return p;
    }
    throw InvalidArgument(fmt::format("{}: [model] name: unknown model '{}' (expected jc, thermal or driven)", r.source(),
                                      name));
}

}  // namespace

double parse_number(const std::string& text, const ModelSpec& model) {
    const std::string s = unquote(text);
    if (s.empty()) throw InvalidArgument("empty value");
    // a*b or a/b with one operator (not a leading sign or exponent sign).
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i] == '*' || s[i] == '/') {
            const double lhs = token_value(trim(s.substr(0, i)), model);
            const double rhs = token_value(trim(s.substr(i + 1)), model);
            if (s[i] == '*') return lhs * rhs;
            if (rhs == 0.0) throw InvalidArgument(fmt::format("division by zero in '{}'", s));
            return lhs / rhs;
        }
    }
    return token_value(s, model);
}

std::vector<double> parse_grid(const std::string& text, const ModelSpec& model) {
    const std::string s = unquote(text);
    for (const char* fn : {"linspace", "logspace"}) {
        const std::string f(fn);
        if (s.rfind(f + "(", 0) != 0) continue;
        if (s.back() != ')') throw InvalidArgument(fmt::format("unterminated {}", f));
        const auto args = split_list(s.substr(f.size() + 1, s.size() - f.size() - 2));
        if (args.size() != 3) throw InvalidArgument(fmt::format("{} takes (start, stop, count)", f));
        const double a = parse_number(args[0], model);
        const double b = parse_number(args[1], model);
        const double n = plain_number(args[2]);
        if (n < 1 || n != std::floor(n)) throw InvalidArgument(fmt::format("{} count must be a positive integer", f));
        const int count = static_cast<int>(n);
        std::vector<double> out(count);
        for (int i = 0; i < count; ++i) {
            const double t = count == 1 ? a : a + (b - a) * i / (count - 1);
            out[i] = f == "logspace" ? std::pow(10.0, t) : t;
        }
        if (count > 1) out.back() = f == "logspace" ? std::pow(10.0, b) : b;
        return out;
    }
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(parse_number(item, model));
    if (out.empty()) throw InvalidArgument("grid is empty");
    return out;
}

Config parse_config(const std::string& text, const std::string& source) {
    pt::ptree tree;
    try {
        std::istringstream in(strip_comments(text));
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw InvalidArgument(fmt::format("{}: line {}: {}", source, e.line(), e.message()));
    }
    Reader r(tree, source);
    Config cfg;
    ScanRequest& req = cfg.request;
    bool n_max_given = false;
    req.model = read_model(r, n_max_given);

    if (auto mode = r.get("scan", "mode")) {
        req.mode = r.wrap("scan", "mode", [&] { return parse_mode(*mode); });
        cfg.mode_given = true;
    }

    // Sensors.
    const auto omegas = split_list(r.require("sensors", "omega"));
    if (omegas.empty()) throw InvalidArgument(fmt::format("{}: [sensors] omega is empty", source));
    const auto gammas = split_list(r.require("sensors", "gamma"));
    const auto epsilons = split_list(r.get("sensors", "epsilon").value_or(""));
    const std::size_t n = omegas.size();
    auto per_sensor = [&](const std::vector<std::string>& v, const char* key) {
        if (v.size() != 1 && v.size() != n)
            throw InvalidArgument(
                fmt::format("{}: [sensors] {}: expected 1 or {} entries, found {}", source, key, n, v.size()));
    };
    per_sensor(gammas, "gamma");
    if (!epsilons.empty()) per_sensor(epsilons, "epsilon");
    std::optional<int> scan_marker;
    for (std::size_t i = 0; i < n; ++i) {
        SensorSpec s;
        if (omegas[i] == "scan" || omegas[i] == "*") {
            if (scan_marker) throw InvalidArgument(fmt::format("{}: [sensors] omega: more than one 'scan' entry", source));
            scan_marker = static_cast<int>(i);
        } else {
            s.omega = r.wrap("sensors", "omega", [&] { return parse_number(omegas[i], req.model); });
        }
        s.gamma = r.wrap("sensors", "gamma", [&] { return parse_number(gammas[gammas.size() == 1 ? 0 : i], req.model); });
        if (!epsilons.empty()) {
            const auto& e = epsilons[epsilons.size() == 1 ? 0 : i];
            if (e != "auto") s.epsilon = r.wrap("sensors", "epsilon", [&] { return parse_number(e, req.model); });
        }
        req.sensors.push_back(s);
    }

    // Epsilon policy ([sensors] chi is accepted as a shorthand).
    if (auto chi = r.maybe_number("sensors", "chi", req.model)) req.epsilon.chi = *chi;
    if (auto policy = r.get("epsilon", "policy")) {
        if (*policy == "converge")
            req.epsilon.kind = EpsilonPolicy::Kind::Converge;
        else if (*policy != "chi" && *policy != "fixed")
            throw InvalidArgument(fmt::format("{}: [epsilon] policy: expected chi or converge", source));
    }
    if (auto chi = r.maybe_number("epsilon", "chi", req.model)) req.epsilon.chi = *chi;
    if (auto tol = r.maybe_number("epsilon", "tol", req.model)) req.epsilon.tol = *tol;

    // Scan.
    if (auto axis = r.get("scan", "axis")) {
        req.axis = r.wrap("scan", "axis", [&] { return parse_axis(*axis); });
    } else {
        switch (req.mode) {
            case ScanMode::GnTau: req.axis = ScanAxis::Tau; break;
            case ScanMode::G2Map: req.axis = ScanAxis::Omega12; break;
            default: req.axis = ScanAxis::Omega1; break;
        }
    }
    if (auto k = r.maybe_int("scan", "scanned")) {
        if (*k < 1 || *k > static_cast<int>(n))
            throw InvalidArgument(fmt::format("{}: [scan] scanned: sensor index must be in 1..{}", source, n));
        req.scanned_sensor = *k - 1;
    } else if (scan_marker) {
        req.scanned_sensor = *scan_marker;
    }
    const std::string grid = r.require("scan", "grid");
    req.grid = r.wrap("scan", "grid", [&] { return parse_grid(grid, req.model); });
    if (auto g2 = r.get("scan", "grid2")) req.grid2 = r.wrap("scan", "grid2", [&] { return parse_grid(*g2, req.model); });
    if (auto fd = r.get("scan", "fixed_delays"))
        for (const auto& item : split_list(*fd))
            req.fixed_delays.push_back(r.wrap("scan", "fixed_delays", [&] { return parse_number(item, req.model); }));
    if (auto m = r.get("scan", "method")) req.method = r.wrap("scan", "method", [&] { return parse_method(*m); });
    if (auto rt = r.maybe_number("scan", "rtol", req.model)) req.rtol = *rt;
    if (auto seed = r.maybe_int("scan", "seed")) req.seed = static_cast<std::uint64_t>(std::max(0, *seed));

    // Output and run settings.
    cfg.directory = r.get("output", "directory").value_or(cfg.directory);
    cfg.basename = r.get("output", "basename").value_or(cfg.basename);
    cfg.workers = r.maybe_int("run", "workers");

    if (auto* jc = std::get_if<JCParams>(&req.model); jc && !n_max_given)
        jc->n_max = default_n_max(photon_order(req));
    r.check_unknown();
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument(fmt::format("cannot read config file {}", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace nphoton
