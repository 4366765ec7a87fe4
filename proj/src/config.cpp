#include "fgeo/config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fgeo {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

double to_double(const std::string& s, const std::string& key) {
    const std::string t = trim(s);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size()) throw ConfigError("'" + key + "': not a number: '" + t + "'");
    return v;
}

std::uint64_t to_u64(const std::string& s, const std::string& key) {
    const std::string t = trim(s);
    char* end = nullptr;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || t[0] == '-' || end != t.c_str() + t.size())
        throw ConfigError("'" + key + "': not a non-negative integer: '" + t + "'");
    return v;
}

Vec number_list(const std::string& s, const std::string& key) {
    if (trim(s) == "-" || trim(s).empty()) return Vec();
    const auto parts = split(s, ',');
    Vec v(static_cast<int>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<int>(i)) = to_double(parts[i], key);
    return v;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string vec_text(const Vec& v) {
    if (v.size() == 0) return "-";
    std::string s;
    for (int i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v(i));
    return s;
}

bool same_vec(const Vec& a, const Vec& b) { return a.size() == b.size() && (a.size() == 0 || a == b); }

bool same_vecs(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!same_vec(a[i], b[i])) return false;
    return true;
}

} // namespace

double RunConfig::tolerance(const std::string& key, double fallback) const {
    const auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    if (a.family != b.family || !same_vecs(a.thetas, b.thetas) || a.k != b.k || a.seeds != b.seeds ||
        a.samples != b.samples || a.out_dir != b.out_dir || a.resolution != b.resolution || a.extent != b.extent ||
        a.tolerances != b.tolerances || !same_vecs(a.entropy_maps, b.entropy_maps) ||
        a.expression.has_value() != b.expression.has_value())
        return false;
    if (!a.expression) return true;
    const auto& x = *a.expression;
    const auto& y = *b.expression;
    return x.id == y.id && x.dim == y.dim && x.nparams == y.nparams && x.density == y.density && x.metric == y.metric &&
           same_vec(x.lower, y.lower) && same_vec(x.upper, y.upper) && x.grid == y.grid;
}

std::vector<Vec> parse_theta_list(const std::string& text) {
    std::vector<Vec> out;
    for (const auto& part : split(text, ';')) out.push_back(number_list(part, "theta"));
    return out;
}

std::string print_theta_list(const std::vector<Vec>& thetas) {
    std::string s;
    for (std::size_t i = 0; i < thetas.size(); ++i) s += (i ? "; " : "") + vec_text(thetas[i]);
    return s;
}

std::vector<Vec> default_thetas(const std::string& family) {
    if (family == "gaussian-nd") return {vec({0.0, 0.0, 1.0, 0.0, 1.0})};
    if (family == "axial-2d") return {vec({3.0}), vec({5.0}), vec({10.0}), vec({20.0}), vec({30.0})};
    if (family == "cauchy-1d") return {vec({0.0, 1.0})};
    if (family == "xy-coupled") return {Vec()};
    return {};
}

void validate_config(RunConfig& cfg) {
    if (cfg.expression) cfg.family = cfg.expression->id;
    if (!cfg.expression) {
        const auto& ids = builtin_family_ids();
        if (std::find(ids.begin(), ids.end(), cfg.family) == ids.end())
            throw ConfigError("unknown family id '" + cfg.family + "'");
    }
    if (cfg.thetas.empty()) cfg.thetas = default_thetas(cfg.family);
    if (cfg.thetas.empty()) throw ConfigError("theta grid is empty");
    if (cfg.seeds.empty()) throw ConfigError("seed list is empty");
    if (cfg.samples < 2) throw ConfigError("samples must be at least 2");
    if (cfg.resolution < 2) throw ConfigError("resolution must be at least 2");
    if (!(cfg.extent > 0.0)) throw ConfigError("extent must be positive");
    if (!(cfg.k > 0.0)) throw ConfigError("k must be positive");
    if (cfg.out_dir.empty()) throw ConfigError("output directory is empty");
    if (cfg.entropy_maps.empty()) cfg.entropy_maps = {vec({0.0, 1.0, 0.0, 1.0}), vec({0.5, 2.0, -1.0, 0.5})};
    for (const auto& m : cfg.entropy_maps)
        if (m.size() != 4 || !(m(1) > 0.0) || !(m(3) > 0.0))
            throw ConfigError("entropy maps need mu, sigma > 0, nu, gamma > 0");
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section = "run";
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            if (section == "expression" && !cfg.expression) cfg.expression = ExpressionFamilyConfig{};
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (section == "run") {
            if (key == "family") cfg.family = val;
            else if (key == "theta") cfg.thetas = parse_theta_list(val);
            else if (key == "k") cfg.k = to_double(val, key);
            else if (key == "seeds") {
                cfg.seeds.clear();
                for (const auto& s : split(val, ',')) cfg.seeds.push_back(to_u64(s, key));
            } else if (key == "samples") cfg.samples = to_u64(val, key);
            else if (key == "out") cfg.out_dir = val;
            else if (key == "resolution") cfg.resolution = static_cast<int>(to_u64(val, key));
            else if (key == "extent") cfg.extent = to_double(val, key);
            else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "' in [run]");
        } else if (section == "tolerances") {
            cfg.tolerances[key] = to_double(val, key);
        } else if (section == "entropy") {
            if (key != "maps") throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "' in [entropy]");
            cfg.entropy_maps = parse_theta_list(val);
        } else if (section == "expression") {
            auto& e = *cfg.expression;
            if (key == "id") e.id = val;
            else if (key == "dim") e.dim = static_cast<int>(to_u64(val, key));
            else if (key == "params") e.nparams = static_cast<int>(to_u64(val, key));
            else if (key == "density") e.density = val;
            else if (key == "metric") e.metric = split(val, ';');
            else if (key == "lower") e.lower = number_list(val, key);
            else if (key == "upper") e.upper = number_list(val, key);
            else if (key == "grid") {
                const Vec g = number_list(val, key);
                e.grid.assign(g.data(), g.data() + g.size());
            } else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "' in [expression]");
        } else {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
        }
    }
    validate_config(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string print_config(const RunConfig& cfg) {
    std::ostringstream o;
    o << "[run]\n";
    o << "family = " << cfg.family << "\n";
    o << "theta = " << print_theta_list(cfg.thetas) << "\n";
    o << "k = " << num(cfg.k) << "\n";
    o << "seeds = ";
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) o << (i ? ", " : "") << cfg.seeds[i];
    o << "\nsamples = " << cfg.samples << "\n";
    o << "out = " << cfg.out_dir << "\n";
    o << "resolution = " << cfg.resolution << "\n";
    o << "extent = " << num(cfg.extent) << "\n";
    if (!cfg.tolerances.empty()) {
        o << "[tolerances]\n";
        for (const auto& [key, v] : cfg.tolerances) o << key << " = " << num(v) << "\n";
    }
    if (!cfg.entropy_maps.empty()) o << "[entropy]\nmaps = " << print_theta_list(cfg.entropy_maps) << "\n";
    if (cfg.expression) {
        const auto& e = *cfg.expression;
        o << "[expression]\n";
        o << "id = " << e.id << "\n";
        o << "dim = " << e.dim << "\n";
        o << "params = " << e.nparams << "\n";
        o << "density = " << e.density << "\n";
        if (!e.metric.empty()) {
            o << "metric = ";
            for (std::size_t i = 0; i < e.metric.size(); ++i) o << (i ? "; " : "") << e.metric[i];
            o << "\n";
        }
        o << "lower = " << vec_text(e.lower) << "\n";
        o << "upper = " << vec_text(e.upper) << "\n";
        if (!e.grid.empty()) {
            o << "grid = ";
            for (std::size_t i = 0; i < e.grid.size(); ++i) o << (i ? ", " : "") << num(e.grid[i]);
            o << "\n";
        }
    }
    return o.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : print_config(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

FamilySpec config_family(const RunConfig& cfg, std::size_t i) {
    const ControlParams th = cfg.params(i);
    FamilySpec s = cfg.expression ? expression_family(*cfg.expression, th) : builtin_family(cfg.family, th);
    const double tol = cfg.tolerance("gate", 1e-5);
    if (tol != 1e-5) s.gate = run_family_gate(s, tol);
    return s;
}

} // namespace fgeo
