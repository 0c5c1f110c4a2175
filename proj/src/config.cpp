#include "spinfv/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace spinfv {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse(in, path);
}

ConfigFile ConfigFile::parse(std::istream& in, const std::string& origin) {
    ConfigFile cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                         ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            cfg.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size())
        throw std::runtime_error("config: [" + section + "] " + key +
                                 ": not a number: '" + v + "'");
    return x;
}

int ConfigFile::get_int(const std::string& section, const std::string& key,
                        int fallback) const {
    if (!has(section, key)) return fallback;
    return static_cast<int>(get_double(section, key, 0));
}

std::vector<double> ConfigFile::get_list(const std::string& section, const std::string& key,
                                         const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    std::istringstream is(get(section, key, ""));
    std::vector<double> out;
    double x;
    while (is >> x) out.push_back(x);
    if (!is.eof())
        throw std::runtime_error("config: [" + section + "] " + key + ": malformed list");
    return out;
}

RunConfig RunConfig::load(const std::string& path) {
    return from(ConfigFile::parse_file(path));
}

RunConfig RunConfig::from(const ConfigFile& file) {
    RunConfig rc;
    DeviceSpec& d = rc.device;

    static const std::set<std::string> known_sections = {"device", "mesh", "bias",
                                                         "solver", "run", "sweep"};
    for (const auto& [name, kv] : file.sections()) {
        (void)kv;
        if (!known_sections.count(name))
            throw std::runtime_error("config: unknown section [" + name + "]");
    }

    d.length = file.get_double("device", "length_m", d.length);
    d.height = file.get_double("device", "height_m", d.height);
    d.contact_length = file.get_double("device", "contact_length_m", d.contact_length);
    d.gate_length = file.get_double("device", "gate_length_m", d.gate_length);
    d.doping_high = file.get_double("device", "doping_high_m3", d.doping_high);
    d.doping_channel = file.get_double("device", "doping_channel_m3", d.doping_channel);
    d.diffusion = file.get_double("device", "diffusion_m2_s", d.diffusion);
    d.tau_sf = file.get_double("device", "tau_s", d.tau_sf);
    d.temperature = file.get_double("device", "temperature_K", d.temperature);
    d.epsilon_r = file.get_double("device", "epsilon_r", d.epsilon_r);
    d.polarization = file.get_double("device", "polarization", d.polarization);
    d.barrier_V = file.get_double("device", "barrier_V", d.barrier_V);
    d.closed_gate_V = file.get_double("device", "closed_gate_V", d.closed_gate_V);
    d.gate_density_open = file.get_double("device", "gate_density_open_m3", d.gate_density_open);
    d.gate_density_closed =
        file.get_double("device", "gate_density_closed_m3", d.gate_density_closed);
    d.lambda2 = file.get_double("device", "lambda2", d.lambda2);
    d.gamma_scaled = file.get_double("device", "gamma_scaled", d.gamma_scaled);

    rc.nx = file.get_int("mesh", "nx", rc.nx);
    rc.ny = file.get_int("mesh", "ny", rc.ny);

    rc.bias.drain_V = file.get_double("bias", "drain_V", rc.bias.drain_V);
    rc.bias.gate_V = file.get_double("bias", "gate_V", rc.bias.gate_V);
    const std::string gate = file.get("bias", "gate_state", "open");
    if (gate == "open") {
        rc.bias.gate = GateState::Open;
    } else if (gate == "closed") {
        rc.bias.gate = GateState::Closed;
    } else {
        throw std::runtime_error("config: [bias] gate_state must be open or closed");
    }

    SolverConfig& s = rc.solver;
    const std::string kind = file.get("solver", "kind", "newton");
    if (kind == "newton") {
        s.kind = SolverKind::Newton;
    } else if (kind == "picard") {
        s.kind = SolverKind::Picard;
    } else {
        throw std::runtime_error("config: [solver] kind must be newton or picard");
    }
    const std::string linear = file.get("solver", "linear", "sparse_lu");
    if (linear == "sparse_lu") {
        s.linear = LinearSolver::SparseLU;
    } else if (linear == "gmres") {
        s.linear = LinearSolver::Gmres;
    } else {
        throw std::runtime_error("config: [solver] linear must be sparse_lu or gmres");
    }
    s.newton_tol = file.get_double("solver", "newton_tol", s.newton_tol);
    s.max_newton_iters = file.get_int("solver", "max_newton_iters", s.max_newton_iters);
    s.picard_tol = file.get_double("solver", "picard_tol", s.picard_tol);
    s.max_picard_iters = file.get_int("solver", "max_picard_iters", s.max_picard_iters);
    s.picard_fallback = file.get_int("solver", "picard_fallback", s.picard_fallback ? 1 : 0) != 0;
    s.steady_threshold = file.get_double("solver", "steady_threshold", s.steady_threshold);
    s.max_steps = file.get_int("solver", "max_steps", s.max_steps);
    s.exec = file.get_int("solver", "serial", 0) ? Exec::Serial : Exec::OpenMP;
    rc.dt = file.get_double("solver", "dt", rc.dt);

    rc.mode = file.get("run", "mode", rc.mode);
    if (rc.mode != "steady" && rc.mode != "switch")
        throw std::runtime_error("config: [run] mode must be steady or switch");

    rc.sweep_drain = file.get_list("sweep", "drain_V", rc.sweep_drain);
    rc.sweep_gate_open = file.get_list("sweep", "gate_open_V", rc.sweep_gate_open);
    rc.sweep_gate_closed = file.get_list("sweep", "gate_closed_V", rc.sweep_gate_closed);
    return rc;
}

} // namespace spinfv
