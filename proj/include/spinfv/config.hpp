#ifndef SPINFV_CONFIG_HPP
#define SPINFV_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

#include "spinfv/device.hpp"

namespace spinfv {

// Sectioned key-value text: `[section]` headers, `key = value` lines,
// `#` comments. Unknown keys are rejected by the RunConfig loader.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse(std::istream& in, const std::string& origin = "<config>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key,
                                 const std::vector<double>& fallback) const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// A full run description with defaults matching the reference device.
struct RunConfig {
    DeviceSpec device;
    int nx = 48;
    int ny = 16;
    BiasPoint bias;
    SolverConfig solver;
    double dt = 0.05;            // scaled time step
    std::string mode = "steady"; // steady | switch
    std::vector<double> sweep_drain = {0.0, -0.1, -0.2, -0.3, -0.5, -1.0, -1.5, -2.0};
    std::vector<double> sweep_gate_open = {0.0, -0.3};
    std::vector<double> sweep_gate_closed = {1.2};

    static RunConfig load(const std::string& path);
    static RunConfig from(const ConfigFile& file);
};

} // namespace spinfv

#endif
