#include "lmt/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "lmt/errors.hpp"

namespace lmt {

const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::espan: return "espan";
        case Scheme::dlmt: return "dlmt";
        case Scheme::clmt: return "clmt";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "espan") return Scheme::espan;
    if (s == "dlmt") return Scheme::dlmt;
    if (s == "clmt") return Scheme::clmt;
    throw InvalidConfigError("unknown scheme '" + s + "', expected one of {espan,dlmt,clmt}");
}

int SimConfig::source_count() const {
    return static_cast<int>(std::lround(source_fraction * node_count));
}

void SimConfig::validate() const {
    if (node_count < 1) throw InvalidConfigError("node_count must be >= 1");
    if (!(node_density > 0.0)) throw InvalidConfigError("node_density must be > 0");
    if (!(source_fraction > 0.0 && source_fraction <= 1.0))
        throw InvalidConfigError("source_fraction must be in (0, 1]");
    if (!(radio_range > 0.0)) throw InvalidConfigError("radio_range must be > 0");
    if (!(data_rate > 0.0)) throw InvalidConfigError("data_rate must be > 0");
    if (!(timeframe > 0.0)) throw InvalidConfigError("timeframe must be > 0");
    if (data_packet_size <= 0) throw InvalidConfigError("data_packet_size must be > 0");
    if (espan_control_size <= 0) throw InvalidConfigError("espan_control_size must be > 0");
    if (dlmt_hello_size <= 0) throw InvalidConfigError("dlmt_hello_size must be > 0");
    if (dlmt_header_size <= 0) throw InvalidConfigError("dlmt_header_size must be > 0");
    if (dlmt_entry_size <= 0) throw InvalidConfigError("dlmt_entry_size must be > 0");
    if (!(idle_power > 0.0 && rx_power > 0.0 && tx_power > 0.0))
        throw InvalidConfigError("all powers must be > 0");
    if (!(mac_bandwidth > 0.0)) throw InvalidConfigError("mac_bandwidth must be > 0");
    if (!(energy_log_period > 0.0)) throw InvalidConfigError("energy_log_period must be > 0");
    if (!(source_energy_min <= source_energy_max))
        throw InvalidConfigError("source_energy_min must be <= source_energy_max");
    if (!(source_energy_max < non_source_energy))
        throw InvalidConfigError("non_source_energy must exceed source_energy_max");
    if (!(source_energy_min > 0.0)) throw InvalidConfigError("source energies must be > 0");
    if (!(sim_duration > 0.0)) throw InvalidConfigError("sim_duration must be > 0");
    if (start_jitter_max < 0.0) throw InvalidConfigError("start_jitter_max must be >= 0");
    if (!(discount >= 0.0)) throw InvalidConfigError("discount must be >= 0");
    if (oracle_source_limit < 1) throw InvalidConfigError("oracle_source_limit must be >= 1");
    if (source_count() < 1)
        throw InvalidConfigError("source_fraction * node_count rounds to zero sources");
    if (sink_count < 0 || sink_count > node_count - source_count())
        throw InvalidConfigError("sink_count must fit among the non-source nodes");
}

namespace {

struct Field {
    std::function<std::string(const SimConfig&)> get;
    std::function<void(SimConfig&, const std::string&)> set;
};

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw InvalidConfigError("bad numeric value for " + key + ": '" + v + "'");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw InvalidConfigError("bad integer value for " + key + ": '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw InvalidConfigError("bad boolean value for " + key + ": '" + v + "'");
}

// Ordered list so --print-config output is stable.
const std::vector<std::pair<std::string, Field>>& fields() {
    auto dbl = [](double SimConfig::*m) {
        return Field{
            [m](const SimConfig& c) { return fmt_double(c.*m); },
            [m](SimConfig& c, const std::string& v) { c.*m = parse_double("", v); }};
    };
    auto itg = [](int SimConfig::*m) {
        return Field{
            [m](const SimConfig& c) { return std::to_string(c.*m); },
            [m](SimConfig& c, const std::string& v) { c.*m = static_cast<int>(parse_int("", v)); }};
    };
    auto bol = [](bool SimConfig::*m) {
        return Field{
            [m](const SimConfig& c) { return std::string(c.*m ? "true" : "false"); },
            [m](SimConfig& c, const std::string& v) { c.*m = parse_bool("", v); }};
    };
    static const std::vector<std::pair<std::string, Field>> table = {
        {"node_count", itg(&SimConfig::node_count)},
        {"node_density", dbl(&SimConfig::node_density)},
        {"sink_count", itg(&SimConfig::sink_count)},
        {"source_fraction", dbl(&SimConfig::source_fraction)},
        {"radio_range", dbl(&SimConfig::radio_range)},
        {"data_rate", dbl(&SimConfig::data_rate)},
        {"timeframe", dbl(&SimConfig::timeframe)},
        {"data_packet_size", itg(&SimConfig::data_packet_size)},
        {"espan_control_size", itg(&SimConfig::espan_control_size)},
        {"dlmt_hello_size", itg(&SimConfig::dlmt_hello_size)},
        {"dlmt_header_size", itg(&SimConfig::dlmt_header_size)},
        {"dlmt_entry_size", itg(&SimConfig::dlmt_entry_size)},
        {"idle_power", dbl(&SimConfig::idle_power)},
        {"rx_power", dbl(&SimConfig::rx_power)},
        {"tx_power", dbl(&SimConfig::tx_power)},
        {"mac_bandwidth", dbl(&SimConfig::mac_bandwidth)},
        {"energy_log_period", dbl(&SimConfig::energy_log_period)},
        {"source_energy_min", dbl(&SimConfig::source_energy_min)},
        {"source_energy_max", dbl(&SimConfig::source_energy_max)},
        {"non_source_energy", dbl(&SimConfig::non_source_energy)},
        {"sim_duration", dbl(&SimConfig::sim_duration)},
        {"start_jitter_max", dbl(&SimConfig::start_jitter_max)},
        {"discount", dbl(&SimConfig::discount)},
        {"diffusion_packet_size", itg(&SimConfig::diffusion_packet_size)},
        {"diffusion_delay", dbl(&SimConfig::diffusion_delay)},
        {"diffusion_data_delay", dbl(&SimConfig::diffusion_data_delay)},
        {"oracle_source_limit", itg(&SimConfig::oracle_source_limit)},
        {"aggregation", bol(&SimConfig::aggregation)},
        {"run_to_extinction", bol(&SimConfig::run_to_extinction)},
    };
    return table;
}

} // namespace

SimConfig load_config_file(const std::string& path, SimConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string stripped = trim(line);
        if (stripped.empty()) continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw InvalidConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        if (key == "seed") {
            base.seed = static_cast<std::uint64_t>(parse_int(key, value));
            continue;
        }
        bool found = false;
        for (const auto& [name, field] : fields()) {
            if (name == key) {
                try {
                    field.set(base, value);
                } catch (const InvalidConfigError&) {
                    throw InvalidConfigError(path + ":" + std::to_string(lineno) +
                                             ": bad value for " + key + ": '" + value + "'");
                }
                found = true;
                break;
            }
        }
        if (!found)
            throw InvalidConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    return base;
}

void dump_config(std::ostream& os, const SimConfig& cfg) {
    for (const auto& [name, field] : fields()) os << name << " = " << field.get(cfg) << "\n";
    os << "seed = " << cfg.seed << "\n";
}

} // namespace lmt
