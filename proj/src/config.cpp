#include "claricov/config.hpp"

#include "claricov/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace claricov {

namespace {

std::string trim(std::string s) {
    const auto issp = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && issp(s.back())) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && issp(s[i])) ++i;
    return s.substr(i);
}

double parse_number(const std::string& key, const std::string& value) {
    double v = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw ConfigError("config key '" + key + "': invalid number '" + value + "'");
    return v;
}

std::vector<Vec2> parse_positions(const std::string& value) {
    std::vector<Vec2> out;
    std::stringstream ss(value);
    std::string pair;
    while (std::getline(ss, pair, ';')) {
        const auto comma = pair.find(',');
        if (comma == std::string::npos)
            throw ConfigError("fleet start: expected 'x,y; x,y; ...', got '" + value + "'");
        out.emplace_back(parse_number("start.x", trim(pair.substr(0, comma))),
                         parse_number("start.y", trim(pair.substr(comma + 1))));
    }
    if (out.empty()) throw ConfigError("fleet start: empty position list");
    return out;
}

} // namespace

std::vector<Vec2> ScenarioConfig::resolved_starts() const {
    if (!start_positions.empty()) return start_positions;
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(agents));
    for (int i = 0; i < agents; ++i)
        out.emplace_back((i + 0.5) * len_x / agents, 0.0);
    return out;
}

void ScenarioConfig::validate() const {
    if (!(len_x > 0.0) || !(len_y > 0.0)) throw ConfigError("domain lengths must be > 0");
    if (!(grid_spacing > 0.0)) throw ConfigError("grid spacing must be > 0");
    kernel.validate();
    if (!(kernel.noise_var > 0.0))
        throw ConfigError("kernel noise_var must be > 0 for assimilation");
    if (sigma_t_sq < 0.0) throw ConfigError("sigma_t_sq must be >= 0");
    if (agents < 0) throw ConfigError("agents must be >= 0");
    if (!(u_max_mps > 0.0)) throw ConfigError("u_max_mps must be > 0");
    if (modes < 0) throw ConfigError("controller modes must be >= 0");
    if (!(tau_max > 0.0)) throw ConfigError("tau_max must be > 0");
    if (!(q_target >= 0.0 && q_target < 1.0)) throw ConfigError("q_target must be in [0,1)");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (horizon < 0.0) throw ConfigError("horizon must be >= 0");
    const double steps_exact = horizon / dt;
    if (std::abs(steps_exact - std::lround(steps_exact)) > 1e-9)
        throw ConfigError("horizon must be a multiple of dt");
    if (truth_refine < 1) throw ConfigError("truth_refine must be >= 1");
    if (snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");
    if (components < 1 || components > 2) throw ConfigError("components must be 1 or 2");
    const DomainBox box = domain();
    for (const auto& p : resolved_starts())
        if (!box.contains(p)) throw ConfigError("start position outside domain");
}

ScenarioConfig parse_config(const std::string& text) {
    ScenarioConfig c;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": malformed section header");
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "domain.length_x_km") c.len_x = parse_number(key, value);
        else if (key == "domain.length_y_km") c.len_y = parse_number(key, value);
        else if (key == "grid.spacing_km") c.grid_spacing = parse_number(key, value);
        else if (key == "kernel.family") c.kernel.family = kernel_family_from_name(value);
        else if (key == "kernel.sigma") c.kernel.sigma = parse_number(key, value);
        else if (key == "kernel.length_scale_km") c.kernel.length_scale = parse_number(key, value);
        else if (key == "kernel.noise_var") c.kernel.noise_var = parse_number(key, value);
        else if (key == "process.prior_mean") c.prior_mean = parse_number(key, value);
        else if (key == "process.sigma_t_sq") c.sigma_t_sq = parse_number(key, value);
        else if (key == "process.sigma_t_sq_file") c.sigma_t_sq_file = value;
        else if (key == "fleet.agents") c.agents = static_cast<int>(parse_number(key, value));
        else if (key == "fleet.u_max_mps") c.u_max_mps = parse_number(key, value);
        else if (key == "fleet.start") {
            if (value != "auto") c.start_positions = parse_positions(value);
        } else if (key == "controller.policy") {
            if (value == "direct") c.policy = CoveragePolicy::Direct;
            else if (value == "indirect") c.policy = CoveragePolicy::Indirect;
            else throw ConfigError("controller.policy must be 'direct' or 'indirect'");
        } else if (key == "controller.modes") c.modes = static_cast<int>(parse_number(key, value));
        else if (key == "controller.tau_max_s") c.tau_max = parse_number(key, value);
        else if (key == "controller.eps_gradient") c.eps_gradient = parse_number(key, value);
        else if (key == "targets.q_target") c.q_target = parse_number(key, value);
        else if (key == "sim.dt_s") c.dt = parse_number(key, value);
        else if (key == "sim.horizon_s") c.horizon = parse_number(key, value);
        else if (key == "sim.seed") c.seed = static_cast<std::uint64_t>(parse_number(key, value));
        else if (key == "sim.truth_refine") c.truth_refine = static_cast<int>(parse_number(key, value));
        else if (key == "sim.snapshot_every") c.snapshot_every = static_cast<int>(parse_number(key, value));
        else if (key == "sim.components") c.components = static_cast<int>(parse_number(key, value));
        else throw ConfigError("config line " + std::to_string(line_no) +
                               ": unknown key '" + key + "'");
    }
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ScenarioConfig& c) {
    std::ostringstream out;
    const auto num = [](double v) { return csv::format_double(v); };
    out << "[domain]\n";
    out << "length_x_km = " << num(c.len_x) << "\n";
    out << "length_y_km = " << num(c.len_y) << "\n\n";
    out << "[grid]\n";
    out << "spacing_km = " << num(c.grid_spacing) << "\n\n";
    out << "[kernel]\n";
    out << "family = " << kernel_family_name(c.kernel.family) << "\n";
    out << "sigma = " << num(c.kernel.sigma) << "\n";
    out << "length_scale_km = " << num(c.kernel.length_scale) << "\n";
    out << "noise_var = " << num(c.kernel.noise_var) << "\n\n";
    out << "[process]\n";
    out << "prior_mean = " << num(c.prior_mean) << "\n";
    out << "sigma_t_sq = " << num(c.sigma_t_sq) << "\n";
    if (!c.sigma_t_sq_file.empty())
        out << "sigma_t_sq_file = " << c.sigma_t_sq_file << "\n";
    out << "\n[fleet]\n";
    out << "agents = " << c.agents << "\n";
    out << "u_max_mps = " << num(c.u_max_mps) << "\n";
    if (c.start_positions.empty()) {
        out << "start = auto\n";
    } else {
        out << "start = ";
        for (std::size_t i = 0; i < c.start_positions.size(); ++i) {
            if (i) out << "; ";
            out << num(c.start_positions[i].x()) << "," << num(c.start_positions[i].y());
        }
        out << "\n";
    }
    out << "\n[controller]\n";
    out << "policy = " << coverage_policy_name(c.policy) << "\n";
    out << "modes = " << c.modes << "\n";
    out << "tau_max_s = " << num(c.tau_max) << "\n";
    out << "eps_gradient = " << num(c.eps_gradient) << "\n\n";
    out << "[targets]\n";
    out << "q_target = " << num(c.q_target) << "\n\n";
    out << "[sim]\n";
    out << "dt_s = " << num(c.dt) << "\n";
    out << "horizon_s = " << num(c.horizon) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "truth_refine = " << c.truth_refine << "\n";
    out << "snapshot_every = " << c.snapshot_every << "\n";
    out << "components = " << c.components << "\n";
    return out.str();
}

} // namespace claricov
