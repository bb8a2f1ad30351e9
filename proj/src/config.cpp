#include "vibronic/config.hpp"

#include "vibronic/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace vibronic {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || trim(v.substr(pos)).size() != 0)
        throw invalid_parameter("'" + key + "' expects a number, got '" + v + "'");
    return x;
}

int to_int(const std::string& key, const std::string& v) {
    const double x = to_real(key, v);
    if (x != std::floor(x) || std::abs(x) > 1e9)
        throw invalid_parameter("'" + key + "' expects an integer, got '" + v + "'");
    return static_cast<int>(x);
}

struct Preset {
    std::string description;
    std::vector<std::pair<std::string, std::string>> values;
};

const std::map<std::string, Preset>& presets() {
    static const std::map<std::string, Preset> p{
        {"weak-hopping",
         {"weak hopping J=-0.1, L=9; g scaled from 4 to 2 so that nu_max=32 suffices",
          {{"L", "9"}, {"J", "-0.1"}, {"g", "2"}, {"nu_max", "32"}, {"t_final", "3"}, {"drop_tol", "1e-12"},
           {"grid", "0:2.2:0.02"}, {"method", "both"}}}},
        {"strong-hopping",
         {"strong hopping J=-1, L=9; g scaled from 4 to 2 and nu_max from 128 to 24",
          {{"L", "9"}, {"J", "-1"}, {"g", "2"}, {"nu_max", "24"}, {"t_final", "2"}, {"drop_tol", "1e-8"},
           {"grid", "0:2.2:0.02"}, {"method", "nonperturbative"}}}},
        {"untilted",
         {"J=1, untilted, L=9; g scaled from 4 to 2 and nu_max from 128 to 24",
          {{"L", "9"}, {"J", "1"}, {"g", "2"}, {"nu_max", "24"}, {"delta_eps", "0"}, {"t_final", "8"},
           {"drop_tol", "1e-8"}, {"sample_every", "10"}}}},
        {"third-order",
         {"J=1, three-bond resonance delta=1/3, L=9; g scaled from 4 to 2 and nu_max from 128 to 24",
          {{"L", "9"}, {"J", "1"}, {"g", "2"}, {"nu_max", "24"}, {"delta_eps", "0.333333333333333333"},
           {"t_final", "8"}, {"drop_tol", "1e-8"}, {"sample_every", "10"}}}},
        {"second-order",
         {"J=1, two-bond resonance delta=1/2, L=9; g scaled from 4 to 2 and nu_max from 128 to 24",
          {{"L", "9"}, {"J", "1"}, {"g", "2"}, {"nu_max", "24"}, {"delta_eps", "0.5"}, {"t_final", "8"},
           {"drop_tol", "1e-8"}, {"sample_every", "10"}}}},
        {"cy3",
         {"Cy3 oligomer, omega=1150 cm^-1, J=0.55 omega, S=0.5; L scaled from 61 to 21, nu_max from 16 to 10",
          {{"units", "wavenumber-fs"}, {"omega", "1150"}, {"L", "21"}, {"J", "632.5"}, {"g", "813.17279836"},
           {"nu_max", "10"}, {"dt", "0.29"}, {"t_final", "180"}, {"drop_tol", "1e-7"},
           {"grid", "0:1334:23"}, {"method", "nonperturbative"}}}},
    };
    return p;
}

} // namespace

const std::map<std::string, std::string>& RunConfig::keys() {
    static const std::map<std::string, std::string> k{
        {"units", "dimensionless | wavenumber-fs"},
        {"omega", "phonon energy (sets omega_cm in wavenumber-fs units)"},
        {"L", "chain length"},
        {"J", "hopping amplitude [energy]"},
        {"g", "vibronic coupling [energy]"},
        {"delta_eps", "tilt per site [energy]"},
        {"nu_max", "phonon cutoff per mode"},
        {"site0", "initial exciton site (-1 = center)"},
        {"dt", "Krylov step [time]"},
        {"t_final", "final time [time]"},
        {"drop_tol", "squared-amplitude truncation threshold"},
        {"krylov_dim_max", "largest Krylov space"},
        {"krylov_tol", "Krylov residual tolerance"},
        {"sample_every", "record observables every n steps"},
        {"expand_factor", "pruning factor for Krylov vector expansion"},
        {"S", "Huang-Rhys factor for the kernel (default (g/omega)^2)"},
        {"resolution", "kernel quadrature points per period"},
        {"times", "kernel/ctrw times, start:stop:step or a comma list [time]"},
        {"grid", "tilt grid start:stop:step [energy]"},
        {"method", "nonperturbative | ctrw | both"},
        {"workers", "parallel sweep workers"},
        {"sample_times", "comma separated report times [time]"},
        {"ctrw_dt", "random-walk step [time]"},
        {"output", "output directory"},
    };
    return k;
}

std::vector<std::string> RunConfig::preset_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : presets()) out.push_back(k);
    return out;
}

std::string RunConfig::preset_description(const std::string& name) {
    auto it = presets().find(name);
    if (it == presets().end()) throw invalid_parameter("unknown preset '" + name + "'");
    return it->second.description;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!keys().count(key)) throw invalid_parameter("unknown configuration key '" + key + "'");
    values_[key] = trim(value);
}

void RunConfig::apply_preset(const std::string& name) {
    auto it = presets().find(name);
    if (it == presets().end()) throw invalid_parameter("unknown preset '" + name + "'");
    for (const auto& [k, v] : it->second.values) set(k, v);
    values_["#preset"] = name;
}

void RunConfig::load_stream(std::istream& is, const std::string& origin) {
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw invalid_parameter(origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        try {
            if (key == "preset")
                apply_preset(trim(line.substr(eq + 1)));
            else
                set(key, line.substr(eq + 1));
        } catch (const invalid_parameter& e) {
            throw invalid_parameter(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw invalid_parameter("cannot read config file " + path);
    load_stream(is, path);
}

std::vector<double> GridSpec::values() const {
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) v[i] = count > 1 ? start + (stop - start) * i / (count - 1) : start;
    return v;
}

GridSpec parse_grid(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(trim(item));
    if (parts.size() != 3) throw invalid_parameter("grid '" + s + "' must be start:stop:step");
    const double a = to_real("grid", parts[0]), b = to_real("grid", parts[1]), h = to_real("grid", parts[2]);
    if (!(h > 0.0) || !(b >= a)) throw invalid_parameter("grid '" + s + "' needs step > 0 and stop >= start");
    const double n = (b - a) / h;
    const long steps = std::lround(n);
    if (std::abs(n - steps) > 1e-6 * std::max(1.0, n))
        throw invalid_parameter("grid '" + s + "': (stop - start) is not a multiple of step");
    return GridSpec{a, b, static_cast<int>(steps) + 1};
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_real("list", item));
    }
    return out;
}

ResolvedConfig RunConfig::resolve() const {
    ResolvedConfig r;
    auto has = [&](const char* k) { return values_.count(k) > 0; };
    auto get = [&](const char* k) { return values_.at(k); };

    if (has("units")) r.units.system = parse_units(get("units"));
    if (r.units.system == UnitSystem::wavenumber_fs) {
        if (!has("omega")) throw invalid_parameter("wavenumber-fs units need 'omega' in cm^-1");
        r.units.omega_cm = to_real("omega", get("omega"));
        r.units.validate();
        r.chain.omega = 1.0;
    } else if (has("omega")) {
        r.chain.omega = to_real("omega", get("omega"));
    }
    const auto& u = r.units;
    if (has("L")) r.chain.L = to_int("L", get("L"));
    if (has("J")) r.chain.J = u.energy_in(to_real("J", get("J")));
    if (has("g")) r.chain.g = u.energy_in(to_real("g", get("g")));
    if (has("delta_eps")) r.chain.delta_eps = u.energy_in(to_real("delta_eps", get("delta_eps")));
    if (has("nu_max")) r.chain.nu_max = to_int("nu_max", get("nu_max"));
    if (has("site0")) r.site0 = to_int("site0", get("site0"));

    auto& c = r.propagator;
    if (has("dt")) c.dt = u.time_in(to_real("dt", get("dt")));
    if (has("t_final")) c.t_final = u.time_in(to_real("t_final", get("t_final")));
    if (has("drop_tol")) c.drop_tol = to_real("drop_tol", get("drop_tol"));
    if (has("krylov_dim_max")) c.krylov_dim_max = to_int("krylov_dim_max", get("krylov_dim_max"));
    if (has("krylov_tol")) c.krylov_tol = to_real("krylov_tol", get("krylov_tol"));
    if (has("sample_every")) c.sample_every = to_int("sample_every", get("sample_every"));
    if (has("expand_factor")) c.expand_factor = to_real("expand_factor", get("expand_factor"));

    r.chain.validate();
    c.validate();
    if (r.site0 < -1 || r.site0 >= r.chain.L) throw invalid_parameter("site0 out of range for " + r.chain.describe());

    r.kernel = KernelParams::from_chain(r.chain, has("resolution") ? to_int("resolution", get("resolution")) : 512);
    if (has("S")) r.kernel.S = to_real("S", get("S"));
    r.kernel.validate();
    if (has("times")) {
        const auto& spec = get("times");
        const auto times = spec.find(':') != std::string::npos ? parse_grid(spec).values() : parse_list(spec);
        for (double t : times) r.kernel_times.push_back(u.time_in(t));
    } else {
        r.kernel_times = {c.t_final};
    }

    auto& p = r.plan;
    p.base = r.chain;
    p.propagator = c;
    p.site0 = r.site0;
    p.kernel_resolution = r.kernel.resolution;
    if (has("grid")) {
        const auto g = parse_grid(get("grid"));
        p.delta_start = u.energy_in(g.start);
        p.delta_stop = u.energy_in(g.stop);
        p.delta_count = g.count;
    }
    if (has("method")) p.method = parse_method(get("method"));
    if (has("workers")) p.workers = to_int("workers", get("workers"));
    if (has("sample_times"))
        for (double t : parse_list(get("sample_times"))) p.sample_times.push_back(u.time_in(t));
    if (has("ctrw_dt")) p.ctrw_dt = u.time_in(to_real("ctrw_dt", get("ctrw_dt")));
    if (has("output")) r.output = get("output");
    p.output_dir = r.output;
    if (values_.count("#preset")) {
        r.preset = values_.at("#preset");
        r.description = preset_description(r.preset);
    }
    return r;
}

nlohmann::json ResolvedConfig::to_json() const {
    nlohmann::json j{{"units", to_string(units.system)},
                     {"chain", chain},
                     {"propagator", propagator},
                     {"site0", site0 >= 0 ? site0 : central_site(chain)},
                     {"kernel", kernel},
                     {"kernel_times", kernel_times},
                     {"plan", plan},
                     {"output", output}};
    if (units.system == UnitSystem::wavenumber_fs) {
        j["omega_cm"] = units.omega_cm;
        j["period_fs"] = units.period_fs();
    }
    if (!preset.empty()) {
        j["preset"] = preset;
        j["preset_description"] = description;
    }
    return j;
}

} // namespace vibronic
