#include "vibronic/serialize.hpp"

#include <filesystem>
#include <fstream>

namespace vibronic {

using nlohmann::json;

void to_json(json& j, const ChainParams& p) {
    j = json{{"L", p.L},   {"J", p.J},   {"omega", p.omega}, {"g", p.g}, {"delta_eps", p.delta_eps},
             {"nu_max", p.nu_max}};
}

void from_json(const json& j, ChainParams& p) {
    p.L = j.at("L").get<int>();
    p.J = j.at("J").get<double>();
    p.omega = j.at("omega").get<double>();
    p.g = j.at("g").get<double>();
    p.delta_eps = j.at("delta_eps").get<double>();
    p.nu_max = j.at("nu_max").get<int>();
}

void to_json(json& j, const PropagatorConfig& c) {
    j = json{{"dt", c.dt},
             {"krylov_dim_max", c.krylov_dim_max},
             {"krylov_tol", c.krylov_tol},
             {"drop_tol", c.drop_tol},
             {"t_final", c.t_final},
             {"sample_every", c.sample_every},
             {"expand_factor", c.expand_factor}};
}

void from_json(const json& j, PropagatorConfig& c) {
    c.dt = j.at("dt").get<double>();
    c.krylov_dim_max = j.at("krylov_dim_max").get<int>();
    c.krylov_tol = j.at("krylov_tol").get<double>();
    c.drop_tol = j.at("drop_tol").get<double>();
    c.t_final = j.at("t_final").get<double>();
    c.sample_every = j.at("sample_every").get<int>();
    c.expand_factor = j.value("expand_factor", PropagatorConfig{}.expand_factor);
}

void to_json(json& j, const KernelParams& k) {
    j = json{{"J", k.J}, {"omega", k.omega}, {"S", k.S}, {"delta_eps", k.delta_eps}, {"resolution", k.resolution}};
}

void from_json(const json& j, KernelParams& k) {
    k.J = j.at("J").get<double>();
    k.omega = j.at("omega").get<double>();
    k.S = j.at("S").get<double>();
    k.delta_eps = j.at("delta_eps").get<double>();
    k.resolution = j.at("resolution").get<int>();
}

json plan_identity(const SweepPlan& p) {
    return json{{"base", p.base},
                {"propagator", p.propagator},
                {"delta_start", p.delta_start},
                {"delta_stop", p.delta_stop},
                {"delta_count", p.delta_count},
                {"method", to_string(p.method)},
                {"sample_times", p.sample_times},
                {"site0", p.initial_site()},
                {"kernel_resolution", p.kernel_resolution},
                {"ctrw_dt", p.ctrw_dt}};
}

void to_json(json& j, const SweepPlan& p) {
    j = plan_identity(p);
    j["workers"] = p.workers;
    j["output_dir"] = p.output_dir;
}

void from_json(const json& j, SweepPlan& p) {
    p.base = j.at("base").get<ChainParams>();
    p.propagator = j.at("propagator").get<PropagatorConfig>();
    p.delta_start = j.at("delta_start").get<double>();
    p.delta_stop = j.at("delta_stop").get<double>();
    p.delta_count = j.at("delta_count").get<int>();
    p.method = parse_method(j.at("method").get<std::string>());
    p.sample_times = j.at("sample_times").get<std::vector<double>>();
    p.site0 = j.at("site0").get<int>();
    p.kernel_resolution = j.at("kernel_resolution").get<int>();
    p.ctrw_dt = j.at("ctrw_dt").get<double>();
    p.workers = j.value("workers", 1);
    p.output_dir = j.value("output_dir", std::string{});
}

void write_json_file(const std::string& path, const json& doc) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp);
        if (!os) throw std::runtime_error("cannot open " + tmp + " for writing");
        os << doc.dump(2) << '\n';
        if (!os) throw std::runtime_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return json::parse(is);
}

} // namespace vibronic
