#pragma once

#include "vibronic/sweep.hpp"
#include "vibronic/units.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace vibronic {

/// Parameters after unit conversion and type checking.
struct ResolvedConfig {
    UnitConverter units;
    ChainParams chain;
    PropagatorConfig propagator;
    int site0 = -1;
    KernelParams kernel;
    SweepPlan plan;                  ///< chain, propagator and site0 copied in
    std::vector<double> kernel_times; ///< periods
    std::string output = "run";
    std::string preset;
    std::string description;

    nlohmann::json to_json() const;
};

/// Layered key=value configuration: preset, then files, then overrides, each
/// replacing earlier values. Values are strings in the user's unit system
/// until resolve() converts them.
class RunConfig {
public:
    /// Every accepted key with a one-line description.
    static const std::map<std::string, std::string>& keys();
    static std::vector<std::string> preset_names();
    static std::string preset_description(const std::string& name);

    void set(const std::string& key, const std::string& value);
    void apply_preset(const std::string& name);
    /// Lines of `key = value`; `#` starts a comment.
    void load_stream(std::istream& is, const std::string& origin = "<stream>");
    void load_file(const std::string& path);

    const std::map<std::string, std::string>& values() const { return values_; }
    ResolvedConfig resolve() const;

private:
    std::map<std::string, std::string> values_;
};

/// "a:b:step" into (start, stop, count).
struct GridSpec {
    double start = 0.0;
    double stop = 0.0;
    int count = 0;
    std::vector<double> values() const;
};

GridSpec parse_grid(const std::string& s);
std::vector<double> parse_list(const std::string& s);

} // namespace vibronic
