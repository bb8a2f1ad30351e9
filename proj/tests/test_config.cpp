#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vibronic/config.hpp"

#include <cmath>
#include <sstream>

using namespace vibronic;

TEST_CASE("wavenumber-fs conversions round trip") {
    UnitConverter u{UnitSystem::wavenumber_fs, 1150.0};
    for (double v : {0.0, 1e-3, 0.55, 632.5, 1322.5, 1e5, -813.2}) {
        CHECK(std::abs(u.energy_out(u.energy_in(v)) - v) <= 1e-12 * std::max(1.0, std::abs(v)));
        CHECK(std::abs(u.time_out(u.time_in(v)) - v) <= 1e-12 * std::max(1.0, std::abs(v)));
    }
    // 1150 cm^-1 -> 1 / (c * 1150) fs per period
    CHECK(u.period_fs() == doctest::Approx(1.0 / (2.99792458e-5 * 1150.0)).epsilon(1e-14));
    CHECK(u.period_fs() == doctest::Approx(29.006).epsilon(1e-4));
    CHECK(u.energy_in(632.5) == doctest::Approx(0.55).epsilon(1e-14));
    CHECK(u.time_in(u.period_fs()) == doctest::Approx(1.0).epsilon(1e-14));

    UnitConverter d;
    CHECK(d.energy_in(0.7) == 0.7);
    CHECK(d.time_in(3.0) == 3.0);
}

TEST_CASE("unit names") {
    CHECK(parse_units("dimensionless") == UnitSystem::dimensionless);
    CHECK(parse_units("wavenumber-fs") == UnitSystem::wavenumber_fs);
    CHECK(to_string(parse_units("wavenumber-fs")) == "wavenumber-fs");
    CHECK_THROWS_AS(parse_units("eV"), invalid_parameter);
    UnitConverter bad{UnitSystem::wavenumber_fs, -1.0};
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);
}

TEST_CASE("grids and lists") {
    auto g = parse_grid("0:2.2:0.02");
    CHECK(g.count == 111);
    auto v = g.values();
    CHECK(v.front() == 0.0);
    CHECK(v.back() == doctest::Approx(2.2).epsilon(1e-15));
    CHECK(v[50] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(parse_grid("1:1:0.5").count == 1);
    CHECK_THROWS_AS(parse_grid("0:1:0.3"), invalid_parameter);
    CHECK_THROWS_AS(parse_grid("0:1"), invalid_parameter);
    CHECK_THROWS_AS(parse_grid("1:0:0.1"), invalid_parameter);
    CHECK_THROWS_AS(parse_grid("0:1:0"), invalid_parameter);
    CHECK(parse_list("1, 2.5 ,3") == std::vector<double>{1.0, 2.5, 3.0});
    CHECK_THROWS_AS(parse_list("1,x"), invalid_parameter);
}

TEST_CASE("config files") {
    std::istringstream is("# a comment\n"
                          "L = 7\n"
                          "\n"
                          "  J=-0.3   # trailing\n"
                          "g = 1.5\n"
                          "delta_eps = 0.25\n"
                          "nu_max = 12\n"
                          "t_final = 2\n"
                          "sample_times = 0.5, 1\n"
                          "method = both\n");
    RunConfig rc;
    rc.load_stream(is, "test.cfg");
    auto r = rc.resolve();
    CHECK(r.chain.L == 7);
    CHECK(r.chain.J == -0.3);
    CHECK(r.chain.g == 1.5);
    CHECK(r.chain.delta_eps == 0.25);
    CHECK(r.chain.nu_max == 12);
    CHECK(r.propagator.t_final == 2.0);
    CHECK(r.plan.sample_times == std::vector<double>{0.5, 1.0});
    CHECK(r.plan.method == SweepMethod::both);
    CHECK(r.plan.base == r.chain);
    CHECK(r.kernel.S == doctest::Approx(2.25));
    CHECK(r.kernel_times == std::vector<double>{2.0});
}

TEST_CASE("config errors carry their location") {
    auto fails_with = [](const std::string& text, const std::string& needle) {
        std::istringstream is(text);
        RunConfig rc;
        try {
            rc.load_stream(is, "x.cfg");
            rc.resolve();
        } catch (const invalid_parameter& e) {
            return std::string(e.what()).find(needle) != std::string::npos;
        }
        return false;
    };
    CHECK(fails_with("L = 5\nbogus = 1\n", "x.cfg:2"));
    CHECK(fails_with("L = 5\nbogus = 1\n", "unknown configuration key"));
    CHECK(fails_with("L 5\n", "x.cfg:1: expected key = value"));
    CHECK(fails_with("preset = nope\n", "unknown preset"));
    CHECK(fails_with("L = five\n", "'L' expects a number"));
    CHECK(fails_with("L = 4.5\n", "'L' expects an integer"));
    CHECK(fails_with("J = 0.1x\n", "'J' expects a number"));
    CHECK(fails_with("L = 0\n", "L"));
    CHECK(fails_with("dt = -1\n", "dt"));
    CHECK(fails_with("units = wavenumber-fs\n", "omega"));
    CHECK(fails_with("method = magic\n", "magic"));
    CHECK(fails_with("L = 5\nsite0 = 5\n", "site0"));

    RunConfig rc;
    CHECK_THROWS_AS(rc.load_file("/nonexistent/file.cfg"), invalid_parameter);
}

TEST_CASE("later layers win") {
    RunConfig rc;
    rc.apply_preset("weak-hopping");
    std::istringstream is("nu_max = 20\n");
    rc.load_stream(is);
    rc.set("L", "5");
    auto r = rc.resolve();
    CHECK(r.chain.L == 5);
    CHECK(r.chain.nu_max == 20);
    CHECK(r.chain.J == -0.1);
    CHECK(r.preset == "weak-hopping");
    CHECK(r.to_json()["preset"] == "weak-hopping");
}

TEST_CASE("every preset resolves") {
    for (const auto& name : RunConfig::preset_names()) {
        CAPTURE(name);
        RunConfig rc;
        rc.apply_preset(name);
        auto r = rc.resolve();
        CHECK_FALSE(r.description.empty());
        CHECK_NOTHROW(r.plan.validate());
        CHECK(r.to_json().contains("chain"));
    }
}

TEST_CASE("cy3 preset in internal units") {
    RunConfig rc;
    rc.apply_preset("cy3");
    auto r = rc.resolve();
    CHECK(r.units.system == UnitSystem::wavenumber_fs);
    CHECK(r.chain.omega == 1.0);
    CHECK(r.chain.J == doctest::Approx(0.55).epsilon(1e-12));
    CHECK(r.chain.g * r.chain.g == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.propagator.t_final == doctest::Approx(180.0 / r.units.period_fs()).epsilon(1e-12));
    CHECK(r.plan.delta_count == 59);
    CHECK(r.plan.grid().back() == doctest::Approx(1.16).epsilon(1e-12));
    CHECK(r.plan.grid()[1] == doctest::Approx(0.02).epsilon(1e-12));
    auto j = r.to_json();
    CHECK(j["period_fs"].get<double>() == doctest::Approx(29.006).epsilon(1e-4));
}

TEST_CASE("every key is documented and accepted") {
    RunConfig rc;
    for (const auto& [k, help] : RunConfig::keys()) {
        CHECK_FALSE(help.empty());
        CHECK_NOTHROW(rc.set(k, "1"));
    }
}
