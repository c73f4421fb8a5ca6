#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "duoatom/scenarios.hpp"

using namespace duoatom;

namespace {

const char* minimal = R"yaml(scenario: tiny
kind: emission
physics:
  g_ueV: 20
  kappa_ueV: 400
  gamma_ueV: 0.6
  omega12_ueV: 31
  gamma12_over_gamma: 0.99
schedule:
  - {channel: delta12, type: ramp, start_ps: 500, duration_ps: 300, from_ueV: 0, to_ueV: 10}
emission:
  t_end_ns: 5
)yaml";

int error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line;
    }
    return -1;
}

std::string error_message(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Config, BuiltinEigenScanUsesReferenceParameters) {
    const auto runs = load_scenario("fig2");
    ASSERT_EQ(runs.size(), 1u);
    const auto& c = runs[0];
    const auto ref = reference_params();
    EXPECT_EQ(c.kind, ScenarioKind::Spectral);
    EXPECT_NEAR(c.params.g, ref.g, 1e-12);
    EXPECT_NEAR(c.params.kappa, ref.kappa, 1e-12);
    EXPECT_NEAR(c.params.gamma12, ref.gamma12, 1e-12);
    EXPECT_NEAR(c.params.omega_c, ref.omega_c, 1e-12);
    const auto grid = spectral_grid(c);
    ASSERT_EQ(grid.size(), 101u);
    EXPECT_NEAR(grid.back(), 0.25 * ref.kappa, 1e-12);
}

TEST(Config, EveryBuiltinParses) {
    for (const auto& [name, text] : builtin_scenarios()) {
        const auto runs = load_scenario(name);
        EXPECT_FALSE(runs.empty()) << name;
        for (const auto& c : runs) {
            EXPECT_EQ(c.name, name);
            EXPECT_EQ(c.origin, "builtin:" + name);
            EXPECT_EQ(c.source, std::string(text));
        }
    }
    EXPECT_EQ(load_scenario("fig3.cfg").size(), 2u);
}

TEST(Config, UnitsAreConverted) {
    const auto c = parse_config(minimal).at(0);
    const auto& d = c.emission.schedule.delta12;
    EXPECT_NEAR(d.value(0.4), 0.0, 1e-15);
    EXPECT_NEAR(d.value(0.9), units::ueV(10.0), 1e-12);
    EXPECT_NEAR(c.emission.schedule.t_end, 5.0, 1e-15);
    // default cavity rule puts the cavity on the bare subradiant line
    EXPECT_NEAR(c.params.omega_c, -c.params.omega12, 1e-12);
}

TEST(Config, EmptyFileListsRequiredKeys) {
    const auto msg = error_message("");
    EXPECT_NE(msg.find("required keys"), std::string::npos);
    for (const char* k : {"scenario", "kind", "physics.g_ueV", "physics.kappa_ueV", "physics.gamma_ueV"})
        EXPECT_NE(msg.find(k), std::string::npos) << k;
}

TEST(Config, MissingKeysAreListedTogether) {
    const auto msg = error_message("scenario: x\nkind: emission\nphysics:\n  g_ueV: 20\n");
    EXPECT_NE(msg.find("physics.kappa_ueV"), std::string::npos);
    EXPECT_NE(msg.find("physics.gamma_ueV"), std::string::npos);
}

TEST(Config, CrossDampingAboveGammaReportsItsLine) {
    std::string text = minimal;
    text.replace(text.find("0.99"), 4, "1.2");
    EXPECT_EQ(error_line(text), 8);
    EXPECT_NE(error_message(text).find("gamma12_over_gamma"), std::string::npos);
}

TEST(Config, UnknownKeyReportsLineAndAllowedKeys) {
    std::string text = minimal;
    text.replace(text.find("  gamma_ueV"), 0, "  gama_ueV: 1\n");
    EXPECT_EQ(error_line(text), 6);
    const auto msg = error_message(text);
    EXPECT_NE(msg.find("gama_ueV"), std::string::npos);
    EXPECT_NE(msg.find("kappa_ueV"), std::string::npos);
}

TEST(Config, BadValuesAreConfigErrors) {
    std::string text = minimal;
    text.replace(text.find("kappa_ueV: 400"), 14, "kappa_ueV: lots");
    EXPECT_EQ(error_line(text), 5);
    text = minimal;
    text.replace(text.find("kind: emission"), 14, "kind: teleport");
    EXPECT_EQ(error_line(text), 2);
    text = minimal;
    text.replace(text.find("channel: delta12"), 16, "channel: phase");
    EXPECT_GT(error_line(text), 0);
    EXPECT_THROW(parse_config("scenario: [unclosed\n"), ConfigError);
}

TEST(Config, VariantsPatchDottedPaths) {
    std::string text = minimal;
    text += "variants:\n  - name: base\n  - name: big\n    set: {schedule.0.to_ueV: 40, emission.t_end_ns: 9}\n";
    const auto runs = parse_config(text);
    ASSERT_EQ(runs.size(), 2u);
    EXPECT_EQ(runs[0].label(), "tiny/base");
    EXPECT_EQ(runs[1].label(), "tiny/big");
    EXPECT_NEAR(runs[0].emission.schedule.delta12.value(2.0), units::ueV(10.0), 1e-12);
    EXPECT_NEAR(runs[1].emission.schedule.delta12.value(2.0), units::ueV(40.0), 1e-12);
    EXPECT_NEAR(runs[1].emission.schedule.t_end, 9.0, 1e-15);

    std::string dup = minimal;
    dup += "variants:\n  - name: a\n  - name: a\n";
    EXPECT_THROW(parse_config(dup), ConfigError);
}

TEST(Config, GeometryDerivesDipoleCoupling) {
    std::string text = minimal;
    const auto from = text.find("  omega12_ueV");
    const auto to = text.find("schedule:");
    text.replace(from, to - from, "  geometry: {d_nm: 10, wavelength_nm: 930, refractive_index: 3.5}\n");
    const auto c = parse_config(text).at(0);
    const auto r = dipole_rates(DipoleGeometry{10.0, 930.0, 3.5}, c.params.gamma);
    EXPECT_NEAR(c.params.omega12, r.omega12, 1e-12);
    EXPECT_NEAR(c.params.gamma12, r.gamma12, 1e-15);
    EXPECT_LE(c.params.gamma12, c.params.gamma);
}

TEST(Config, ScanGridsAcceptRangesAndLists) {
    const auto c = load_scenario("fig6").at(0);
    ASSERT_EQ(c.scan.bandwidth_grid.size(), 21u);
    EXPECT_NEAR(c.scan.bandwidth_grid.front(), units::ueV(20.0), 1e-12);
    EXPECT_NEAR(c.scan.bandwidth_grid.back(), units::ueV(70.0), 1e-12);
    ASSERT_EQ(c.scan.timing_offsets.size(), 6u);
    EXPECT_NEAR(c.scan.timing_offsets.front(), -0.3, 1e-15);
    EXPECT_EQ(c.memory.integrator.n_max, 2);
}

TEST(Config, UnknownScenarioNamesTheBuiltins) {
    try {
        load_scenario("fig9");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("fig2"), std::string::npos);
    }
}

TEST(Config, ScenarioPathOverridesBuiltin) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "duoatom_override_test";
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "fig3.yaml");
        out << minimal;
    }
    ::setenv("DUOATOM_SCENARIO_PATH", dir.c_str(), 1);
    const auto runs = load_scenario("fig3");
    ::unsetenv("DUOATOM_SCENARIO_PATH");
    fs::remove_all(dir);
    ASSERT_EQ(runs.size(), 1u);
    EXPECT_EQ(runs[0].name, "tiny");
    EXPECT_EQ(runs[0].origin, (dir / "fig3.yaml").string());
}
