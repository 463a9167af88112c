#include <gtest/gtest.h>

#include <string>

#include "ricd/config.hpp"

using namespace ricd;

namespace {

std::string bundled() { return std::string(RICD_CONFIG_DIR) + "/neon_dimer.ini"; }

}  // namespace

TEST(Config, BundledFileMatchesDefaults) {
  const Config a = load_config(bundled());
  const Config b = default_config();
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].first, b.entries[i].first);
    double x, y;
    if (detail::parse_number(a.entries[i].second, x) && detail::parse_number(b.entries[i].second, y)) {
      EXPECT_DOUBLE_EQ(x, y) << a.entries[i].first;
    } else {
      EXPECT_EQ(a.entries[i].second, b.entries[i].second) << a.entries[i].first;
    }
  }
  EXPECT_DOUBLE_EQ(a.system.e_r(), b.system.e_r());
  EXPECT_DOUBLE_EQ(a.pulse.sigma, b.pulse.sigma);
  EXPECT_DOUBLE_EQ(a.quench.t_s, b.quench.t_s);
}

TEST(Config, DefaultsAreTheNeonDimer) {
  const Config c = default_config();
  EXPECT_NEAR(units::au_to_fs(c.system.tau_eff()), 69.99, 0.005);
  EXPECT_DOUBLE_EQ(c.system.q, 10.0);
  EXPECT_DOUBLE_EQ(c.pulse.n_cycles, 50.0);
  EXPECT_NEAR(units::au_to_fs(c.quench.t_s), 35.0, 1e-12);
  EXPECT_NEAR(units::au_to_fs(c.quench.delta_t()), 7.5, 1e-12);
  EXPECT_DOUBLE_EQ(c.quench.alpha, 8.0);
  EXPECT_TRUE(c.quench.enabled);
  EXPECT_EQ(c.oracle.n_bins, 2000);
  EXPECT_EQ(c.pump_probe.t_s_list.size(), 6u);
  EXPECT_EQ(c.grid.sricd_e.values().size(), 1001u);
  EXPECT_EQ(c.grid.t.values().size(), 1641u);
}

TEST(Config, OverridesReplaceValues) {
  const Config c = parse_config_string("[xuv]\nn_cycles = 20\n", {"xuv.n_cycles=30", "quench.enabled = false"});
  EXPECT_DOUBLE_EQ(c.pulse.n_cycles, 30.0);
  EXPECT_FALSE(c.quench.enabled);
  bool seen = false;
  for (const auto& [k, v] : c.entries)
    if (k == "xuv.n_cycles") {
      EXPECT_EQ(v, "30");
      seen = true;
    }
  EXPECT_TRUE(seen);
}

TEST(Config, ErrorsNameTheLine) {
  try {
    parse_config_string("[system]\nq = 10\nbogus = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("system.bogus"), std::string::npos);
  }
  EXPECT_THROW(parse_config_string("q = 10\n"), ConfigError);
  EXPECT_THROW(parse_config_string("[system]\nq 10\n"), ConfigError);
  EXPECT_THROW(parse_config_string("[system\n"), ConfigError);
  EXPECT_THROW(parse_config_string("[system]\nq = ten\n"), ConfigError);
  EXPECT_THROW(parse_config_string("[quench]\nenabled = yes\n"), ConfigError);
  EXPECT_THROW(parse_config_string("", {"system.q"}), ConfigError);
  EXPECT_THROW(parse_config_string("", {"system.nope=1"}), ConfigError);
}

TEST(Config, Validation) {
  EXPECT_THROW(parse_config_string("", {"oracle.n_bins=100"}), ConfigError);
  EXPECT_THROW(parse_config_string("", {"oracle.window_gammas=10"}), ConfigError);
  EXPECT_THROW(parse_config_string("", {"pump_probe.t_s_list="}), ConfigError);
  EXPECT_THROW(parse_config_string("", {"quench.t_s=8"}), ConfigError);
  EXPECT_NO_THROW(parse_config_string("", {"quench.t_s=8", "quench.enabled=false"}));
  EXPECT_THROW(parse_config_string("", {"system.tau_sricd=-1"}), ConfigError);
  EXPECT_THROW(parse_config_string("", {"system.q=0"}), ConfigError);
  EXPECT_THROW(parse_config_string("", {"quench.mode=other"}), ConfigError);
  EXPECT_THROW(parse_config_string("", {"grid.icd_e_max=5"}), ConfigError);
  EXPECT_THROW(parse_config_string("", {"grid.t_max=-20"}), ConfigError);
  EXPECT_THROW(parse_config_string("", {"xuv.n_cycles=0.5"}), ConfigError);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/ricd.ini"), ConfigIoError); }
