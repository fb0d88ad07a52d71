#include <doctest.h>

#include <cmath>
#include <random>

#include "uavnoma/channel.hpp"

using namespace uavnoma;

namespace {

ChannelParams table_params() { return ChannelParams{}; }  // defaults carry the reference values

Scenario annulus_scenario(int nu, int nd, unsigned seed) {
  Scenario s;
  s.mbs_pos = {0.0, 0.0};
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * 3.141592653589793);
  std::uniform_real_distribution<double> r2(250.0 * 250.0, 500.0 * 500.0);
  auto draw = [&] {
    const double r = std::sqrt(r2(gen));
    const double a = ang(gen);
    return Point{r * std::cos(a), r * std::sin(a)};
  };
  for (int j = 0; j < nd; ++j) s.ubs_pos.push_back(draw());
  for (int i = 0; i < nu; ++i) s.ue_pos.push_back(draw());
  s.r_min.assign(nu, 1e6);
  s.c_max.assign(nd, 1e8);
  s.p_circuit.assign(nd, 0.1);
  s.p_max.assign(nd, 0.251188643150958);
  return s;
}

}  // namespace

TEST_CASE("LoS probability reference points") {
  const ChannelParams cp = table_params();
  // frozen from an independent high-precision evaluation (45 deg elevation)
  CHECK(los_probability(100.0, 100.0, cp) == doctest::Approx(0.9999998429112551).epsilon(1e-9));
  // 11.3099 deg elevation
  CHECK(los_probability(100.0, 500.0, cp) == doctest::Approx(0.7648984882154213).epsilon(1e-9));
}

TEST_CASE("LoS and NLoS probabilities are complementary and in (0,1)") {
  const ChannelParams cp = table_params();
  for (double dh : {0.0, 1.0, 50.0, 123.0, 777.0, 5000.0}) {
    const double p = los_probability(100.0, dh, cp);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(p + (1.0 - p) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("LoS probability monotone in altitude and distance") {
  const ChannelParams cp = table_params();
  double prev = los_probability(10.0, 200.0, cp);
  for (double h = 20.0; h <= 500.0; h += 10.0) {
    const double cur = los_probability(h, 200.0, cp);
    CHECK(cur > prev);
    prev = cur;
  }
  prev = los_probability(100.0, 1.0, cp);
  for (double dh = 10.0; dh <= 2000.0; dh += 10.0) {
    const double cur = los_probability(100.0, dh, cp);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("air-to-ground gain reference point directly overhead") {
  const ChannelParams cp = table_params();
  const double g = gain_atg({0.0, 0.0}, {0.0, 0.0}, 100.0, cp);
  // frozen from an independent high-precision evaluation
  CHECK(g == doctest::Approx(8.911334873393208e-09).epsilon(1e-9));
}

TEST_CASE("doubling distance at fixed excess loss quarters the gain") {
  ChannelParams cp = table_params();
  cp.eta_los_db = 3.0;
  cp.eta_nlos_db = 3.0;  // excess loss no longer depends on the elevation angle
  const double g1 = gain_atg({300.0, 0.0}, {0.0, 0.0}, 400.0, cp);
  const double g2 = gain_atg({600.0, 0.0}, {0.0, 0.0}, 800.0, cp);
  CHECK(g2 == doctest::Approx(g1 / 4.0).epsilon(1e-12));
}

TEST_CASE("zero excess loss reduces to free space") {
  ChannelParams cp = table_params();
  cp.eta_los_db = 0.0;
  cp.eta_nlos_db = 0.0;
  const double g = gain_atg({100.0, 0.0}, {0.0, 0.0}, 100.0, cp);
  const double d2 = 100.0 * 100.0 + 100.0 * 100.0;
  const double wl = cp.wavelength();
  const double fs = wl * wl / (16.0 * 3.141592653589793 * 3.141592653589793 * d2);
  CHECK(g == doctest::Approx(fs).epsilon(1e-12));
}

TEST_CASE("gain_atg bounded by the pure-LoS gain when LoS loss is smaller") {
  const ChannelParams cp = table_params();
  for (double dh : {0.0, 10.0, 100.0, 400.0, 900.0}) {
    const double g = gain_atg({dh, 0.0}, {0.0, 0.0}, 100.0, cp);
    const double d2 = dh * dh + 100.0 * 100.0;
    const double wl = cp.wavelength();
    const double pure_los = wl * wl / (16.0 * 3.141592653589793 * 3.141592653589793 * d2) *
                            std::pow(10.0, -cp.eta_los_db / 10.0);
    CHECK(g <= pure_los * (1.0 + 1e-12));
  }
}

TEST_CASE("gain_atg continuous approaching the overhead point") {
  const ChannelParams cp = table_params();
  const double at0 = gain_atg({0.0, 0.0}, {0.0, 0.0}, 100.0, cp);
  const double near0 = gain_atg({1e-7, 0.0}, {0.0, 0.0}, 100.0, cp);
  CHECK(near0 == doctest::Approx(at0).epsilon(1e-9));
}

TEST_CASE("MBS gain reference points") {
  const ChannelParams cp = table_params();
  // frozen from an independent high-precision evaluation
  CHECK(gain_mbs({250.0, 0.0}, {0.0, 0.0}, cp) ==
        doctest::Approx(5.836100177798656e-12).epsilon(1e-9));
  // unit-distance reference
  CHECK(gain_mbs({1.0, 0.0}, {0.0, 0.0}, cp) ==
        doctest::Approx(9.118906527810399e-05).epsilon(1e-9));
  ChannelParams cp2 = cp;
  cp2.path_loss_exp = 2.0;
  const double ref = gain_mbs({1.0, 0.0}, {0.0, 0.0}, cp2);
  CHECK(gain_mbs({2.0, 0.0}, {0.0, 0.0}, cp2) == doctest::Approx(ref / 4.0).epsilon(1e-12));
}

TEST_CASE("MBS gain rejects distances inside the far-field reference") {
  const ChannelParams cp = table_params();
  CHECK_THROWS_AS(gain_mbs({0.5, 0.0}, {0.0, 0.0}, cp), std::domain_error);
  CHECK_THROWS_AS(gain_mbs({0.0, 0.0}, {0.0, 0.0}, cp), std::domain_error);
}

TEST_CASE("gain tables match per-element calls") {
  Scenario s = annulus_scenario(6, 3, 1234);
  s.validate();
  const GainTables g = build_gain_tables(s);
  std::mt19937 gen(99);
  std::uniform_int_distribution<int> ui(0, 5), uj(0, 2), un(0, 3);
  for (int rep = 0; rep < 5; ++rep) {
    const int i = ui(gen), j = uj(gen), n = un(gen);
    CHECK(g.at(i, j, n) ==
          gain_atg(s.ue_pos[i], s.ubs_pos[j], s.system.ubs_altitude, s.channel));
    CHECK(g.mbs_at(i, n) == gain_mbs(s.ue_pos[i], s.mbs_pos, s.channel));
  }
}

TEST_CASE("identical UE positions give identical table rows") {
  Scenario s = annulus_scenario(2, 2, 7);
  s.ue_pos[1] = s.ue_pos[0];
  const GainTables g = build_gain_tables(s);
  for (int j = 0; j < 2; ++j)
    for (int n = 0; n < 4; ++n) CHECK(g.at(0, j, n) == g.at(1, j, n));
}

TEST_CASE("single-element table equals direct call for every subchannel") {
  Scenario s;
  s.mbs_pos = {0.0, 0.0};
  s.ubs_pos = {{0.0, 0.0}};
  s.ue_pos = {{100.0, 0.0}};
  s.r_min = {1e6};
  s.c_max = {1e8};
  s.p_circuit = {0.1};
  s.p_max = {0.25};
  const GainTables g = build_gain_tables(s);
  const double want = gain_atg(s.ue_pos[0], s.ubs_pos[0], 100.0, s.channel);
  for (int n = 0; n < 4; ++n) CHECK(g.at(0, 0, n) == want);
}

TEST_CASE("all table entries positive and finite") {
  const Scenario s = annulus_scenario(8, 4, 5150);
  const GainTables g = build_gain_tables(s);
  for (double v : g.h) {
    CHECK(v > 0.0);
    CHECK(std::isfinite(v));
  }
  for (double v : g.h_m) {
    CHECK(v > 0.0);
    CHECK(std::isfinite(v));
  }
}
