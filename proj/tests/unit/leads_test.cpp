#include <cmath>
#include <string>

#include "doctest.h"

#include "common/error.hpp"
#include "common/rng.hpp"
#include "leads/lead_math.hpp"

using namespace cogadapt;
using leads::LeadFrame12;
using leads::LeadFrame3;
using leads::Vec;

TEST_SUITE_BEGIN("leads");

TEST_CASE("lead name table order and chest index lookup") {
  CHECK(std::string(leads::kLeadNames[0]) == "I");
  CHECK(std::string(leads::kLeadNames[2]) == "III");
  CHECK(std::string(leads::kLeadNames[6]) == "V1");
  CHECK(std::string(leads::kLeadNames[11]) == "V6");
  CHECK(leads::chest_lead_index("V1") == 6);
  CHECK(leads::chest_lead_index("V2") == 7);
  CHECK(leads::chest_lead_index("V6") == 11);
  CHECK_THROWS_AS(leads::chest_lead_index("V7"), ConfigError);
  CHECK_THROWS_AS(leads::chest_lead_index("II"), ConfigError);
}

TEST_CASE("wct rereference: zero limb leads leave the chest lead alone") {
  LeadFrame3 f;
  f.lead_i = Vec(5, 0.0);
  f.lead_ii = Vec(5, 0.0);
  f.chest = Vec(5, 0.7);
  f.reference = leads::ChestRef::kRightLeg;
  LeadFrame3 out = leads::wct_rereference(f);
  CHECK(out.reference == leads::ChestRef::kWct);
  for (double v : out.chest) CHECK(v == doctest::Approx(0.7));
  CHECK(out.lead_i == f.lead_i);
  CHECK(out.lead_ii == f.lead_ii);
}

TEST_CASE("wct rereference: hand value") {
  LeadFrame3 f;
  f.lead_i = Vec(1, 3.0);
  f.lead_ii = Vec(1, 3.0);
  f.chest = Vec(1, 1.0);
  LeadFrame3 out = leads::wct_rereference(f);
  CHECK(out.chest[0] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("simulate rl then rereference is a round trip") {
  Rng rng(3);
  LeadFrame3 f;
  for (int i = 0; i < 200; ++i) {
    f.lead_i.push_back(rng.gaussian());
    f.lead_ii.push_back(rng.gaussian());
    f.chest.push_back(rng.gaussian());
  }
  f.reference = leads::ChestRef::kWct;
  LeadFrame3 rl = leads::simulate_rl_reference(f);
  CHECK(rl.reference == leads::ChestRef::kRightLeg);
  LeadFrame3 back = leads::wct_rereference(rl);
  for (std::size_t i = 0; i < f.chest.size(); ++i) {
    CHECK(std::abs(back.chest[i] - f.chest[i]) <= 1e-9);
  }
}

TEST_CASE("simulate rl: hand value") {
  LeadFrame3 f;
  f.lead_i = Vec(1, 1.5);
  f.lead_ii = Vec(1, 1.5);
  f.chest = Vec(1, 2.0);
  f.reference = leads::ChestRef::kWct;
  LeadFrame3 out = leads::simulate_rl_reference(f);
  CHECK(out.chest[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("derive limb leads: hand values from I and II") {
  LeadFrame12 f;
  f.leads[0] = Vec(1, 0.5);  // I
  f.leads[1] = Vec(1, 1.0);  // II
  leads::derive_limb_leads(f);
  CHECK(f.leads[2][0] == doctest::Approx(0.5));    // III
  CHECK(f.leads[3][0] == doctest::Approx(-0.75));  // aVR
  CHECK(f.leads[4][0] == doctest::Approx(0.0));    // aVL
  CHECK(f.leads[5][0] == doctest::Approx(0.75));   // aVF
}

TEST_CASE("derive limb leads: Einthoven and Goldberger identities hold") {
  Rng rng(5);
  LeadFrame12 f;
  for (int i = 0; i < 500; ++i) {
    f.leads[0].push_back(rng.gaussian());
    f.leads[1].push_back(rng.gaussian());
  }
  leads::derive_limb_leads(f);
  for (std::size_t i = 0; i < 500; ++i) {
    // Stored III is bit-identical to II - I; the textbook closed loop
    // I + III - II only vanishes up to rounding.
    CHECK(f.leads[2][i] == f.leads[1][i] - f.leads[0][i]);
    CHECK(std::abs(f.leads[0][i] + f.leads[2][i] - f.leads[1][i]) <= 1e-15);
    double goldberger = f.leads[3][i] + f.leads[4][i] + f.leads[5][i];
    CHECK(std::abs(goldberger) <= 1e-15);
  }
}

TEST_CASE("derive limb leads is linear in its inputs") {
  Rng rng(7);
  LeadFrame12 a, b, sum;
  for (int i = 0; i < 50; ++i) {
    double i1 = rng.gaussian(), i2 = rng.gaussian();
    double j1 = rng.gaussian(), j2 = rng.gaussian();
    a.leads[0].push_back(i1);
    a.leads[1].push_back(i2);
    b.leads[0].push_back(j1);
    b.leads[1].push_back(j2);
    sum.leads[0].push_back(i1 + 2.0 * j1);
    sum.leads[1].push_back(i2 + 2.0 * j2);
  }
  leads::derive_limb_leads(a);
  leads::derive_limb_leads(b);
  leads::derive_limb_leads(sum);
  for (int l = 2; l < 6; ++l) {
    for (std::size_t i = 0; i < 50; ++i) {
      CHECK(sum.leads[static_cast<std::size_t>(l)][i] ==
            doctest::Approx(a.leads[static_cast<std::size_t>(l)][i] +
                            2.0 * b.leads[static_cast<std::size_t>(l)][i])
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("make 3-lead view picks the requested chest lead and re-references") {
  Rng rng(9);
  LeadFrame12 f;
  for (int i = 0; i < 100; ++i) {
    for (auto& lead : f.leads) lead.push_back(rng.gaussian());
  }
  LeadFrame3 w = leads::make_3lead_from_12(f, "V2");
  CHECK(w.reference == leads::ChestRef::kRightLeg);
  CHECK(w.chest_index == 7);
  CHECK(w.lead_i == f.leads[0]);
  CHECK(w.lead_ii == f.leads[1]);
  for (std::size_t i = 0; i < 100; ++i) {
    double rl = f.leads[7][i] - (f.leads[0][i] + f.leads[1][i]) / 3.0;
    CHECK(w.chest[i] == doctest::Approx(rl).epsilon(1e-12));
  }
  CHECK_THROWS_AS(leads::make_3lead_from_12(f, "V7"), ConfigError);
}

TEST_SUITE_END();
