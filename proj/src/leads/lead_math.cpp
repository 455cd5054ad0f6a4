#include "leads/lead_math.hpp"

namespace cogadapt::leads {

namespace {

void require_same_length(const LeadFrame3& f) {
  if (f.lead_i.size() != f.lead_ii.size() || f.lead_i.size() != f.chest.size()) {
    throw DimensionError("lead frame: series lengths differ");
  }
}

}  // namespace

int chest_lead_index(const std::string& name) {
  for (int i = 6; i < 12; ++i) {
    if (name == kLeadNames[i]) return i;
  }
  throw ConfigError("unknown chest lead '" + name + "' (expected V1..V6)");
}

LeadFrame3 wct_rereference(const LeadFrame3& f) {
  require_same_length(f);
  if (f.reference != ChestRef::kRightLeg) {
    throw RuntimeError("wct_rereference: chest lead is not RL-referenced");
  }
  LeadFrame3 out = f;
  for (std::size_t t = 0; t < f.chest.size(); ++t) {
    out.chest[t] = f.chest[t] + (f.lead_i[t] + f.lead_ii[t]) / 3.0;
  }
  out.reference = ChestRef::kWct;
  return out;
}

LeadFrame3 simulate_rl_reference(const LeadFrame3& f) {
  require_same_length(f);
  if (f.reference != ChestRef::kWct) {
    throw RuntimeError("simulate_rl_reference: chest lead is not WCT-referenced");
  }
  LeadFrame3 out = f;
  for (std::size_t t = 0; t < f.chest.size(); ++t) {
    out.chest[t] = f.chest[t] - (f.lead_i[t] + f.lead_ii[t]) / 3.0;
  }
  out.reference = ChestRef::kRightLeg;
  return out;
}

void derive_limb_leads(LeadFrame12& f) {
  const Vec& i = f.leads[0];
  const Vec& ii = f.leads[1];
  if (i.size() != ii.size()) throw DimensionError("derive_limb_leads: I and II lengths differ");
  std::size_t n = i.size();
  for (int k = 2; k < 6; ++k) f.leads[k].assign(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    f.leads[2][t] = ii[t] - i[t];               // III
    f.leads[3][t] = -(i[t] + ii[t]) / 2.0;      // aVR
    f.leads[4][t] = i[t] - ii[t] / 2.0;         // aVL
    f.leads[5][t] = ii[t] - i[t] / 2.0;         // aVF
  }
}

LeadFrame3 make_3lead_from_12(const LeadFrame12& f, const std::string& chest_pick) {
  int ci = chest_lead_index(chest_pick);
  std::size_t n = f.samples();
  for (const Vec& l : f.leads) {
    if (l.size() != n) throw DimensionError("make_3lead_from_12: ragged 12-lead frame");
  }
  LeadFrame3 wct;
  wct.lead_i = f.leads[0];
  wct.lead_ii = f.leads[1];
  wct.chest = f.leads[ci];
  wct.reference = ChestRef::kWct;
  wct.chest_index = ci;
  return simulate_rl_reference(wct);
}

}  // namespace cogadapt::leads
