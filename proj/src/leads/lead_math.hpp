#pragma once

#include <array>
#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace cogadapt::leads {

using nn::Vec;

// Canonical 12-lead order used everywhere in this project.
inline constexpr std::array<const char*, 12> kLeadNames = {
    "I", "II", "III", "aVR", "aVL", "aVF",
    "V1", "V2", "V3", "V4", "V5", "V6"};

enum class ChestRef { kWct, kRightLeg };

// Three synchronized series: Einthoven I, II, and one chest lead whose
// reference electrode is tracked explicitly.
struct LeadFrame3 {
  Vec lead_i;
  Vec lead_ii;
  Vec chest;
  ChestRef reference = ChestRef::kRightLeg;
  int chest_index = 7;  // position of the chest lead in kLeadNames (V2)
};

struct LeadFrame12 {
  std::array<Vec, 12> leads;
  std::size_t samples() const { return leads[0].size(); }
};

int chest_lead_index(const std::string& name);  // "V1".."V6" -> 6..11

// Re-expresses an RL-referenced chest lead against the Wilson central
// terminal: chest_wct = chest_rl + (I + II)/3. I and II pass through.
LeadFrame3 wct_rereference(const LeadFrame3& f);

// PTB-XL-style wearable simulation: chest_rl = chest_wct - (I + II)/3.
LeadFrame3 simulate_rl_reference(const LeadFrame3& f);

// Fills III, aVR, aVL, aVF from I and II (Einthoven + Goldberger):
// III = II - I, aVR = -(I+II)/2, aVL = I - II/2, aVF = II - I/2.
void derive_limb_leads(LeadFrame12& f);

// Wearable view of a clinical frame: [I, II, chest_pick re-referenced to RL].
LeadFrame3 make_3lead_from_12(const LeadFrame12& f, const std::string& chest_pick);

}  // namespace cogadapt::leads
