#ifndef HXTOPO_PRESETS_HPP
#define HXTOPO_PRESETS_HPP

// Named study cases. Each preset is the baseline half-box counter-flow case
// with one knob renamed: Reynolds number, Prandtl number, domain size (named
// by the full mirrored box), flow arrangement, or the straight-channel
// reference evaluation.

#include "hxtopo/config.hpp"

namespace hxtopo {

struct StudyPreset {
  std::string name;
  CaseConfig config;
  bool reference_only = false;  // evaluate the reference design instead of optimizing
};

inline std::vector<std::string> preset_names() {
  return {"baseline", "re50",     "re200",     "pr14",      "domain-2x2x4",
          "domain-4x4x4", "parallel", "u-counter", "u-parallel", "reference"};
}

inline StudyPreset study_preset(const std::string& name) {
  StudyPreset p;
  p.name = name;
  CaseConfig& c = p.config;
  if (name == "baseline") {
  } else if (name == "re50") {
    c.Re1 = c.Re2 = 50.0;
  } else if (name == "re200") {
    c.Re1 = c.Re2 = 200.0;
  } else if (name == "pr14") {
    c.Pr_f1 = c.Pr_f2 = 14.0;
  } else if (name == "domain-2x2x4") {
    c.grid = {24, 12, 48, 2.0, 1.0, 4.0};
  } else if (name == "domain-4x4x4") {
    c.grid = {48, 24, 48, 4.0, 2.0, 4.0};
  } else if (name == "parallel") {
    c.arrangement = FlowArrangement::Parallel;
  } else if (name == "u-counter") {
    c.arrangement = FlowArrangement::UCounter;
  } else if (name == "u-parallel") {
    c.arrangement = FlowArrangement::UParallel;
  } else if (name == "reference") {
    p.reference_only = true;
  } else {
    fail(cat("presets: unknown preset '", name, "'"));
  }
  c.out_dir = name;
  return p;
}

}  // namespace hxtopo

#endif
