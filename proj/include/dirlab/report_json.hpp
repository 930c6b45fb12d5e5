#pragma once

#include <string>

#include <json.hpp>

#include "dirlab/simulator.hpp"

namespace dirlab {

inline nlohmann::json to_json(const SimulationReport& report) {
  return nlohmann::json{
      {"n_retrievals", report.n_retrievals},
      {"empirical_pe", report.empirical_pe},
      {"empirical_deception", report.empirical_deception},
      {"empirical_cost_per_file", report.empirical_cost_per_file},
      {"theory_pe", report.theory_pe},
      {"theory_deception", report.theory_deception},
      {"theory_cost", report.theory_cost},
      {"std_error_pe", report.std_error_pe},
      {"rng_seed", report.rng_seed},
      {"dummy_time_accuracy", report.dummy_time_accuracy},
  };
}

inline std::string report_to_json_string(const SimulationReport& report) {
  return to_json(report).dump(2) + "\n";
}

}  // namespace dirlab
