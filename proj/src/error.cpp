#include "quest/error.hpp"

namespace quest {

const char* stage_name(Stage stage) noexcept {
  switch (stage) {
    case Stage::input: return "input";
    case Stage::grouping: return "grouping";
    case Stage::root: return "root";
    case Stage::support: return "support";
    case Stage::grid: return "grid";
    case Stage::mp_density: return "mp-density";
    case Stage::cdf: return "cdf";
    case Stage::quantize: return "quantize";
    case Stage::invert: return "invert";
    case Stage::simulation: return "simulation";
  }
  return "unknown";
}

QuestError::QuestError(Stage stage, const std::string& message)
    : std::runtime_error(std::string(stage_name(stage)) + ": " + message),
      stage_(stage),
      message_(message) {}

RootNotConverged::RootNotConverged(double best, double f_best, int iterations)
    : QuestError(Stage::root, "iteration limit exceeded (best x = " + std::to_string(best) +
                                  ", f = " + std::to_string(f_best) + ")"),
      best_(best),
      f_best_(f_best),
      iterations_(iterations) {}

}  // namespace quest
