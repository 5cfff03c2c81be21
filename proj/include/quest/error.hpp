#pragma once

#include <stdexcept>
#include <string>

namespace quest {

/// Pipeline stage that raised an error. Carried by every QuestError so the
/// CLI can name the failing stage.
enum class Stage {
  input,
  grouping,
  root,
  support,
  grid,
  mp_density,
  cdf,
  quantize,
  invert,
  simulation,
};

const char* stage_name(Stage stage) noexcept;

class QuestError : public std::runtime_error {
 public:
  QuestError(Stage stage, const std::string& message);

  Stage stage() const noexcept { return stage_; }
  /// Message without the stage prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  Stage stage_;
  std::string message_;
};

/// Root finder hit its iteration cap; the best iterate is attached.
class RootNotConverged : public QuestError {
 public:
  RootNotConverged(double best, double f_best, int iterations);

  double best() const noexcept { return best_; }
  double f_best() const noexcept { return f_best_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double best_;
  double f_best_;
  int iterations_;
};

}  // namespace quest
