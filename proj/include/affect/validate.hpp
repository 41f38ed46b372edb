#pragma once

#include "affect/types.hpp"

#include <string>
#include <vector>

namespace affect {

struct ValidationOptions {
  double duration_tolerance_s{2.0};
  // Trial length bounds of the source recordings (51-150 s clips).
  bool check_duration_range{true};
  double min_duration_s{51.0};
  double max_duration_s{150.0};
};

struct Finding {
  std::string code;    // e.g. "channel_count mismatch", "landmark count"
  std::string detail;
};

bool rating_in_range(double v);
bool ratings_in_range(const Ratings& r);

std::vector<Finding> validate_signal(const SignalBlock& s);
std::vector<Finding> validate_trial(const TrialRecord& t, const ValidationOptions& opts = {});

}  // namespace affect
