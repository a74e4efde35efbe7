#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bayessum {

/// Closed form against brute force for one embedding row over random draws.
struct RowCheck {
  std::string row;
  int draws = 0;
  double max_kme_error = 0.0;  ///< max |closed - brute| / (1 + |closed|)
  double max_ie_error = 0.0;   ///< same for the initial error; NaN when unavailable
  bool ie_available = true;
  bool ie_unavailable_reported = false;  ///< unavailable rows must throw CapabilityError
  bool passed = false;
};

std::vector<RowCheck> validate_kme(std::uint64_t seed, int draws = 50, double tolerance = 1e-8);

/// max over random y of |sum_x p(x) k_p(x, y)| for random Potts models.
struct SteinCheck {
  int length = 0;
  int num_states = 3;
  double max_abs_mean = 0.0;
  bool passed = false;
};

std::vector<SteinCheck> validate_stein(std::uint64_t seed, int num_y = 20, double tolerance = 1e-9);

}  // namespace bayessum
