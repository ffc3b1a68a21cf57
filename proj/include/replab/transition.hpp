#pragma once

#include <vector>

namespace replab {

/**
 * One environment interaction. discount_active gates the bootstrap term:
 * false on the transition that ends an episode. priority is the raw p_i
 * maintained by the owning store; episode is the insertion tag used to stop
 * priority encouragement at episode boundaries.
 */
struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  bool discount_active = true;
  std::vector<double> next_state;
  double priority = 0.0;
  int episode = 0;
};

}  // namespace replab
