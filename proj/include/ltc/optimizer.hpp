#pragma once

#include <cstddef>
#include <vector>

#include "ltc/tensor.hpp"
#include "ltc/textcnn.hpp"

namespace ltc {

// Step schedule: `base` for epochs 1..decay_after, base * decay_factor after.
struct LrSchedule {
  double base = 5e-5;
  std::size_t decay_after = 10;
  double decay_factor = 0.1;

  double at(std::size_t epoch) const {  // 1-based epoch
    return epoch <= decay_after ? base : base * decay_factor;
  }
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam moments for the extractor tensors followed by the head tensors, in
// extractor_tensors / head_tensors order. Sized on the first step.
struct OptimizerState {
  AdamConfig adam;
  LrSchedule schedule;
  std::size_t step = 0;
  std::vector<Vector> first_moment;
  std::vector<Vector> second_moment;
};

// One bias-corrected Adam update at the learning rate of `epoch` (1-based).
// With freeze_extractor, or when gradients carry no extractor part, extractor
// tensors and their moments are left untouched. A non-trainable embedding is
// never updated. The pad embedding row is re-zeroed afterwards.
void optimizer_step(OptimizerState& state, ExtractorParams& extractor, HeadParams& head,
                    const Gradients& grads, std::size_t epoch, bool freeze_extractor);

}  // namespace ltc
