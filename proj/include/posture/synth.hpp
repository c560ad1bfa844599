#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "posture/dataset.hpp"
#include "posture/skeleton.hpp"

namespace posture {

// Synthetic acquisition protocol: every class is captured by `participants`
// subjects at each orientation and distance, cycling participant fastest, then
// orientation, then distance. 208 per class with the defaults is one full
// 13 × 4 × 4 factorial.
struct SynthSpec {
  std::uint64_t seed = 42;
  std::size_t per_class = 208;
  std::size_t participants = 13;
  std::vector<double> orientations_deg = {0.0, 90.0, 180.0, 270.0};
  std::vector<double> distances_m = {1.0, 2.0, 3.0, 4.0};
  double noise_stddev_m = 0.02;
  double scale_min = 0.85;
  double scale_max = 1.15;

  // Throws InvalidConfig.
  void validate() const;
  // Compact JSON description, stored as dataset provenance.
  std::string describe() const;
};

// Canonical pose for a class in the body frame: SpineBase at the origin,
// y up, z forward, x towards the subject's left. Unit participant scale.
Skeleton pose_template(PostureLabel label);

// Records are emitted class by class in label index order. Each record uses
// its own generator derived from (seed, record index), so the output does not
// depend on generation order.
LabeledDataset synth_generate(const SynthSpec& spec);

}  // namespace posture
