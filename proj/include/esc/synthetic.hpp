#pragma once

#include <map>

#include "esc/likelihood.hpp"
#include "esc/partition.hpp"
#include "esc/rng.hpp"

namespace esc {

// A benchmark layout: how many clusters of each size, plus the field setup.
struct ScenarioSpec {
  std::map<int, int> cluster_sizes;  // size -> number of clusters
  int fields = 5;
  int categories = 10;  // uniform domain size per field
  double beta = 0.01;   // common distortion level
};

// Presets 1..5, 200 clusters each. Preset 1 is the pinned benchmark
// (50 clusters of each size 1..4, n = 500); presets 2..5 sweep the size
// profile from singleton-heavy to larger clusters and are approximate
// shapes, not pinned reference values.
ScenarioSpec scenario_preset(int id, double beta);

// Deterministic canonical partition with exactly the requested size multiset
// (blocks laid out in ascending size order).
Partition scenario_partition(const ScenarioSpec& spec);

struct Dataset {
  RecordTable records;
  Partition truth;
  Theta theta;
  DistortionVector beta;
};

// Truth partition from the spec, uniform theta over each field's categories,
// records from sample_records.
Dataset generate_dataset(const ScenarioSpec& spec, Rng& rng);

}  // namespace esc
