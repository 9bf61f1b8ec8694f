#include "esc/synthetic.hpp"

#include <stdexcept>

namespace esc {

ScenarioSpec scenario_preset(int id, double beta) {
  if (!(beta > 0.0) || !(beta < 1.0))
    throw std::invalid_argument("scenario_preset: beta must be in (0, 1)");
  ScenarioSpec spec;
  spec.beta = beta;
  switch (id) {
    case 1:  // flat sizes 1..4, the pinned benchmark
      spec.cluster_sizes = {{1, 50}, {2, 50}, {3, 50}, {4, 50}};
      break;
    case 2:  // singleton-heavy
      spec.cluster_sizes = {{1, 100}, {2, 50}, {3, 30}, {4, 20}};
      break;
    case 3:  // geometric-ish decay with a longer tail
      spec.cluster_sizes = {{1, 100}, {2, 50}, {3, 25}, {4, 13}, {5, 7}, {6, 3}, {7, 2}};
      break;
    case 4:  // no singletons
      spec.cluster_sizes = {{2, 50}, {3, 50}, {4, 50}, {5, 50}};
      break;
    case 5:  // large clusters only
      spec.cluster_sizes = {{4, 50}, {5, 50}, {6, 50}, {7, 50}};
      break;
    default:
      throw std::invalid_argument("scenario_preset: id must be 1..5");
  }
  return spec;
}

Partition scenario_partition(const ScenarioSpec& spec) {
  std::vector<int> alloc;
  int label = 0;
  for (auto [size, count] : spec.cluster_sizes) {
    if (size < 1 || count < 0)
      throw std::invalid_argument("scenario_partition: bad cluster_sizes entry");
    for (int c = 0; c < count; ++c) {
      ++label;
      alloc.insert(alloc.end(), size, label);
    }
  }
  if (alloc.empty())
    throw std::invalid_argument("scenario_partition: empty scenario");
  return Partition::from_allocations(alloc);
}

Dataset generate_dataset(const ScenarioSpec& spec, Rng& rng) {
  if (spec.fields < 1 || spec.categories < 2)
    throw std::invalid_argument("generate_dataset: need >= 1 field and >= 2 categories");
  Dataset data;
  data.truth = scenario_partition(spec);
  data.theta.assign(spec.fields,
                    std::vector<double>(spec.categories, 1.0 / spec.categories));
  data.beta.assign(spec.fields, spec.beta);
  data.records = sample_records(data.truth, data.beta, data.theta, rng);
  return data;
}

}  // namespace esc
