#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "esc/asymptotics.hpp"
#include "esc/evaluation.hpp"
#include "esc/io.hpp"
#include "esc/synthetic.hpp"

namespace py = pybind11;
using namespace esc;

namespace {

RecordTable make_records(const std::vector<std::vector<int>>& rows) {
  if (rows.empty()) throw std::invalid_argument("records: no rows");
  RecordTable t;
  t.n = static_cast<int>(rows.size());
  t.L = static_cast<int>(rows[0].size());
  t.domain.assign(t.L, 0);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != t.L)
      throw std::invalid_argument("records: ragged rows");
    for (int l = 0; l < t.L; ++l) {
      if (row[l] < 0) throw std::invalid_argument("records: negative code");
      t.domain[l] = std::max(t.domain[l], row[l] + 1);
      t.codes.push_back(row[l]);
    }
  }
  return t;
}

std::vector<std::vector<int>> record_rows(const RecordTable& t) {
  std::vector<std::vector<int>> rows(t.n, std::vector<int>(t.L));
  for (int i = 0; i < t.n; ++i)
    for (int l = 0; l < t.L; ++l) rows[i][l] = t.at(i, l);
  return rows;
}

}  // namespace

PYBIND11_MODULE(_escmc, m) {
  m.doc() = "random-partition entity resolution core";

  py::class_<Partition>(m, "Partition")
      .def(py::init([](const std::vector<int>& z) {
             return Partition::from_allocations(z);
           }),
           py::arg("allocations"))
      .def_property_readonly("n", &Partition::n)
      .def_property_readonly("num_clusters", &Partition::num_clusters)
      .def_property_readonly("allocations", &Partition::allocations)
      .def_property_readonly("sizes", &Partition::sizes)
      .def("occupancy", &Partition::occupancy)
      .def("move_record", &Partition::move_record, py::arg("i"), py::arg("target"))
      .def(py::self == py::self)
      .def("__repr__", [](const Partition& p) {
        return "Partition(n=" + std::to_string(p.n()) +
               ", K=" + std::to_string(p.num_clusters()) + ")";
      });
  m.attr("NEW_CLUSTER") = Partition::kNewCluster;

  m.def("enumerate_partitions", [](int n) {
    std::vector<std::vector<int>> all;
    enumerate_partitions(n, [&](const Partition& p) {
      all.push_back(p.allocations());
    });
    return all;
  });

  py::class_<TruncNegBin>(m, "TruncNegBin")
      .def(py::init<double, double>(), py::arg("r"), py::arg("p"))
      .def_readonly("r", &TruncNegBin::r)
      .def_readonly("p", &TruncNegBin::p)
      .def("pmf", &TruncNegBin::pmf)
      .def("mean", &TruncNegBin::mean)
      .def("log_norm", &TruncNegBin::log_norm);

  py::class_<SizeDistribution>(m, "SizeDistribution")
      .def(py::init<TruncNegBin>())
      .def(py::init<std::vector<double>, double>(), py::arg("probs"),
           py::arg("tail_mass") = 0.0)
      .def("pmf", &SizeDistribution::pmf)
      .def("mean", &SizeDistribution::mean)
      .def_property_readonly("truncation", &SizeDistribution::truncation);

  m.def("p_event_en", &p_event_en, py::arg("mu"), py::arg("n"));
  m.def("log_eppf_conditional", &log_eppf_conditional, py::arg("partition"),
        py::arg("mu"), py::arg("log_p_en"));
  m.def("realloc_weights",
        [](const std::vector<int>& sizes, const SizeDistribution& mu) {
          return realloc_weights(sizes, mu);
        });
  m.def("realloc_weights_nb",
        [](const std::vector<int>& sizes, double r, double p) {
          return realloc_weights_nb(sizes, r, p);
        });
  // registered before any signature uses it as a default argument
  py::class_<EscHyper>(m, "EscHyper")
      .def(py::init<>())
      .def_readwrite("eta_r", &EscHyper::eta_r)
      .def_readwrite("s_r", &EscHyper::s_r)
      .def_readwrite("u_p", &EscHyper::u_p)
      .def_readwrite("v_p", &EscHyper::v_p)
      .def_readwrite("alpha", &EscHyper::alpha);

  m.def("log_cond_rp_nb", &log_cond_rp_nb, py::arg("partition"), py::arg("r"),
        py::arg("p"), py::arg("hyper") = EscHyper{});
  m.def("log_cond_rp_escd", &log_cond_rp_escd, py::arg("occupancy"), py::arg("r"),
        py::arg("p"), py::arg("hyper") = EscHyper{});

  m.def(
      "rejection_sample_nb",
      [](int n, double r, double p, std::uint64_t seed) {
        TruncNegBin base(r, p);
        Rng rng(seed);
        return rejection_sample([&base](Rng&) { return SizeDistribution(base); },
                                n, rng);
      },
      py::arg("n"), py::arg("r"), py::arg("p"), py::arg("seed") = 1);
  m.def(
      "importance_sample_nb",
      [](int n, double r, double p, std::uint64_t seed) {
        TruncNegBin base(r, p);
        Rng rng(seed);
        WeightedPartition wp = importance_sample(
            [&base](Rng&) { return SizeDistribution(base); }, n, rng);
        return py::make_tuple(wp.partition, wp.weight);
      },
      py::arg("n"), py::arg("r"), py::arg("p"), py::arg("seed") = 1);

  m.def(
      "cluster_field_loglik",
      [](const std::vector<int>& values, double beta,
         const std::vector<double>& theta) {
        return cluster_field_loglik(values, beta, theta);
      },
      py::arg("values"), py::arg("beta"), py::arg("theta"));
  m.def(
      "partition_loglik",
      [](const std::vector<std::vector<int>>& rows, const Partition& part,
         const std::vector<double>& beta, const Theta& theta) {
        return partition_loglik(make_records(rows), part, beta, theta);
      },
      py::arg("records"), py::arg("partition"), py::arg("beta"), py::arg("theta"));

  py::class_<ChainConfig>(m, "ChainConfig")
      .def(py::init<>())
      .def_readwrite("model", &ChainConfig::model)
      .def_readwrite("esc", &ChainConfig::esc)
      .def_readwrite("iterations", &ChainConfig::iterations)
      .def_readwrite("partition_moves_per_iter",
                     &ChainConfig::partition_moves_per_iter)
      .def_readwrite("burn_in", &ChainConfig::burn_in)
      .def_readwrite("thin", &ChainConfig::thin)
      .def_readwrite("full_scan_interval", &ChainConfig::full_scan_interval)
      .def_readwrite("seed", &ChainConfig::seed)
      .def_readwrite("chains", &ChainConfig::chains)
      .def_readwrite("beta_infer", &ChainConfig::beta_infer)
      .def_readwrite("beta_fixed", &ChainConfig::beta_fixed)
      .def_readwrite("beta_prior_mean", &ChainConfig::beta_prior_mean)
      .def_readwrite("beta_prior_sd", &ChainConfig::beta_prior_sd)
      .def_readwrite("chaperone_bias", &ChainConfig::chaperone_bias)
      .def_readwrite("fix_rp", &ChainConfig::fix_rp)
      .def_readwrite("prior_only", &ChainConfig::prior_only)
      .def_readwrite("r_init", &ChainConfig::r_init)
      .def_readwrite("p_init", &ChainConfig::p_init)
      .def_readwrite("theta_init", &ChainConfig::theta_init)
      .def_readwrite("sigma_init", &ChainConfig::sigma_init)
      .def_readwrite("py_sigma", &ChainConfig::py_sigma)
      .def_readwrite("py_update_sigma", &ChainConfig::py_update_sigma)
      .def_readwrite("concentration_shape", &ChainConfig::concentration_shape)
      .def_readwrite("concentration_rate", &ChainConfig::concentration_rate)
      .def_readwrite("mu_truncation_min", &ChainConfig::mu_truncation_min);

  py::class_<TraceSample>(m, "TraceSample")
      .def_readonly("iteration", &TraceSample::iteration)
      .def_readonly("k", &TraceSample::k)
      .def_readonly("r", &TraceSample::r)
      .def_readonly("p", &TraceSample::p)
      .def_readonly("beta", &TraceSample::beta)
      .def_readonly("allocations", &TraceSample::allocations);

  py::class_<Trace>(m, "Trace")
      .def_readonly("model", &Trace::model)
      .def_readonly("n", &Trace::n)
      .def_readonly("L", &Trace::L)
      .def_readonly("samples", &Trace::samples);

  m.def(
      "run_chain",
      [](const ChainConfig& cfg, const std::vector<std::vector<int>>& rows) {
        return run_chain(cfg, make_records(rows));
      },
      py::arg("config"), py::arg("records"));

  py::class_<DiagStats>(m, "DiagStats")
      .def_readonly("mean", &DiagStats::mean)
      .def_readonly("mcse", &DiagStats::mcse)
      .def_readonly("ess", &DiagStats::ess);
  m.def("diagnostics", [](const std::vector<double>& x) { return diagnostics(x); });

  py::class_<PairConfusion>(m, "PairConfusion")
      .def_readonly("tp", &PairConfusion::tp)
      .def_readonly("fp", &PairConfusion::fp)
      .def_readonly("fn", &PairConfusion::fn)
      .def_readonly("tn", &PairConfusion::tn)
      .def("fnr", &PairConfusion::fnr)
      .def("fdr", &PairConfusion::fdr);
  m.def("pairwise_confusion", &pairwise_confusion, py::arg("estimate"),
        py::arg("truth"));

  py::class_<RateSummary>(m, "RateSummary")
      .def_readonly("fnr", &RateSummary::fnr)
      .def_readonly("fdr", &RateSummary::fdr)
      .def_readonly("k", &RateSummary::k);
  m.def("posterior_rates", &posterior_rates, py::arg("trace"), py::arg("truth"));

  m.def(
      "simulate",
      [](int scenario, double beta, int fields, int categories,
         std::uint64_t seed) {
        Rng rng(seed);
        Dataset d = generate_dataset(
            [&] {
              ScenarioSpec s = scenario_preset(scenario, beta);
              s.fields = fields;
              s.categories = categories;
              return s;
            }(),
            rng);
        return py::make_tuple(record_rows(d.records), d.truth);
      },
      py::arg("scenario") = 1, py::arg("beta") = 0.01, py::arg("fields") = 5,
      py::arg("categories") = 10, py::arg("seed") = 1);

  py::class_<AsymptoticEstimates>(m, "AsymptoticEstimates")
      .def_readonly("n", &AsymptoticEstimates::n)
      .def_readonly("reps", &AsymptoticEstimates::reps)
      .def_readonly("mean_k_over_n", &AsymptoticEstimates::mean_k_over_n)
      .def_readonly("mean_ms_over_n", &AsymptoticEstimates::mean_ms_over_n)
      .def_readonly("mean_max_over_n", &AsymptoticEstimates::mean_max_over_n)
      .def_readonly("cluster_size_dist", &AsymptoticEstimates::cluster_size_dist);
  m.def("asymptotic_estimates", &asymptotic_estimates, py::arg("mu"), py::arg("n"),
        py::arg("reps"), py::arg("smax"), py::arg("seed") = 1,
        py::arg("threads") = 0);

  m.def("run_command", &run_command, py::arg("args"),
        "CLI entry point; returns the process exit code");
}
