#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "esc/asymptotics.hpp"
#include "esc/evaluation.hpp"
#include "esc/io.hpp"
#include "esc/synthetic.hpp"

namespace esc {

namespace {

std::map<int, int> parse_sizes_arg(const std::string& arg) {
  std::map<int, int> sizes;
  std::istringstream in(arg);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    size_t colon = tok.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("--sizes: expected size:count, got '" + tok + "'");
    int size = std::stoi(tok.substr(0, colon));
    int count = std::stoi(tok.substr(colon + 1));
    if (size < 1 || count < 1)
      throw std::runtime_error("--sizes: size and count must be positive");
    sizes[size] += count;
  }
  if (sizes.empty()) throw std::runtime_error("--sizes: empty specification");
  return sizes;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void emit(std::ostream& out, const RateSummary& rates) {
  out << "metric,mean,mcse,ess\n"
      << "fnr," << rates.fnr.mean << "," << rates.fnr.mcse << "," << rates.fnr.ess
      << "\n"
      << "fdr," << rates.fdr.mean << "," << rates.fdr.mcse << "," << rates.fdr.ess
      << "\n"
      << "k," << rates.k.mean << "," << rates.k.mcse << "," << rates.k.ess << "\n";
}

void emit(std::ostream& out, const PosteriorSummaries& sum) {
  out << "metric,s,a,b,c,d,e\n";
  out << "k,," << sum.k.mean << "," << sum.k.mcse << "," << sum.k.ess << ",,\n";
  for (const auto& [s, q] : sum.size_quantiles) {
    out << "occupancy_quantiles," << s;
    for (double v : q) out << "," << v;
    out << "\n";
  }
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"escmc: Bayesian entity resolution with random partition priors"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic benchmark");
  int sim_scenario = 1;
  std::string sim_sizes;
  double sim_beta = 0.01;
  int sim_fields = 5, sim_categories = 10;
  std::uint64_t sim_seed = 1;
  std::string sim_records_out, sim_truth_out;
  sim->add_option("--scenario", sim_scenario, "Preset layout 1..5")
      ->check(CLI::Range(1, 5));
  sim->add_option("--sizes", sim_sizes,
                  "Custom layout as size:count pairs, e.g. 1:50,2:50");
  sim->add_option("--beta", sim_beta, "Distortion probability per field");
  sim->add_option("--fields", sim_fields, "Number of categorical fields");
  sim->add_option("--categories", sim_categories, "Categories per field");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--records-out", sim_records_out, "Records CSV path")->required();
  sim->add_option("--truth-out", sim_truth_out, "Truth CSV path")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Run the posterior sampler");
  std::string fit_records, fit_config, fit_out, fit_model;
  long fit_iterations = 0, fit_burnin = -1;
  int fit_moves = -1, fit_thin = 0, fit_chains = 0;
  std::uint64_t fit_seed = 0;
  std::vector<double> fit_beta;
  bool fit_infer_beta = false, fit_prior_only = false, fit_fix_rp = false;
  fit->add_option("--records", fit_records, "Records CSV")->required();
  fit->add_option("--config", fit_config, "key = value run configuration file");
  fit->add_option("--out", fit_out, "Trace output path")->required();
  auto* o_model = fit->add_option("--model", fit_model,
                                  "esc-nb | esc-d | dp | py (default esc-d)");
  auto* o_iters = fit->add_option("--iterations", fit_iterations, "Outer iterations");
  auto* o_moves =
      fit->add_option("--moves", fit_moves, "Partition moves per iteration");
  auto* o_burn = fit->add_option("--burn-in", fit_burnin, "Iterations discarded");
  auto* o_thin = fit->add_option("--thin", fit_thin, "Keep every k-th sample");
  auto* o_seed = fit->add_option("--seed", fit_seed, "RNG seed (chain c uses seed+c)");
  auto* o_chains = fit->add_option("--chains", fit_chains, "Independent chains");
  auto* o_beta = fit->add_option("--beta", fit_beta, "Fixed distortion levels")
                     ->delimiter(',');
  auto* o_infer = fit->add_flag("--infer-beta", fit_infer_beta,
                                "Sample the distortion instead of fixing it");
  auto* o_prior =
      fit->add_flag("--prior-only", fit_prior_only, "Ignore the likelihood");
  auto* o_fixrp = fit->add_flag("--fix-rp", fit_fix_rp,
                                "Freeze global parameters at their inits");

  // prior-sample
  auto* pri = app.add_subcommand("prior-sample",
                                 "Draw partitions from the conditioned prior");
  int pri_n = 0, pri_draws = 1000;
  double pri_r = 1.0, pri_p = 0.5;
  std::string pri_method = "rejection", pri_out;
  std::uint64_t pri_seed = 1;
  pri->add_option("--n", pri_n, "Number of records")->required();
  pri->add_option("--draws", pri_draws, "Number of draws");
  pri->add_option("--method", pri_method, "rejection | importance")
      ->check(CLI::IsMember({"rejection", "importance"}));
  pri->add_option("--r", pri_r, "Size distribution shape");
  pri->add_option("--p", pri_p, "Size distribution success probability");
  pri->add_option("--seed", pri_seed, "RNG seed");
  pri->add_option("--out", pri_out, "Output CSV path")->required();

  // asymptotics
  auto* asy = app.add_subcommand("asymptotics",
                                 "Monte Carlo cluster statistics at large n");
  int asy_n = 0, asy_reps = 200, asy_smax = 8, asy_threads = 0;
  double asy_r = 1.0, asy_p = 0.5;
  std::uint64_t asy_seed = 1;
  std::string asy_out;
  asy->add_option("--n", asy_n, "Number of records")->required();
  asy->add_option("--reps", asy_reps, "Independent draws");
  asy->add_option("--smax", asy_smax, "Largest size reported");
  asy->add_option("--threads", asy_threads, "Worker threads (0 = hardware)");
  asy->add_option("--r", asy_r, "Size distribution shape");
  asy->add_option("--p", asy_p, "Size distribution success probability");
  asy->add_option("--seed", asy_seed, "RNG seed");
  asy->add_option("--out", asy_out, "Output CSV path")->required();

  // evaluate
  auto* eva = app.add_subcommand("evaluate",
                                 "Posterior pairwise error rates against truth");
  std::string eva_trace, eva_truth, eva_out;
  eva->add_option("--trace", eva_trace, "Trace file from fit")->required();
  eva->add_option("--truth", eva_truth, "Truth CSV")->required();
  eva->add_option("--out", eva_out, "Output CSV path (default stdout)");

  // diagnose
  auto* dia = app.add_subcommand("diagnose", "Trace summaries and diagnostics");
  std::string dia_trace, dia_out;
  dia->add_option("--trace", dia_trace, "Trace file from fit")->required();
  dia->add_option("--out", dia_out, "Output CSV path (default stdout)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) {
      ScenarioSpec spec = sim_sizes.empty() ? scenario_preset(sim_scenario, sim_beta)
                                            : ScenarioSpec{};
      if (!sim_sizes.empty()) {
        spec.cluster_sizes = parse_sizes_arg(sim_sizes);
        spec.beta = sim_beta;
      }
      spec.fields = sim_fields;
      spec.categories = sim_categories;
      Rng rng(sim_seed);
      Dataset data = generate_dataset(spec, rng);
      write_records_csv(sim_records_out, data.records);
      write_truth_csv(sim_truth_out, data.truth);
      std::cout << "simulate: n=" << data.records.n
                << " clusters=" << data.truth.num_clusters()
                << " fields=" << data.records.L << " beta=" << spec.beta << " -> "
                << sim_records_out << ", " << sim_truth_out << "\n";
      return 0;
    }

    if (fit->parsed()) {
      ChainConfig cfg =
          fit_config.empty() ? ChainConfig{} : load_run_config(fit_config);
      if (o_model->count()) cfg.model = fit_model;
      if (o_iters->count()) cfg.iterations = fit_iterations;
      if (o_moves->count()) cfg.partition_moves_per_iter = fit_moves;
      if (o_burn->count()) cfg.burn_in = fit_burnin;
      if (o_thin->count()) cfg.thin = fit_thin;
      if (o_seed->count()) cfg.seed = fit_seed;
      if (o_chains->count()) cfg.chains = fit_chains;
      if (o_beta->count()) cfg.beta_fixed = fit_beta;
      if (o_infer->count()) cfg.beta_infer = fit_infer_beta;
      if (o_prior->count()) cfg.prior_only = fit_prior_only;
      if (o_fixrp->count()) cfg.fix_rp = fit_fix_rp;
      if (cfg.chains < 1) throw std::runtime_error("fit: chains must be >= 1");
      RecordTable records = load_records(fit_records);
      for (int c = 0; c < cfg.chains; ++c) {
        ChainConfig one = cfg;
        one.seed = cfg.seed + static_cast<std::uint64_t>(c);
        Trace trace = run_chain(one, records);
        std::string path =
            cfg.chains == 1 ? fit_out : fit_out + ".chain" + std::to_string(c + 1);
        write_trace(path, trace);
        double kmean = 0.0;
        for (const TraceSample& s : trace.samples) kmean += s.k;
        if (!trace.samples.empty()) kmean /= trace.samples.size();
        std::cout << "fit[" << cfg.model << "] chain " << (c + 1) << ": "
                  << trace.samples.size() << " samples -> " << path
                  << " (posterior mean K " << std::setprecision(6) << kmean
                  << ")\n";
      }
      return 0;
    }

    if (pri->parsed()) {
      TruncNegBin base(pri_r, pri_p);
      MuGenerator gen = [&base](Rng&) { return SizeDistribution(base); };
      Rng rng(pri_seed);
      std::ofstream out = open_out(pri_out);
      out << std::setprecision(17) << "draw,weight,k,sizes\n";
      for (int d = 1; d <= pri_draws; ++d) {
        WeightedPartition wp;
        if (pri_method == "rejection")
          wp.partition = rejection_sample(gen, pri_n, rng);
        else
          wp = importance_sample(gen, pri_n, rng);
        std::vector<int> sizes = wp.partition.sizes();
        std::sort(sizes.begin(), sizes.end());
        out << d << "," << wp.weight << "," << wp.partition.num_clusters() << ",";
        for (size_t j = 0; j < sizes.size(); ++j)
          out << (j ? " " : "") << sizes[j];
        out << "\n";
      }
      std::cout << "prior-sample: " << pri_draws << " " << pri_method
                << " draws at n=" << pri_n << " -> " << pri_out << "\n";
      return 0;
    }

    if (asy->parsed()) {
      TruncNegBin mu(asy_r, asy_p);
      AsymptoticEstimates est =
          asymptotic_estimates(mu, asy_n, asy_reps, asy_smax, asy_seed, asy_threads);
      std::ofstream out = open_out(asy_out);
      out << std::setprecision(10) << "stat,s,value\n";
      out << "k_over_n,," << est.mean_k_over_n << "\n";
      out << "k_over_n_limit,," << 1.0 / mu.mean() << "\n";
      out << "max_over_n,," << est.mean_max_over_n << "\n";
      for (int s = 1; s <= asy_smax; ++s) {
        out << "ms_over_n," << s << "," << est.mean_ms_over_n[s - 1] << "\n";
        out << "ms_over_n_limit," << s << "," << mu.pmf(s) / mu.mean() << "\n";
      }
      for (int s = 1; s <= asy_smax; ++s) {
        out << "cluster_size_dist," << s << "," << est.cluster_size_dist[s - 1]
            << "\n";
        out << "cluster_size_dist_limit," << s << "," << mu.pmf(s) << "\n";
      }
      std::cout << "asymptotics: n=" << asy_n << " reps=" << asy_reps << " -> "
                << asy_out << "\n";
      return 0;
    }

    if (eva->parsed()) {
      Trace trace = read_trace(eva_trace);
      Partition truth = load_truth(eva_truth);
      if (truth.n() != trace.n)
        throw std::runtime_error("evaluate: trace has n=" + std::to_string(trace.n) +
                                 " but truth has n=" + std::to_string(truth.n()));
      RateSummary rates = posterior_rates(trace, truth);
      if (eva_out.empty()) {
        std::cout << std::setprecision(10);
        emit(std::cout, rates);
      } else {
        std::ofstream out = open_out(eva_out);
        out << std::setprecision(10);
        emit(out, rates);
        std::cout << "evaluate: " << trace.samples.size() << " samples -> "
                  << eva_out << "\n";
      }
      return 0;
    }

    if (dia->parsed()) {
      Trace trace = read_trace(dia_trace);
      PosteriorSummaries sum = posterior_summaries(trace);
      if (dia_out.empty()) {
        std::cout << std::setprecision(10);
        emit(std::cout, sum);
      } else {
        std::ofstream out = open_out(dia_out);
        out << std::setprecision(10);
        emit(out, sum);
        std::cout << "diagnose: " << trace.samples.size() << " samples -> "
                  << dia_out << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace esc
