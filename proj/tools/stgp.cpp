#include <iostream>

#include "CLI11.hpp"
#include "stgp/cli/commands.hpp"

int main(int argc, char **argv) {
  using namespace stgp::cli;
  CLI::App app{"Spatio-temporal GP inference with pseudo-points and "
               "state-space filtering"};
  app.require_subcommand(1);

  SynthArgs synth;
  std::string scenario = "irregular";
  std::uint64_t synth_seed = 0;
  auto *s = app.add_subcommand("synth", "Draw a synthetic benchmark dataset");
  s->add_option("--scenario", scenario, "irregular or grid-missing")
      ->capture_default_str();
  s->add_option("--T", synth.options.T, "Number of time points")
      ->capture_default_str();
  s->add_option("--N_t", synth.options.N_t,
                "Locations per time (irregular scenario)")
      ->capture_default_str();
  s->add_option("--dt", synth.options.dt, "Time spacing")->capture_default_str();
  s->add_option("--noise", synth.options.noise_variance,
                "Observation noise variance")
      ->capture_default_str();
  s->add_option("--seed", synth_seed, "Random seed")->capture_default_str();
  s->add_option("--M", synth.pseudo_count,
                "Also write this many regular pseudo-inputs");
  s->add_option("--pseudo-out", synth.pseudo_out, "Pseudo-input CSV path");
  s->add_option("--out", synth.out, "Output CSV")->required();

  FitArgs fit;
  std::uint64_t fit_seed = 0;
  auto *f = app.add_subcommand("fit", "Fit hyperparameters by maximizing the ELBO");
  f->add_option("--config", fit.config, "key=value config file");
  f->add_option("--data", fit.data, "Dataset CSV")->required();
  f->add_option("--seed", fit_seed, "Overrides the config seed");
  f->add_option("--out", fit.out, "Params file to write")->required();
  f->add_option("--trace", fit.trace,
                "Trace CSV (default: <out>.trace.csv)");

  PredictArgs pred;
  auto *p = app.add_subcommand("predict", "Posterior marginals at query points");
  p->add_option("--config", pred.config, "key=value config file");
  p->add_option("--params", pred.params, "Params file written by fit")
      ->required();
  p->add_option("--data", pred.data, "Dataset CSV")->required();
  p->add_option("--query", pred.query, "Query CSV (time,x1,...)")->required();
  p->add_option("--out", pred.out, "Predictions CSV")->required();

  ElboArgs elbo;
  std::uint64_t elbo_seed = 0;
  auto *e = app.add_subcommand("elbo", "Evaluate the ELBO at fixed parameters");
  e->add_option("--config", elbo.config, "key=value config or params file");
  e->add_option("--data", elbo.data, "Dataset CSV")->required();
  e->add_option("--seed", elbo_seed, "Overrides the config seed");
  e->add_option("--out", elbo.out, "JSON output (default: stdout)");

  BenchArgs bench;
  std::uint64_t bench_seed = 0;
  auto *b = app.add_subcommand("bench", "Time the ELBO against the dense oracle");
  b->add_option("--config", bench.config, "key=value config file");
  b->add_option("--T", bench.T, "Comma-separated time counts")
      ->delimiter(',')
      ->required();
  b->add_option("--method", bench.method, "structured, oracle or both")
      ->capture_default_str();
  b->add_option("--N_t", bench.N_t, "Observations per time")
      ->capture_default_str();
  b->add_option("--M_tau", bench.M_tau, "Spatial pseudo-inputs")
      ->capture_default_str();
  b->add_option("--repeats", bench.repeats, "Timed runs after warm-up")
      ->capture_default_str();
  b->add_option("--threads", bench.threads, "Thread budget")
      ->capture_default_str();
  b->add_option("--seed", bench_seed, "Random seed");
  b->add_option("--out", bench.out, "JSON output (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  if (*s) {
    try {
      synth.options.scenario = parse_scenario(scenario);
    } catch (const ConfigError &err) {
      std::cerr << "config error: " << err.what() << '\n';
      return kExitData;
    }
    synth.options.seed = synth_seed;
    return cmd_synth(synth, std::cerr);
  }
  if (*f) {
    if (f->count("--seed")) {
      fit.seed = fit_seed;
    }
    return cmd_fit(fit, std::cerr);
  }
  if (*p) {
    return cmd_predict(pred, std::cerr);
  }
  if (*e) {
    if (e->count("--seed")) {
      elbo.seed = elbo_seed;
    }
    return cmd_elbo(elbo, std::cerr);
  }
  if (b->count("--seed")) {
    bench.seed = bench_seed;
  }
  return cmd_bench(bench, std::cerr);
}
