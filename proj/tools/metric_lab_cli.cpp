#include <iostream>

#include <CLI11.hpp>

#include "metric_lab/parallel.hpp"
#include "metric_lab/runner.hpp"

int main(int argc, char** argv) {
  using namespace metric_lab;
  CLI::App app{"Pointwise and functional inequality checks on finite metric measure spaces"};
  app.require_subcommand(1);

  RunOverrides overrides;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  double tolerance_scale = 1.0;
  std::string output;

  auto* run = app.add_subcommand("run", "Run an experiment config and write a report bundle");
  std::string config;
  run->add_option("config", config, "Experiment config (JSON)")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Global seed (overrides the config)");
  auto* jobs_opt = run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* tol_opt = run->add_option("--tolerance-scale", tolerance_scale, "Scale of the zero tolerances")
                      ->check(CLI::PositiveNumber);
  auto* out_opt = run->add_option("--output", output, "Bundle directory (overrides the config)");

  auto* report = app.add_subcommand("report", "Render a report bundle");
  std::string bundle;
  std::string format = "summary-text";
  report->add_option("bundle", bundle, "Bundle directory")->required();
  report->add_option("--format", format, "json, csv or summary-text")
      ->check(CLI::IsMember({"json", "csv", "summary-text"}));

  auto* certify = app.add_subcommand("certify", "Certify Ahlfors regularity of a space file");
  std::string space;
  CertifyOptions cert_options;
  double r_min = 0.0, r_max = 0.0;
  certify->add_option("space", space, "Space file (JSON)")->required();
  certify->add_flag("--all-centers", cert_options.all_centers, "Use every point as a center");
  auto* rmin_opt = certify->add_option("--r-min", r_min, "Smallest radius")->check(CLI::PositiveNumber);
  auto* rmax_opt = certify->add_option("--r-max", r_max, "Largest radius")->check(CLI::PositiveNumber);
  certify->add_option("--seed", cert_options.seed, "Seed of the triangle-inequality audit");
  certify->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) {
    if (*seed_opt) overrides.seed = seed;
    if (*jobs_opt) overrides.jobs = jobs;
    if (*tol_opt) overrides.tolerance_scale = tolerance_scale;
    if (*out_opt) overrides.output_dir = output;
    return run_experiment_file(config, overrides, std::cout, std::cerr);
  }
  if (*report) return emit_report(bundle, format, std::cout, std::cerr);
  if (*rmin_opt) cert_options.r_min = r_min;
  if (*rmax_opt) cert_options.r_max = r_max;
  set_worker_count(static_cast<unsigned>(jobs));
  return certify_space_file(space, cert_options, std::cout, std::cerr);
}
