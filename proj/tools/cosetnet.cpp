#include <CLI11.hpp>

#include "cosetnet/cli.hpp"

using namespace cosetnet;

namespace {

void add_common(CLI::App* cmd, RunConfig& cfg, std::string& config_file, std::vector<std::string>& given) {
  auto flag = [&](const std::string& name, auto& target, const std::string& help) {
    cmd->add_option(name, target, help)->each([&given, name](const std::string&) { given.push_back(name); });
  };
  cmd->add_option("--config", config_file, "key=value file; flags override it");
  flag("--group", cfg.group, "free:K, zfree:D, fpc:M,N or surface:G");
  flag("--subgroup", cfg.subgroup, "comma-separated generator words, 1 for trivial");
  flag("--radius", cfg.radius, "ball radius R");
  flag("--margin", cfg.margin, "boundary margin for the net defect");
  flag("--seed", cfg.seed, "seed for sampled estimates");
  flag("--samples", cfg.samples, "sample count in sampled mode");
  flag("--workers", cfg.workers, "worker threads");
  flag("--out", cfg.out, "output directory");
  cmd->add_option("--k", cfg.k, "cone-type signature radius")->each([&given](const std::string&) { given.push_back("--k"); });
  cmd->add_option("--D", cfg.D, "initial word-difference bound")->each([&given](const std::string&) { given.push_back("--D"); });
  cmd->add_option("--C1", cfg.C1, "override C1")->each([&given](const std::string&) { given.push_back("--C1"); });
  cmd->add_flag_callback("--sampled", [&cfg, &given] { cfg.exhaustive = false; given.push_back("--sampled"); },
                         "sampled delta estimate");
  cmd->add_flag_callback("--exhaustive", [&cfg, &given] { cfg.exhaustive = true; given.push_back("--exhaustive"); },
                         "exhaustive delta estimate (default)");
  cmd->add_flag_callback("--diagnostic", [&cfg, &given] { cfg.diagnostic = true; given.push_back("--diagnostic"); },
                         "also evaluate the union-over-r form of S");
}

/// Loads the config file, then re-applies flags given on the command line.
RunConfig merge(const RunConfig& flags, const std::string& file, const std::vector<std::string>& given) {
  if (file.empty()) return flags;
  std::ifstream in(file);
  if (!in) throw UsageError("cannot read config file " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = RunConfig::parse(ss.str());
  for (const auto& g : given) {
    if (g == "--group") cfg.group = flags.group;
    else if (g == "--subgroup") cfg.subgroup = flags.subgroup;
    else if (g == "--radius") cfg.radius = flags.radius;
    else if (g == "--margin") cfg.margin = flags.margin;
    else if (g == "--seed") cfg.seed = flags.seed;
    else if (g == "--samples") cfg.samples = flags.samples;
    else if (g == "--workers") cfg.workers = flags.workers;
    else if (g == "--out") cfg.out = flags.out;
    else if (g == "--k") cfg.k = flags.k;
    else if (g == "--D") cfg.D = flags.D;
    else if (g == "--C1") cfg.C1 = flags.C1;
    else if (g == "--sampled" || g == "--exhaustive") cfg.exhaustive = flags.exhaustive;
    else if (g == "--diagnostic") cfg.diagnostic = true;
    else if (g == "--which") cfg.which = flags.which;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coset sections, nets and regular languages in hyperbolic groups"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config_file;
  std::vector<std::string> given;

  auto* analyze = app.add_subcommand("analyze", "full pipeline with brute-force crosschecks");
  add_common(analyze, cfg, config_file, given);
  auto* automata = app.add_subcommand("automata", "build and export one automaton");
  add_common(automata, cfg, config_file, given);
  automata->add_option("--which", cfg.which, "lambda, Ln:n, S, P:c, R, Rc:c")
      ->each([&given](const std::string&) { given.push_back("--which"); });
  auto* geometry = app.add_subcommand("geometry", "delta, K, ray constant, growth, cone types");
  add_common(geometry, cfg, config_file, given);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig run = merge(cfg, config_file, given);
    if (analyze->parsed()) {
      auto res = cmd_analyze(run, std::cerr);
      std::cout << res.report.dump(2) << "\n";
      for (const auto& f : res.failed) std::cerr << "check failed: " << f << "\n";
      return res.exit_code;
    }
    if (automata->parsed()) return cmd_automata(run, std::cout, std::cerr);
    std::cout << cmd_geometry(run).dump(2) << "\n";
    return kExitOk;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}
