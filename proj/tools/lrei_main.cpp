#include "lrei/runner.hpp"

#include <CLI11.hpp>

#include <clocale>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value, applied in order
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "experiment config file");
  cmd->add_option("-s,--set", args.overrides,
                  "override a config key, e.g. --set scheme=rk4")
      ->take_all();
}

lrei::ExperimentConfig build_config(const CommonArgs& args) {
  lrei::ExperimentConfig cfg;
  if (!args.config_path.empty())
    cfg = lrei::parse_config_file(args.config_path);
  for (const std::string& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw lrei::ConfigError("override '" + kv + "' must look like key=value");
    lrei::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos <= csv.size()) {
    const auto comma = csv.find(',', pos);
    const std::string tok = csv.substr(pos, comma == std::string::npos
                                                ? std::string::npos
                                                : comma - pos);
    if (!tok.empty()) out.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<int> parse_ints(const std::string& csv) {
  std::vector<int> out;
  for (double v : parse_doubles(csv)) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<std::string> parse_names(const std::string& csv) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= csv.size()) {
    const auto comma = csv.find(',', pos);
    const std::string tok = csv.substr(pos, comma == std::string::npos
                                                ? std::string::npos
                                                : comma - pos);
    if (!tok.empty()) out.push_back(tok);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  CLI::App app{"lrei: low-rank eigenmode integration for q-LL / q-LLG spin dynamics"};
  app.require_subcommand(1);

  CommonArgs run_args, conv_args, bench_args, val_args;
  std::string conv_schemes = "rk1,rk2,rk3,rk4";
  std::string conv_h = "0.05,0.025,0.0125,0.00625";
  std::string bench_n = "4,6,8";
  std::string bench_r = "1,2,3";
  std::string bench_schemes = "rk4,ab4";
  bool compare_dense = false;

  CLI::App* run = app.add_subcommand("run", "run one simulation; CSV + manifest");
  add_common(run, run_args);

  CLI::App* conv = app.add_subcommand("converge", "order-of-accuracy study");
  add_common(conv, conv_args);
  conv->add_option("--schemes", conv_schemes, "comma list of scheme names");
  conv->add_option("--h-values", conv_h, "comma list of step sizes");

  CLI::App* bench = app.add_subcommand("bench", "per-step timing sweep");
  add_common(bench, bench_args);
  bench->add_option("--n-values", bench_n, "comma list of site counts");
  bench->add_option("--r-values", bench_r, "comma list of ranks (1..4)");
  bench->add_option("--schemes", bench_schemes, "comma list of scheme names");
  bench->add_flag("--compare-dense", compare_dense,
                  "time the dense engine as well (n <= 10)");

  CLI::App* val = app.add_subcommand("validate", "dry-run config check");
  add_common(val, val_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return lrei::run_experiment(build_config(run_args), std::cerr);
    if (conv->parsed())
      return lrei::run_convergence(build_config(conv_args),
                                   parse_names(conv_schemes),
                                   parse_doubles(conv_h), std::cerr);
    if (bench->parsed())
      return lrei::run_benchmark(build_config(bench_args), parse_ints(bench_n),
                                 parse_ints(bench_r), parse_names(bench_schemes),
                                 compare_dense, std::cerr);
    if (val->parsed())
      return lrei::run_validate(build_config(val_args), std::cout);
  } catch (const lrei::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lrei::kExitConfig;
  } catch (const lrei::ResourceGuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lrei::kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lrei::kExitNumerical;
  }
  return lrei::kExitOk;
}
