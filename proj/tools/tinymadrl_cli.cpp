#include <exception>
#include <iostream>
#include <utility>

#include "CLI11.hpp"
#include "tinymadrl/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bandwidth-pricing equilibria and Tiny MADRL training"};
  app.require_subcommand(1, 1);

  tinymadrl::harness::CommandOptions options;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  std::string algorithm;

  const std::pair<const char*, const char*> commands[] = {
      {"solve", "analytic Stackelberg equilibrium per seed"},
      {"train", "train one algorithm per seed (--algo)"},
      {"sweep", "equilibrium reward over the config's sweep grid"},
      {"compare", "every configured algorithm plus the analytic solve"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "run only this seed");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--algo", algorithm, "tiny_madrl, ppo, greedy or random")
        ->check(CLI::IsMember({"tiny_madrl", "ppo", "greedy", "random"}));
    sub->add_flag("--strict", options.strict, "fail on flagged equilibria");
  }
  CLI11_PARSE(app, argc, argv);

  CLI::App* chosen = app.get_subcommands().front();
  options.config_path = config_path;
  if (chosen->count("--seed")) options.seed = seed;
  if (chosen->count("--out")) options.out = out;
  if (chosen->count("--algo")) options.algorithm = algorithm;
  try {
    return tinymadrl::harness::RunCommand(chosen->get_name(), options);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
