#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "zpr/training.hpp"

namespace zpr {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct RunConfig {
  TrainConfig train;
  std::string corpus_path;
  std::string out_dir;
  int workers = 1;

  void validate() const;
};

// Recognised keys (config file `key=value` lines and the matching CLI
// flags): pretrain_epochs, rl_epochs, batch, pretrain_batch, rl_batch,
// pretrain_dropout, rl_dropout, pretrain_lr, rl_lr, dev_fraction, seed,
// split_seed, d_emb, d_hidden, hidden1, hidden2, rl (true/false),
// baseline (true/false), objective (gold_actions/gold_only),
// reset_optimizer (true/false), rl_from_best_pretrain (true/false),
// workers.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

// Lines are `key = value`; blank lines and lines starting with '#' are
// skipped.
std::map<std::string, std::string> parse_config_text(const std::string& text);
void apply_config_file(RunConfig& config, const std::string& path);

std::string describe(const TrainConfig& config);

}  // namespace zpr
