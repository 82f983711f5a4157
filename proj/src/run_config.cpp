#include "zpr/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace zpr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key, "expected a number, got '" + v + "'");
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

int positive_int(const std::string& key, const std::string& v, bool allow_zero) {
  const long long x = parse_int(key, v);
  if (x < (allow_zero ? 0 : 1) || x > 1'000'000'000) {
    throw ConfigError(key, allow_zero ? "must be a non-negative integer" : "must be a positive integer");
  }
  return static_cast<int>(x);
}

double rate(const std::string& key, const std::string& v) {
  const double x = parse_double(key, v);
  if (!(x >= 0.0 && x < 1.0)) throw ConfigError(key, "must be in [0, 1)");
  return x;
}

double learning_rate(const std::string& key, const std::string& v) {
  const double x = parse_double(key, v);
  if (!(x >= 0.0 && x < 1e6)) throw ConfigError(key, "must be a non-negative finite number");
  return x;
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  TrainConfig& t = config.train;
  if (key == "pretrain_epochs") t.pretrain.epochs = positive_int(key, v, true);
  else if (key == "rl_epochs") t.rl.epochs = positive_int(key, v, true);
  else if (key == "batch") t.pretrain.batch = t.rl.batch = positive_int(key, v, false);
  else if (key == "pretrain_batch") t.pretrain.batch = positive_int(key, v, false);
  else if (key == "rl_batch") t.rl.batch = positive_int(key, v, false);
  else if (key == "pretrain_dropout") t.pretrain.dropout = rate(key, v);
  else if (key == "rl_dropout") t.rl.dropout = rate(key, v);
  else if (key == "pretrain_lr") t.pretrain.learning_rate = learning_rate(key, v);
  else if (key == "rl_lr") t.rl.learning_rate = learning_rate(key, v);
  else if (key == "dev_fraction") {
    const double x = parse_double(key, v);
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(key, "must be in [0, 1]");
    t.dev_fraction = x;
  } else if (key == "seed") t.seed = static_cast<std::uint64_t>(positive_int(key, v, true));
  else if (key == "split_seed") t.split_seed = static_cast<std::uint64_t>(positive_int(key, v, true));
  else if (key == "d_emb") t.d_emb = static_cast<std::size_t>(positive_int(key, v, false));
  else if (key == "d_hidden") t.d_hidden = static_cast<std::size_t>(positive_int(key, v, false));
  else if (key == "hidden1") t.hidden1 = static_cast<std::size_t>(positive_int(key, v, false));
  else if (key == "hidden2") t.hidden2 = static_cast<std::size_t>(positive_int(key, v, false));
  else if (key == "rl") t.run_rl = parse_bool(key, v);
  else if (key == "baseline") t.use_baseline = parse_bool(key, v);
  else if (key == "reset_optimizer") t.reset_optimizer_between_phases = parse_bool(key, v);
  else if (key == "rl_from_best_pretrain") t.rl_from_best_pretrain = parse_bool(key, v);
  else if (key == "objective") {
    if (v == "gold_actions") t.objective = PretrainObjective::kGoldActions;
    else if (v == "gold_only") t.objective = PretrainObjective::kGoldOnly;
    else throw ConfigError(key, "expected gold_actions or gold_only, got '" + v + "'");
  } else if (key == "workers") config.workers = positive_int(key, v, false);
  else throw ConfigError(key, "unknown setting");
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(n), "expected key=value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  for (const auto& [k, v] : parse_config_text(ss.str())) apply_setting(config, k, v);
}

void RunConfig::validate() const {
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config", e.what());
  }
  if (workers < 1) throw ConfigError("workers", "must be positive");
}

std::string describe(const TrainConfig& c) {
  std::ostringstream os;
  os << "pretrain: epochs=" << c.pretrain.epochs << " batch=" << c.pretrain.batch << " dropout=" << c.pretrain.dropout
     << " lr=" << c.pretrain.learning_rate << "\n"
     << "rl: " << (c.run_rl ? "on" : "off") << " epochs=" << c.rl.epochs << " batch=" << c.rl.batch
     << " dropout=" << c.rl.dropout << " lr=" << c.rl.learning_rate << " baseline=" << (c.use_baseline ? "on" : "off")
     << " start=" << (c.rl_from_best_pretrain ? "best-pretrain" : "last-pretrain")
     << "\n"
     << "model: d_emb=" << c.d_emb << " d_hidden=" << c.d_hidden << " hidden=" << c.hidden1 << "/" << c.hidden2
     << "  seed=" << c.seed << " split_seed=" << c.split_seed << " dev_fraction=" << c.dev_fraction << "\n";
  return os.str();
}

}  // namespace zpr
