#include "rstc/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>
#include <stdexcept>

#include "rstc/errors.hpp"

namespace rstc {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw std::invalid_argument("not a number");
  return out;
}

std::uint64_t parse_unsigned(std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("not a nonnegative integer");
  }
  return out;
}

template <typename Enum>
Enum parse_enum(std::string_view v, const std::vector<std::pair<std::string_view, Enum>>& table) {
  for (const auto& [name, value] : table) {
    if (name == v) return value;
  }
  std::string allowed;
  for (const auto& entry : table) allowed += (allowed.empty() ? "" : "|") + std::string(entry.first);
  throw std::invalid_argument("expected one of " + allowed);
}

const std::vector<std::pair<std::string_view, OtMode>> kOtModes = {
    {"saot", OtMode::kSaot}, {"fixed", OtMode::kFixed}, {"ma", OtMode::kMovingAverage},
    {"kl", OtMode::kKl}};
const std::vector<std::pair<std::string_view, Epsilon2Preset>> kPresets = {
    {"balanced", Epsilon2Preset::kBalanced},
    {"light_imbalanced", Epsilon2Preset::kLightImbalanced},
    {"heavy_imbalanced", Epsilon2Preset::kHeavyImbalanced}};
const std::vector<std::pair<std::string_view, MarginalPenalty>> kPenalties = {
    {"log_barrier", MarginalPenalty::kLogBarrier},
    {"kl_to_previous", MarginalPenalty::kKlToPrevious}};
const std::vector<std::pair<std::string_view, SaotUpdate>> kUpdates = {
    {"joint", SaotUpdate::kJoint}, {"alternating", SaotUpdate::kAlternating}};
const std::vector<std::pair<std::string_view, AugmentStrategy>> kStrategies = {
    {"precomputed", AugmentStrategy::kPrecomputed},
    {"gaussian_noise", AugmentStrategy::kGaussianNoise},
    {"feature_dropout", AugmentStrategy::kFeatureDropout}};

template <typename Enum>
std::string_view enum_name(Enum value,
                           const std::vector<std::pair<std::string_view, Enum>>& table) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "?";
}

using Setter = std::function<void(TrainConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    auto real = [&](const char* key, auto member) {
      t[key] = [member](TrainConfig& c, std::string_view v) { member(c) = parse_real(v); };
    };
    auto count = [&](const char* key, auto member) {
      t[key] = [member](TrainConfig& c, std::string_view v) {
        member(c) = static_cast<std::size_t>(parse_unsigned(v));
      };
    };
    real("lambda_i", [](TrainConfig& c) -> double& { return c.lambda_i; });
    count("batch_size", [](TrainConfig& c) -> std::size_t& { return c.batch_size; });
    real("delta", [](TrainConfig& c) -> double& { return c.delta; });
    t["max_steps"] = [](TrainConfig& c, std::string_view v) {
      c.max_steps = static_cast<std::size_t>(parse_unsigned(v));
    };
    count("warmup_instance_only_steps",
          [](TrainConfig& c) -> std::size_t& { return c.warmup_instance_only_steps; });
    count("num_refreshes", [](TrainConfig& c) -> std::size_t& { return c.num_refreshes; });
    count("initial_fit_epochs",
          [](TrainConfig& c) -> std::size_t& { return c.initial_fit_epochs; });
    real("head_lr", [](TrainConfig& c) -> double& { return c.head_lr; });
    count("projection_dim", [](TrainConfig& c) -> std::size_t& { return c.projection_dim; });
    real("tau", [](TrainConfig& c) -> double& { return c.tau; });
    t["seed"] = [](TrainConfig& c, std::string_view v) { c.seed = parse_unsigned(v); };
    t["ot_mode"] = [](TrainConfig& c, std::string_view v) { c.ot_mode = parse_enum(v, kOtModes); };
    t["epsilon2_preset"] = [](TrainConfig& c, std::string_view v) {
      c.epsilon2_preset = parse_enum(v, kPresets);
    };
    real("ma_mu", [](TrainConfig& c) -> double& { return c.ma_mu; });
    count("fixed_ot_iters", [](TrainConfig& c) -> std::size_t& { return c.fixed_ot_iters; });

    real("saot.epsilon1", [](TrainConfig& c) -> double& { return c.saot.epsilon1; });
    real("saot.epsilon2", [](TrainConfig& c) -> double& { return c.saot.epsilon2; });
    count("saot.outer_iters", [](TrainConfig& c) -> std::size_t& { return c.saot.outer_iters; });
    count("saot.newton_iters", [](TrainConfig& c) -> std::size_t& { return c.saot.newton_iters; });
    real("saot.marginal_floor", [](TrainConfig& c) -> double& { return c.saot.marginal_floor; });
    real("saot.stall_tol", [](TrainConfig& c) -> double& { return c.saot.stall_tol; });
    real("saot.marginal_change_tol",
         [](TrainConfig& c) -> double& { return c.saot.marginal_change_tol; });
    count("saot.polish_iters", [](TrainConfig& c) -> std::size_t& { return c.saot.polish_iters; });
    t["saot.penalty"] = [](TrainConfig& c, std::string_view v) {
      c.saot.penalty = parse_enum(v, kPenalties);
    };
    t["saot.update"] = [](TrainConfig& c, std::string_view v) {
      c.saot.update = parse_enum(v, kUpdates);
    };

    t["augment.strategy"] = [](TrainConfig& c, std::string_view v) {
      c.augment.strategy = parse_enum(v, kStrategies);
    };
    real("augment.noise_sigma", [](TrainConfig& c) -> double& { return c.augment.noise_sigma; });
    real("augment.dropout_rate", [](TrainConfig& c) -> double& { return c.augment.dropout_rate; });
    t["augment.seed"] = [](TrainConfig& c, std::string_view v) { c.augment.seed = parse_unsigned(v); };
    return t;
  }();
  return table;
}

std::string canonical_key(std::string_view key) {
  static const std::set<std::string, std::less<>> saot_fields = {
      "epsilon1",     "epsilon2",  "outer_iters",         "newton_iters", "marginal_floor",
      "stall_tol",    "marginal_change_tol", "polish_iters", "penalty",   "update"};
  if (saot_fields.contains(key)) return "saot." + std::string(key);
  return std::string(key);
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

OtMode parse_ot_mode(std::string_view text) { return parse_enum(text, kOtModes); }
std::string_view ot_mode_name(OtMode mode) noexcept { return enum_name(mode, kOtModes); }

TrainConfig parse_train_config(std::string_view text) {
  TrainConfig cfg;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument(where + "expected key = value");
    const std::string key = canonical_key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) throw std::invalid_argument(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw std::invalid_argument(where + "duplicate key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + key + ": " + e.what() + " (got '" + std::string(value) +
                                  "')");
    }
  }
  if (seen.contains("epsilon2_preset") && seen.contains("saot.epsilon2")) {
    throw std::invalid_argument("config: set either epsilon2 or epsilon2_preset, not both");
  }
  return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatErrorKind::kIo, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_train_config(buffer.str());
}

std::string format_train_config(const TrainConfig& c) {
  std::ostringstream out;
  out << "lambda_i = " << format_real(c.lambda_i) << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "delta = " << format_real(c.delta) << '\n';
  if (c.max_steps) out << "max_steps = " << *c.max_steps << '\n';
  out << "warmup_instance_only_steps = " << c.warmup_instance_only_steps << '\n'
      << "num_refreshes = " << c.num_refreshes << '\n'
      << "initial_fit_epochs = " << c.initial_fit_epochs << '\n'
      << "head_lr = " << format_real(c.head_lr) << '\n'
      << "projection_dim = " << c.projection_dim << '\n'
      << "tau = " << format_real(c.tau) << '\n'
      << "seed = " << c.seed << '\n'
      << "ot_mode = " << ot_mode_name(c.ot_mode) << '\n';
  if (c.epsilon2_preset) {
    out << "epsilon2_preset = " << enum_name(*c.epsilon2_preset, kPresets) << '\n';
  } else {
    out << "saot.epsilon2 = " << format_real(c.saot.epsilon2) << '\n';
  }
  out << "ma_mu = " << format_real(c.ma_mu) << '\n'
      << "fixed_ot_iters = " << c.fixed_ot_iters << '\n'
      << "saot.epsilon1 = " << format_real(c.saot.epsilon1) << '\n'
      << "saot.outer_iters = " << c.saot.outer_iters << '\n'
      << "saot.newton_iters = " << c.saot.newton_iters << '\n'
      << "saot.marginal_floor = " << format_real(c.saot.marginal_floor) << '\n'
      << "saot.stall_tol = " << format_real(c.saot.stall_tol) << '\n'
      << "saot.marginal_change_tol = " << format_real(c.saot.marginal_change_tol) << '\n'
      << "saot.polish_iters = " << c.saot.polish_iters << '\n'
      << "saot.penalty = " << enum_name(c.saot.penalty, kPenalties) << '\n'
      << "saot.update = " << enum_name(c.saot.update, kUpdates) << '\n';
  if (c.augment.strategy) {
    out << "augment.strategy = " << enum_name(*c.augment.strategy, kStrategies) << '\n';
  }
  out << "augment.noise_sigma = " << format_real(c.augment.noise_sigma) << '\n'
      << "augment.dropout_rate = " << format_real(c.augment.dropout_rate) << '\n'
      << "augment.seed = " << c.augment.seed << '\n';
  return out.str();
}

}  // namespace rstc
