// Copyright 2026 The bankmfg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bankmfg/config.hpp"

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "bankmfg/errors.hpp"

namespace bankmfg {

void RunConfig::validate() const {
  game.validate();
  train.validate();
  evaluation.validate();
  if (checkpoint_every < 1) throw DomainError("checkpoint_every must be >= 1");
  if (output_dir.empty()) throw DomainError("output_dir must not be empty");
}

namespace {

std::string anchor(const std::string& source, const YAML::Mark& mark) {
  std::ostringstream out;
  out << source;
  if (!mark.is_null()) out << ':' << mark.line + 1 << ':' << mark.column + 1;
  return out.str();
}

// A YAML mapping whose keys are consumed one by one; finish() rejects the
// rest.
class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (!node_.IsMap()) fail(node_.Mark(), path_, "expected a mapping");
  }

  template <typename T>
  T get(const std::string& key) {
    const YAML::Node value = lookup(key);
    try {
      return value.as<T>();
    } catch (const YAML::Exception&) {
      fail(value.Mark(), name(key), "expected " + type_name<T>());
    }
  }

  template <typename T>
  std::vector<T> get_list(const std::string& key) {
    const YAML::Node value = lookup(key);
    if (!value.IsSequence()) fail(value.Mark(), name(key), "expected a list");
    std::vector<T> out;
    for (const YAML::Node& item : value) {
      try {
        out.push_back(item.as<T>());
      } catch (const YAML::Exception&) {
        fail(item.Mark(), name(key), "expected a list of " + type_name<T>());
      }
    }
    return out;
  }

  bool has(const std::string& key) const { return node_[key].IsDefined(); }

  Section child(const std::string& key) {
    return Section(lookup(key), name(key), source_);
  }

  // Runs `check`, anchoring any DomainError at `key`.
  template <typename F>
  void check(const std::string& key, F&& check_fn) {
    try {
      check_fn();
    } catch (const DomainError& e) {
      const YAML::Node value = node_[key];
      fail(value.IsDefined() ? value.Mark() : node_.Mark(), name(key),
           e.what());
    }
  }

  // Anchors a DomainError at this section.
  template <typename F>
  void check_section(F&& check_fn) {
    try {
      check_fn();
    } catch (const DomainError& e) {
      fail_here(e.what());
    }
  }

  void finish() const {
    for (const auto& entry : node_) {
      const std::string key = entry.first.as<std::string>();
      if (!consumed_.contains(key)) {
        fail(entry.first.Mark(), name(key), "unknown key");
      }
    }
  }

  [[noreturn]] void fail_here(const std::string& message) const {
    fail(node_.Mark(), path_.empty() ? "<root>" : path_, message);
  }

  [[noreturn]] void fail(const YAML::Mark& mark, const std::string& key,
                         const std::string& message) const {
    throw ConfigError(anchor(source_, mark) + ": " + key + ": " + message);
  }

 private:
  template <typename T>
  static std::string type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    if constexpr (std::is_integral_v<T>) return "an integer";
    if constexpr (std::is_floating_point_v<T>) return "a number";
    return "a string";
  }

  std::string name(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  YAML::Node lookup(const std::string& key) {
    consumed_.insert(key);
    const YAML::Node value = node_[key];
    if (!value.IsDefined() || value.IsNull()) {
      fail(node_.Mark(), name(key), "missing required key");
    }
    return value;
  }

  YAML::Node node_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> consumed_;
};

MarketParams read_market(Section s) {
  MarketParams p;
  p.kappa_major = s.get<double>("kappa_major");
  p.kappa_minor = s.get<double>("kappa_minor");
  p.delta_major = s.get<double>("delta_major");
  p.delta_minor = s.get<double>("delta_minor");
  p.deposit_volume = s.get<double>("deposit_volume");
  p.premium_major = s.get<double>("premium_major");
  p.premium_minor = s.get<double>("premium_minor");
  p.discount = s.get<double>("discount");
  p.cost_linear = s.get<double>("cost_linear");
  p.cost_fixed = s.get<double>("cost_fixed");
  p.horizon = s.get<int>("horizon");
  p.dt = s.get<double>("dt");
  p.rate_min = s.get<double>("rate_min");
  p.rate_max = s.get<double>("rate_max");
  p.prop_min = s.get<double>("prop_min");
  p.prop_max = s.get<double>("prop_max");
  s.finish();
  s.check_section([&] { p.validate(); });
  return p;
}

GridSpec read_grid(Section s) {
  const double p_min = s.get<double>("p_min");
  const double p_max = s.get<double>("p_max");
  const int p_count = s.get<int>("p_count");
  const double r_min = s.get<double>("r_min");
  const double r_max = s.get<double>("r_max");
  const int r_count = s.get<int>("r_count");
  s.finish();
  GridSpec grid;
  s.check_section([&] {
    grid = GridSpec::uniform(p_min, p_max, p_count, r_min, r_max, r_count);
    grid.validate();
  });
  return grid;
}

CentralBankChain read_chain(Section s, double dt) {
  std::vector<double> rates = s.get_list<double>("rates");
  const bool has_lambda = s.has("lambda");
  const bool has_matrix = s.has("transition");
  if (has_lambda == has_matrix) {
    s.fail_here("exactly one of 'lambda' and 'transition' is required");
  }
  std::optional<CentralBankChain> chain;
  if (has_lambda) {
    const double lambda = s.get<double>("lambda");
    s.finish();
    s.check("lambda", [&] { chain.emplace(rates, lambda, dt); });
  } else {
    const auto n = static_cast<Eigen::Index>(rates.size());
    Eigen::MatrixXd matrix(n, n);
    const auto flat = s.get_list<std::vector<double>>("transition");
    s.finish();
    s.check("transition", [&] {
      if (static_cast<Eigen::Index>(flat.size()) != n) {
        throw DomainError("transition needs one row per rate");
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = flat[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != n) {
          throw DomainError("transition rows need one entry per rate");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
          matrix(i, j) = row[static_cast<std::size_t>(j)];
        }
      }
      chain.emplace(rates, matrix);
    });
  }
  return *chain;
}

ActionGrid read_actions(Section s) {
  const double lo = s.get<double>("min");
  const double hi = s.get<double>("max");
  const int count = s.get<int>("count");
  s.finish();
  std::optional<ActionGrid> grid;
  s.check_section([&] { grid.emplace(lo, hi, count); });
  return *grid;
}

InitialCondition read_initial(Section s) {
  InitialCondition init;
  init.major.p = s.get<double>("major_p");
  init.major.r = s.get<double>("major_r");
  init.cb_rate = s.get<double>("cb_rate");
  init.minor_p_lo = s.get<double>("minor_p_min");
  init.minor_p_hi = s.get<double>("minor_p_max");
  init.minor_r_lo = s.get<double>("minor_r_min");
  init.minor_r_hi = s.get<double>("minor_r_max");
  init.minor_resolution = s.get<int>("resolution");
  s.finish();
  return init;
}

TrainConfig read_train(Section s) {
  TrainConfig c;
  c.outer_iterations = s.get<int>("outer_iterations");
  c.inner_iterations = s.get<int>("inner_iterations");
  c.batch_size = s.get<int>("batch_size");
  c.width = s.get<int>("width");
  c.learning_rate = s.get<double>("learning_rate");
  s.check("averaging", [&] {
    c.averaging = averaging_mode_from_string(s.get<std::string>("averaging"));
  });
  c.replay_mix = s.get<double>("replay_mix");
  s.check("activation", [&] {
    c.activation = activation_from_string(s.get<std::string>("activation"));
  });
  c.stop_gradient = s.get<bool>("stop_gradient");
  s.check("continuation", [&] {
    c.continuation =
        continuation_order_from_string(s.get<std::string>("continuation"));
  });
  c.divergence_threshold = s.get<double>("divergence_threshold");
  c.record_wall_clock = s.get<bool>("record_wall_clock");
  s.finish();
  s.check_section([&] { c.validate(); });
  return c;
}

EvaluationConfig read_evaluation(Section s) {
  EvaluationConfig c;
  c.br_p_points = s.get<int>("br_p_points");
  c.major_br_horizon = s.get<int>("major_br_horizon");
  c.major_tree_budget = s.get<double>("major_tree_budget");
  c.minor_exact_budget = s.get<double>("minor_exact_budget");
  c.sampled_paths = s.get<int>("sampled_paths");
  s.finish();
  s.check_section([&] { c.validate(); });
  return c;
}

}  // namespace

RunConfig parse_run_config(const std::string& text,
                           const std::string& source_name) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(anchor(source_name, e.mark) + ": " + e.msg);
  }
  if (!doc.IsMap()) {
    throw ConfigError(source_name + ": expected a mapping at the top level");
  }
  Section root(doc, "", source_name);
  RunConfig config;
  config.seed = root.get<std::uint64_t>("seed");
  config.output_dir = root.get<std::string>("output_dir");
  config.checkpoint_every = root.get<int>("checkpoint_every");
  root.check("checkpoint_every", [&] {
    if (config.checkpoint_every < 1) {
      throw DomainError("must be >= 1");
    }
  });
  MarketParams market = read_market(root.child("market"));
  GridSpec grid = read_grid(root.child("grid"));
  CentralBankChain chain = read_chain(root.child("central_bank"), market.dt);
  ActionGrid actions = read_actions(root.child("actions"));
  InitialCondition initial = read_initial(root.child("initial"));
  config.train = read_train(root.child("train"));
  config.evaluation = read_evaluation(root.child("evaluation"));
  root.finish();
  config.train.seed = config.seed;
  config.game = Game{market, std::move(grid), std::move(chain),
                     std::move(actions), initial};
  root.check_section([&] { config.game.validate(); });
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path);
}

}  // namespace bankmfg
