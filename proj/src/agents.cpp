#include "jssp/agents.hpp"

#include <cctype>

namespace jssp {

Method parse_method(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "mqrdqn") return Method::Mqrdqn;
  if (lower == "dmsac") return Method::Dmsac;
  if (lower == "bc") return Method::Bc;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected mqrdqn, dmsac or bc)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Mqrdqn: return "mqrdqn";
    case Method::Dmsac: return "dmsac";
    case Method::Bc: return "bc";
  }
  return "?";
}

void AgentConfig::validate() const {
  if (!(gamma >= 0 && gamma <= 1)) throw ConfigError("gamma must lie in [0, 1]");
  if (n_quantiles < 1) throw ConfigError("n_quantiles must be at least 1");
  if (!(c_h > 0 && c_h <= 1)) throw ConfigError("c_h must lie in (0, 1]");
  if (!(kappa > 0)) throw ConfigError("kappa must be positive");
  if (!(alpha_cql >= 0)) throw ConfigError("alpha_cql must be non-negative");
  if (target_update_every < 1) throw ConfigError("target_update_every must be at least 1");
  if (!(dropout >= 0 && dropout < 1)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(adam.lr > 0)) throw ConfigError("learning rate must be positive");
}

void check_actions(const Mask& mask, std::span<const int> actions) {
  if (static_cast<Index>(actions.size()) != mask.rows()) throw ShapeError("one dataset action per row expected");
  for (std::size_t r = 0; r < actions.size(); ++r) {
    const int a = actions[r];
    if (a < 0 || a >= mask.cols() || !mask(static_cast<Index>(r), a))
      throw DataError("dataset action " + std::to_string(a) + " is masked in row " + std::to_string(r));
  }
}

BatchView view_batch(std::span<const Transition* const> batch) {
  if (batch.empty()) throw DataError("empty training batch");
  BatchView view;
  std::vector<const Observation*> states, next;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const Transition& t = *batch[r];
    states.push_back(t.obs.get());
    view.actions.push_back(t.action);
    view.rewards.push_back(t.reward);
    view.terminal.push_back(t.terminal ? 1 : 0);
    if (!t.terminal) {
      next.push_back(t.next_obs.get());
      view.next_rows.push_back(static_cast<Index>(r));
    }
  }
  view.states = batch_observations(states);
  if (!next.empty()) view.next_states = batch_observations(next);
  return view;
}

}  // namespace jssp
