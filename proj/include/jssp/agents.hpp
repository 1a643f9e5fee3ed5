#ifndef JSSP_AGENTS_HPP
#define JSSP_AGENTS_HPP

// Offline learning objectives and the three trainable dispatchers:
// CQL-regularized quantile regression DQN, discrete soft actor-critic with
// twin critics and learned temperature, and behaviour cloning.
//
// Batched losses take per-job score matrices (batch x jobs) together with the
// legality mask of the same shape. Masked entries never enter a loss.

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "jssp/autodiff.hpp"
#include "jssp/dataset.hpp"
#include "jssp/model.hpp"

namespace jssp {

enum class Method { Mqrdqn, Dmsac, Bc };

Method parse_method(std::string_view name);
std::string method_name(Method m);

struct AgentConfig {
  double alpha_cql = 1.0;
  double gamma = 1.0;
  int n_quantiles = 32;
  double kappa = 1.0;
  double c_h = 0.98;
  long target_update_every = 2500;
  double dropout = 0.4;
  ad::AdamConfig adam{};

  // Throws ConfigError.
  void validate() const;
};

// ---- Losses ------------------------------------------------------------

// Throws DataError when some dataset action is masked.
void check_actions(const Mask& mask, std::span<const int> actions);

// alpha * mean_b [ logsumexp over legal q_b - q_b(a_b) ].
template <typename Scalar>
ad::Tensor<Scalar> cql_term(const ad::Tensor<Scalar>& q, const Mask& mask, std::span<const int> actions,
                            double alpha_cql) {
  check_actions(mask, actions);
  std::vector<Index> cols(actions.begin(), actions.end());
  const auto gap = ad::sub(ad::logsumexp_masked(q, mask), ad::pick(q, cols));
  return ad::scale(ad::mean(gap), Scalar(alpha_cql));
}

// Bootstrapped quantile targets for one transition. `next_quantiles` is
// jobs x N, `next_mask` 1 x jobs. The bootstrap action maximises the mean
// quantile over legal next actions.
template <typename Scalar>
ad::Matrix<Scalar> qrdqn_target(Scalar reward, const ad::Matrix<Scalar>& next_quantiles, const Mask& next_mask,
                                bool terminal, double gamma) {
  const Index n = next_quantiles.cols();
  if (terminal) return ad::Matrix<Scalar>::Constant(1, n, reward);
  if (next_mask.rows() != 1 || next_mask.cols() != next_quantiles.rows())
    throw ShapeError("next mask does not match the quantile table");
  const ad::Matrix<Scalar> means = next_quantiles.rowwise().mean().transpose();
  const int best = masked_argmax(means.row(0), next_mask, 0);
  ad::Matrix<Scalar> out = next_quantiles.row(best);
  out.array() = reward + Scalar(gamma) * out.array();
  return out;
}

// Quantile midpoints (2i - 1) / 2N for i = 1..N.
template <typename Scalar>
ad::Matrix<Scalar> quantile_midpoints(Index n) {
  ad::Matrix<Scalar> tau(1, n);
  for (Index i = 0; i < n; ++i) tau(0, i) = Scalar(2 * i + 1) / Scalar(2 * n);
  return tau;
}

// Quantile Huber loss: mean over the batch of
// sum_i mean_j |tau_i - 1{u_ij < 0}| * huber(u_ij), u_ij = target_j - pred_i.
template <typename Scalar>
ad::Tensor<Scalar> qrdqn_loss(const ad::Tensor<Scalar>& pred, const ad::Matrix<Scalar>& target, double kappa) {
  const Index b = pred.rows(), n = pred.cols();
  if (target.rows() != b || target.cols() != n) throw ShapeError("quantile target shape differs from prediction");
  // Column i*n + j of the expanded tables pairs prediction i with target j.
  ad::Matrix<Scalar> expand = ad::Matrix<Scalar>::Zero(n, n * n);
  for (Index i = 0; i < n; ++i) expand.block(i, i * n, 1, n).setOnes();
  ad::Matrix<Scalar> tiled(b, n * n);
  for (Index i = 0; i < n; ++i) tiled.middleCols(i * n, n) = target;
  const auto u = ad::sub(ad::Tensor<Scalar>::constant(tiled), ad::matmul(pred, ad::Tensor<Scalar>::constant(expand)));
  const auto tau = quantile_midpoints<Scalar>(n);
  ad::Matrix<Scalar> weight(b, n * n);
  for (Index r = 0; r < b; ++r)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        const Scalar below = u.value()(r, i * n + j) < 0 ? Scalar(1) : Scalar(0);
        weight(r, i * n + j) = std::abs(tau(0, i) - below);
      }
  const auto rho = ad::mul(ad::huber(u, Scalar(kappa)), ad::Tensor<Scalar>::constant(std::move(weight)));
  return ad::scale(ad::sum(rho), Scalar(1) / Scalar(b * n));
}

namespace detail {

template <typename Scalar>
ad::Matrix<Scalar> legal_min(const ad::Matrix<Scalar>& q1, const ad::Matrix<Scalar>& q2, const Mask& mask) {
  if (q1.rows() != q2.rows() || q1.cols() != q2.cols()) throw ShapeError("critic outputs differ in shape");
  ad::detail::check_mask(mask, q1.rows(), q1.cols(), "legal_min");
  return mask.select(q1.cwiseMin(q2), ad::Matrix<Scalar>::Zero(q1.rows(), q1.cols()));
}

}  // namespace detail

// mean_b sum_a pi(a) * (alpha * log pi(a) - min(q1, q2)(a)) over legal a.
// `probs` and `log_probs` must come from the masked softmax ops so that masked
// entries are exactly zero.
template <typename Scalar>
ad::Tensor<Scalar> sac_policy_loss(const ad::Tensor<Scalar>& probs, const ad::Tensor<Scalar>& log_probs,
                                   const ad::Matrix<Scalar>& q1, const ad::Matrix<Scalar>& q2, Scalar alpha,
                                   const Mask& mask) {
  const auto min_q = ad::Tensor<Scalar>::constant(detail::legal_min(q1, q2, mask));
  const auto inner = ad::sub(ad::scale(log_probs, alpha), min_q);
  return ad::scale(ad::sum(ad::mul(probs, inner)), Scalar(1) / Scalar(probs.rows()));
}

// r + gamma * sum_a pi(a|s') min(q1', q2')(s', a); r when terminal.
template <typename Scalar>
Scalar sac_q_target(Scalar reward, const ad::Matrix<Scalar>& next_probs, const ad::Matrix<Scalar>& next_q1,
                    const ad::Matrix<Scalar>& next_q2, const Mask& next_mask, bool terminal, double gamma) {
  if (terminal) return reward;
  const auto min_q = detail::legal_min(next_q1, next_q2, next_mask);
  return reward + Scalar(gamma) * next_probs.cwiseProduct(min_q).sum();
}

// alpha * mean_b [ H(pi_b) - c_h * log|A(s_b)| ] with alpha = exp(log_alpha);
// the gradient reaches log_alpha only. Throws DataError on an empty action set.
template <typename Scalar>
ad::Tensor<Scalar> temperature_loss(const ad::Matrix<Scalar>& probs, const ad::Matrix<Scalar>& log_probs,
                                    const Mask& mask, double c_h, const ad::Tensor<Scalar>& log_alpha) {
  ad::detail::check_mask(mask, probs.rows(), probs.cols(), "temperature_loss");
  double total = 0;
  for (Index r = 0; r < probs.rows(); ++r) {
    const Index legal = mask.row(r).count();
    if (legal == 0) throw DataError("state without legal actions");
    double entropy = 0;
    for (Index c = 0; c < probs.cols(); ++c)
      if (mask(r, c)) entropy -= double(probs(r, c)) * double(log_probs(r, c));
    total += entropy - c_h * std::log(static_cast<double>(legal));
  }
  const Scalar excess = Scalar(total / static_cast<double>(probs.rows()));
  return ad::scale(ad::exp(log_alpha), excess);
}

// Masked cross-entropy of the dataset action, batch averaged.
template <typename Scalar>
ad::Tensor<Scalar> bc_loss(const ad::Tensor<Scalar>& logits, const Mask& mask, std::span<const int> actions) {
  check_actions(mask, actions);
  std::vector<Index> cols(actions.begin(), actions.end());
  return ad::scale(ad::mean(ad::pick(ad::log_softmax_masked(logits, mask), cols)), Scalar(-1));
}

// Hard copy when step is a positive multiple of `every`. Returns whether it copied.
template <typename Scalar>
bool sync_target(const NamedParams<Scalar>& online, NamedParams<Scalar>& target, long step, long every) {
  if (every <= 0) throw ConfigError("target update period must be positive");
  if (step <= 0 || step % every != 0) return false;
  copy_parameters(online, target);
  return true;
}

// ---- Agents ------------------------------------------------------------

struct StepLosses {
  double total = 0;
  double td = 0;
  double cql = 0;
  double policy = 0;
  double alpha = 0;
};

// Dataset batch unpacked into tensors-ready form.
struct BatchView {
  GraphBatch states;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<std::uint8_t> terminal;
  // Successor states of the non-terminal rows, and those rows' positions.
  GraphBatch next_states;
  std::vector<Index> next_rows;
};

BatchView view_batch(std::span<const Transition* const> batch);

template <typename Scalar>
class Agent {
 public:
  virtual ~Agent() = default;

  virtual Method method() const = 0;
  // One optimisation step; `step` counts from 1 and drives target syncing.
  virtual StepLosses train_step(const BatchView& batch, long step) = 0;
  // Greedy decision scores, batch x jobs, evaluation mode. Higher is better.
  virtual ad::Matrix<Scalar> decision_scores(const GraphBatch& states) const = 0;
  virtual Checkpoint checkpoint() const = 0;
  // Throws CompatibilityError on a method or architecture mismatch.
  virtual void load(const Checkpoint& ckpt) = 0;

  int act(const Observation& obs) const {
    const auto batch = batch_observation(obs);
    return masked_argmax(decision_scores(batch).row(0), batch.mask, 0);
  }

  const AgentConfig& config() const { return config_; }

 protected:
  explicit Agent(const AgentConfig& config) : config_(config) { config_.validate(); }

  std::map<std::string, std::string> base_meta(const Architecture& arch) const {
    auto meta = architecture_meta(arch);
    meta["method"] = method_name(method());
    return meta;
  }

  AgentConfig config_;
};

namespace detail {

inline Architecture make_architecture(const AgentConfig& config, int outputs) {
  Architecture arch;
  arch.outputs = outputs;
  arch.dropout = config.dropout;
  return arch;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void add_config_meta(std::map<std::string, std::string>& meta, const AgentConfig& c) {
  meta["agent.alpha_cql"] = format_double(c.alpha_cql);
  meta["agent.gamma"] = format_double(c.gamma);
  meta["agent.kappa"] = format_double(c.kappa);
  meta["agent.c_h"] = format_double(c.c_h);
  meta["agent.target_update_every"] = std::to_string(c.target_update_every);
  meta["agent.lr"] = format_double(c.adam.lr);
}

template <typename Scalar>
std::vector<ad::Tensor<Scalar>> tensors_of(const NamedParams<Scalar>& named) {
  std::vector<ad::Tensor<Scalar>> out;
  for (const auto& [name, t] : named) out.push_back(t);
  return out;
}

template <typename Scalar>
ad::Matrix<Scalar> eval_scores(const Network<Scalar>& net, const GraphBatch& states) {
  ad::NoGradGuard guard;
  return per_job(net.forward(states), states.num_graphs, states.num_jobs).value();
}

}  // namespace detail

template <typename Scalar>
class QrdqnAgent final : public Agent<Scalar> {
 public:
  using T = ad::Tensor<Scalar>;

  QrdqnAgent(const AgentConfig& config, std::uint64_t seed) : Agent<Scalar>(config), rng_(seed) {
    Rng init = rng_.split();
    online_ = Network<Scalar>(detail::make_architecture(this->config_, this->config_.n_quantiles), init);
    target_ = online_.clone();
    online_params_ = online_.parameters("q.");
    target_params_ = target_.parameters("q.");
    opt_ = std::make_unique<ad::Adam<Scalar>>(detail::tensors_of(online_params_), this->config_.adam);
  }

  Method method() const override { return Method::Mqrdqn; }

  StepLosses train_step(const BatchView& batch, long step) override {
    const auto& cfg = this->config_;
    const Index b = batch.states.num_graphs, jobs = batch.states.num_jobs;
    const Index n = cfg.n_quantiles;

    ad::Matrix<Scalar> target(b, n);
    for (Index r = 0; r < b; ++r) target.row(r).setConstant(Scalar(batch.rewards[static_cast<std::size_t>(r)]));
    if (!batch.next_rows.empty()) {
      ad::NoGradGuard guard;
      const auto next = target_.forward(batch.next_states).value();
      for (std::size_t k = 0; k < batch.next_rows.size(); ++k) {
        const Index r = batch.next_rows[k];
        const Mask next_mask = batch.next_states.mask.row(static_cast<Index>(k));
        target.row(r) = qrdqn_target<Scalar>(Scalar(batch.rewards[static_cast<std::size_t>(r)]),
                                             next.middleRows(static_cast<Index>(k) * jobs, jobs), next_mask, false,
                                             cfg.gamma);
      }
    }

    opt_->zero_grad();
    const auto quantiles = online_.forward(batch.states, true, &rng_);
    std::vector<Index> taken(static_cast<std::size_t>(b));
    for (Index r = 0; r < b; ++r) taken[static_cast<std::size_t>(r)] = r * jobs + batch.actions[static_cast<std::size_t>(r)];
    const auto td = qrdqn_loss(ad::gather_rows(quantiles, taken), target, cfg.kappa);
    const auto cql = cql_term(per_job(quantiles, b, jobs), batch.states.mask, batch.actions, cfg.alpha_cql);
    const auto total = ad::add(cql, ad::scale(td, Scalar(0.5)));
    ad::backward(total);
    opt_->step();
    sync_target(online_params_, target_params_, step, cfg.target_update_every);
    return {double(total.item()), double(td.item()), double(cql.item()), 0.0, 0.0};
  }

  ad::Matrix<Scalar> decision_scores(const GraphBatch& states) const override {
    return detail::eval_scores(online_, states);
  }

  Checkpoint checkpoint() const override {
    Checkpoint ckpt;
    ckpt.meta = this->base_meta(online_.architecture());
    detail::add_config_meta(ckpt.meta, this->config_);
    append_tensors(ckpt, online_params_);
    return ckpt;
  }

  void load(const Checkpoint& ckpt) override {
    check_meta(this->base_meta(online_.architecture()), ckpt.meta);
    assign_tensors(ckpt, online_params_);
    copy_parameters(online_params_, target_params_);
  }

  const Network<Scalar>& online() const { return online_; }
  const Network<Scalar>& target() const { return target_; }
  NamedParams<Scalar>& online_params() { return online_params_; }
  const NamedParams<Scalar>& target_params() const { return target_params_; }

 private:
  Rng rng_;
  Network<Scalar> online_, target_;
  NamedParams<Scalar> online_params_, target_params_;
  std::unique_ptr<ad::Adam<Scalar>> opt_;
};

template <typename Scalar>
class SacAgent final : public Agent<Scalar> {
 public:
  using T = ad::Tensor<Scalar>;

  SacAgent(const AgentConfig& config, std::uint64_t seed) : Agent<Scalar>(config), rng_(seed) {
    Rng init = rng_.split();
    const auto arch = detail::make_architecture(this->config_, 1);
    actor_ = Network<Scalar>(arch, init);
    critic1_ = Network<Scalar>(arch, init);
    critic2_ = Network<Scalar>(arch, init);
    target1_ = critic1_.clone();
    target2_ = critic2_.clone();
    log_alpha_ = T::parameter(ad::Matrix<Scalar>::Zero(1, 1));
    actor_params_ = actor_.parameters("actor.");
    critic1_params_ = critic1_.parameters("critic1.");
    critic2_params_ = critic2_.parameters("critic2.");
    target1_params_ = target1_.parameters("critic1.");
    target2_params_ = target2_.parameters("critic2.");
    auto critics = detail::tensors_of(critic1_params_);
    for (auto& t : detail::tensors_of(critic2_params_)) critics.push_back(t);
    actor_opt_ = std::make_unique<ad::Adam<Scalar>>(detail::tensors_of(actor_params_), this->config_.adam);
    critic_opt_ = std::make_unique<ad::Adam<Scalar>>(std::move(critics), this->config_.adam);
    alpha_opt_ = std::make_unique<ad::Adam<Scalar>>(std::vector<T>{log_alpha_}, this->config_.adam);
  }

  Method method() const override { return Method::Dmsac; }

  Scalar alpha() const { return std::exp(log_alpha_.item()); }

  StepLosses train_step(const BatchView& batch, long step) override {
    const auto& cfg = this->config_;
    const Index b = batch.states.num_graphs, jobs = batch.states.num_jobs;
    const Scalar alpha_now = alpha();

    ad::Matrix<Scalar> y(b, 1);
    for (Index r = 0; r < b; ++r) y(r, 0) = Scalar(batch.rewards[static_cast<std::size_t>(r)]);
    if (!batch.next_rows.empty()) {
      ad::NoGradGuard guard;
      const auto& ns = batch.next_states;
      const auto probs = ad::softmax_masked(per_job(actor_.forward(ns), ns.num_graphs, jobs), ns.mask).value();
      const auto q1 = per_job(target1_.forward(ns), ns.num_graphs, jobs).value();
      const auto q2 = per_job(target2_.forward(ns), ns.num_graphs, jobs).value();
      for (std::size_t k = 0; k < batch.next_rows.size(); ++k) {
        const Index r = batch.next_rows[k], kk = static_cast<Index>(k);
        const Mask m = ns.mask.row(kk);
        y(r, 0) = sac_q_target<Scalar>(y(r, 0), probs.row(kk), q1.row(kk), q2.row(kk), m, false, cfg.gamma);
      }
    }

    // Critics.
    critic_opt_->zero_grad();
    const auto y_t = T::constant(y);
    const auto& mask = batch.states.mask;
    std::vector<Index> cols(batch.actions.begin(), batch.actions.end());
    const auto q1 = per_job(critic1_.forward(batch.states, true, &rng_), b, jobs);
    const auto q2 = per_job(critic2_.forward(batch.states, true, &rng_), b, jobs);
    auto squared = [](const T& e) { return ad::mean(ad::mul(e, e)); };
    const auto td1 = squared(ad::sub(ad::pick(q1, cols), y_t));
    const auto td2 = squared(ad::sub(ad::pick(q2, cols), y_t));
    const auto cql1 = cql_term(q1, mask, batch.actions, cfg.alpha_cql);
    const auto cql2 = cql_term(q2, mask, batch.actions, cfg.alpha_cql);
    const auto critic_loss = ad::add(ad::add(cql1, ad::scale(td1, Scalar(0.5))), ad::add(cql2, ad::scale(td2, Scalar(0.5))));
    ad::backward(critic_loss);
    critic_opt_->step();

    // Actor against the online critics.
    actor_opt_->zero_grad();
    ad::Matrix<Scalar> q1_now, q2_now;
    {
      ad::NoGradGuard guard;
      q1_now = per_job(critic1_.forward(batch.states), b, jobs).value();
      q2_now = per_job(critic2_.forward(batch.states), b, jobs).value();
    }
    const auto logits = per_job(actor_.forward(batch.states, true, &rng_), b, jobs);
    const auto probs = ad::softmax_masked(logits, mask);
    const auto log_probs = ad::log_softmax_masked(logits, mask);
    const auto policy_loss = sac_policy_loss(probs, log_probs, q1_now, q2_now, alpha_now, mask);
    ad::backward(policy_loss);
    actor_opt_->step();

    // Temperature.
    alpha_opt_->zero_grad();
    const auto alpha_loss = temperature_loss<Scalar>(probs.value(), log_probs.value(), mask, cfg.c_h, log_alpha_);
    ad::backward(alpha_loss);
    alpha_opt_->step();

    sync_target(critic1_params_, target1_params_, step, cfg.target_update_every);
    sync_target(critic2_params_, target2_params_, step, cfg.target_update_every);

    StepLosses out;
    out.td = 0.5 * (double(td1.item()) + double(td2.item()));
    out.cql = 0.5 * (double(cql1.item()) + double(cql2.item()));
    out.total = out.cql + 0.5 * out.td;
    out.policy = double(policy_loss.item());
    out.alpha = double(alpha());
    return out;
  }

  // Greedy decode takes the most probable action, i.e. the largest logit.
  ad::Matrix<Scalar> decision_scores(const GraphBatch& states) const override {
    return detail::eval_scores(actor_, states);
  }

  Checkpoint checkpoint() const override {
    Checkpoint ckpt;
    ckpt.meta = this->base_meta(actor_.architecture());
    detail::add_config_meta(ckpt.meta, this->config_);
    append_tensors(ckpt, actor_params_);
    append_tensors(ckpt, critic1_params_);
    append_tensors(ckpt, critic2_params_);
    append_tensors(ckpt, NamedParams<Scalar>{{"log_alpha", log_alpha_}});
    return ckpt;
  }

  void load(const Checkpoint& ckpt) override {
    check_meta(this->base_meta(actor_.architecture()), ckpt.meta);
    assign_tensors(ckpt, actor_params_);
    assign_tensors(ckpt, critic1_params_);
    assign_tensors(ckpt, critic2_params_);
    NamedParams<Scalar> alpha{{"log_alpha", log_alpha_}};
    assign_tensors(ckpt, alpha);
    copy_parameters(critic1_params_, target1_params_);
    copy_parameters(critic2_params_, target2_params_);
  }

  NamedParams<Scalar>& critic1_params() { return critic1_params_; }
  const NamedParams<Scalar>& target1_params() const { return target1_params_; }
  const T& log_alpha() const { return log_alpha_; }

 private:
  Rng rng_;
  Network<Scalar> actor_, critic1_, critic2_, target1_, target2_;
  T log_alpha_;
  NamedParams<Scalar> actor_params_, critic1_params_, critic2_params_, target1_params_, target2_params_;
  std::unique_ptr<ad::Adam<Scalar>> actor_opt_, critic_opt_, alpha_opt_;
};

template <typename Scalar>
class BcAgent final : public Agent<Scalar> {
 public:
  BcAgent(const AgentConfig& config, std::uint64_t seed) : Agent<Scalar>(config), rng_(seed) {
    Rng init = rng_.split();
    policy_ = Network<Scalar>(detail::make_architecture(this->config_, 1), init);
    params_ = policy_.parameters("policy.");
    opt_ = std::make_unique<ad::Adam<Scalar>>(detail::tensors_of(params_), this->config_.adam);
  }

  Method method() const override { return Method::Bc; }

  StepLosses train_step(const BatchView& batch, long) override {
    opt_->zero_grad();
    const auto logits = per_job(policy_.forward(batch.states, true, &rng_), batch.states.num_graphs,
                                batch.states.num_jobs);
    const auto loss = bc_loss(logits, batch.states.mask, batch.actions);
    ad::backward(loss);
    opt_->step();
    StepLosses out;
    out.total = out.policy = double(loss.item());
    return out;
  }

  ad::Matrix<Scalar> decision_scores(const GraphBatch& states) const override {
    return detail::eval_scores(policy_, states);
  }

  Checkpoint checkpoint() const override {
    Checkpoint ckpt;
    ckpt.meta = this->base_meta(policy_.architecture());
    detail::add_config_meta(ckpt.meta, this->config_);
    append_tensors(ckpt, params_);
    return ckpt;
  }

  void load(const Checkpoint& ckpt) override {
    check_meta(this->base_meta(policy_.architecture()), ckpt.meta);
    assign_tensors(ckpt, params_);
  }

 private:
  Rng rng_;
  Network<Scalar> policy_;
  NamedParams<Scalar> params_;
  std::unique_ptr<ad::Adam<Scalar>> opt_;
};

template <typename Scalar>
std::unique_ptr<Agent<Scalar>> make_agent(Method method, const AgentConfig& config, std::uint64_t seed) {
  switch (method) {
    case Method::Mqrdqn: return std::make_unique<QrdqnAgent<Scalar>>(config, seed);
    case Method::Dmsac: return std::make_unique<SacAgent<Scalar>>(config, seed);
    case Method::Bc: return std::make_unique<BcAgent<Scalar>>(config, seed);
  }
  throw ConfigError("unknown method");
}

// Rebuilds an agent from a checkpoint's metadata, then loads its weights.
template <typename Scalar>
std::unique_ptr<Agent<Scalar>> agent_from_checkpoint(const Checkpoint& ckpt) {
  auto get = [&](const std::string& key) {
    auto it = ckpt.meta.find(key);
    if (it == ckpt.meta.end()) throw CompatibilityError("checkpoint lacks " + key);
    return it->second;
  };
  const Method method = parse_method(get("method"));
  AgentConfig config;
  auto optional = [&](const std::string& key, auto& field) {
    auto it = ckpt.meta.find(key);
    if (it == ckpt.meta.end()) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(field)>, long>)
      field = std::stol(it->second);
    else
      field = std::stod(it->second);
  };
  try {
    config.dropout = std::stod(get("arch.dropout"));
    if (method == Method::Mqrdqn) config.n_quantiles = std::stoi(get("arch.outputs"));
    optional("agent.alpha_cql", config.alpha_cql);
    optional("agent.gamma", config.gamma);
    optional("agent.kappa", config.kappa);
    optional("agent.c_h", config.c_h);
    optional("agent.target_update_every", config.target_update_every);
    optional("agent.lr", config.adam.lr);
  } catch (const std::logic_error&) {
    throw CompatibilityError("malformed architecture metadata");
  }
  auto agent = make_agent<Scalar>(method, config, 0);
  agent->load(ckpt);
  return agent;
}

}  // namespace jssp

#endif  // JSSP_AGENTS_HPP
