#ifndef JSSP_MODEL_HPP
#define JSSP_MODEL_HPP

// Graph encoder and action-scoring heads.
//
// A batch of observations is packed block-diagonally into one node table. Each
// GIN layer computes h' = MLP(h + sum of h over in-neighbours), with messages
// flowing from an edge's source to its destination. The graph embedding is the
// mean of the embeddings of the available candidate operations (one per job
// that still has work). Each job is scored by a head applied to
// [candidate embedding, graph embedding].

#include <cmath>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jssp/autodiff.hpp"
#include "jssp/env.hpp"
#include "jssp/error.hpp"
#include "jssp/rng.hpp"

namespace jssp {

using ad::Index;
using ad::Mask;

struct GraphBatch {
  Index num_graphs = 0;
  Index num_jobs = 0;  // candidates per graph; every graph in a batch shares it
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> features;
  std::vector<Index> node_graph;  // graph id of each node
  std::vector<Index> edge_src, edge_dst;
  std::vector<Index> candidates;  // num_graphs * num_jobs node ids, row-major
  Mask mask;                      // num_graphs x num_jobs

  Index num_nodes() const { return features.rows(); }
};

// Packs observations; throws ShapeError when their job counts differ.
GraphBatch batch_observations(std::span<const Observation* const> observations);
GraphBatch batch_observation(const Observation& observation);

// Throws ShapeError on out-of-range ids, edges or candidates crossing graphs.
void check_batch(const GraphBatch& batch);

struct Architecture {
  int input_dim = 2;
  int hidden = 64;
  int gin_layers = 2;
  int gin_mlp_depth = 3;
  int head_hidden = 32;
  int outputs = 1;
  double dropout = 0.4;

  bool operator==(const Architecture&) const = default;
};

// Entries are "arch.<field>" so they can sit next to agent metadata.
std::map<std::string, std::string> architecture_meta(const Architecture& arch);

template <typename Scalar>
using NamedParams = std::vector<std::pair<std::string, ad::Tensor<Scalar>>>;

template <typename Scalar>
struct Linear {
  ad::Tensor<Scalar> weight;  // in x out
  ad::Tensor<Scalar> bias;    // 1 x out

  static Linear init(Index in, Index out, Rng& rng) {
    // Kaiming-uniform for ReLU networks.
    const double bound = std::sqrt(6.0 / static_cast<double>(in));
    ad::Matrix<Scalar> w(in, out);
    for (Index i = 0; i < w.size(); ++i) w.data()[i] = Scalar((2.0 * rng.uniform() - 1.0) * bound);
    return {ad::Tensor<Scalar>::parameter(std::move(w)),
            ad::Tensor<Scalar>::parameter(ad::Matrix<Scalar>::Zero(1, out))};
  }

  ad::Tensor<Scalar> operator()(const ad::Tensor<Scalar>& x) const { return ad::add(ad::matmul(x, weight), bias); }
};

// One graph embedding plus per-node embeddings.
template <typename Scalar>
struct Encoding {
  ad::Tensor<Scalar> nodes;  // num_nodes x hidden
  ad::Tensor<Scalar> graph;  // num_graphs x hidden
};

template <typename Scalar>
class Network {
 public:
  using T = ad::Tensor<Scalar>;

  Network() = default;
  Network(const Architecture& arch, Rng& rng) : arch_(arch) {
    if (arch.input_dim < 1 || arch.hidden < 1 || arch.gin_layers < 1 || arch.gin_mlp_depth < 1 ||
        arch.head_hidden < 1 || arch.outputs < 1 || arch.dropout < 0 || arch.dropout >= 1)
      throw ConfigError("invalid network architecture");
    Index in = arch.input_dim;
    for (int l = 0; l < arch.gin_layers; ++l) {
      std::vector<Linear<Scalar>> mlp;
      for (int d = 0; d < arch.gin_mlp_depth; ++d) {
        mlp.push_back(Linear<Scalar>::init(in, arch.hidden, rng));
        in = arch.hidden;
      }
      gin_.push_back(std::move(mlp));
    }
    head_hidden_ = Linear<Scalar>::init(2 * arch.hidden, arch.head_hidden, rng);
    head_out_ = Linear<Scalar>::init(arch.head_hidden, arch.outputs, rng);
  }

  const Architecture& architecture() const { return arch_; }

  Encoding<Scalar> encode(const GraphBatch& batch) const {
    check_batch(batch);
    if (batch.features.cols() != arch_.input_dim)
      throw ShapeError("node features have " + std::to_string(batch.features.cols()) + " columns, network expects " +
                       std::to_string(arch_.input_dim));
    T h = T::constant(batch.features.template cast<Scalar>());
    for (const auto& mlp : gin_) {
      T x = h;
      if (!batch.edge_src.empty())
        x = ad::add(h, ad::sum_segments(ad::gather_rows(h, batch.edge_src), batch.edge_dst, batch.num_nodes()));
      for (const auto& lin : mlp) x = ad::relu(lin(x));
      h = x;
    }

    std::vector<Index> pooled, pooled_graph;
    ad::Matrix<Scalar> inv_count = ad::Matrix<Scalar>::Zero(batch.num_graphs, 1);
    for (Index g = 0; g < batch.num_graphs; ++g) {
      Index count = 0;
      for (Index j = 0; j < batch.num_jobs; ++j) {
        if (!batch.mask(g, j)) continue;
        pooled.push_back(batch.candidates[static_cast<std::size_t>(g * batch.num_jobs + j)]);
        pooled_graph.push_back(g);
        ++count;
      }
      if (count > 0) inv_count(g, 0) = Scalar(1) / Scalar(count);
    }
    T graph = ad::mul(ad::sum_segments(ad::gather_rows(h, pooled), pooled_graph, batch.num_graphs),
                      T::constant(std::move(inv_count)));
    return {h, graph};
  }

  // (num_graphs * num_jobs) x outputs; row g * num_jobs + j scores job j of
  // graph g. Rows of masked jobs are computed but meaningless.
  T score(const GraphBatch& batch, const Encoding<Scalar>& enc, bool train, Rng* rng) const {
    std::vector<Index> graph_of(batch.candidates.size());
    for (std::size_t i = 0; i < graph_of.size(); ++i) graph_of[i] = static_cast<Index>(i) / batch.num_jobs;
    T x = ad::concat_cols(ad::gather_rows(enc.nodes, batch.candidates), ad::gather_rows(enc.graph, graph_of));
    x = ad::relu(head_hidden_(x));
    if (train && arch_.dropout > 0) {
      if (rng == nullptr) throw StateError("training-mode forward needs an rng");
      x = ad::dropout(x, arch_.dropout, true, *rng);
    }
    return head_out_(x);
  }

  T forward(const GraphBatch& batch, bool train = false, Rng* rng = nullptr) const {
    return score(batch, encode(batch), train, rng);
  }

  NamedParams<Scalar> parameters(const std::string& prefix) const {
    NamedParams<Scalar> out;
    for (std::size_t l = 0; l < gin_.size(); ++l)
      for (std::size_t d = 0; d < gin_[l].size(); ++d) {
        const std::string base = prefix + "gin" + std::to_string(l) + ".lin" + std::to_string(d);
        out.emplace_back(base + ".weight", gin_[l][d].weight);
        out.emplace_back(base + ".bias", gin_[l][d].bias);
      }
    out.emplace_back(prefix + "head.hidden.weight", head_hidden_.weight);
    out.emplace_back(prefix + "head.hidden.bias", head_hidden_.bias);
    out.emplace_back(prefix + "head.out.weight", head_out_.weight);
    out.emplace_back(prefix + "head.out.bias", head_out_.bias);
    return out;
  }

  // Independent copy with identical values.
  Network clone() const {
    Network copy = *this;
    for (auto& mlp : copy.gin_)
      for (auto& lin : mlp) lin = fresh(lin);
    copy.head_hidden_ = fresh(head_hidden_);
    copy.head_out_ = fresh(head_out_);
    return copy;
  }

 private:
  static Linear<Scalar> fresh(const Linear<Scalar>& lin) {
    return {T::parameter(lin.weight.value()), T::parameter(lin.bias.value())};
  }

  Architecture arch_;
  std::vector<std::vector<Linear<Scalar>>> gin_;
  Linear<Scalar> head_hidden_, head_out_;
};

// Reshapes per-candidate outputs to num_graphs x num_jobs (first column, or
// the row mean when there are several outputs such as quantiles).
template <typename Scalar>
ad::Tensor<Scalar> per_job(const ad::Tensor<Scalar>& scores, Index num_graphs, Index num_jobs) {
  const auto col = scores.cols() == 1 ? scores : ad::row_mean(scores);
  return ad::reshape(col, num_graphs, num_jobs);
}

// Copy of `values` with masked entries set to -infinity.
template <typename Scalar>
ad::Matrix<Scalar> masked_view(const ad::Matrix<Scalar>& values, const Mask& mask) {
  ad::detail::check_mask(mask, values.rows(), values.cols(), "masked_view");
  return mask.select(values, ad::Matrix<Scalar>::Constant(values.rows(), values.cols(),
                                                          -std::numeric_limits<Scalar>::infinity()));
}

// Index of the largest unmasked entry in a row; ties go to the lowest index.
template <typename Derived>
int masked_argmax(const Eigen::MatrixBase<Derived>& row, const Mask& mask, Index mask_row) {
  int best = -1;
  for (Index j = 0; j < row.size(); ++j) {
    if (!mask(mask_row, j)) continue;
    if (best < 0 || row(j) > row(best)) best = static_cast<int>(j);
  }
  if (best < 0) throw MaskError("no unmasked action to choose from");
  return best;
}

// Hard copy of every value; names and shapes must match.
template <typename Scalar>
void copy_parameters(const NamedParams<Scalar>& from, NamedParams<Scalar>& to) {
  if (from.size() != to.size()) throw CompatibilityError("parameter sets differ in size");
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (from[i].first != to[i].first || from[i].second.rows() != to[i].second.rows() ||
        from[i].second.cols() != to[i].second.cols())
      throw CompatibilityError("parameter mismatch at " + from[i].first + " vs " + to[i].first);
    to[i].second.mutable_value() = from[i].second.value();
  }
}

// ---- Checkpoints -------------------------------------------------------

inline constexpr int kCheckpointVersion = 1;

struct CheckpointTensor {
  std::string name;
  Index rows = 0, cols = 0;
  std::vector<float> data;  // row-major
};

struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<CheckpointTensor> tensors;
};

// Text manifest (version, metadata, names and shapes) followed by one raw
// little-endian float32 blob per tensor in manifest order.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Throws CompatibilityError naming the first key whose value differs or is missing.
void check_meta(const std::map<std::string, std::string>& expected, const std::map<std::string, std::string>& actual);

template <typename Scalar>
void append_tensors(Checkpoint& ckpt, const NamedParams<Scalar>& params) {
  for (const auto& [name, t] : params) {
    CheckpointTensor ct{name, t.rows(), t.cols(), std::vector<float>(static_cast<std::size_t>(t.value().size()))};
    for (Index i = 0; i < t.value().size(); ++i) ct.data[static_cast<std::size_t>(i)] = float(t.value().data()[i]);
    ckpt.tensors.push_back(std::move(ct));
  }
}

// Loads tensors named like `params` from the checkpoint.
template <typename Scalar>
void assign_tensors(const Checkpoint& ckpt, NamedParams<Scalar>& params) {
  std::map<std::string, const CheckpointTensor*> by_name;
  for (const auto& t : ckpt.tensors) by_name[t.name] = &t;
  for (auto& [name, t] : params) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw CompatibilityError("checkpoint lacks parameter " + name);
    const auto& src = *it->second;
    if (src.rows != t.rows() || src.cols != t.cols())
      throw CompatibilityError("parameter " + name + " has shape " + std::to_string(src.rows) + "x" +
                               std::to_string(src.cols) + ", expected " + std::to_string(t.rows()) + "x" +
                               std::to_string(t.cols()));
    auto& dst = t.mutable_value();
    for (Index i = 0; i < dst.size(); ++i) dst.data()[i] = Scalar(src.data[static_cast<std::size_t>(i)]);
  }
}

}  // namespace jssp

#endif  // JSSP_MODEL_HPP
