#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "gradcheck.hpp"
#include "jssp/env.hpp"
#include "jssp/instance.hpp"
#include "jssp/model.hpp"
#include "jssp/pdr.hpp"

using namespace jssp;
using Md = ad::Matrix<double>;

namespace {

// Observation after `steps` MWKR dispatches on a random instance.
Observation partial_observation(int jobs, int machines, std::uint64_t seed, int steps) {
  auto state = reset(generate_instance(jobs, machines, seed));
  for (int i = 0; i < steps && !state.terminal(); ++i) apply_step(state, pdr_action(state, DispatchRule::Mwkr));
  return observe(state);
}

GraphBatch permute_nodes(const GraphBatch& b, const std::vector<Index>& perm) {
  // perm[old] = new
  GraphBatch p = b;
  for (Index i = 0; i < b.num_nodes(); ++i) {
    p.features.row(perm[static_cast<std::size_t>(i)]) = b.features.row(i);
    p.node_graph[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = b.node_graph[static_cast<std::size_t>(i)];
  }
  for (auto& e : p.edge_src) e = perm[static_cast<std::size_t>(e)];
  for (auto& e : p.edge_dst) e = perm[static_cast<std::size_t>(e)];
  for (auto& c : p.candidates) c = perm[static_cast<std::size_t>(c)];
  return p;
}

}  // namespace

TEST_CASE("architecture defaults follow the reported network sizes") {
  Architecture arch;
  CHECK(arch.hidden == 64);
  CHECK(arch.gin_layers == 2);
  CHECK(arch.gin_mlp_depth == 3);
  CHECK(arch.head_hidden == 32);
  CHECK(2 * arch.hidden == 128);
  CHECK(arch.dropout == 0.4);
  Rng rng(1);
  Network<double> net(arch, rng);
  const auto params = net.parameters("q.");
  std::vector<std::string> names;
  for (const auto& [n, t] : params) names.push_back(n);
  auto sorted = names;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  CHECK(params.front().second.rows() == 2);
  CHECK(params.front().second.cols() == 64);
  CHECK(names[params.size() - 4] == "q.head.hidden.weight");
  CHECK(params[params.size() - 4].second.rows() == 128);
  CHECK(params[params.size() - 4].second.cols() == 32);
  // Biases start at zero.
  for (const auto& [n, t] : params)
    if (n.ends_with(".bias")) CHECK(t.value().isZero());
}

TEST_CASE("single-node graph pools to its own embedding") {
  Rng rng(2);
  Network<double> net(Architecture{}, rng);
  const auto obs = observe(reset(generate_instance(1, 1, 5)));
  const auto batch = batch_observation(obs);
  const auto enc = net.encode(batch);
  CHECK(enc.nodes.rows() == 1);
  CHECK(enc.graph.value() == enc.nodes.value());
}

TEST_CASE("graph embedding is the mean over available candidates") {
  Rng rng(3);
  Network<double> net(Architecture{}, rng);
  for (int steps : {0, 7, 20, 33}) {
    const auto obs = partial_observation(6, 6, 77, steps);
    const auto batch = batch_observation(obs);
    const auto enc = net.encode(batch);
    Md expected = Md::Zero(1, 64);
    int count = 0;
    for (int j = 0; j < 6; ++j)
      if (obs.mask[static_cast<std::size_t>(j)]) {
        expected += enc.nodes.value().row(obs.candidates[static_cast<std::size_t>(j)]);
        ++count;
      }
    expected /= count;
    CHECK((enc.graph.value() - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("encoder is permutation equivariant and edge-order independent") {
  Rng rng(4);
  Network<double> net(Architecture{}, rng);
  const auto obs = partial_observation(5, 4, 11, 9);
  const auto batch = batch_observation(obs);
  const auto base = net.encode(batch);
  const auto base_scores = net.forward(batch).value();

  std::vector<Index> perm(static_cast<std::size_t>(batch.num_nodes()));
  std::iota(perm.begin(), perm.end(), 0);
  Rng shuffle(9);
  for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[shuffle.below(i + 1)]);
  const auto permuted = permute_nodes(batch, perm);
  const auto enc = net.encode(permuted);
  for (Index i = 0; i < batch.num_nodes(); ++i)
    CHECK((enc.nodes.value().row(perm[static_cast<std::size_t>(i)]) - base.nodes.value().row(i)).cwiseAbs().maxCoeff() <
          1e-12);
  CHECK((net.forward(permuted).value() - base_scores).cwiseAbs().maxCoeff() < 1e-12);

  GraphBatch reordered = batch;
  std::vector<std::size_t> order(batch.edge_src.size());
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[shuffle.below(i + 1)]);
  for (std::size_t i = 0; i < order.size(); ++i) {
    reordered.edge_src[i] = batch.edge_src[order[i]];
    reordered.edge_dst[i] = batch.edge_dst[order[i]];
  }
  CHECK((net.encode(reordered).nodes.value() - base.nodes.value()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero final GIN layer gives zero embeddings") {
  Rng rng(5);
  Network<double> net(Architecture{}, rng);
  auto params = net.parameters("");
  for (auto& [name, t] : params)
    if (name.starts_with("gin1.lin2.")) t.mutable_value().setZero();
  const auto enc = net.encode(batch_observation(partial_observation(4, 4, 3, 5)));
  CHECK(enc.nodes.value().isZero());
  CHECK(enc.graph.value().isZero());
}

TEST_CASE("batched forward equals per-observation forward") {
  Rng rng(6);
  Network<double> net(Architecture{}, rng);
  std::vector<Observation> obs;
  for (int i = 0; i < 4; ++i) obs.push_back(partial_observation(6, 5, 100 + i, 3 * i));
  std::vector<const Observation*> ptrs;
  for (const auto& o : obs) ptrs.push_back(&o);
  const auto together = net.forward(batch_observations(ptrs)).value();
  for (int i = 0; i < 4; ++i) {
    const auto alone = net.forward(batch_observation(obs[static_cast<std::size_t>(i)])).value();
    CHECK((together.middleRows(6 * i, 6) - alone).cwiseAbs().maxCoeff() < 1e-12);
  }
  auto other = partial_observation(3, 5, 1, 0);
  ptrs.push_back(&other);
  CHECK_THROWS_AS(batch_observations(ptrs), ShapeError);
}

TEST_CASE("scores: masking, quantile means, identical candidates") {
  Rng rng(7);
  Architecture arch;
  arch.outputs = 32;
  Network<double> net(arch, rng);
  auto obs = partial_observation(6, 6, 8, 30);
  const auto batch = batch_observation(obs);
  const auto quantiles = net.forward(batch);
  CHECK(quantiles.rows() == 6);
  CHECK(quantiles.cols() == 32);
  const auto q = per_job(quantiles, 1, 6).value();
  for (int j = 0; j < 6; ++j) CHECK(q(0, j) == doctest::Approx(quantiles.value().row(j).mean()).epsilon(1e-12));

  Mask one = Mask::Constant(1, 6, false);
  one(0, 4) = true;
  const auto view = masked_view<double>(q, one);
  int finite = 0;
  for (int j = 0; j < 6; ++j) finite += std::isfinite(view(0, j)) ? 1 : 0;
  CHECK(finite == 1);
  CHECK(view(0, 4) == q(0, 4));
  CHECK(masked_argmax(q.row(0), one, 0) == 4);

  // Two candidates pointing at featureless twins score identically.
  GraphBatch twins;
  twins.num_graphs = 1;
  twins.num_jobs = 2;
  twins.features = Md::Constant(2, 2, 0.25);
  twins.node_graph = {0, 0};
  twins.candidates = {0, 1};
  twins.mask = Mask::Constant(1, 2, true);
  const auto s = net.forward(twins).value();
  CHECK(s.row(0) == s.row(1));
}

TEST_CASE("inconsistent batches are rejected") {
  Rng rng(8);
  Network<double> net(Architecture{}, rng);
  CHECK_THROWS_AS(batch_observations(std::span<const Observation* const>{}), ShapeError);
  const auto obs1 = partial_observation(3, 3, 1, 2);
  const auto obs2 = partial_observation(3, 3, 2, 2);
  const Observation* both[] = {&obs1, &obs2};
  const auto good = batch_observations(both);
  CHECK_NOTHROW(net.encode(good));

  auto crossing = good;
  crossing.edge_dst[0] = 9 + crossing.edge_dst[0] % 9;
  CHECK_THROWS_AS(net.encode(crossing), ShapeError);
  auto stolen = good;
  stolen.candidates[4] = 0;
  CHECK_THROWS_AS(net.encode(stolen), ShapeError);
  auto short_ids = good;
  short_ids.node_graph.pop_back();
  CHECK_THROWS_AS(net.encode(short_ids), ShapeError);
  auto bad_mask = good;
  bad_mask.mask = Mask::Constant(1, 3, true);
  CHECK_THROWS_AS(net.encode(bad_mask), ShapeError);
}

TEST_CASE("dropout acts only in training mode") {
  Rng rng(9);
  Network<double> net(Architecture{}, rng);
  const auto batch = batch_observation(partial_observation(6, 6, 4, 10));
  const auto eval1 = net.forward(batch).value();
  const auto eval2 = net.forward(batch, false).value();
  CHECK(eval1 == eval2);
  Rng drop(1);
  const auto train = net.forward(batch, true, &drop).value();
  CHECK(train != eval1);
  CHECK_THROWS_AS(net.forward(batch, true, nullptr), StateError);
  // Encoder carries no dropout.
  CHECK(net.encode(batch).nodes.value() == net.encode(batch).nodes.value());
}

TEST_CASE("network gradients match finite differences") {
  Rng rng(10);
  Architecture arch;
  arch.hidden = 6;
  arch.head_hidden = 5;
  arch.outputs = 3;
  arch.dropout = 0;
  Network<double> net(arch, rng);
  const auto obs1 = partial_observation(3, 3, 21, 4);
  const auto obs2 = partial_observation(3, 3, 22, 1);
  const Observation* both[] = {&obs1, &obs2};
  auto batch = batch_observations(both);
  batch.features.col(1) *= 100.0;  // lift lower bounds out of the tiny range
  Md w(6, 3);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform() - 0.5;
  std::vector<ad::Tensor<double>> params;
  for (const auto& [n, t] : net.parameters("")) params.push_back(t);
  const double err = gradcheck::max_relative_error(params, [&] {
    return ad::sum(ad::mul(net.forward(batch), ad::Tensor<double>::constant(w)));
  });
  CHECK(err < 1e-4);
}

TEST_CASE("clone is independent and copy_parameters restores equality") {
  Rng rng(11);
  Network<double> net(Architecture{}, rng);
  auto copy = net.clone();
  auto a = net.parameters("");
  auto b = copy.parameters("");
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].second.value() == b[i].second.value());
  a[0].second.mutable_value()(0, 0) += 1.0;
  CHECK(a[0].second.value() != b[0].second.value());
  copy_parameters(a, b);
  CHECK(a[0].second.value() == b[0].second.value());
  auto wrong = net.parameters("x.");
  CHECK_THROWS_AS(copy_parameters(a, wrong), CompatibilityError);
}

TEST_CASE("checkpoint round trip") {
  Rng rng(12);
  Architecture arch;
  arch.outputs = 32;
  Network<float> net(arch, rng);
  Checkpoint ckpt;
  ckpt.meta = architecture_meta(arch);
  ckpt.meta["method"] = "mqrdqn";
  append_tensors(ckpt, net.parameters("q."));

  std::ostringstream first;
  write_checkpoint(first, ckpt);
  std::istringstream in(first.str());
  const auto loaded = read_checkpoint(in);
  std::ostringstream second;
  write_checkpoint(second, loaded);
  CHECK(first.str() == second.str());

  Rng other_rng(13);
  Network<float> restored(arch, other_rng);
  auto params = restored.parameters("q.");
  check_meta(architecture_meta(arch), loaded.meta);
  assign_tensors(loaded, params);
  const auto batch = batch_observation(partial_observation(6, 6, 14, 12));
  CHECK(restored.forward(batch).value() == net.forward(batch).value());

  Architecture fewer = arch;
  fewer.outputs = 16;
  CHECK_THROWS_AS(check_meta(architecture_meta(fewer), loaded.meta), CompatibilityError);
  Rng r3(14);
  Network<float> small(fewer, r3);
  auto small_params = small.parameters("q.");
  CHECK_THROWS_AS(assign_tensors(loaded, small_params), CompatibilityError);

  std::string text = first.str();
  std::istringstream truncated(text.substr(0, text.size() - 3));
  CHECK_THROWS_AS(read_checkpoint(truncated), IoError);
  std::string future = text;
  future.replace(future.find(" 1\n"), 3, " 9\n");
  std::istringstream newer(future);
  CHECK_THROWS_AS(read_checkpoint(newer), CompatibilityError);
}
