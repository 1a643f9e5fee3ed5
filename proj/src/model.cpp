#include "jssp/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace jssp {

GraphBatch batch_observations(std::span<const Observation* const> observations) {
  GraphBatch batch;
  if (observations.empty()) throw ShapeError("empty observation batch");
  batch.num_graphs = static_cast<Index>(observations.size());
  batch.num_jobs = observations.front()->num_jobs;
  Index total = 0;
  std::size_t edges = 0;
  for (const Observation* o : observations) {
    if (o->num_jobs != batch.num_jobs) throw ShapeError("observations in one batch must share the job count");
    total += o->num_nodes();
    edges += o->conj_edges.size() + o->disj_edges.size();
  }
  batch.features.resize(total, 2);
  batch.node_graph.reserve(static_cast<std::size_t>(total));
  batch.edge_src.reserve(edges);
  batch.edge_dst.reserve(edges);
  batch.candidates.reserve(static_cast<std::size_t>(batch.num_graphs * batch.num_jobs));
  batch.mask.resize(batch.num_graphs, batch.num_jobs);

  Index offset = 0;
  for (Index g = 0; g < batch.num_graphs; ++g) {
    const Observation& o = *observations[static_cast<std::size_t>(g)];
    batch.features.middleRows(offset, o.num_nodes()) = o.node_features;
    batch.node_graph.insert(batch.node_graph.end(), static_cast<std::size_t>(o.num_nodes()), g);
    for (const auto* list : {&o.conj_edges, &o.disj_edges})
      for (const auto& [src, dst] : *list) {
        batch.edge_src.push_back(offset + src);
        batch.edge_dst.push_back(offset + dst);
      }
    for (int j = 0; j < o.num_jobs; ++j) {
      batch.candidates.push_back(offset + o.candidates[static_cast<std::size_t>(j)]);
      batch.mask(g, j) = o.mask[static_cast<std::size_t>(j)] != 0;
    }
    offset += o.num_nodes();
  }
  return batch;
}

GraphBatch batch_observation(const Observation& observation) {
  const Observation* one[] = {&observation};
  return batch_observations(one);
}

void check_batch(const GraphBatch& batch) {
  const Index n = batch.num_nodes();
  if (static_cast<Index>(batch.node_graph.size()) != n) throw ShapeError("node_graph length differs from node count");
  if (batch.edge_src.size() != batch.edge_dst.size()) throw ShapeError("edge source and destination counts differ");
  if (static_cast<Index>(batch.candidates.size()) != batch.num_graphs * batch.num_jobs)
    throw ShapeError("candidate table is not num_graphs x num_jobs");
  if (batch.mask.rows() != batch.num_graphs || batch.mask.cols() != batch.num_jobs)
    throw ShapeError("mask is not num_graphs x num_jobs");
  for (Index g : batch.node_graph)
    if (g < 0 || g >= batch.num_graphs) throw ShapeError("node assigned to a graph outside the batch");
  for (std::size_t e = 0; e < batch.edge_src.size(); ++e) {
    const Index s = batch.edge_src[e], d = batch.edge_dst[e];
    if (s < 0 || s >= n || d < 0 || d >= n) throw ShapeError("edge endpoint out of range");
    if (batch.node_graph[static_cast<std::size_t>(s)] != batch.node_graph[static_cast<std::size_t>(d)])
      throw ShapeError("edge crosses graphs");
  }
  for (std::size_t i = 0; i < batch.candidates.size(); ++i) {
    const Index c = batch.candidates[i];
    if (c < 0 || c >= n) throw ShapeError("candidate node out of range");
    if (batch.node_graph[static_cast<std::size_t>(c)] != static_cast<Index>(i) / batch.num_jobs)
      throw ShapeError("candidate belongs to another graph");
  }
}

std::map<std::string, std::string> architecture_meta(const Architecture& arch) {
  std::ostringstream dropout;
  dropout << arch.dropout;
  return {{"arch.input_dim", std::to_string(arch.input_dim)},
          {"arch.hidden", std::to_string(arch.hidden)},
          {"arch.gin_layers", std::to_string(arch.gin_layers)},
          {"arch.gin_mlp_depth", std::to_string(arch.gin_mlp_depth)},
          {"arch.head_hidden", std::to_string(arch.head_hidden)},
          {"arch.outputs", std::to_string(arch.outputs)},
          {"arch.dropout", dropout.str()}};
}

namespace {

void put_le(std::ostream& out, float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  out.write(bytes, 4);
}

float get_le(const unsigned char* bytes) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

bool is_token(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << "jssp-checkpoint " << kCheckpointVersion << "\n";
  for (const auto& [key, value] : ckpt.meta) {
    if (!is_token(key) || !is_token(value)) throw IoError("checkpoint metadata must be whitespace-free: " + key);
    out << "meta " << key << " " << value << "\n";
  }
  for (const auto& t : ckpt.tensors) {
    if (!is_token(t.name)) throw IoError("bad tensor name: " + t.name);
    if (static_cast<Index>(t.data.size()) != t.rows * t.cols) throw ShapeError("tensor " + t.name + " size mismatch");
    out << "tensor " << t.name << " " << t.rows << " " << t.cols << "\n";
  }
  out << "data\n";
  for (const auto& t : ckpt.tensors)
    for (float v : t.data) put_le(out, v);
  if (!out) throw IoError("failed to write checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint ckpt;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty checkpoint");
  {
    std::istringstream head(line);
    std::string magic;
    int version = 0;
    if (!(head >> magic >> version) || magic != "jssp-checkpoint") throw IoError("not a checkpoint file");
    if (version != kCheckpointVersion)
      throw CompatibilityError("checkpoint format version " + std::to_string(version) + " is not supported");
  }
  bool data = false;
  while (std::getline(in, line)) {
    if (line == "data") {
      data = true;
      break;
    }
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "meta") {
      std::string key, value;
      if (!(ls >> key >> value)) throw IoError("bad checkpoint line: " + line);
      ckpt.meta[key] = value;
    } else if (kind == "tensor") {
      CheckpointTensor t;
      if (!(ls >> t.name >> t.rows >> t.cols) || t.rows < 0 || t.cols < 0)
        throw IoError("bad checkpoint line: " + line);
      ckpt.tensors.push_back(std::move(t));
    } else {
      throw IoError("bad checkpoint line: " + line);
    }
  }
  if (!data) throw IoError("checkpoint has no data section");
  for (auto& t : ckpt.tensors) {
    const auto count = static_cast<std::size_t>(t.rows * t.cols);
    std::vector<unsigned char> raw(count * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw IoError("checkpoint truncated at " + t.name);
    t.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) t.data[i] = get_le(raw.data() + 4 * i);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes after checkpoint data");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_checkpoint(in);
}

void check_meta(const std::map<std::string, std::string>& expected, const std::map<std::string, std::string>& actual) {
  for (const auto& [key, value] : expected) {
    auto it = actual.find(key);
    if (it == actual.end()) throw CompatibilityError("checkpoint lacks " + key);
    if (it->second != value)
      throw CompatibilityError("checkpoint " + key + " is " + it->second + ", expected " + value);
  }
}

}  // namespace jssp
