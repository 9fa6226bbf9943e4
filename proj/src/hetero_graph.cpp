// Copyright 2026 The GameStock Authors
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

#include "gamestock/hetero_graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "csv.hpp"

namespace gamestock {

InvestorType parse_investor(std::string_view code) {
  for (int i = 0; i < kNumInvestorTypes; ++i) {
    if (kInvestorCodes[i] == code) return static_cast<InvestorType>(i);
  }
  throw Error("unknown investor type '" + std::string(code) + "' (expected ins, hot or ret)");
}

std::vector<IndustryAssignment> load_industry_map(const std::string& path) {
  csv::Reader reader(path);
  reader.expect_header({"stock_id", "industry_id"});
  std::vector<IndustryAssignment> out;
  std::set<std::string> seen;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 2) reader.fail("expected 2 fields");
    if (f[0].empty() || f[1].empty()) reader.fail("empty identifier");
    if (!seen.emplace(f[0]).second) reader.fail("stock " + std::string(f[0]) + " listed twice");
    out.push_back({std::string(f[0]), std::string(f[1])});
  }
  return out;
}

std::vector<Holding> load_holdings(const std::string& path) {
  csv::Reader reader(path);
  reader.expect_header({"investor_type", "stock_id", "weight"});
  std::vector<Holding> out;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 3) reader.fail("expected 3 fields");
    Holding h{};
    try {
      h.investor = parse_investor(f[0]);
    } catch (const Error& e) {
      reader.fail(e.what());
    }
    h.stock = std::string(f[1]);
    h.weight = reader.to_double(f[2]);
    if (!(h.weight >= 0.0 && h.weight <= 1.0)) reader.fail("weight outside [0, 1]");
    out.push_back(std::move(h));
  }
  return out;
}

void write_industry_map(const std::vector<IndustryAssignment>& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "stock_id,industry_id\n";
  for (const auto& a : map) out << a.stock << ',' << a.industry << '\n';
}

void write_holdings(const std::vector<Holding>& holdings, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "investor_type,stock_id,weight\n";
  for (const auto& h : holdings) {
    out << kInvestorCodes[static_cast<int>(h.investor)] << ',' << h.stock << ','
        << csv::format(h.weight) << '\n';
  }
}

ad::SparseMatrix HeteroGraph::adjacency(Relation r) const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& [src, dst] : edges[r]) triplets.emplace_back(src, dst, 1.0);
  ad::SparseMatrix m(num_nodes(), num_nodes());
  m.setFromTriplets(triplets.begin(), triplets.end(), [](double a, double) { return a; });
  return m;
}

HeteroGraph build_graph(std::span<const std::string> stocks,
                        const std::vector<IndustryAssignment>& industry_map,
                        const std::vector<Holding>& holdings) {
  HeteroGraph g;
  std::map<std::string, Eigen::Index> stock_node;
  for (const auto& s : stocks) {
    if (!stock_node.emplace(s, static_cast<Eigen::Index>(g.node_ids.size())).second) {
      throw Error("duplicate stock '" + s + "'");
    }
    g.node_ids.push_back(s);
    g.node_types.push_back(NodeType::kStock);
  }
  g.num_stocks = static_cast<Eigen::Index>(stocks.size());

  auto stock_of = [&](const std::string& id) {
    auto it = stock_node.find(id);
    if (it == stock_node.end()) throw Error("unknown stock id '" + id + "'");
    return it->second;
  };

  // Industries in order of first appearance.
  std::map<std::string, Eigen::Index> industry_node;
  std::map<Eigen::Index, std::vector<Eigen::Index>> members;
  std::set<Eigen::Index> touched;
  for (const auto& a : industry_map) {
    const auto s = stock_of(a.stock);
    auto [it, inserted] =
        industry_node.emplace(a.industry, static_cast<Eigen::Index>(g.node_ids.size()));
    if (inserted) {
      g.node_ids.push_back("industry:" + a.industry);
      g.node_types.push_back(NodeType::kIndustry);
      ++g.num_industries;
    }
    members[it->second].push_back(s);
    touched.insert(s);
  }
  if (industry_map.empty()) g.warnings.push_back("empty industry map: no same_industry edges");

  const auto investor_base = static_cast<Eigen::Index>(g.node_ids.size());
  for (auto code : kInvestorCodes) {
    g.node_ids.push_back("investor:" + std::string(code));
    g.node_types.push_back(NodeType::kInvestor);
  }
  g.num_investors = kNumInvestorTypes;

  std::set<std::string> unique(g.node_ids.begin(), g.node_ids.end());
  if (unique.size() != g.node_ids.size()) throw Error("node identifiers collide across node types");

  for (const auto& [industry, stocks_in] : members) {
    for (auto a : stocks_in) {
      g.edges[kInIndustry].emplace_back(a, industry);
      g.edges[kInIndustry].emplace_back(industry, a);
      for (auto b : stocks_in) {
        if (a != b) g.edges[kSameIndustry].emplace_back(a, b);
      }
    }
  }

  std::set<std::pair<Eigen::Index, Eigen::Index>> held;
  for (const auto& h : holdings) {
    const auto s = stock_of(h.stock);
    if (h.weight <= 0.0) continue;
    const auto p = investor_base + static_cast<int>(h.investor);
    if (!held.emplace(s, p).second) continue;
    g.edges[kHeldBy].emplace_back(s, p);
    g.edges[kHeldBy].emplace_back(p, s);
    touched.insert(s);
  }

  for (auto& e : g.edges) std::sort(e.begin(), e.end());
  for (Eigen::Index i = 0; i < g.num_stocks; ++i) {
    if (!touched.count(i)) g.warnings.push_back("stock " + g.node_ids[i] + " has no edges");
  }
  return g;
}

Normalization parse_normalization(std::string_view name) {
  if (name == "degree") return Normalization::kDegree;
  if (name == "constant") return Normalization::kConstant;
  throw Error("unknown normalization '" + std::string(name) + "' (expected degree or constant)");
}

std::string_view normalization_name(Normalization n) {
  return n == Normalization::kDegree ? "degree" : "constant";
}

RelationOperators relation_operators(const HeteroGraph& graph, Normalization norm) {
  RelationOperators ops;
  for (int r = 0; r < kNumRelations; ++r) {
    std::vector<Eigen::Index> degree(static_cast<std::size_t>(graph.num_nodes()), 0);
    for (const auto& [src, dst] : graph.edges[r]) ++degree[static_cast<std::size_t>(src)];
    std::vector<Eigen::Triplet<double>> triplets;
    for (const auto& [src, dst] : graph.edges[r]) {
      const double c = norm == Normalization::kDegree
                           ? static_cast<double>(degree[static_cast<std::size_t>(src)])
                           : 1.0;
      triplets.emplace_back(src, dst, 1.0 / c);
    }
    ops[r].resize(graph.num_nodes(), graph.num_nodes());
    ops[r].setFromTriplets(triplets.begin(), triplets.end());
  }
  return ops;
}

ad::Var rgcn_layer(const ad::Var& features, const RelationOperators& ops,
                   std::span<const ad::Var, kNumRelations> relation_weights,
                   const ad::Var& self_weight) {
  if (features.rows() != ops[0].rows()) {
    throw Error("rgcn_layer: feature rows " + std::to_string(features.rows()) +
                " do not match node count " + std::to_string(ops[0].rows()));
  }
  if (features.cols() != self_weight.rows()) {
    throw Error("rgcn_layer: feature width " + std::to_string(features.cols()) +
                " does not match weight input width " + std::to_string(self_weight.rows()));
  }
  ad::Var total = ad::matmul(features, self_weight);
  for (int r = 0; r < kNumRelations; ++r) {
    const auto& w = relation_weights[static_cast<std::size_t>(r)];
    if (w.rows() != self_weight.rows() || w.cols() != self_weight.cols()) {
      throw Error("rgcn_layer: relation weights must share the self-loop weight shape");
    }
    if (ops[r].nonZeros() == 0) continue;
    total = total + ad::matmul(ops[r], ad::matmul(features, w));
  }
  return ad::elu(total);
}

Matrix rgcn_layer(const Matrix& features, const HeteroGraph& graph, const RgcnLayerParams& params) {
  ad::Tape tape;
  const auto ops = relation_operators(graph, params.normalization);
  std::array<ad::Var, kNumRelations> w;
  for (int r = 0; r < kNumRelations; ++r) w[r] = tape.constant(params.relation_weights[r]);
  auto out = rgcn_layer(tape.constant(features), ops, w, tape.constant(params.self_weight));
  return out.value();
}

Matrix stack_layers(const Matrix& features, const HeteroGraph& graph,
                    std::span<const RgcnLayerParams> layers) {
  Matrix h = features;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k].in_dim() != h.cols()) {
      throw Error("layer " + std::to_string(k) + " expects width " +
                  std::to_string(layers[k].in_dim()) + ", got " + std::to_string(h.cols()));
    }
    h = rgcn_layer(h, graph, layers[k]);
  }
  return h;
}

namespace {

std::vector<std::vector<Eigen::Index>> undirected_neighbors(const HeteroGraph& graph) {
  std::vector<std::set<Eigen::Index>> sets(static_cast<std::size_t>(graph.num_nodes()));
  for (const auto& rel : graph.edges) {
    for (const auto& [a, b] : rel) {
      sets[static_cast<std::size_t>(a)].insert(b);
      sets[static_cast<std::size_t>(b)].insert(a);
    }
  }
  std::vector<std::vector<Eigen::Index>> out;
  for (auto& s : sets) out.emplace_back(s.begin(), s.end());
  return out;
}

// Industry and investor nodes without edges take no part in the structure.
std::vector<bool> structural_nodes(const HeteroGraph& graph,
                                   const std::vector<std::vector<Eigen::Index>>& adj) {
  std::vector<bool> out(adj.size());
  for (std::size_t i = 0; i < adj.size(); ++i) {
    out[i] = graph.node_types[i] == NodeType::kStock || !adj[i].empty();
  }
  return out;
}

}  // namespace

std::vector<double> closeness_centrality(const HeteroGraph& graph) {
  const auto adj = undirected_neighbors(graph);
  const auto structural = structural_nodes(graph, adj);
  const auto n = static_cast<Eigen::Index>(std::count(structural.begin(), structural.end(), true));
  std::vector<double> out(adj.size(), 0.0);
  std::vector<Eigen::Index> dist(adj.size());
  for (Eigen::Index u = 0; u < graph.num_nodes(); ++u) {
    if (!structural[static_cast<std::size_t>(u)]) continue;
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<Eigen::Index> queue{u};
    dist[static_cast<std::size_t>(u)] = 0;
    double total = 0.0;
    double reached = 1.0;
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      for (auto w : adj[static_cast<std::size_t>(v)]) {
        if (dist[static_cast<std::size_t>(w)] >= 0) continue;
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
        total += static_cast<double>(dist[static_cast<std::size_t>(w)]);
        reached += 1.0;
        queue.push_back(w);
      }
    }
    if (total > 0.0 && n > 1) {
      out[static_cast<std::size_t>(u)] =
          (reached - 1.0) / total * ((reached - 1.0) / static_cast<double>(n - 1));
    }
  }
  return out;
}

GraphStatistics graph_statistics(const HeteroGraph& graph) {
  GraphStatistics s;
  s.stock_nodes = graph.num_stocks;
  s.industry_nodes = graph.num_industries;
  s.investor_nodes = graph.num_investors;
  for (int r = 0; r < kNumRelations; ++r) {
    s.edge_counts[r] = static_cast<Eigen::Index>(graph.edges[r].size());
  }

  const auto adj = undirected_neighbors(graph);
  const auto structural = structural_nodes(graph, adj);
  std::vector<bool> seen(static_cast<std::size_t>(graph.num_nodes()), false);
  for (Eigen::Index u = 0; u < graph.num_nodes(); ++u) {
    if (seen[static_cast<std::size_t>(u)] || !structural[static_cast<std::size_t>(u)]) continue;
    ++s.connected_components;
    std::deque<Eigen::Index> queue{u};
    seen[static_cast<std::size_t>(u)] = true;
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      for (auto w : adj[static_cast<std::size_t>(v)]) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = true;
          queue.push_back(w);
        }
      }
    }
  }

  const auto closeness = closeness_centrality(graph);
  auto mean_over = [&](NodeType type) {
    double total = 0.0;
    double count = 0.0;
    for (std::size_t i = 0; i < closeness.size(); ++i) {
      if (graph.node_types[i] != type || !structural[i]) continue;
      total += closeness[i];
      count += 1.0;
    }
    return count > 0.0 ? total / count : 0.0;
  };
  s.mean_closeness_stock = mean_over(NodeType::kStock);
  s.mean_closeness_industry = mean_over(NodeType::kIndustry);
  s.mean_closeness_investor = mean_over(NodeType::kInvestor);
  return s;
}

std::string GraphStatistics::to_text() const {
  std::ostringstream out;
  out << "nodes.stock=" << stock_nodes << '\n'
      << "nodes.industry=" << industry_nodes << '\n'
      << "nodes.investor=" << investor_nodes << '\n';
  for (int r = 0; r < kNumRelations; ++r) {
    out << "edges." << kRelationNames[r] << '=' << edge_counts[r] << '\n';
  }
  out << "connected_components=" << connected_components << '\n'
      << "closeness.stock_mean=" << csv::format(mean_closeness_stock) << '\n'
      << "closeness.industry_mean=" << csv::format(mean_closeness_industry) << '\n'
      << "closeness.investor_mean=" << csv::format(mean_closeness_investor) << '\n';
  return out.str();
}

}  // namespace gamestock
