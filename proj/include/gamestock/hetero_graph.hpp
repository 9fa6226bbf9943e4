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

#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gamestock/autodiff.hpp"
#include "gamestock/common.hpp"

namespace gamestock {

enum class NodeType { kStock, kIndustry, kInvestor };

enum Relation : int { kSameIndustry = 0, kInIndustry = 1, kHeldBy = 2 };
inline constexpr int kNumRelations = 3;
inline constexpr std::array<std::string_view, kNumRelations> kRelationNames = {
    "same_industry", "in_industry", "held_by"};

enum class InvestorType : int { kInstitution = 0, kHotMoney = 1, kRetail = 2 };
inline constexpr int kNumInvestorTypes = 3;
inline constexpr std::array<std::string_view, kNumInvestorTypes> kInvestorCodes = {"ins", "hot",
                                                                                   "ret"};
InvestorType parse_investor(std::string_view code);

struct IndustryAssignment {
  std::string stock;
  std::string industry;
};

struct Holding {
  InvestorType investor;
  std::string stock;
  double weight;  // in [0, 1]; zero means no edge
};

std::vector<IndustryAssignment> load_industry_map(const std::string& path);
std::vector<Holding> load_holdings(const std::string& path);
void write_industry_map(const std::vector<IndustryAssignment>& map, const std::string& path);
void write_holdings(const std::vector<Holding>& holdings, const std::string& path);

// Typed multigraph. Nodes are laid out stocks first, then industries, then
// the three investor types. Every relation stores directed (src, dst) pairs;
// symmetric relations store both directions.
struct HeteroGraph {
  std::vector<std::string> node_ids;
  std::vector<NodeType> node_types;
  Eigen::Index num_stocks = 0;
  Eigen::Index num_industries = 0;
  Eigen::Index num_investors = 0;
  std::array<std::vector<std::pair<Eigen::Index, Eigen::Index>>, kNumRelations> edges;
  Warnings warnings;

  Eigen::Index num_nodes() const { return static_cast<Eigen::Index>(node_ids.size()); }
  Eigen::Index industry_offset() const { return num_stocks; }
  Eigen::Index investor_offset() const { return num_stocks + num_industries; }

  // 0/1 adjacency: entry (i, j) is 1 iff (i, j) is an edge of the relation.
  ad::SparseMatrix adjacency(Relation r) const;
};

// Stocks absent from both tables become isolated nodes with a warning.
HeteroGraph build_graph(std::span<const std::string> stocks,
                        const std::vector<IndustryAssignment>& industry_map,
                        const std::vector<Holding>& holdings);

enum class Normalization { kDegree, kConstant };
Normalization parse_normalization(std::string_view name);  // degree | constant
std::string_view normalization_name(Normalization n);

// Row-normalized per-relation propagation operators: row i of relation r
// holds 1/c_{i,r} at each neighbor, with c = |N_i^r| (degree) or 1.
using RelationOperators = std::array<ad::SparseMatrix, kNumRelations>;
RelationOperators relation_operators(const HeteroGraph& graph, Normalization norm);

struct RgcnLayerParams {
  std::array<Matrix, kNumRelations> relation_weights;  // d_in x d_out each
  Matrix self_weight;                                  // d_in x d_out
  Normalization normalization = Normalization::kDegree;

  Eigen::Index in_dim() const { return self_weight.rows(); }
  Eigen::Index out_dim() const { return self_weight.cols(); }
};

// One relational convolution with ELU:
//   H' = ELU( sum_r A_r H W_r + H W_0 ).
ad::Var rgcn_layer(const ad::Var& features, const RelationOperators& ops,
                   std::span<const ad::Var, kNumRelations> relation_weights,
                   const ad::Var& self_weight);

Matrix rgcn_layer(const Matrix& features, const HeteroGraph& graph, const RgcnLayerParams& params);

// Applies the layers in order; dims must chain.
Matrix stack_layers(const Matrix& features, const HeteroGraph& graph,
                    std::span<const RgcnLayerParams> layers);

inline Matrix stock_rows(const HeteroGraph& graph, const Matrix& features) {
  return features.topRows(graph.num_stocks);
}

struct GraphStatistics {
  Eigen::Index stock_nodes = 0;
  Eigen::Index industry_nodes = 0;
  Eigen::Index investor_nodes = 0;
  std::array<Eigen::Index, kNumRelations> edge_counts{};
  Eigen::Index connected_components = 0;
  double mean_closeness_stock = 0.0;
  double mean_closeness_industry = 0.0;
  double mean_closeness_investor = 0.0;

  // Line-oriented key=value text.
  std::string to_text() const;
};

// Components and closeness cover stock nodes plus every industry or investor
// node with at least one edge; n counts those nodes. Closeness uses the
// Wasserman-Faust form for disconnected graphs:
// C(u) = (r-1)/sum(d) * (r-1)/(n-1), r = nodes reachable from u; 0 for
// excluded nodes.
GraphStatistics graph_statistics(const HeteroGraph& graph);
std::vector<double> closeness_centrality(const HeteroGraph& graph);

}  // namespace gamestock
