#pragma once

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <utility>
#include <vector>

#include "utv/ensemble.hpp"
#include "utv/types.hpp"

namespace utv {

// Graph node types mirror the four behavior classes.
using NodeType = ComponentClass;

enum class SubgraphId : std::uint8_t { TARGET = 0, S1 = 1, S2 = 2, S3 = 3 };

const char* subgraph_name(SubgraphId s);
SubgraphId parse_subgraph(std::string_view name);
NodeType parse_node_type(std::string_view name);

struct KGNode {
    NodeId node_id = 0;
    MovieId movie_id = 0;
    NodeType node_type = NodeType::SF;
    SubgraphId subgraph = SubgraphId::TARGET;

    friend bool operator==(const KGNode&, const KGNode&) = default;
};

struct GraphOptions {
    bool intra_subgraph_edges = false;  // prose reading: link within a sub-graph too
    // 0 disables the cap; otherwise each sub-graph keeps at most this many
    // pooled liked movies (most-liked first, then movie_id).
    std::size_t max_subgraph_movies = 0;
};

class HeteroGraph {
public:
    HeteroGraph() = default;
    HeteroGraph(std::vector<KGNode> nodes, const std::vector<std::pair<NodeId, NodeId>>& edges);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edge_count_; }
    const std::vector<KGNode>& nodes() const { return nodes_; }
    const KGNode& node(NodeId id) const { return nodes_[id]; }
    const std::vector<NodeId>& neighbors(NodeId id) const { return adjacency_[id]; }
    std::size_t degree(NodeId id) const { return adjacency_[id].size(); }
    bool has_edge(NodeId a, NodeId b) const;

    // -1 when no such node exists.
    std::int64_t find_node(MovieId movie, NodeType type, SubgraphId subgraph) const;

private:
    std::vector<KGNode> nodes_;
    std::vector<std::vector<NodeId>> adjacency_;
    std::unordered_map<std::uint64_t, NodeId> lookup_;
    std::size_t edge_count_ = 0;
};

// Nodes for one sub-graph over the pooled liked movies of its users, in
// (type, movie_id) order with node_id unassigned. The target's liked genres
// drive the SFS membership test for every sub-graph.
std::vector<KGNode> build_subgraph_nodes(SubgraphId subgraph,
                                         const std::vector<UserId>& users,
                                         UserId target, const DatasetView& view,
                                         const GraphOptions& options = {});

// Undirected edges (a < b) under the four linking rules:
//   1. SF-SF, same movie or overlapping genres
//   2. SF-SFS, overlapping genres
//   3. SMPF-SFS, overlapping genres
//   4. SMPSF-SFS, overlapping genres
// Pairs must span different sub-graphs unless intra_subgraph_edges is set.
// Node list must already carry dense ids.
std::vector<std::pair<NodeId, NodeId>> apply_link_rules(const std::vector<KGNode>& nodes,
                                                        const MovieCatalog& movies,
                                                        const GraphOptions& options = {});

// Full graph for a target and its selected classes: sub-graphs TARGET then
// S1..S3, dense ids in (subgraph, type, movie_id) order. Throws DomainError
// when the target sub-graph would be empty.
HeteroGraph build_hetero_graph(UserId target, const EnsembleSelection& selection,
                               const DatasetView& view, const GraphOptions& options = {});

// Row-major |V| x |V| 0/1 matrix. Throws CapacityError for |V| > 2000.
std::vector<std::uint8_t> dense_adjacency(const HeteroGraph& graph);

// "a<TAB>b" per undirected edge, a < b, ascending.
void write_edge_list(const HeteroGraph& graph, std::ostream& out);
// CSV: node_id,movie_id,type,subgraph.
void write_node_table(const HeteroGraph& graph, std::ostream& out);
HeteroGraph load_graph(std::istream& node_table, std::istream& edge_list);

}  // namespace utv
