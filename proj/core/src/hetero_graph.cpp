#include "utv/hetero_graph.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "utv/errors.hpp"

namespace utv {
namespace {

std::uint64_t lookup_key(MovieId movie, NodeType type, SubgraphId subgraph) {
    return (static_cast<std::uint64_t>(movie) << 16) |
           (static_cast<std::uint64_t>(type) << 8) |
           static_cast<std::uint64_t>(subgraph);
}

// Per-movie genre bitmasks so edge rules reduce to word ANDs.
class GenreMaskTable {
public:
    GenreMaskTable(const std::vector<KGNode>& nodes, const MovieCatalog& movies)
        : words_((movies.genre_count() + 63) / 64) {
        if (words_ == 0) words_ = 1;
        for (const KGNode& n : nodes) {
            auto [it, inserted] = index_.try_emplace(n.movie_id, masks_.size() / words_);
            if (!inserted) continue;
            std::size_t base = masks_.size();
            masks_.resize(base + words_, 0);
            for (std::uint32_t g : movies.genre_ids(n.movie_id))
                masks_[base + g / 64] |= std::uint64_t{1} << (g % 64);
        }
    }

    bool intersect(MovieId a, MovieId b) const {
        const std::uint64_t* ma = &masks_[index_.at(a) * words_];
        const std::uint64_t* mb = &masks_[index_.at(b) * words_];
        for (std::size_t w = 0; w < words_; ++w)
            if (ma[w] & mb[w]) return true;
        return false;
    }

private:
    std::size_t words_;
    std::unordered_map<MovieId, std::size_t> index_;
    std::vector<std::uint64_t> masks_;
};

std::uint64_t parse_u64_field(std::string_view field, const char* what) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError(std::string("malformed ") + what + " '" + std::string(field) + "'");
    }
    return value;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

const char* subgraph_name(SubgraphId s) {
    switch (s) {
        case SubgraphId::TARGET: return "TARGET";
        case SubgraphId::S1: return "S1";
        case SubgraphId::S2: return "S2";
        default: return "S3";
    }
}

SubgraphId parse_subgraph(std::string_view name) {
    if (name == "TARGET") return SubgraphId::TARGET;
    if (name == "S1") return SubgraphId::S1;
    if (name == "S2") return SubgraphId::S2;
    if (name == "S3") return SubgraphId::S3;
    throw ParseError("unknown subgraph '" + std::string(name) + "'");
}

NodeType parse_node_type(std::string_view name) {
    if (name == "SF") return NodeType::SF;
    if (name == "SFS") return NodeType::SFS;
    if (name == "SMPF") return NodeType::SMPF;
    if (name == "SMPSF") return NodeType::SMPSF;
    throw ParseError("unknown node type '" + std::string(name) + "'");
}

HeteroGraph::HeteroGraph(std::vector<KGNode> nodes,
                         const std::vector<std::pair<NodeId, NodeId>>& edges)
    : nodes_(std::move(nodes)), adjacency_(nodes_.size()) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const KGNode& n = nodes_[i];
        if (n.node_id != i) throw DomainError("node ids must be dense and ordered");
        auto [it, inserted] =
            lookup_.emplace(lookup_key(n.movie_id, n.node_type, n.subgraph), n.node_id);
        if (!inserted) throw DomainError("duplicate (movie, type, subgraph) node");
    }
    for (auto [a, b] : edges) {
        if (a == b) throw DomainError("self-loop edge");
        if (a >= nodes_.size() || b >= nodes_.size())
            throw DomainError("edge endpoint out of range");
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }
    for (auto& adj : adjacency_) {
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
        edge_count_ += adj.size();
    }
    edge_count_ /= 2;
}

bool HeteroGraph::has_edge(NodeId a, NodeId b) const {
    const auto& adj = adjacency_[a];
    return std::binary_search(adj.begin(), adj.end(), b);
}

std::int64_t HeteroGraph::find_node(MovieId movie, NodeType type, SubgraphId subgraph) const {
    auto it = lookup_.find(lookup_key(movie, type, subgraph));
    return it == lookup_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::vector<KGNode> build_subgraph_nodes(SubgraphId subgraph,
                                         const std::vector<UserId>& users, UserId target,
                                         const DatasetView& view,
                                         const GraphOptions& options) {
    // Pooled liked movies with per-movie like counts (counts only matter for
    // the cap).
    std::unordered_map<MovieId, std::size_t> like_count;
    for (UserId u : users) {
        if (const InterestProfile* p = view.interests->find(u)) {
            for (MovieId m : p->liked) ++like_count[m];
        }
    }
    std::vector<MovieId> pool;
    pool.reserve(like_count.size());
    for (const auto& [m, c] : like_count) pool.push_back(m);
    if (options.max_subgraph_movies != 0 && pool.size() > options.max_subgraph_movies) {
        std::sort(pool.begin(), pool.end(), [&](MovieId a, MovieId b) {
            std::size_t ca = like_count[a], cb = like_count[b];
            if (ca != cb) return ca > cb;
            return a < b;
        });
        pool.resize(options.max_subgraph_movies);
    }
    std::sort(pool.begin(), pool.end());

    const InterestProfile* tp = view.interests->find(target);
    std::vector<char> target_genres(view.movies->genre_count(), 0);
    if (tp) {
        for (MovieId m : tp->liked)
            for (std::uint32_t g : view.movies->genre_ids(m)) target_genres[g] = 1;
    }
    auto shares_target_genre = [&](MovieId m) {
        for (std::uint32_t g : view.movies->genre_ids(m))
            if (target_genres[g]) return true;
        return false;
    };
    auto has_top_genre = [&](MovieId m) {
        for (std::uint32_t g : view.movies->genre_ids(m))
            if (view.popularity->is_top_genre_id(g)) return true;
        return false;
    };

    std::vector<KGNode> out;
    for (NodeType type : kAllComponents) {
        for (MovieId m : pool) {
            bool keep = false;
            switch (type) {
                case NodeType::SF: keep = true; break;
                case NodeType::SFS: keep = shares_target_genre(m); break;
                case NodeType::SMPF: keep = view.popularity->is_top_movie(m); break;
                case NodeType::SMPSF: keep = has_top_genre(m); break;
            }
            if (keep) out.push_back({0, m, type, subgraph});
        }
    }
    return out;
}

std::vector<std::pair<NodeId, NodeId>> apply_link_rules(const std::vector<KGNode>& nodes,
                                                        const MovieCatalog& movies,
                                                        const GraphOptions& options) {
    GenreMaskTable genre_masks(nodes, movies);
    std::array<std::vector<std::uint32_t>, 4> by_type;
    for (std::uint32_t i = 0; i < nodes.size(); ++i)
        by_type[static_cast<int>(nodes[i].node_type)].push_back(i);

    std::vector<std::pair<NodeId, NodeId>> edges;
    auto cross = [&](const KGNode& a, const KGNode& b) {
        return options.intra_subgraph_edges || a.subgraph != b.subgraph;
    };

    const auto& sf = by_type[static_cast<int>(NodeType::SF)];
    for (std::size_t i = 0; i < sf.size(); ++i) {
        const KGNode& a = nodes[sf[i]];
        for (std::size_t j = i + 1; j < sf.size(); ++j) {
            const KGNode& b = nodes[sf[j]];
            if (!cross(a, b)) continue;
            if (a.movie_id == b.movie_id || genre_masks.intersect(a.movie_id, b.movie_id))
                edges.emplace_back(a.node_id, b.node_id);
        }
    }

    const auto& sfs = by_type[static_cast<int>(NodeType::SFS)];
    for (NodeType other : {NodeType::SF, NodeType::SMPF, NodeType::SMPSF}) {
        for (std::uint32_t xi : by_type[static_cast<int>(other)]) {
            const KGNode& a = nodes[xi];
            for (std::uint32_t si : sfs) {
                const KGNode& b = nodes[si];
                if (!cross(a, b)) continue;
                if (genre_masks.intersect(a.movie_id, b.movie_id)) {
                    edges.emplace_back(std::min(a.node_id, b.node_id),
                                       std::max(a.node_id, b.node_id));
                }
            }
        }
    }

    for (auto& [a, b] : edges) {
        if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

HeteroGraph build_hetero_graph(UserId target, const EnsembleSelection& selection,
                               const DatasetView& view, const GraphOptions& options) {
    const InterestProfile* tp = view.interests->find(target);
    if (!tp || tp->liked.empty()) {
        throw DomainError("target user " + std::to_string(target) +
                          " has no liked movies to build a graph from");
    }

    std::vector<KGNode> nodes =
        build_subgraph_nodes(SubgraphId::TARGET, {target}, target, view, options);
    for (std::size_t i = 0; i < selection.top3.size() && i < 3; ++i) {
        auto sg = static_cast<SubgraphId>(static_cast<int>(SubgraphId::S1) + i);
        auto part =
            build_subgraph_nodes(sg, selection.top3[i].members, target, view, options);
        nodes.insert(nodes.end(), part.begin(), part.end());
    }
    for (std::uint32_t i = 0; i < nodes.size(); ++i) nodes[i].node_id = i;

    auto edges = apply_link_rules(nodes, *view.movies, options);
    return HeteroGraph(std::move(nodes), edges);
}

std::vector<std::uint8_t> dense_adjacency(const HeteroGraph& graph) {
    std::size_t n = graph.node_count();
    if (n > 2000) {
        throw CapacityError("dense adjacency export limited to 2000 nodes, graph has " +
                            std::to_string(n));
    }
    std::vector<std::uint8_t> matrix(n * n, 0);
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j : graph.neighbors(i)) matrix[i * n + j] = 1;
    }
    return matrix;
}

void write_edge_list(const HeteroGraph& graph, std::ostream& out) {
    for (NodeId i = 0; i < graph.node_count(); ++i) {
        for (NodeId j : graph.neighbors(i)) {
            if (j > i) out << i << '\t' << j << '\n';
        }
    }
}

void write_node_table(const HeteroGraph& graph, std::ostream& out) {
    out << "node_id,movie_id,type,subgraph\n";
    for (const KGNode& n : graph.nodes()) {
        out << n.node_id << ',' << n.movie_id << ',' << component_name(n.node_type)
            << ',' << subgraph_name(n.subgraph) << '\n';
    }
}

HeteroGraph load_graph(std::istream& node_table, std::istream& edge_list) {
    std::vector<KGNode> nodes;
    std::string line;
    bool first = true;
    while (std::getline(node_table, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("node_id", 0) == 0) continue;
        }
        auto fields = split_fields(line, ',');
        if (fields.size() != 4) throw ParseError("node table row needs 4 fields: " + line);
        KGNode n;
        n.node_id = static_cast<NodeId>(parse_u64_field(fields[0], "node_id"));
        n.movie_id = static_cast<MovieId>(parse_u64_field(fields[1], "movie_id"));
        n.node_type = parse_node_type(fields[2]);
        n.subgraph = parse_subgraph(fields[3]);
        nodes.push_back(n);
    }

    std::vector<std::pair<NodeId, NodeId>> edges;
    while (std::getline(edge_list, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line, '\t');
        if (fields.size() != 2) throw ParseError("edge row needs 2 fields: " + line);
        edges.emplace_back(static_cast<NodeId>(parse_u64_field(fields[0], "node_id")),
                           static_cast<NodeId>(parse_u64_field(fields[1], "node_id")));
    }
    return HeteroGraph(std::move(nodes), edges);
}

}  // namespace utv
