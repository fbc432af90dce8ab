#pragma once

#include "rejsim/model.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rejsim {

using NodeId = std::uint32_t;

inline constexpr double infinite_time = std::numeric_limits<double>::infinity();

struct Edge {
    NodeId src;
    NodeId dst;
    double weight = 1.0;
};

/// Undirected contact network without self-loops or parallel edges.
///
/// Neighbour lists are plain arrays so that uniform neighbour choice is a
/// single indexed load. Weighted networks additionally keep per-node prefix
/// sums over neighbour weights for O(log k) weight-proportional choice.
/// For unweighted networks weight_sum(n) == degree(n).
class Network {
public:
    Network() = default;
    explicit Network(std::size_t nodes, bool weighted = false);

    /// Builds a network from undirected edges, each listed once. Throws
    /// SelfLoop, NonPositiveWeight, EdgeExists (duplicate edge) or
    /// SlotOutOfRange (endpoint >= nodes).
    static Network from_edges(std::size_t nodes, std::span<const Edge> edges, bool weighted = false);

    std::size_t size() const noexcept { return adjacency_.size(); }
    bool weighted() const noexcept { return weighted_; }
    std::size_t edge_count() const noexcept { return edge_count_; }
    std::uint32_t max_degree() const noexcept;

    std::uint32_t degree(NodeId n) const { return static_cast<std::uint32_t>(adjacency_[n].size()); }
    double weight_sum(NodeId n) const
    {
        if (!weighted_)
            return static_cast<double>(adjacency_[n].size());
        return prefix_[n].empty() ? 0.0 : prefix_[n].back();
    }
    std::span<const NodeId> neighbors(NodeId n) const { return adjacency_[n]; }
    /// Empty for unweighted networks.
    std::span<const double> weights(NodeId n) const;

    /// adjacency[n][slot]; throws SlotOutOfRange.
    NodeId neighbor_at(NodeId n, std::uint32_t slot) const;
    /// Slot j such that prefix[j-1] <= u * weight_sum < prefix[j], by binary
    /// search. Unweighted networks fall back to floor(u * degree). Throws
    /// IsolatedNode.
    std::uint32_t weighted_neighbor_slot(NodeId n, double u) const;

    bool has_edge(NodeId a, NodeId b) const;
    /// Throws EdgeAbsent.
    double edge_weight(NodeId a, NodeId b) const;

    /// Throws SelfLoop, EdgeExists, NonPositiveWeight.
    void add_edge(NodeId a, NodeId b, double weight = 1.0);
    /// Swap-with-last removal, O(degree). Throws EdgeAbsent.
    void remove_edge(NodeId a, NodeId b);

    /// Every undirected edge once, src < dst, ordered by src then by the
    /// position of dst in src's neighbour list.
    std::vector<Edge> edges() const;

    /// Same edge set and weights, ignoring neighbour order.
    bool same_topology(const Network& other) const;

private:
    void check_node(NodeId n) const;
    void push_half(NodeId a, NodeId b, double w);
    void erase_half(NodeId a, NodeId b);
    void rebuild_prefix(NodeId n);

    bool weighted_ = false;
    std::size_t edge_count_ = 0;
    std::vector<std::vector<NodeId>> adjacency_;
    std::vector<std::vector<double>> weights_;
    std::vector<std::vector<double>> prefix_;
};

/// Mutable per-node record owned by a simulation run.
struct NodeRuntime {
    /// Exit time of the current state; finite only for an occupied
    /// residence-deterministic state with a scheduled transition.
    double residence_end = infinite_time;
    /// Time of the pending attack attempt (temporal mode), else +inf.
    double next_attempt_time = infinite_time;
    /// Validity stamp of the pending attack event; never decreases.
    std::uint32_t attempt_seq = 0;
    /// Validity stamp of the pending transition event.
    std::uint32_t transition_seq = 0;
    StateId state = 0;
};

/* Edge-list text: `src,dst[,weight]` per line, `#` comments. */

/// Node count is 1 + max id; duplicate listings of an edge collapse, unless
/// their weights differ. If any line carries a weight the network is
/// weighted and unlisted weights default to 1. Throws MalformedLine,
/// SelfLoop, NonPositiveWeight, AsymmetricWeight.
Network parse_edge_list(std::string_view text);

struct RemappedNetwork {
    Network network;
    /// original_id[dense id]
    std::vector<std::uint64_t> original_id;
};

/// As parse_edge_list, but arbitrary (sparse) non-negative ids are mapped
/// to dense ids in order of first appearance.
RemappedNetwork parse_edge_list_remapped(std::string_view text);

Network read_edge_list(const std::filesystem::path& path);

/// Each undirected edge once with src < dst; weights only when weighted.
std::string format_edge_list(const Network& net);
void write_edge_list(const std::filesystem::path& path, const Network& net, std::string_view header_comment = {});

/* Configuration model. */

struct PowerLawDegrees {
    double gamma;
    std::uint32_t kmin;
    std::uint32_t kmax;

    /// P(k) = k^-gamma / sum_{j=kmin}^{kmax} j^-gamma
    double probability(std::uint32_t k) const;
    double mean() const;
};

/// i.i.d. degrees from the truncated power law; the last degree is resampled
/// until the total is even. Throws DegenerateParameters.
std::vector<std::uint32_t> sample_degree_sequence(std::size_t n, const PowerLawDegrees& law, std::uint64_t seed);

/// Stub matching on a given degree sequence (even total). Self-loops and
/// parallel edges are first re-paired against random other edges a bounded
/// number of times; whatever remains is erased.
Network configuration_model(std::span<const std::uint32_t> degrees, std::uint64_t seed);

/// Throws DegenerateParameters unless n >= 2, gamma > 1, 1 <= kmin <= kmax < n.
Network configuration_model(std::size_t n, double gamma, std::uint32_t kmin, std::uint32_t kmax, std::uint64_t seed);

} // namespace rejsim
