#include "rejsim/netgraph.hpp"

#include "rejsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace rejsim {

Network::Network(std::size_t nodes, bool weighted)
    : weighted_(weighted), adjacency_(nodes)
{
    if (weighted_) {
        weights_.resize(nodes);
        prefix_.resize(nodes);
    }
}

Network Network::from_edges(std::size_t nodes, std::span<const Edge> edges, bool weighted)
{
    Network net(nodes, weighted);
    for (const auto& e : edges) {
        net.check_node(e.src);
        net.check_node(e.dst);
        if (e.src == e.dst)
            throw Error(Errc::SelfLoop, "self-loop at node " + std::to_string(e.src));
        if (!(e.weight > 0.0) || !std::isfinite(e.weight))
            throw Error(Errc::NonPositiveWeight, "edge weight must be positive and finite");
        net.push_half(e.src, e.dst, e.weight);
        net.push_half(e.dst, e.src, e.weight);
        ++net.edge_count_;
    }
    // Duplicate detection after bulk insertion keeps construction O(E log k).
    for (NodeId n = 0; n < nodes; ++n) {
        std::vector<NodeId> sorted = net.adjacency_[n];
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw Error(Errc::EdgeExists, "parallel edge at node " + std::to_string(n));
    }
    if (weighted)
        for (NodeId n = 0; n < nodes; ++n)
            net.rebuild_prefix(n);
    return net;
}

std::uint32_t Network::max_degree() const noexcept
{
    std::size_t k = 0;
    for (const auto& adj : adjacency_)
        k = std::max(k, adj.size());
    return static_cast<std::uint32_t>(k);
}

std::span<const double> Network::weights(NodeId n) const
{
    if (!weighted_)
        return {};
    return weights_[n];
}

void Network::check_node(NodeId n) const
{
    if (n >= adjacency_.size())
        throw Error(Errc::SlotOutOfRange, "node " + std::to_string(n) + " out of range");
}

NodeId Network::neighbor_at(NodeId n, std::uint32_t slot) const
{
    check_node(n);
    if (slot >= adjacency_[n].size())
        throw Error(Errc::SlotOutOfRange,
                    "slot " + std::to_string(slot) + " of node " + std::to_string(n) + " with degree " + std::to_string(degree(n)));
    return adjacency_[n][slot];
}

std::uint32_t Network::weighted_neighbor_slot(NodeId n, double u) const
{
    check_node(n);
    const auto k = adjacency_[n].size();
    if (k == 0)
        throw Error(Errc::IsolatedNode, "node " + std::to_string(n) + " has no neighbours");
    if (!weighted_) {
        const auto slot = static_cast<std::size_t>(u * static_cast<double>(k));
        return static_cast<std::uint32_t>(std::min(slot, k - 1));
    }
    const auto& prefix = prefix_[n];
    const double target = u * prefix.back();
    const auto it = std::upper_bound(prefix.begin(), prefix.end(), target);
    const auto slot = static_cast<std::size_t>(it - prefix.begin());
    return static_cast<std::uint32_t>(std::min(slot, k - 1));
}

bool Network::has_edge(NodeId a, NodeId b) const
{
    check_node(a);
    check_node(b);
    const auto& small = adjacency_[a].size() <= adjacency_[b].size() ? adjacency_[a] : adjacency_[b];
    const NodeId other = &small == &adjacency_[a] ? b : a;
    return std::find(small.begin(), small.end(), other) != small.end();
}

double Network::edge_weight(NodeId a, NodeId b) const
{
    check_node(a);
    const auto& adj = adjacency_[a];
    const auto it = std::find(adj.begin(), adj.end(), b);
    if (it == adj.end())
        throw Error(Errc::EdgeAbsent, "no edge " + std::to_string(a) + "-" + std::to_string(b));
    return weighted_ ? weights_[a][static_cast<std::size_t>(it - adj.begin())] : 1.0;
}

void Network::push_half(NodeId a, NodeId b, double w)
{
    adjacency_[a].push_back(b);
    if (weighted_)
        weights_[a].push_back(w);
}

void Network::erase_half(NodeId a, NodeId b)
{
    auto& adj = adjacency_[a];
    const auto it = std::find(adj.begin(), adj.end(), b);
    const auto pos = static_cast<std::size_t>(it - adj.begin());
    adj[pos] = adj.back();
    adj.pop_back();
    if (weighted_) {
        auto& w = weights_[a];
        w[pos] = w.back();
        w.pop_back();
    }
}

void Network::rebuild_prefix(NodeId n)
{
    auto& prefix = prefix_[n];
    prefix.resize(weights_[n].size());
    double acc = 0.0;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        acc += weights_[n][i];
        prefix[i] = acc;
    }
}

void Network::add_edge(NodeId a, NodeId b, double weight)
{
    check_node(a);
    check_node(b);
    if (a == b)
        throw Error(Errc::SelfLoop, "self-loop at node " + std::to_string(a));
    if (!(weight > 0.0) || !std::isfinite(weight))
        throw Error(Errc::NonPositiveWeight, "edge weight must be positive and finite");
    if (has_edge(a, b))
        throw Error(Errc::EdgeExists, "edge " + std::to_string(a) + "-" + std::to_string(b) + " already present");
    push_half(a, b, weight);
    push_half(b, a, weight);
    ++edge_count_;
    if (weighted_) {
        rebuild_prefix(a);
        rebuild_prefix(b);
    }
}

void Network::remove_edge(NodeId a, NodeId b)
{
    if (a == b)
        throw Error(Errc::SelfLoop, "self-loop at node " + std::to_string(a));
    if (!has_edge(a, b))
        throw Error(Errc::EdgeAbsent, "no edge " + std::to_string(a) + "-" + std::to_string(b));
    erase_half(a, b);
    erase_half(b, a);
    --edge_count_;
    if (weighted_) {
        rebuild_prefix(a);
        rebuild_prefix(b);
    }
}

std::vector<Edge> Network::edges() const
{
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (NodeId a = 0; a < adjacency_.size(); ++a)
        for (std::size_t j = 0; j < adjacency_[a].size(); ++j)
            if (a < adjacency_[a][j])
                out.push_back({a, adjacency_[a][j], weighted_ ? weights_[a][j] : 1.0});
    return out;
}

bool Network::same_topology(const Network& other) const
{
    if (size() != other.size() || edge_count_ != other.edge_count_ || weighted_ != other.weighted_)
        return false;
    auto key = [](const Edge& e) { return std::pair{e.src, e.dst}; };
    std::map<std::pair<NodeId, NodeId>, double> mine;
    for (const auto& e : edges())
        mine[key(e)] = e.weight;
    for (const auto& e : other.edges()) {
        const auto it = mine.find(key(e));
        if (it == mine.end() || it->second != e.weight)
            return false;
    }
    return true;
}

} // namespace rejsim
