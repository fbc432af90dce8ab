#pragma once

#include "rejsim/engine_reject.hpp"
#include "rejsim/simulation.hpp"

#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rejsim {

/// Node set with O(1) insert, erase and uniform indexed access
/// (swap-with-last).
class DynamicNodeList {
public:
    explicit DynamicNodeList(std::size_t universe = 0) : pos_(universe, npos) {}

    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    bool contains(NodeId v) const { return pos_[v] != npos; }
    NodeId at(std::size_t i) const { return items_[i]; }
    std::span<const NodeId> items() const noexcept { return items_; }

    void insert(NodeId v)
    {
        if (pos_[v] != npos)
            return;
        pos_[v] = static_cast<std::uint32_t>(items_.size());
        items_.push_back(v);
    }
    void erase(NodeId v)
    {
        const std::uint32_t p = pos_[v];
        if (p == npos)
            return;
        items_[p] = items_.back();
        pos_[items_[p]] = p;
        items_.pop_back();
        pos_[v] = npos;
    }

private:
    static constexpr std::uint32_t npos = 0xffffffffu;
    std::vector<NodeId> items_;
    std::vector<std::uint32_t> pos_;
};

/// Ordered (infected, susceptible) pairs with O(1) insert, erase and
/// uniform indexed access; positions live in a hash map keyed by the pair.
class DynamicEdgeList {
public:
    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    std::pair<NodeId, NodeId> at(std::size_t i) const { return items_[i]; }
    std::span<const std::pair<NodeId, NodeId>> items() const noexcept { return items_; }
    bool contains(NodeId infected, NodeId susceptible) const { return pos_.count(key(infected, susceptible)) != 0; }
    void reserve(std::size_t n) { pos_.reserve(n); }

    void insert(NodeId infected, NodeId susceptible)
    {
        const auto [it, inserted] = pos_.try_emplace(key(infected, susceptible), static_cast<std::uint32_t>(items_.size()));
        if (inserted)
            items_.emplace_back(infected, susceptible);
    }
    void erase(NodeId infected, NodeId susceptible)
    {
        const auto it = pos_.find(key(infected, susceptible));
        if (it == pos_.end())
            return;
        const std::uint32_t p = it->second;
        pos_.erase(it);
        if (p + 1 != items_.size()) {
            items_[p] = items_.back();
            pos_[key(items_[p].first, items_[p].second)] = p;
        }
        items_.pop_back();
    }

private:
    static std::uint64_t key(NodeId a, NodeId b) { return (static_cast<std::uint64_t>(a) << 32) | b; }
    std::vector<std::pair<NodeId, NodeId>> items_;
    std::unordered_map<std::uint64_t, std::uint32_t> pos_;
};

/// Picks a list member with probability degree / sum of degrees, by uniform
/// proposal and acceptance with probability degree / max_degree.
NodeId degree_proportional_pick(const DynamicNodeList& list, std::span<const std::uint32_t> degrees,
                                std::uint32_t max_degree, RandomSource& rng);

/// Event-free state shared by the Gillespie-type engines.
struct DirectMethodCore {
    DirectMethodCore(const Network& net, SimConfig cfg);

    void set_state(NodeId v, StateId s)
    {
        --counts[states[v]];
        ++counts[s];
        states[v] = s;
    }
    RunResult finish(double wall_time);

    SimConfig cfg;
    const Network* net;
    RandomSource rng;
    std::vector<StateId> states;
    std::vector<std::uint32_t> counts;
    Recorder recorder;
    RunStats stats;
    double clock = 0.0;
    bool finished = false;
};

/// Standard Gillespie algorithm for SIS on unweighted networks: infected
/// list L_I, S-I edge list L_SI, aggregated rate mu |L_I| + lambda |L_SI|.
class GillespieSisEngine {
public:
    /// Throws Unsupported unless the model has SIS shape and the network is
    /// unweighted.
    GillespieSisEngine(const Network& net, SimConfig cfg);

    /// Applied or Finished.
    StepOutcome step();
    RunResult run();

    double aggregated_rate() const noexcept { return sis_.mu * infected_.size() + sis_.lambda * si_edges_.size(); }
    double curing_probability() const;
    const DynamicNodeList& infected() const noexcept { return infected_; }
    const DynamicEdgeList& si_edges() const noexcept { return si_edges_; }
    std::span<const StateId> states() const noexcept { return core_.states; }
    std::span<const std::uint32_t> counts() const noexcept { return core_.counts; }
    double clock() const noexcept { return core_.clock; }

    /// Recomputes the S-I pairs from scratch and compares with L_SI and L_I.
    bool lists_consistent() const;

private:
    void cure(NodeId v);
    void infect(NodeId v);

    DirectMethodCore core_;
    SisView sis_;
    DynamicNodeList infected_;
    DynamicEdgeList si_edges_;
};

/// Complete binary tree of non-negative weights with O(log n) update and
/// weight-proportional search.
class SumTree {
public:
    explicit SumTree(std::size_t n = 0);
    std::size_t size() const noexcept { return n_; }
    double total() const noexcept { return tree_.size() > 1 ? tree_[1] : 0.0; }
    double weight(std::size_t i) const { return tree_[leaves_ + i]; }
    void set(std::size_t i, double w);
    /// Index i with cumulative weight before i <= target < cumulative through
    /// i; never returns a zero-weight leaf when total() > 0.
    std::size_t find(double target) const;

private:
    std::size_t n_ = 0;
    std::size_t leaves_ = 1;
    std::vector<double> tree_;
};

/// Direct method for any validated model. Each node's propensity is its
/// exit rate plus, for every edge rule acting on its state, rate times the
/// weight of neighbours in the rule's contact state.
class GillespieGenericEngine {
public:
    GillespieGenericEngine(const Network& net, SimConfig cfg);

    StepOutcome step();
    RunResult run();

    double propensity(NodeId v) const { return tree_.weight(v); }
    double total_propensity() const noexcept { return tree_.total(); }
    std::span<const StateId> states() const noexcept { return core_.states; }
    std::span<const std::uint32_t> counts() const noexcept { return core_.counts; }
    double clock() const noexcept { return core_.clock; }

private:
    double compute_propensity(NodeId v) const;
    void apply(NodeId v, StateId to);

    DirectMethodCore core_;
    std::size_t m_;
    std::vector<double> neighbor_weight_;       ///< [v * m + state]
    std::vector<std::uint32_t> neighbor_count_; ///< [v * m + state]
    SumTree tree_;
};

/// Optimized Gillespie algorithm for SIS: only L_I is maintained; the
/// infection source is drawn proportionally to its degree and the attempt is
/// rejected when the chosen neighbour is already infected.
class OgaEngine {
public:
    /// Throws OgaRequiresSis for non-SIS models, Unsupported for weighted
    /// networks.
    OgaEngine(const Network& net, SimConfig cfg);

    /// Applied, LateReject (a rejected infection attempt; the clock still
    /// advances) or Finished.
    StepOutcome step();
    RunResult run();

    struct InfectionSample {
        NodeId source;
        NodeId target;
        bool rejected;
    };
    /// The infection branch without applying it: degree-proportional source,
    /// uniform neighbour. Requires an infected node with positive degree.
    InfectionSample sample_infection_attempt();

    double total_rate() const noexcept
    {
        return sis_.mu * infected_.size() + sis_.lambda * static_cast<double>(infected_degree_sum_);
    }
    const DynamicNodeList& infected() const noexcept { return infected_; }
    std::span<const StateId> states() const noexcept { return core_.states; }
    std::span<const std::uint32_t> counts() const noexcept { return core_.counts; }
    double clock() const noexcept { return core_.clock; }

private:
    void set_infected(NodeId v, bool infected);

    DirectMethodCore core_;
    SisView sis_;
    std::vector<std::uint32_t> degrees_;
    std::uint32_t max_degree_;
    DynamicNodeList infected_;
    std::uint64_t infected_degree_sum_ = 0;
};

} // namespace rejsim
