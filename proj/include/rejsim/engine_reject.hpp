#pragma once

#include "rejsim/event_queue.hpp"
#include "rejsim/simulation.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rejsim {

/* Externally driven edge changes for temporal networks. */

struct TemporalChange {
    enum class Op : std::uint8_t { Add, Remove };
    double time;
    Op op;
    NodeId a;
    NodeId b;
    double weight = 1.0;
};

using TemporalStream = std::vector<TemporalChange>;

/// Lines `time,op,src,dst[,weight]`, op in {add, remove}, `#` comments.
/// Throws MalformedLine or OutOfOrderStream.
TemporalStream parse_temporal_stream(std::string_view text);
TemporalStream read_temporal_stream(const std::filesystem::path& path);

enum class StepOutcome { Applied, LateReject, StaleSkip, Finished };

/// Deliberate defects for mutation testing of the statistical checks.
enum class Fault {
    None,
    /// An early reject ends the attack chain instead of drawing the next
    /// attempt, so attackers under-attack.
    AbandonChainOnEarlyReject,
};

/// Event-driven simulation with early and late rejection.
///
/// Every node in a residence-deterministic state knows when it leaves that
/// state (`residence_end`); every attacker keeps exactly one pending attack
/// attempt, its earliest attempt that is not already known to fail. Attack
/// attempts are drawn at the full rate contact_rate(state) * weight_sum(node)
/// regardless of neighbour states; attempts on ineligible neighbours are
/// thinned either at generation time (the neighbour provably stays
/// ineligible past the attempt) or when the event is popped.
///
/// Requires model.rejection_simulable(). The network is shared read-only
/// unless a temporal stream is supplied, in which case the engine works on
/// its own copy.
class RejectEngine {
public:
    RejectEngine(const Network& net, SimConfig cfg, TemporalStream temporal = {}, Fault fault = Fault::None);
    /// Draws from `rng` instead of (cfg.seed, cfg.stream); used with scripted
    /// sources.
    RejectEngine(const Network& net, SimConfig cfg, RandomSource rng, TemporalStream temporal = {},
                 Fault fault = Fault::None);

    RejectEngine(const RejectEngine&) = delete;
    RejectEngine& operator=(const RejectEngine&) = delete;

    /// Pops and processes one event. Pending temporal changes up to the next
    /// event time are applied first.
    StepOutcome step();
    /// Steps until Finished and returns the collected trajectory and stats.
    RunResult run();

    /// Applies one edge change at change.time >= clock(). Throws
    /// OutOfOrderStream, EdgeExists, EdgeAbsent, SelfLoop.
    void apply_temporal_change(const TemporalChange& change);

    /// Drops every pending attack and regenerates all attack chains from the
    /// current clock; transitions are kept. For use after large batches of
    /// edge changes.
    void reinitialize();

    double clock() const noexcept { return clock_; }
    bool finished() const noexcept { return finished_; }
    const Network& network() const noexcept { return *net_; }
    const Model& model() const noexcept { return *cfg_.model; }
    const EventQueue& queue() const noexcept { return queue_; }
    std::span<const NodeRuntime> runtime() const noexcept { return rt_; }
    std::span<const std::uint32_t> counts() const noexcept { return counts_; }
    const RunStats& stats() const noexcept { return stats_; }
    std::vector<StateId> states() const;

    /// Schedules the node's next node-rule firing: now + Exp(exit_rate), rule
    /// picked proportionally to rate. Sets residence_end for
    /// residence-deterministic states.
    void generate_transition_event(NodeId node, double now);

    struct AttemptOutcome {
        bool pushed = false;
        double time = infinite_time;
        std::uint64_t early_rejects = 0;
    };
    /// Draws attempts from `now` until one is worth queueing (pushed), the
    /// attacker's residence ends, or the horizon passes.
    AttemptOutcome generate_attack_event(NodeId node, double now);

    /// Counts every attack attempt (early rejects plus would-be queued
    /// attempts) a node makes over `window` with the network frozen. The
    /// node's residence_end is treated as clock() + window; nothing is
    /// queued or applied.
    std::uint64_t frozen_attempt_count(NodeId node, double window);

    /// Consistency report for tests; empty means all queue invariants hold.
    std::vector<std::string> check_invariants() const;

private:
    struct Attempt {
        bool found = false;
        double time = infinite_time;
        NodeId target = 0;
        std::uint16_t rule = 0;
        std::uint64_t early_rejects = 0;
    };
    Attempt next_attempt(NodeId node, double from, double end, double limit);
    bool early_rejectable(NodeId target, std::uint16_t rule, double t) const;
    void push_attack(NodeId node, const Attempt& a);
    void set_state(NodeId node, StateId s);
    void schedule_transition_if_any(NodeId node);
    void schedule_attack_if_contact(NodeId node);
    void pull_temporal_changes();
    void enable_temporal();
    void offer_new_link(NodeId x, NodeId y, double weight);
    bool edge_valid(NodeId a, NodeId b, std::uint32_t epoch) const;
    void initialize();

    static std::uint64_t edge_key(NodeId a, NodeId b)
    {
        if (a > b)
            std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | b;
    }

    SimConfig cfg_;
    const Network* net_;
    std::optional<Network> owned_net_;
    Fault fault_;
    RandomSource rng_;
    EventQueue queue_;
    std::vector<NodeRuntime> rt_;
    std::vector<std::uint32_t> counts_;
    Recorder recorder_;
    RunStats stats_;
    double clock_ = 0.0;
    bool finished_ = false;

    // Per-state aggregates copied out of the model for the hot path.
    std::vector<double> exit_rate_;
    std::vector<double> contact_rate_;
    std::vector<std::uint8_t> rd_;
    std::vector<std::uint8_t> single_contact_rule_;
    std::vector<std::uint16_t> first_contact_rule_;
    std::vector<StateId> rule_target_from_;
    std::vector<StateId> rule_target_to_;
    std::vector<StateId> rule_contact_;

    TemporalStream temporal_;
    bool temporal_mode_ = false;
    std::size_t next_change_ = 0;
    std::uint32_t epoch_ = 0;
    std::unordered_map<std::uint64_t, std::uint32_t> edge_epoch_;
};

} // namespace rejsim
