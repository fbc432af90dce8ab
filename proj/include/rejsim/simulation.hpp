#pragma once

#include "rejsim/model.hpp"
#include "rejsim/netgraph.hpp"
#include "rejsim/stochastics.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rejsim {

/// Either one state per node, or per-state fractions sampled without
/// replacement. Fraction mass left unassigned goes to the model's first
/// state.
struct InitialAssignment {
    std::vector<StateId> per_node;
    std::vector<std::pair<StateId, double>> fractions;

    static InitialAssignment explicit_states(std::vector<StateId> states) { return {std::move(states), {}}; }
    static InitialAssignment from_fractions(std::vector<std::pair<StateId, double>> f) { return {{}, std::move(f)}; }
};

/// "I:0.05,R:0.02" (fractions) or "I,S,S" (one state per node).
/// Throws UnknownState or BadInitialAssignment.
InitialAssignment parse_initial_assignment(const Model& model, std::string_view text);

/// Throws BadInitialAssignment.
std::vector<StateId> resolve_initial_states(const Model& model, std::size_t n, const InitialAssignment& init,
                                            RandomSource& rng);

enum class SampleMode {
    EveryEvent, ///< one row per applied event
    Grid,       ///< rows at 0, dt, 2dt, ... <= horizon
    FinalOnly,  ///< rows at 0 and at the horizon
};

struct RecordOptions {
    SampleMode mode = SampleMode::EveryEvent;
    double grid_dt = 0.0;
    bool event_log = false;
};

struct SimConfig {
    std::shared_ptr<const Model> model;
    double horizon = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    InitialAssignment init;
    RecordOptions record;
};

/// Checks horizon > 0, a model is present and grid settings are usable.
void check_config(const SimConfig& cfg);

struct RunStats {
    /// Steps that changed the network state; rejections are excluded.
    std::uint64_t applied_events = 0;
    std::uint64_t late_rejects = 0;
    std::uint64_t early_rejects = 0;
    std::uint64_t stale_skips = 0;
    double wall_time = 0.0;
    std::size_t queue_peak = 0;

    double time_per_step() const
    {
        return applied_events == 0 ? 0.0 : wall_time / static_cast<double>(applied_events);
    }
};

/// Per-state node counts over time, stored row-major.
struct Trajectory {
    std::vector<std::string> state_names;
    std::vector<double> times;
    std::vector<std::uint32_t> counts;

    std::size_t rows() const noexcept { return times.size(); }
    std::span<const std::uint32_t> row(std::size_t i) const
    {
        return std::span<const std::uint32_t>(counts).subspan(i * state_names.size(), state_names.size());
    }
};

enum class LogKind : std::uint8_t { Transition, Contact, Reject };

struct LogEntry {
    double time;
    NodeId src;
    NodeId dst;
    std::uint16_t rule;
    LogKind kind;
};

struct RunResult {
    Trajectory trajectory;
    RunStats stats;
    std::vector<LogEntry> event_log;
    std::vector<StateId> final_states;
};

/// Collects trajectory rows and the optional event log during a run.
class Recorder {
public:
    Recorder(const RecordOptions& opts, const Model& model, double horizon);

    void start(std::span<const std::uint32_t> counts);
    /// Call before applying a state change at time `t`; emits pending grid
    /// rows using the pre-change counts.
    void before_change(double t, std::span<const std::uint32_t> counts)
    {
        if (mode_ == SampleMode::Grid)
            emit_grid_until(t, counts);
    }
    void after_change(double t, std::span<const std::uint32_t> counts)
    {
        if (mode_ == SampleMode::EveryEvent)
            push_row(t, counts);
    }
    bool logging() const noexcept { return log_; }
    void log(double t, LogKind kind, NodeId src, NodeId dst, std::uint16_t rule)
    {
        if (log_)
            events_.push_back({t, src, dst, rule, kind});
    }
    /// Emits closing rows up to the horizon and hands over the data.
    void finish(std::span<const std::uint32_t> counts, RunResult& out);

private:
    void push_row(double t, std::span<const std::uint32_t> counts);
    void emit_grid_until(double t, std::span<const std::uint32_t> counts);

    SampleMode mode_;
    double dt_;
    double horizon_;
    bool log_;
    std::size_t next_grid_ = 0;
    std::size_t grid_points_ = 0;
    Trajectory traj_;
    std::vector<LogEntry> events_;
};

/// `time,<state names...>` header, one row per sample.
std::string trajectory_csv(const Trajectory& traj);
/// `time,kind,src,dst,rule`.
std::string event_log_csv(std::span<const LogEntry> log);

/// Shortest round-trip decimal form.
std::string format_double(double v);

} // namespace rejsim
