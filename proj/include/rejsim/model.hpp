#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rejsim {

/// Dense index of a local node state (compartment).
using StateId = std::uint8_t;

inline constexpr std::size_t max_states = 64;

/* Rule declarations as written by a user; states are referenced by name. */

struct NodeRuleSpec {
    std::string from;
    std::string to;
    double rate = 0.0;
};

struct EdgeRuleSpec {
    std::string target_from;
    std::string target_to;
    std::string contact;
    double rate = 0.0;
};

struct ModelSpec {
    std::string name;
    std::vector<std::string> states;
    std::vector<NodeRuleSpec> node_rules;
    std::vector<EdgeRuleSpec> edge_rules;
};

/* Resolved rules of a validated model. */

/// Spontaneous transition `from -> to` at `rate`.
struct NodeRule {
    StateId from;
    StateId to;
    double rate;
};

/// Contact transition `target_from + contact -> target_to + contact`; fires
/// at `rate` per neighbour (times edge weight) in state `contact`.
struct EdgeRule {
    StateId target_from;
    StateId target_to;
    StateId contact;
    double rate;
};

/// Parameters of a model that has exactly the SIS shape
/// (`S + I -> I + I @ lambda`, `I -> S @ mu`).
struct SisView {
    StateId susceptible;
    StateId infected;
    double mu;
    double lambda;
};

/// An immutable, validated compartment model with per-state aggregates
/// precomputed. Safe to share read-only between concurrent runs.
class Model {
public:
    const std::string& name() const noexcept { return name_; }
    std::size_t num_states() const noexcept { return state_names_.size(); }
    const std::string& state_name(StateId s) const { return state_names_.at(s); }
    const std::vector<std::string>& state_names() const noexcept { return state_names_; }
    std::optional<StateId> find_state(std::string_view name) const;
    /// Throws UnknownState.
    StateId state(std::string_view name) const;

    std::span<const NodeRule> node_rules() const noexcept { return node_rules_; }
    std::span<const EdgeRule> edge_rules() const noexcept { return edge_rules_; }

    /// Total rate of node rules leaving `s`.
    double exit_rate(StateId s) const { return exit_rate_.at(s); }
    /// Per-edge attack intensity emitted by a node in state `c`.
    double contact_rate(StateId c) const { return contact_rate_.at(c); }
    /// True iff `s` is never the target state of an edge rule, i.e. a node in
    /// `s` leaves it only through node rules.
    bool residence_deterministic(StateId s) const { return residence_deterministic_.at(s) != 0; }
    bool is_contact_state(StateId s) const { return contact_rate_.at(s) > 0.0; }
    /// Every contact state is residence-deterministic, so attackers always
    /// know when they stop attacking.
    bool rejection_simulable() const noexcept { return rejection_simulable_; }

    /// Indices into node_rules() with `from == s`.
    std::span<const std::uint16_t> node_rules_from(StateId s) const { return node_rules_from_.at(s); }
    /// Indices into edge_rules() with `contact == c`.
    std::span<const std::uint16_t> edge_rules_with_contact(StateId c) const { return edge_rules_by_contact_.at(c); }
    /// Indices into edge_rules() with `target_from == s`.
    std::span<const std::uint16_t> edge_rules_targeting(StateId s) const { return edge_rules_by_target_.at(s); }

    /// Node rule leaving `s`, chosen proportionally to rate; `u` in [0,1).
    std::uint16_t pick_node_rule(StateId s, double u) const;
    /// Edge rule with contact `c`, chosen proportionally to rate; `u` in [0,1).
    std::uint16_t pick_contact_rule(StateId c, double u) const;

    std::optional<SisView> as_sis() const;

private:
    friend Model validate(const ModelSpec& spec);
    Model() = default;

    std::string name_;
    std::vector<std::string> state_names_;
    std::vector<NodeRule> node_rules_;
    std::vector<EdgeRule> edge_rules_;
    std::vector<double> exit_rate_;
    std::vector<double> contact_rate_;
    std::vector<std::uint8_t> residence_deterministic_;
    std::vector<std::vector<std::uint16_t>> node_rules_from_;
    std::vector<std::vector<std::uint16_t>> edge_rules_by_contact_;
    std::vector<std::vector<std::uint16_t>> edge_rules_by_target_;
    bool rejection_simulable_ = false;
};

/// Checks the rule grammar and precomputes aggregates. Throws Error with
/// UnknownState, DuplicateState, NonPositiveRate, SelfTransition or
/// DuplicateRule.
Model validate(const ModelSpec& spec);

namespace presets {

/// S + I -> I + I @ lambda, I -> S @ mu
Model sis(double mu, double lambda);
/// S + I -> I + I @ lambda, I -> R @ mu1, R -> S @ mu2
Model sir(double mu1, double mu2, double lambda);
/// S + I -> I + I @ l1, S + J -> J + J @ l2, I -> S @ m1, J -> S @ m2
Model competing(double l1, double l2, double m1, double m2);

} // namespace presets

/// Parses the line-oriented model format:
///   state <name>
///   node <from> -> <to> @ <rate>
///   edge <target_from> + <contact> -> <target_to> + <contact> @ <rate>
/// `#` starts a comment line. Throws ParseError.
ModelSpec parse_model(std::string_view text);
ModelSpec load_model_file(const std::filesystem::path& path);

} // namespace rejsim
