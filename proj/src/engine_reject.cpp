#include "rejsim/engine_reject.hpp"

#include "rejsim/error.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rejsim {

namespace {

SimConfig checked(SimConfig cfg)
{
    check_config(cfg);
    if (!cfg.model->rejection_simulable())
        throw Error(Errc::ModelNotRejectionSimulable,
                    "model '" + cfg.model->name() + "' has a contact state that can be left through an edge rule");
    return cfg;
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_field(std::string_view field, T& out)
{
    field = trim(field);
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return !field.empty() && ec == std::errc() && ptr == field.data() + field.size();
}

} // namespace

TemporalStream parse_temporal_stream(std::string_view text)
{
    TemporalStream out;
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        const std::string_view line = trim(text.substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (line.empty() || line.front() == '#')
            continue;

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        auto bad = [&] { return Error(Errc::MalformedLine, "temporal stream line " + std::to_string(line_no) + ": '" + std::string(line) + "'"); };
        if (fields.size() < 4 || fields.size() > 5)
            throw bad();
        TemporalChange c{};
        if (!parse_field(fields[0], c.time) || !std::isfinite(c.time) || c.time < 0.0)
            throw bad();
        if (fields[1] == "add")
            c.op = TemporalChange::Op::Add;
        else if (fields[1] == "remove")
            c.op = TemporalChange::Op::Remove;
        else
            throw bad();
        if (!parse_field(fields[2], c.a) || !parse_field(fields[3], c.b))
            throw bad();
        if (fields.size() == 5 && !parse_field(fields[4], c.weight))
            throw bad();
        if (!out.empty() && c.time < out.back().time)
            throw Error(Errc::OutOfOrderStream, "temporal stream line " + std::to_string(line_no) + " goes back in time");
        out.push_back(c);
    }
    return out;
}

TemporalStream read_temporal_stream(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::IoError, "cannot open temporal stream " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_temporal_stream(buf.str());
}

RejectEngine::RejectEngine(const Network& net, SimConfig cfg, TemporalStream temporal, Fault fault)
    : RejectEngine(net, cfg, RandomSource(cfg.seed, cfg.stream), std::move(temporal), fault)
{
}

RejectEngine::RejectEngine(const Network& net, SimConfig cfg, RandomSource rng, TemporalStream temporal, Fault fault)
    : cfg_(checked(std::move(cfg))),
      net_(&net),
      fault_(fault),
      rng_(std::move(rng)),
      recorder_(cfg_.record, *cfg_.model, cfg_.horizon),
      temporal_(std::move(temporal))
{
    for (std::size_t i = 1; i < temporal_.size(); ++i)
        if (temporal_[i].time < temporal_[i - 1].time)
            throw Error(Errc::OutOfOrderStream, "temporal stream times must be nondecreasing");
    if (!temporal_.empty())
        enable_temporal();

    const Model& m = *cfg_.model;
    const std::size_t ns = m.num_states();
    exit_rate_.resize(ns);
    contact_rate_.resize(ns);
    rd_.resize(ns);
    single_contact_rule_.resize(ns);
    first_contact_rule_.resize(ns);
    for (StateId s = 0; s < ns; ++s) {
        exit_rate_[s] = m.exit_rate(s);
        contact_rate_[s] = m.contact_rate(s);
        rd_[s] = m.residence_deterministic(s) ? 1 : 0;
        const auto rules = m.edge_rules_with_contact(s);
        single_contact_rule_[s] = rules.size() == 1 ? 1 : 0;
        first_contact_rule_[s] = rules.empty() ? 0 : rules[0];
    }
    for (const auto& r : m.edge_rules()) {
        rule_target_from_.push_back(r.target_from);
        rule_target_to_.push_back(r.target_to);
        rule_contact_.push_back(r.contact);
    }

    const auto initial = resolve_initial_states(m, net_->size(), cfg_.init, rng_);
    rt_.resize(net_->size());
    counts_.assign(ns, 0);
    for (NodeId v = 0; v < rt_.size(); ++v) {
        rt_[v].state = initial[v];
        ++counts_[initial[v]];
    }
    initialize();
}

void RejectEngine::enable_temporal()
{
    if (temporal_mode_)
        return;
    owned_net_ = *net_;
    net_ = &*owned_net_;
    for (const auto& e : net_->edges())
        edge_epoch_.emplace(edge_key(e.src, e.dst), 0u);
    temporal_mode_ = true;
}

void RejectEngine::initialize()
{
    recorder_.start(counts_);
    // Transitions first: attack generation needs every residence_end.
    for (NodeId v = 0; v < rt_.size(); ++v)
        schedule_transition_if_any(v);
    for (NodeId v = 0; v < rt_.size(); ++v)
        schedule_attack_if_contact(v);
}

std::vector<StateId> RejectEngine::states() const
{
    std::vector<StateId> out(rt_.size());
    for (std::size_t i = 0; i < rt_.size(); ++i)
        out[i] = rt_[i].state;
    return out;
}

void RejectEngine::schedule_transition_if_any(NodeId node)
{
    if (exit_rate_[rt_[node].state] > 0.0)
        generate_transition_event(node, clock_);
}

void RejectEngine::schedule_attack_if_contact(NodeId node)
{
    if (contact_rate_[rt_[node].state] > 0.0)
        generate_attack_event(node, clock_);
}

void RejectEngine::generate_transition_event(NodeId node, double now)
{
    NodeRuntime& r = rt_[node];
    const StateId s = r.state;
    const double t = now + rng_.draw_exp(exit_rate_[s]);
    const auto rules = cfg_.model->node_rules_from(s);
    const std::uint16_t rule = rules.size() == 1 ? rules[0] : cfg_.model->pick_node_rule(s, rng_.uniform());
    r.residence_end = rd_[s] ? t : infinite_time;
    queue_.push(Event{t, node, node, r.transition_seq, epoch_, rule, EventKind::Transition});
}

bool RejectEngine::early_rejectable(NodeId target, std::uint16_t rule, double t) const
{
    const NodeRuntime& r = rt_[target];
    return r.state != rule_target_from_[rule] && rd_[r.state] && r.residence_end > t;
}

RejectEngine::Attempt RejectEngine::next_attempt(NodeId node, double from, double end, double limit)
{
    Attempt a;
    const StateId s = rt_[node].state;
    const double rate = contact_rate_[s] * net_->weight_sum(node);
    if (!(rate > 0.0))
        return a;
    const auto neighbors = net_->neighbors(node);
    double t = from;
    while (true) {
        t += rng_.draw_exp(rate);
        // An attempt at exactly `end` counts as after the residence.
        if (!(t < end) || t > limit)
            return a;
        const std::uint32_t slot = net_->weighted()
                                       ? net_->weighted_neighbor_slot(node, rng_.uniform())
                                       : static_cast<std::uint32_t>(rng_.draw_uniform_index(neighbors.size()));
        const NodeId target = neighbors[slot];
        const std::uint16_t rule =
            single_contact_rule_[s] ? first_contact_rule_[s] : cfg_.model->pick_contact_rule(s, rng_.uniform());
        if (early_rejectable(target, rule, t)) {
            ++a.early_rejects;
            if (fault_ == Fault::AbandonChainOnEarlyReject)
                return a;
            continue;
        }
        a.found = true;
        a.time = t;
        a.target = target;
        a.rule = rule;
        return a;
    }
}

void RejectEngine::push_attack(NodeId node, const Attempt& a)
{
    NodeRuntime& r = rt_[node];
    ++r.attempt_seq;
    r.next_attempt_time = a.time;
    queue_.push(Event{a.time, node, a.target, r.attempt_seq, epoch_, a.rule, EventKind::Attack});
}

RejectEngine::AttemptOutcome RejectEngine::generate_attack_event(NodeId node, double now)
{
    const Attempt a = next_attempt(node, now, rt_[node].residence_end, cfg_.horizon);
    stats_.early_rejects += a.early_rejects;
    if (a.found)
        push_attack(node, a);
    else
        rt_[node].next_attempt_time = infinite_time;
    return {a.found, a.time, a.early_rejects};
}

std::uint64_t RejectEngine::frozen_attempt_count(NodeId node, double window)
{
    const double end = clock_ + window;
    std::uint64_t count = 0;
    double t = clock_;
    while (true) {
        const Attempt a = next_attempt(node, t, end, infinite_time);
        count += a.early_rejects;
        if (!a.found)
            return count;
        ++count;
        t = a.time;
    }
}

void RejectEngine::set_state(NodeId node, StateId s)
{
    NodeRuntime& r = rt_[node];
    --counts_[r.state];
    ++counts_[s];
    if (contact_rate_[r.state] > 0.0) {
        ++r.attempt_seq;
        r.next_attempt_time = infinite_time;
    }
    ++r.transition_seq;
    r.residence_end = infinite_time;
    r.state = s;
}

bool RejectEngine::edge_valid(NodeId a, NodeId b, std::uint32_t epoch) const
{
    const auto it = edge_epoch_.find(edge_key(a, b));
    return it != edge_epoch_.end() && it->second <= epoch;
}

void RejectEngine::pull_temporal_changes()
{
    while (next_change_ < temporal_.size()) {
        const TemporalChange& c = temporal_[next_change_];
        if (c.time > cfg_.horizon || (!queue_.empty() && c.time > queue_.top().time))
            return;
        apply_temporal_change(c);
        ++next_change_;
    }
}

void RejectEngine::offer_new_link(NodeId x, NodeId y, double weight)
{
    NodeRuntime& r = rt_[x];
    const StateId s = r.state;
    if (!(contact_rate_[s] > 0.0))
        return;
    const double t = clock_ + rng_.draw_exp(contact_rate_[s] * weight);
    if (!(t < r.next_attempt_time) || !(t < r.residence_end) || t > cfg_.horizon)
        return;
    const std::uint16_t rule =
        single_contact_rule_[s] ? first_contact_rule_[s] : cfg_.model->pick_contact_rule(s, rng_.uniform());
    if (!early_rejectable(y, rule, t)) {
        push_attack(x, Attempt{true, t, y, rule, 0});
        return;
    }
    // The new link's first attempt is known to fail; the merged attempt
    // process restarts at t with the full rate.
    ++stats_.early_rejects;
    const Attempt a = next_attempt(x, t, r.residence_end, cfg_.horizon);
    stats_.early_rejects += a.early_rejects;
    if (a.found) {
        push_attack(x, a);
    } else {
        ++r.attempt_seq;
        r.next_attempt_time = infinite_time;
    }
}

void RejectEngine::apply_temporal_change(const TemporalChange& change)
{
    if (!(change.time >= clock_))
        throw Error(Errc::OutOfOrderStream, "edge change at " + std::to_string(change.time) + " precedes clock " +
                                                std::to_string(clock_));
    enable_temporal();
    Network& net = *owned_net_;
    const auto key = edge_key(change.a, change.b);
    if (change.op == TemporalChange::Op::Remove) {
        net.remove_edge(change.a, change.b);
        ++epoch_;
        edge_epoch_.erase(key);
    } else {
        net.add_edge(change.a, change.b, change.weight);
        ++epoch_;
        edge_epoch_[key] = epoch_;
    }
    clock_ = change.time;
    if (change.op == TemporalChange::Op::Add) {
        offer_new_link(change.a, change.b, change.weight);
        offer_new_link(change.b, change.a, change.weight);
    }
}

void RejectEngine::reinitialize()
{
    queue_.retain([&](const Event& e) { return e.kind == EventKind::Transition && !is_stale(e, rt_[e.node]); });
    for (NodeId v = 0; v < rt_.size(); ++v) {
        if (contact_rate_[rt_[v].state] > 0.0) {
            ++rt_[v].attempt_seq;
            generate_attack_event(v, clock_);
        }
    }
}

StepOutcome RejectEngine::step()
{
    if (finished_)
        return StepOutcome::Finished;
    if (temporal_mode_)
        pull_temporal_changes();
    const auto popped = queue_.pop();
    if (!popped) {
        finished_ = true;
        return StepOutcome::Finished;
    }
    const Event& e = *popped;
    clock_ = e.time;
    if (clock_ > cfg_.horizon) {
        finished_ = true;
        return StepOutcome::Finished;
    }
    NodeRuntime& owner = rt_[e.node];
    if (is_stale(e, owner)) {
        ++stats_.stale_skips;
        return StepOutcome::StaleSkip;
    }

    if (e.kind == EventKind::Transition) {
        const NodeRule& rule = cfg_.model->node_rules()[e.rule];
        if (owner.state != rule.from)
            throw Error(Errc::CorruptState, "transition event does not match the node's state");
        recorder_.before_change(clock_, counts_);
        set_state(e.node, rule.to);
        ++stats_.applied_events;
        recorder_.after_change(clock_, counts_);
        recorder_.log(clock_, LogKind::Transition, e.node, e.node, e.rule);
        schedule_transition_if_any(e.node);
        schedule_attack_if_contact(e.node);
        return StepOutcome::Applied;
    }

    owner.next_attempt_time = infinite_time;
    if (owner.state != rule_contact_[e.rule] || !(clock_ < owner.residence_end))
        throw Error(Errc::CorruptState, "attack from a node that is no longer attacking");
    const NodeId target = e.target;
    bool applicable = rt_[target].state == rule_target_from_[e.rule];
    if (applicable && temporal_mode_ && !edge_valid(e.node, target, e.epoch))
        applicable = false;
    if (!applicable) {
        ++stats_.late_rejects;
        recorder_.log(clock_, LogKind::Reject, e.node, target, e.rule);
        generate_attack_event(e.node, clock_);
        return StepOutcome::LateReject;
    }

    recorder_.before_change(clock_, counts_);
    set_state(target, rule_target_to_[e.rule]);
    ++stats_.applied_events;
    recorder_.after_change(clock_, counts_);
    recorder_.log(clock_, LogKind::Contact, e.node, target, e.rule);
    schedule_transition_if_any(target);
    generate_attack_event(e.node, clock_);
    schedule_attack_if_contact(target);
    return StepOutcome::Applied;
}

RunResult RejectEngine::run()
{
    const auto start = std::chrono::steady_clock::now();
    while (step() != StepOutcome::Finished) {
    }
    stats_.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    stats_.queue_peak = queue_.peak();
    RunResult out;
    out.stats = stats_;
    recorder_.finish(counts_, out);
    out.final_states = states();
    return out;
}

std::vector<std::string> RejectEngine::check_invariants() const
{
    std::vector<std::string> problems;
    auto report = [&](NodeId v, const std::string& what) {
        problems.push_back("node " + std::to_string(v) + ": " + what);
    };

    std::vector<std::uint32_t> recount(counts_.size(), 0);
    for (const auto& r : rt_)
        ++recount[r.state];
    if (recount != counts_)
        problems.push_back("state counts out of sync");

    std::vector<std::uint32_t> transitions(rt_.size(), 0), attacks(rt_.size(), 0);
    std::vector<double> transition_time(rt_.size(), infinite_time), attack_time(rt_.size(), infinite_time);
    for (const Event& e : queue_.contents()) {
        if (is_stale(e, rt_[e.node]))
            continue;
        if (e.kind == EventKind::Transition) {
            ++transitions[e.node];
            transition_time[e.node] = e.time;
        } else {
            ++attacks[e.node];
            attack_time[e.node] = e.time;
        }
    }
    for (NodeId v = 0; v < rt_.size(); ++v) {
        const NodeRuntime& r = rt_[v];
        const StateId s = r.state;
        const bool exits = exit_rate_[s] > 0.0;
        if (exits && transitions[v] != 1)
            report(v, std::to_string(transitions[v]) + " pending transitions, expected 1");
        if (!exits && transitions[v] != 0)
            report(v, "pending transition for a state without node rules");
        if (rd_[s] && exits) {
            if (r.residence_end != transition_time[v])
                report(v, "residence_end differs from its transition event");
        } else if (std::isfinite(r.residence_end)) {
            report(v, "finite residence_end outside a residence-deterministic state");
        }
        if (contact_rate_[s] > 0.0) {
            if (attacks[v] > 1)
                report(v, "more than one pending attack");
            if (attacks[v] == 1 && !(attack_time[v] < r.residence_end))
                report(v, "attack scheduled after the residence ends");
            if (r.next_attempt_time != attack_time[v])
                report(v, "next_attempt_time differs from the pending attack");
        } else if (attacks[v] != 0) {
            report(v, "pending attack from a non-contact state");
        }
    }
    return problems;
}

} // namespace rejsim
