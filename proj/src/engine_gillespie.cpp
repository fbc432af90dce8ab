#include "rejsim/engine_baseline.hpp"

#include "rejsim/error.hpp"

#include <algorithm>
#include <chrono>

namespace rejsim {

namespace {

SimConfig checked(SimConfig cfg)
{
    check_config(cfg);
    return cfg;
}

std::vector<std::uint32_t> count_states(std::span<const StateId> states, std::size_t m)
{
    std::vector<std::uint32_t> counts(m, 0);
    for (StateId s : states)
        ++counts[s];
    return counts;
}

} // namespace

NodeId degree_proportional_pick(const DynamicNodeList& list, std::span<const std::uint32_t> degrees,
                                std::uint32_t max_degree, RandomSource& rng)
{
    if (list.empty() || max_degree == 0)
        throw Error(Errc::DegenerateParameters, "degree-proportional pick from an empty list or zero degrees");
    while (true) {
        const NodeId v = list.at(rng.draw_uniform_index(list.size()));
        if (rng.uniform() * max_degree < degrees[v])
            return v;
    }
}

DirectMethodCore::DirectMethodCore(const Network& network, SimConfig config)
    : cfg(checked(std::move(config))),
      net(&network),
      rng(cfg.seed, cfg.stream),
      states(resolve_initial_states(*cfg.model, network.size(), cfg.init, rng)),
      counts(count_states(states, cfg.model->num_states())),
      recorder(cfg.record, *cfg.model, cfg.horizon)
{
    recorder.start(counts);
}

RunResult DirectMethodCore::finish(double wall_time)
{
    stats.wall_time = wall_time;
    RunResult out;
    out.stats = stats;
    recorder.finish(counts, out);
    out.final_states = states;
    return out;
}

template <class Engine>
static RunResult run_to_end(Engine& engine, DirectMethodCore& core)
{
    const auto start = std::chrono::steady_clock::now();
    while (engine.step() != StepOutcome::Finished) {
    }
    return core.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

/* Gillespie SIS */

GillespieSisEngine::GillespieSisEngine(const Network& net, SimConfig cfg)
    : core_(net, std::move(cfg)), infected_(net.size())
{
    const auto sis = core_.cfg.model->as_sis();
    if (!sis)
        throw Error(Errc::Unsupported, "the Gillespie SIS engine needs an SIS model; use ga-generic");
    if (net.weighted())
        throw Error(Errc::Unsupported, "the Gillespie SIS engine needs an unweighted network; use ga-generic");
    sis_ = *sis;
    si_edges_.reserve(net.edge_count());
    for (NodeId v = 0; v < net.size(); ++v) {
        if (core_.states[v] != sis_.infected)
            continue;
        infected_.insert(v);
        for (NodeId w : net.neighbors(v))
            if (core_.states[w] == sis_.susceptible)
                si_edges_.insert(v, w);
    }
}

double GillespieSisEngine::curing_probability() const
{
    const double c = aggregated_rate();
    return c > 0.0 ? sis_.mu * infected_.size() / c : 0.0;
}

void GillespieSisEngine::cure(NodeId v)
{
    core_.set_state(v, sis_.susceptible);
    infected_.erase(v);
    for (NodeId w : core_.net->neighbors(v)) {
        if (core_.states[w] == sis_.infected)
            si_edges_.insert(w, v);
        else
            si_edges_.erase(v, w);
    }
}

void GillespieSisEngine::infect(NodeId v)
{
    core_.set_state(v, sis_.infected);
    infected_.insert(v);
    for (NodeId w : core_.net->neighbors(v)) {
        if (core_.states[w] == sis_.susceptible)
            si_edges_.insert(v, w);
        else
            si_edges_.erase(w, v);
    }
}

StepOutcome GillespieSisEngine::step()
{
    if (core_.finished)
        return StepOutcome::Finished;
    const double c = aggregated_rate();
    if (!(c > 0.0)) {
        core_.finished = true;
        return StepOutcome::Finished;
    }
    const double t = core_.clock + core_.rng.draw_exp(c);
    if (t > core_.cfg.horizon) {
        core_.clock = core_.cfg.horizon;
        core_.finished = true;
        return StepOutcome::Finished;
    }
    core_.clock = t;
    core_.recorder.before_change(t, core_.counts);
    if (core_.rng.draw_bernoulli(sis_.mu * infected_.size() / c)) {
        const NodeId v = infected_.at(core_.rng.draw_uniform_index(infected_.size()));
        cure(v);
        core_.recorder.log(t, LogKind::Transition, v, v, 0);
    } else {
        const auto [src, dst] = si_edges_.at(core_.rng.draw_uniform_index(si_edges_.size()));
        infect(dst);
        core_.recorder.log(t, LogKind::Contact, src, dst, 0);
    }
    ++core_.stats.applied_events;
    core_.recorder.after_change(t, core_.counts);
    return StepOutcome::Applied;
}

RunResult GillespieSisEngine::run() { return run_to_end(*this, core_); }

bool GillespieSisEngine::lists_consistent() const
{
    std::size_t infected = 0, pairs = 0;
    for (NodeId v = 0; v < core_.net->size(); ++v) {
        if (core_.states[v] != sis_.infected)
            continue;
        ++infected;
        if (!infected_.contains(v))
            return false;
        for (NodeId w : core_.net->neighbors(v)) {
            if (core_.states[w] != sis_.susceptible)
                continue;
            ++pairs;
            if (!si_edges_.contains(v, w))
                return false;
        }
    }
    return infected == infected_.size() && pairs == si_edges_.size();
}

/* Sum tree */

SumTree::SumTree(std::size_t n) : n_(n)
{
    while (leaves_ < n)
        leaves_ *= 2;
    tree_.assign(2 * leaves_, 0.0);
}

void SumTree::set(std::size_t i, double w)
{
    std::size_t k = leaves_ + i;
    tree_[k] = w;
    for (k /= 2; k >= 1; k /= 2)
        tree_[k] = tree_[2 * k] + tree_[2 * k + 1];
}

std::size_t SumTree::find(double target) const
{
    std::size_t k = 1;
    while (k < leaves_) {
        const double left = tree_[2 * k];
        const double right = tree_[2 * k + 1];
        if ((target < left && left > 0.0) || !(right > 0.0)) {
            k = 2 * k;
        } else {
            target -= left;
            k = 2 * k + 1;
        }
    }
    return k - leaves_;
}

/* Generic direct method */

GillespieGenericEngine::GillespieGenericEngine(const Network& net, SimConfig cfg)
    : core_(net, std::move(cfg)),
      m_(core_.cfg.model->num_states()),
      neighbor_weight_(net.size() * m_, 0.0),
      neighbor_count_(net.size() * m_, 0),
      tree_(net.size())
{
    for (NodeId v = 0; v < net.size(); ++v) {
        const auto nbrs = net.neighbors(v);
        for (std::size_t j = 0; j < nbrs.size(); ++j) {
            const std::size_t k = v * m_ + core_.states[nbrs[j]];
            neighbor_weight_[k] += net.weighted() ? net.weights(v)[j] : 1.0;
            ++neighbor_count_[k];
        }
    }
    for (NodeId v = 0; v < net.size(); ++v)
        tree_.set(v, compute_propensity(v));
}

double GillespieGenericEngine::compute_propensity(NodeId v) const
{
    const Model& m = *core_.cfg.model;
    const StateId s = core_.states[v];
    double p = m.exit_rate(s);
    for (std::uint16_t r : m.edge_rules_targeting(s)) {
        const auto& rule = m.edge_rules()[r];
        p += rule.rate * neighbor_weight_[v * m_ + rule.contact];
    }
    return p;
}

void GillespieGenericEngine::apply(NodeId v, StateId to)
{
    const Network& net = *core_.net;
    const StateId from = core_.states[v];
    core_.set_state(v, to);
    const auto nbrs = net.neighbors(v);
    for (std::size_t j = 0; j < nbrs.size(); ++j) {
        const NodeId w = nbrs[j];
        const double wt = net.weighted() ? net.weights(v)[j] : 1.0;
        const std::size_t f = w * m_ + from;
        // Reset on reaching zero so float residue of weighted sums cannot
        // leave a phantom propensity.
        neighbor_weight_[f] = --neighbor_count_[f] == 0 ? 0.0 : neighbor_weight_[f] - wt;
        neighbor_weight_[w * m_ + to] += wt;
        ++neighbor_count_[w * m_ + to];
        tree_.set(w, compute_propensity(w));
    }
    tree_.set(v, compute_propensity(v));
}

StepOutcome GillespieGenericEngine::step()
{
    if (core_.finished)
        return StepOutcome::Finished;
    const double total = tree_.total();
    if (!(total > 0.0)) {
        core_.finished = true;
        return StepOutcome::Finished;
    }
    const double t = core_.clock + core_.rng.draw_exp(total);
    if (t > core_.cfg.horizon) {
        core_.clock = core_.cfg.horizon;
        core_.finished = true;
        return StepOutcome::Finished;
    }
    core_.clock = t;
    const NodeId v = static_cast<NodeId>(tree_.find(core_.rng.uniform() * total));

    const Model& m = *core_.cfg.model;
    const StateId s = core_.states[v];
    double x = core_.rng.uniform() * tree_.weight(v);
    bool contact = false;
    std::uint16_t chosen = 0;
    double chosen_share = 0.0;
    bool found = false;
    for (std::uint16_t r : m.node_rules_from(s)) {
        chosen = r;
        found = true;
        x -= m.node_rules()[r].rate;
        if (x < 0.0)
            break;
    }
    if (!(found && x < 0.0)) {
        for (std::uint16_t r : m.edge_rules_targeting(s)) {
            const auto& rule = m.edge_rules()[r];
            const double p = rule.rate * neighbor_weight_[v * m_ + rule.contact];
            if (!(p > 0.0))
                continue;
            chosen = r;
            chosen_share = p;
            contact = true;
            x -= p;
            if (x < 0.0)
                break;
        }
    }

    core_.recorder.before_change(t, core_.counts);
    if (contact) {
        const auto& rule = m.edge_rules()[chosen];
        NodeId src = v;
        if (core_.recorder.logging()) {
            // The attacker only matters for the log; pick it by weight from
            // the leftover of the rule draw so logging consumes no randomness.
            const Network& net = *core_.net;
            const auto nbrs = net.neighbors(v);
            double y = std::max(0.0, x + chosen_share) / rule.rate;
            for (std::size_t j = 0; j < nbrs.size(); ++j) {
                if (core_.states[nbrs[j]] != rule.contact)
                    continue;
                src = nbrs[j];
                y -= net.weighted() ? net.weights(v)[j] : 1.0;
                if (y < 0.0)
                    break;
            }
        }
        apply(v, rule.target_to);
        core_.recorder.log(t, LogKind::Contact, src, v, chosen);
    } else {
        apply(v, m.node_rules()[chosen].to);
        core_.recorder.log(t, LogKind::Transition, v, v, chosen);
    }
    ++core_.stats.applied_events;
    core_.recorder.after_change(t, core_.counts);
    return StepOutcome::Applied;
}

RunResult GillespieGenericEngine::run() { return run_to_end(*this, core_); }

} // namespace rejsim
