#include "rejsim/engine_baseline.hpp"

#include "rejsim/error.hpp"

#include <chrono>

namespace rejsim {

OgaEngine::OgaEngine(const Network& net, SimConfig cfg)
    : core_(net, std::move(cfg)), max_degree_(static_cast<std::uint32_t>(net.max_degree())), infected_(net.size())
{
    const auto sis = core_.cfg.model->as_sis();
    if (!sis)
        throw Error(Errc::OgaRequiresSis, "the optimized Gillespie engine only runs SIS models");
    if (net.weighted())
        throw Error(Errc::Unsupported, "the optimized Gillespie engine needs an unweighted network");
    sis_ = *sis;
    degrees_.resize(net.size());
    for (NodeId v = 0; v < net.size(); ++v) {
        degrees_[v] = static_cast<std::uint32_t>(net.degree(v));
        if (core_.states[v] == sis_.infected)
            set_infected(v, true);
    }
}

void OgaEngine::set_infected(NodeId v, bool infected)
{
    if (infected) {
        infected_.insert(v);
        infected_degree_sum_ += degrees_[v];
    } else {
        infected_.erase(v);
        infected_degree_sum_ -= degrees_[v];
    }
}

OgaEngine::InfectionSample OgaEngine::sample_infection_attempt()
{
    if (infected_degree_sum_ == 0)
        throw Error(Errc::DegenerateParameters, "no infected node has a neighbour");
    const NodeId src = degree_proportional_pick(infected_, degrees_, max_degree_, core_.rng);
    const NodeId dst = core_.net->neighbor_at(src, core_.rng.draw_uniform_index(degrees_[src]));
    return {src, dst, core_.states[dst] == sis_.infected};
}

StepOutcome OgaEngine::step()
{
    if (core_.finished)
        return StepOutcome::Finished;
    const double rate = total_rate();
    if (!(rate > 0.0)) {
        core_.finished = true;
        return StepOutcome::Finished;
    }
    const double t = core_.clock + core_.rng.draw_exp(rate);
    if (t > core_.cfg.horizon) {
        core_.clock = core_.cfg.horizon;
        core_.finished = true;
        return StepOutcome::Finished;
    }
    core_.clock = t;
    if (core_.rng.draw_bernoulli(sis_.mu * infected_.size() / rate)) {
        const NodeId v = infected_.at(core_.rng.draw_uniform_index(infected_.size()));
        core_.recorder.before_change(t, core_.counts);
        core_.set_state(v, sis_.susceptible);
        set_infected(v, false);
        core_.recorder.log(t, LogKind::Transition, v, v, 0);
    } else {
        const auto a = sample_infection_attempt();
        if (a.rejected) {
            ++core_.stats.late_rejects;
            core_.recorder.log(t, LogKind::Reject, a.source, a.target, 0);
            return StepOutcome::LateReject;
        }
        core_.recorder.before_change(t, core_.counts);
        core_.set_state(a.target, sis_.infected);
        set_infected(a.target, true);
        core_.recorder.log(t, LogKind::Contact, a.source, a.target, 0);
    }
    ++core_.stats.applied_events;
    core_.recorder.after_change(t, core_.counts);
    return StepOutcome::Applied;
}

RunResult OgaEngine::run()
{
    const auto start = std::chrono::steady_clock::now();
    while (step() != StepOutcome::Finished) {
    }
    return core_.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

} // namespace rejsim
