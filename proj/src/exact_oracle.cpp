#include "rejsim/exact_oracle.hpp"

#include "rejsim/error.hpp"
#include "rejsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rejsim {

StateCodec::StateCodec(std::size_t nodes, std::size_t states) : n_(nodes), m_(states), size_(1)
{
    if (m_ == 0)
        throw Error(Errc::DegenerateParameters, "model has no states");
    pow_.reserve(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        pow_.push_back(static_cast<GlobalState>(size_));
        size_ *= m_;
        if (size_ > max_global_states)
            throw Error(Errc::StateSpaceTooLarge, std::to_string(m_) + "^" + std::to_string(n_) +
                                                      " global states exceed the oracle limit of 2^24");
    }
}

GlobalState StateCodec::encode(std::span<const StateId> local) const
{
    if (local.size() != n_)
        throw Error(Errc::BadInitialAssignment, "state vector length does not match the node count");
    GlobalState x = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        if (local[i] >= m_)
            throw Error(Errc::BadInitialAssignment, "state index out of range");
        x += local[i] * pow_[i];
    }
    return x;
}

std::vector<StateId> StateCodec::decode(GlobalState x) const
{
    std::vector<StateId> out(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        out[i] = static_cast<StateId>(x % m_);
        x /= static_cast<GlobalState>(m_);
    }
    return out;
}

double Generator::max_exit_rate() const
{
    return exit_rate.empty() ? 0.0 : *std::max_element(exit_rate.begin(), exit_rate.end());
}

Generator build_generator(const Network& net, const Model& model)
{
    Generator g{StateCodec(net.size(), model.num_states()), {}, {}, {}, {}};
    const std::size_t size = g.codec.size();
    const std::size_t m = model.num_states();
    g.row_start.reserve(size + 1);
    g.exit_rate.assign(size, 0.0);
    g.row_start.push_back(0);

    std::vector<double> contact_weight(m);
    for (GlobalState x = 0; x < size; ++x) {
        const auto local = g.codec.decode(x);
        double exit = 0.0;
        for (NodeId v = 0; v < net.size(); ++v) {
            const StateId s = local[v];
            for (std::uint16_t r : model.node_rules_from(s)) {
                const auto& rule = model.node_rules()[r];
                g.target.push_back(g.codec.with(x, v, rule.to));
                g.rate.push_back(rule.rate);
                exit += rule.rate;
            }
            const auto targeting = model.edge_rules_targeting(s);
            if (targeting.empty())
                continue;
            std::fill(contact_weight.begin(), contact_weight.end(), 0.0);
            const auto nbrs = net.neighbors(v);
            for (std::size_t j = 0; j < nbrs.size(); ++j)
                contact_weight[local[nbrs[j]]] += net.weighted() ? net.weights(v)[j] : 1.0;
            for (std::uint16_t r : targeting) {
                const auto& rule = model.edge_rules()[r];
                const double q = rule.rate * contact_weight[rule.contact];
                if (!(q > 0.0))
                    continue;
                g.target.push_back(g.codec.with(x, v, rule.target_to));
                g.rate.push_back(q);
                exit += q;
            }
        }
        g.exit_rate[x] = exit;
        g.row_start.push_back(g.target.size());
    }
    return g;
}

Distribution point_distribution(const StateCodec& codec, std::span<const StateId> initial)
{
    Distribution p(codec.size(), 0.0);
    p[codec.encode(initial)] = 1.0;
    return p;
}

Distribution transient(const Generator& gen, const Distribution& p0, double t, double tolerance)
{
    if (p0.size() != gen.size())
        throw Error(Errc::DegenerateParameters, "initial distribution has the wrong size");
    if (!(t >= 0.0) || !std::isfinite(t))
        throw Error(Errc::DegenerateParameters, "transient time must be finite and >= 0");
    const double q = gen.max_exit_rate();
    if (t == 0.0 || q == 0.0)
        return p0;

    // Uniformized chain P = I + Q / q, weights Poisson(q t).
    const double lambda = q * t;
    const double log_lambda = std::log(lambda);
    const auto hard_cap = static_cast<std::uint64_t>(lambda + 40.0 * std::sqrt(lambda) + 100.0);

    Distribution v = p0, next(gen.size()), out(gen.size(), 0.0);
    double accumulated = 0.0;
    for (std::uint64_t k = 0;; ++k) {
        const double w = std::exp(-lambda + static_cast<double>(k) * log_lambda - std::lgamma(static_cast<double>(k) + 1.0));
        if (w > 0.0) {
            for (std::size_t i = 0; i < v.size(); ++i)
                out[i] += w * v[i];
            accumulated += w;
        }
        if ((static_cast<double>(k) >= lambda && 1.0 - accumulated < tolerance) || k >= hard_cap)
            break;

        for (std::size_t i = 0; i < v.size(); ++i)
            next[i] = v[i] * (1.0 - gen.exit_rate[i] / q);
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] == 0.0)
                continue;
            const double scaled = v[i] / q;
            for (std::uint64_t e = gen.row_start[i]; e < gen.row_start[i + 1]; ++e)
                next[gen.target[e]] += scaled * gen.rate[e];
        }
        v.swap(next);
    }
    return out;
}

double marginal(const StateCodec& codec, const Distribution& dist, std::size_t node, StateId state)
{
    double p = 0.0;
    for (GlobalState x = 0; x < dist.size(); ++x)
        if (codec.digit(x, node) == state)
            p += dist[x];
    return p;
}

std::vector<double> marginals(const StateCodec& codec, const Distribution& dist)
{
    const std::size_t m = codec.states();
    std::vector<double> out(codec.nodes() * m, 0.0);
    for (GlobalState x = 0; x < dist.size(); ++x) {
        if (dist[x] == 0.0)
            continue;
        GlobalState rest = x;
        for (std::size_t v = 0; v < codec.nodes(); ++v) {
            out[v * m + rest % m] += dist[x];
            rest /= static_cast<GlobalState>(m);
        }
    }
    return out;
}

std::vector<double> exact_marginals(const Network& net, const Model& model, std::span<const StateId> initial, double t)
{
    const Generator gen = build_generator(net, model);
    return marginals(gen.codec, transient(gen, point_distribution(gen.codec, initial), t));
}

double conformance_z(double empirical, double exact, std::uint64_t runs)
{
    const double var = exact * (1.0 - exact) / static_cast<double>(runs);
    if (!(var > 0.0))
        return empirical == exact ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), empirical - exact);
    return (empirical - exact) / std::sqrt(var);
}

ConformanceReport conformance_test(std::span<const double> empirical, std::span<const double> exact,
                                   std::size_t states, std::uint64_t runs, double threshold)
{
    if (runs < 1000)
        throw Error(Errc::DegenerateParameters, "conformance testing needs at least 1000 runs");
    if (states == 0 || empirical.size() != exact.size() || exact.size() % states != 0)
        throw Error(Errc::DegenerateParameters, "empirical and exact marginals disagree in size");
    ConformanceReport rep;
    rep.runs = runs;
    rep.threshold = threshold;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        // Clamp rounding noise of the solver so an unreachable state reads as 0.
        double p = exact[i];
        if (std::abs(p) < 1e-12)
            p = 0.0;
        else if (std::abs(1.0 - p) < 1e-12)
            p = 1.0;
        const double z = conformance_z(empirical[i], p, runs);
        const bool pass = std::abs(z) <= threshold;
        rep.checks.push_back({i / states, static_cast<StateId>(i % states), exact[i], empirical[i], z, pass});
        rep.passed = rep.passed && pass;
        rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
    }
    rep.note = std::to_string(rep.checks.size()) + " marginals tested at |z| <= " + format_double(threshold) +
               " without multiple-testing correction; marginals of one node are dependent";
    return rep;
}

} // namespace rejsim
