#pragma once

#include "rejsim/engine_reject.hpp"
#include "rejsim/error.hpp"
#include "rejsim/exact_oracle.hpp"
#include "rejsim/model.hpp"
#include "rejsim/netgraph.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

namespace testing {

using namespace rejsim;

inline Network graph(std::size_t n, std::initializer_list<std::pair<NodeId, NodeId>> edges)
{
    std::vector<Edge> es;
    for (auto [a, b] : edges)
        es.push_back({a, b, 1.0});
    return Network::from_edges(n, es);
}

inline Network two_node() { return graph(2, {{0, 1}}); }
inline Network path3() { return graph(3, {{0, 1}, {1, 2}}); }
inline Network star5() { return graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}); }

inline std::shared_ptr<const Model> shared(Model m) { return std::make_shared<const Model>(std::move(m)); }
inline std::shared_ptr<const Model> sis() { return shared(presets::sis(1.0, 0.6)); }
inline std::shared_ptr<const Model> sir() { return shared(presets::sir(1.1, 0.3, 0.6)); }
inline std::shared_ptr<const Model> competing() { return shared(presets::competing(0.6, 0.63, 0.6, 0.7)); }

inline std::vector<StateId> states_of(const Model& m, std::initializer_list<const char*> names)
{
    std::vector<StateId> out;
    for (const char* n : names)
        out.push_back(m.state(n));
    return out;
}

inline SimConfig config(std::shared_ptr<const Model> m, std::vector<StateId> init, double horizon,
                        std::uint64_t seed = 1, std::uint64_t stream = 0)
{
    SimConfig c;
    c.model = std::move(m);
    c.horizon = horizon;
    c.seed = seed;
    c.stream = stream;
    c.init = InitialAssignment::explicit_states(std::move(init));
    return c;
}

/// |mean - expected| in units of the standard error sd / sqrt(n).
inline double z_of_mean(double mean, double expected, double sd, double n)
{
    return (mean - expected) / (sd / std::sqrt(n));
}

/// z of an observed frequency against probability p over n trials.
inline double z_of_freq(double hits, double n, double p) { return (hits / n - p) / std::sqrt(p * (1 - p) / n); }

/// Per-node state frequencies over `runs` runs, laid out [node * m + state].
/// `final_states(r)` returns the states at the horizon of run r.
template <typename F>
std::vector<double> empirical_marginals(std::size_t n, std::size_t m, std::uint64_t runs, F&& final_states)
{
    std::vector<double> freq(n * m, 0.0);
    for (std::uint64_t r = 0; r < runs; ++r) {
        const std::vector<StateId> s = final_states(r);
        for (std::size_t v = 0; v < n; ++v)
            freq[v * m + s[v]] += 1.0;
    }
    for (double& f : freq)
        f /= static_cast<double>(runs);
    return freq;
}

/// u such that RandomSource::draw_exp(rate) returns t under a script.
inline double exp_u(double rate, double t) { return -std::expm1(-rate * t); }

} // namespace testing
