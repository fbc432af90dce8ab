#include "rejsim/error.hpp"
#include "rejsim/netgraph.hpp"
#include "rejsim/stochastics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace rejsim {

namespace {

constexpr std::uint64_t degree_stream = 0;
constexpr std::uint64_t matching_stream = 1;
constexpr int repair_rounds = 100;

void check_law(std::size_t n, const PowerLawDegrees& law)
{
    if (n < 2)
        throw Error(Errc::DegenerateParameters, "need at least 2 nodes");
    if (!(law.gamma > 1.0) || !std::isfinite(law.gamma))
        throw Error(Errc::DegenerateParameters, "gamma must be > 1");
    if (law.kmin < 1 || law.kmin > law.kmax || law.kmax >= n)
        throw Error(Errc::DegenerateParameters, "require 1 <= kmin <= kmax < n");
}

inline std::uint64_t edge_key(NodeId a, NodeId b)
{
    if (a > b)
        std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

template <typename T>
void shuffle(std::vector<T>& v, RandomSource& rng)
{
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.draw_uniform_index(i)]);
}

} // namespace

double PowerLawDegrees::probability(std::uint32_t k) const
{
    if (k < kmin || k > kmax)
        return 0.0;
    double norm = 0.0;
    for (std::uint32_t j = kmin; j <= kmax; ++j)
        norm += std::pow(static_cast<double>(j), -gamma);
    return std::pow(static_cast<double>(k), -gamma) / norm;
}

double PowerLawDegrees::mean() const
{
    double norm = 0.0, first = 0.0;
    for (std::uint32_t j = kmin; j <= kmax; ++j) {
        const double p = std::pow(static_cast<double>(j), -gamma);
        norm += p;
        first += j * p;
    }
    return first / norm;
}

std::vector<std::uint32_t> sample_degree_sequence(std::size_t n, const PowerLawDegrees& law, std::uint64_t seed)
{
    check_law(n, law);
    if (law.kmin == law.kmax && (law.kmin % 2 == 1) && (n % 2 == 1))
        throw Error(Errc::DegenerateParameters, "odd regular degree on an odd number of nodes");

    std::vector<double> cdf;
    cdf.reserve(law.kmax - law.kmin + 1);
    double acc = 0.0;
    for (std::uint32_t k = law.kmin; k <= law.kmax; ++k) {
        acc += std::pow(static_cast<double>(k), -law.gamma);
        cdf.push_back(acc);
    }
    RandomSource rng(seed, degree_stream);
    auto draw = [&] {
        const double target = rng.uniform() * acc;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
        return law.kmin + static_cast<std::uint32_t>(idx);
    };

    std::vector<std::uint32_t> degrees(n);
    std::uint64_t total = 0;
    for (auto& k : degrees) {
        k = draw();
        total += k;
    }
    while (total % 2 != 0) {
        total -= degrees.back();
        degrees.back() = draw();
        total += degrees.back();
    }
    return degrees;
}

Network configuration_model(std::span<const std::uint32_t> degrees, std::uint64_t seed)
{
    const std::size_t n = degrees.size();
    std::vector<NodeId> stubs;
    stubs.reserve(std::accumulate(degrees.begin(), degrees.end(), std::size_t{0}));
    for (NodeId v = 0; v < n; ++v)
        stubs.insert(stubs.end(), degrees[v], v);
    if (stubs.size() % 2 != 0)
        throw Error(Errc::DegenerateParameters, "degree sequence has an odd total");

    RandomSource rng(seed, matching_stream);
    shuffle(stubs, rng);

    // Classify the initial matching: the first copy of each pair is kept,
    // self-loops and further copies go back into the stub pool.
    const std::size_t m = stubs.size() / 2;
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed(m);
    for (std::size_t i = 0; i < m; ++i)
        keyed[i] = {edge_key(stubs[2 * i], stubs[2 * i + 1]), i};
    std::sort(keyed.begin(), keyed.end());

    std::vector<std::uint64_t> good;
    std::vector<NodeId> pool;
    good.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto [key, idx] = keyed[i];
        const NodeId a = stubs[2 * idx], b = stubs[2 * idx + 1];
        if (a == b || (!good.empty() && good.back() == key)) {
            pool.push_back(a);
            pool.push_back(b);
        } else {
            good.push_back(key);
        }
    }

    std::vector<char> dissolved(good.size(), 0);
    std::size_t available = good.size();
    std::set<std::uint64_t> added;
    auto present = [&](std::uint64_t key) {
        const auto it = std::lower_bound(good.begin(), good.end(), key);
        if (it != good.end() && *it == key && !dissolved[static_cast<std::size_t>(it - good.begin())])
            return true;
        return added.count(key) != 0;
    };

    for (int round = 0; round < repair_rounds && !pool.empty(); ++round) {
        // Free as many random kept edges as there are defects so the
        // re-pairing has partners other than the defective stubs themselves.
        const std::size_t extra = std::min(pool.size() / 2, available);
        for (std::size_t i = 0; i < extra; ++i) {
            std::size_t idx;
            do
                idx = rng.draw_uniform_index(good.size());
            while (dissolved[idx]);
            dissolved[idx] = 1;
            --available;
            pool.push_back(static_cast<NodeId>(good[idx] >> 32));
            pool.push_back(static_cast<NodeId>(good[idx] & 0xffffffffu));
        }
        shuffle(pool, rng);
        std::vector<NodeId> rest;
        for (std::size_t i = 0; i + 1 < pool.size(); i += 2) {
            const NodeId a = pool[i], b = pool[i + 1];
            const auto key = edge_key(a, b);
            if (a == b || present(key)) {
                rest.push_back(a);
                rest.push_back(b);
            } else {
                added.insert(key);
            }
        }
        pool = std::move(rest);
    }
    // Remaining defects are erased.

    std::vector<Edge> edges;
    edges.reserve(available + added.size());
    for (std::size_t i = 0; i < good.size(); ++i)
        if (!dissolved[i])
            edges.push_back({static_cast<NodeId>(good[i] >> 32), static_cast<NodeId>(good[i] & 0xffffffffu), 1.0});
    for (const auto key : added)
        edges.push_back({static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffu), 1.0});
    return Network::from_edges(n, edges);
}

Network configuration_model(std::size_t n, double gamma, std::uint32_t kmin, std::uint32_t kmax, std::uint64_t seed)
{
    const auto degrees = sample_degree_sequence(n, PowerLawDegrees{gamma, kmin, kmax}, seed);
    return configuration_model(degrees, seed);
}

} // namespace rejsim
