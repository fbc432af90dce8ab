#pragma once

#include "rejsim/model.hpp"
#include "rejsim/netgraph.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rejsim {

/// Full network state packed base m, node 0 in the least significant digit.
using GlobalState = std::uint32_t;

inline constexpr std::uint64_t max_global_states = std::uint64_t{1} << 24;

/// Bijection between per-node state vectors and GlobalState codes.
class StateCodec {
public:
    /// Throws StateSpaceTooLarge when m^n > 2^24.
    StateCodec(std::size_t nodes, std::size_t states);

    std::size_t nodes() const noexcept { return n_; }
    std::size_t states() const noexcept { return m_; }
    std::size_t size() const noexcept { return size_; }

    GlobalState encode(std::span<const StateId> local) const;
    std::vector<StateId> decode(GlobalState x) const;
    StateId digit(GlobalState x, std::size_t node) const { return static_cast<StateId>(x / pow_[node] % m_); }
    /// Code of x with `node` moved to state `to`.
    GlobalState with(GlobalState x, std::size_t node, StateId to) const
    {
        return x + (static_cast<GlobalState>(to) - digit(x, node)) * pow_[node];
    }

private:
    std::size_t n_;
    std::size_t m_;
    std::size_t size_;
    std::vector<GlobalState> pow_;
};

/// Sparse CTMC generator in row-compressed form. Off-diagonal entries are
/// kept one per rule application (so parallel rules between the same pair of
/// global states appear as separate entries); the diagonal is implicit as
/// -exit_rate.
struct Generator {
    StateCodec codec;
    std::vector<std::uint64_t> row_start;
    std::vector<GlobalState> target;
    std::vector<double> rate;
    std::vector<double> exit_rate;

    std::size_t size() const noexcept { return codec.size(); }
    double max_exit_rate() const;
};

/// For every global state and node: node rules at their rate, edge rules at
/// rate times the weight of neighbours in the contact state.
/// Throws StateSpaceTooLarge.
Generator build_generator(const Network& net, const Model& model);

using Distribution = std::vector<double>;

Distribution point_distribution(const StateCodec& codec, std::span<const StateId> initial);

/// p0 * exp(Q t) by uniformization; Poisson terms are summed until the
/// remaining tail mass is below `tolerance`.
Distribution transient(const Generator& gen, const Distribution& p0, double t, double tolerance = 1e-10);

/// Probability that `node` is in `state`.
double marginal(const StateCodec& codec, const Distribution& dist, std::size_t node, StateId state);

/// All per-node marginals, laid out [node * m + state].
std::vector<double> marginals(const StateCodec& codec, const Distribution& dist);

/// Per-node marginals at time t from a fixed initial labelling.
std::vector<double> exact_marginals(const Network& net, const Model& model, std::span<const StateId> initial, double t);

struct MarginalCheck {
    std::size_t node;
    StateId state;
    double exact;
    double empirical;
    double z;
    bool pass;
};

struct ConformanceReport {
    std::uint64_t runs = 0;
    double threshold = 4.0;
    std::vector<MarginalCheck> checks;
    bool passed = true;
    double max_abs_z = 0.0;
    /// Reminder that many marginals are tested at once.
    std::string note;
};

/// z = (p_hat - p) / sqrt(p (1 - p) / runs) per marginal; |z| > threshold
/// fails. Degenerate p (0 or 1) passes only on an exact match. Both inputs
/// are laid out [node * m + state]. Throws DegenerateParameters when
/// runs < 1000 or the sizes disagree.
ConformanceReport conformance_test(std::span<const double> empirical, std::span<const double> exact,
                                   std::size_t states, std::uint64_t runs, double threshold = 4.0);

/// Single z-score as used by conformance_test.
double conformance_z(double empirical, double exact, std::uint64_t runs);

} // namespace rejsim
