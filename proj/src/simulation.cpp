#include "rejsim/simulation.hpp"

#include "rejsim/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace rejsim {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

} // namespace

InitialAssignment parse_initial_assignment(const Model& model, std::string_view text)
{
    text = trim(text);
    if (text.empty())
        throw Error(Errc::BadInitialAssignment, "empty initial assignment");
    InitialAssignment init;
    if (text.find(':') == std::string_view::npos) {
        for (auto name : split(text, ','))
            init.per_node.push_back(model.state(name));
        return init;
    }
    for (auto item : split(text, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string_view::npos)
            throw Error(Errc::BadInitialAssignment, "expected <state>:<fraction>, got '" + std::string(item) + "'");
        const StateId s = model.state(trim(item.substr(0, colon)));
        const auto num = trim(item.substr(colon + 1));
        double f = 0.0;
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), f);
        if (ec != std::errc() || ptr != num.data() + num.size())
            throw Error(Errc::BadInitialAssignment, "bad fraction '" + std::string(num) + "'");
        init.fractions.emplace_back(s, f);
    }
    return init;
}

std::vector<StateId> resolve_initial_states(const Model& model, std::size_t n, const InitialAssignment& init,
                                            RandomSource& rng)
{
    const std::size_t m = model.num_states();
    if (!init.per_node.empty()) {
        if (!init.fractions.empty())
            throw Error(Errc::BadInitialAssignment, "give either per-node states or fractions, not both");
        if (init.per_node.size() != n)
            throw Error(Errc::BadInitialAssignment, "expected " + std::to_string(n) + " node states, got " +
                                                        std::to_string(init.per_node.size()));
        for (StateId s : init.per_node)
            if (s >= m)
                throw Error(Errc::BadInitialAssignment, "state index out of range");
        return init.per_node;
    }

    std::vector<double> frac(m, 0.0);
    for (const auto& [s, f] : init.fractions) {
        if (s >= m)
            throw Error(Errc::BadInitialAssignment, "state index out of range");
        if (!(f >= 0.0 && f <= 1.0))
            throw Error(Errc::BadInitialAssignment, "fractions must lie in [0,1]");
        frac[s] += f;
    }
    const double listed = std::accumulate(frac.begin(), frac.end(), 0.0);
    if (listed > 1.0 + 1e-9)
        throw Error(Errc::BadInitialAssignment, "fractions sum to more than 1");
    frac[0] += std::max(0.0, 1.0 - listed);

    // Largest-remainder rounding so the counts add up to n exactly.
    std::vector<std::size_t> count(m);
    std::vector<std::pair<double, std::size_t>> remainder(m);
    std::size_t assigned = 0;
    for (std::size_t s = 0; s < m; ++s) {
        const double exact = frac[s] * static_cast<double>(n);
        count[s] = static_cast<std::size_t>(std::floor(exact));
        remainder[s] = {exact - std::floor(exact), s};
        assigned += count[s];
    }
    std::stable_sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned)
        ++count[remainder[i % m].second];

    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), NodeId{0});
    for (std::size_t i = n; i > 1; --i)
        std::swap(order[i - 1], order[rng.draw_uniform_index(i)]);

    std::vector<StateId> states(n, 0);
    std::size_t pos = 0;
    for (std::size_t s = 0; s < m; ++s)
        for (std::size_t c = 0; c < count[s]; ++c)
            states[order[pos++]] = static_cast<StateId>(s);
    return states;
}

void check_config(const SimConfig& cfg)
{
    if (!cfg.model)
        throw Error(Errc::DegenerateParameters, "simulation config has no model");
    if (!(cfg.horizon > 0.0) || std::isnan(cfg.horizon))
        throw Error(Errc::DegenerateParameters, "horizon must be > 0");
    if (cfg.record.mode == SampleMode::Grid && (!(cfg.record.grid_dt > 0.0) || !std::isfinite(cfg.horizon)))
        throw Error(Errc::DegenerateParameters, "grid sampling needs dt > 0 and a finite horizon");
}

Recorder::Recorder(const RecordOptions& opts, const Model& model, double horizon)
    : mode_(opts.mode), dt_(opts.grid_dt), horizon_(horizon), log_(opts.event_log)
{
    traj_.state_names = model.state_names();
    if (mode_ == SampleMode::Grid)
        grid_points_ = static_cast<std::size_t>(std::floor(horizon / dt_ * (1.0 + 1e-12))) + 1;
}

void Recorder::push_row(double t, std::span<const std::uint32_t> counts)
{
    traj_.times.push_back(t);
    traj_.counts.insert(traj_.counts.end(), counts.begin(), counts.end());
}

void Recorder::emit_grid_until(double t, std::span<const std::uint32_t> counts)
{
    while (next_grid_ < grid_points_) {
        const double g = static_cast<double>(next_grid_) * dt_;
        if (!(g < t))
            break;
        push_row(g, counts);
        ++next_grid_;
    }
}

void Recorder::start(std::span<const std::uint32_t> counts)
{
    if (mode_ != SampleMode::Grid)
        push_row(0.0, counts);
}

void Recorder::finish(std::span<const std::uint32_t> counts, RunResult& out)
{
    if (mode_ == SampleMode::Grid)
        emit_grid_until(infinite_time, counts);
    else if (std::isfinite(horizon_))
        push_row(horizon_, counts);
    out.trajectory = std::move(traj_);
    out.event_log = std::move(events_);
}

std::string format_double(double v)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string trajectory_csv(const Trajectory& traj)
{
    std::string out = "time";
    for (const auto& name : traj.state_names)
        out += "," + name;
    out += '\n';
    char buf[32];
    for (std::size_t i = 0; i < traj.rows(); ++i) {
        out += format_double(traj.times[i]);
        for (auto c : traj.row(i)) {
            out += ',';
            const auto r = std::to_chars(buf, buf + sizeof buf, c);
            out.append(buf, r.ptr);
        }
        out += '\n';
    }
    return out;
}

std::string event_log_csv(std::span<const LogEntry> log)
{
    std::string out = "time,kind,src,dst,rule\n";
    for (const auto& e : log) {
        out += format_double(e.time);
        switch (e.kind) {
        case LogKind::Transition: out += ",transition,"; break;
        case LogKind::Contact: out += ",contact,"; break;
        case LogKind::Reject: out += ",reject,"; break;
        }
        out += std::to_string(e.src) + ',' + std::to_string(e.dst) + ',' + std::to_string(e.rule) + '\n';
    }
    return out;
}

} // namespace rejsim
