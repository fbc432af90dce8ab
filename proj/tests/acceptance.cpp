// Acceptance checks; one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include "rejsim/engine_baseline.hpp"
#include "rejsim/engine_reject.hpp"
#include "rejsim/exact_oracle.hpp"
#include "rejsim/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace rejsim;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Network graph(std::size_t n, std::initializer_list<std::pair<NodeId, NodeId>> edges, bool weighted = false)
{
    std::vector<Edge> es;
    for (auto [a, b] : edges)
        es.push_back({a, b, 1.0});
    return Network::from_edges(n, es, weighted);
}

std::vector<StateId> states_of(const Model& m, std::initializer_list<const char*> names)
{
    std::vector<StateId> out;
    for (const char* n : names)
        out.push_back(m.state(n));
    return out;
}

struct OracleCase {
    std::string graph;
    Network net;
    std::vector<const char*> init;
};

struct ModelCase {
    std::string name;
    std::vector<OracleCase> cases;
};

// Initial states per model on the two-node edge, the path and the star.
std::vector<ModelCase> oracle_cases(bool weighted)
{
    const Network two = graph(2, {{0, 1}}, weighted);
    const Network path = graph(3, {{0, 1}, {1, 2}}, weighted);
    const Network star = graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}, weighted);
    return {
        {"sis", {{"edge", two, {"I", "S"}}, {"path", path, {"S", "I", "S"}}, {"star", star, {"S", "I", "S", "I", "S"}}}},
        {"sir", {{"edge", two, {"I", "S"}}, {"path", path, {"I", "S", "R"}}, {"star", star, {"S", "I", "R", "S", "I"}}}},
        {"competing",
         {{"edge", two, {"I", "J"}}, {"path", path, {"I", "S", "J"}}, {"star", star, {"S", "I", "J", "S", "S"}}}},
    };
}

std::vector<StateId> resolve(const Model& m, const std::vector<const char*>& names)
{
    std::vector<StateId> out;
    for (const char* n : names)
        out.push_back(m.state(n));
    return out;
}

Outcome oracle_equivalence(bool weighted, std::vector<EngineKind> engines, const std::set<std::string>& graphs)
{
    const std::uint64_t runs = 100000;
    bool all = true;
    std::string detail;
    double worst = 0.0;
    std::size_t count = 0;
    for (const auto& mc : oracle_cases(weighted)) {
        const auto model = build_model(mc.name, "");
        for (EngineKind k : engines) {
            if (k == EngineKind::Oga && !model->as_sis())
                continue;
            for (const auto& c : mc.cases) {
                if (!graphs.count(c.graph))
                    continue;
                const auto t0 = std::chrono::steady_clock::now();
                const auto rep = verify_marginals(c.net, model, resolve(*model, c.init), 1.0, runs, k, 2024);
                const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                std::cout << "  " << engine_name(k) << ' ' << mc.name << ' ' << c.graph << ": max |z| "
                          << fmt("%.3f", rep.max_abs_z) << (rep.passed ? "" : "  FAILED") << fmt("  (%.1fs)", secs)
                          << '\n';
                all = all && rep.passed;
                worst = std::max(worst, rep.max_abs_z);
                count += rep.checks.size();
            }
        }
    }
    detail = fmt("%zu marginals, R = 1e5, worst |z| = %.3f (threshold 4)", count, worst);
    return {all, detail};
}

Outcome criterion1()
{
    return oracle_equivalence(false, {EngineKind::Reject, EngineKind::Ga, EngineKind::Oga}, {"edge", "path", "star"});
}

Outcome criterion2()
{
    // Degree-10 star centre; some leaves infected so both reject kinds occur.
    std::vector<Edge> es;
    for (NodeId leaf = 1; leaf <= 10; ++leaf)
        es.push_back({0, leaf, 1.0});
    const Network star = Network::from_edges(11, es);
    SimConfig cfg;
    cfg.model = build_model("sis", "mu=1,lambda=0.6");
    cfg.horizon = 1.0;
    cfg.seed = 77;
    cfg.init = InitialAssignment::explicit_states(
        states_of(*cfg.model, {"I", "I", "S", "I", "S", "S", "I", "S", "I", "S", "S"}));
    RejectEngine e(star, cfg);
    const double lk = 0.6 * 10, window = 1e4 / lk, mean = lk * window;
    const int reps = 400;
    double sum = 0, sumsq = 0;
    for (int i = 0; i < reps; ++i) {
        const double c = static_cast<double>(e.frozen_attempt_count(0, window));
        sum += c;
        sumsq += c * c;
    }
    const double m = sum / reps, var = (sumsq - reps * m * m) / (reps - 1);
    const double se = std::sqrt(mean / reps);
    const double z = (m - mean) / se;
    return {std::abs(z) <= 3.0,
            fmt("mean attempts %.2f vs lambda*k*T = %.0f over %d windows, z = %.2f (3 SE); variance/mean %.3f", m,
                mean, reps, z, var / m)};
}

Outcome criterion3()
{
    const Network star = graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    SimConfig cfg;
    cfg.model = build_model("sis", "");
    cfg.horizon = 1.0;
    cfg.seed = 31;
    cfg.init = InitialAssignment::explicit_states(states_of(*cfg.model, {"I", "I", "I", "S", "I"}));
    OgaEngine e(star, cfg);
    const int target = 10000;
    int centre = 0, rejected = 0;
    while (centre < target) {
        const auto a = e.sample_infection_attempt();
        if (a.source != 0)
            continue;
        ++centre;
        rejected += a.rejected;
    }
    const double freq = static_cast<double>(rejected) / target, se = std::sqrt(0.75 * 0.25 / target);
    const double z = (freq - 0.75) / se;
    return {std::abs(z) <= 3.0, fmt("rejection frequency %.4f over %d attempts of the k=4 centre, z = %.2f (3 SE)",
                                    freq, target, z)};
}

Outcome criterion4()
{
    const Network net = configuration_model(1000, 2.0, 3, 100, 4);
    SimConfig cfg;
    cfg.model = build_model("sis", "");
    cfg.horizon = 10.0;
    cfg.seed = 4;
    cfg.init = parse_initial_assignment(*cfg.model, "I:0.05");
    RejectEngine e(net, cfg);
    std::size_t steps = 0, violations = e.check_invariants().size();
    std::string first;
    const StateId I = cfg.model->state("I");
    while (e.step() != StepOutcome::Finished) {
        ++steps;
        auto problems = e.check_invariants();
        // One pending recovery per infected node, counted independently.
        std::vector<int> recoveries(net.size(), 0);
        for (const Event& ev : e.queue().contents())
            if (ev.kind == EventKind::Transition && !is_stale(ev, e.runtime()[ev.node]))
                ++recoveries[ev.node];
        for (NodeId v = 0; v < net.size(); ++v)
            if (recoveries[v] != (e.runtime()[v].state == I ? 1 : 0))
                problems.push_back("node " + std::to_string(v) + " has " + std::to_string(recoveries[v]) +
                                   " pending recoveries");
        if (!problems.empty() && first.empty())
            first = problems.front();
        violations += problems.size();
    }
    return {violations == 0 && steps > 0,
            fmt("%zu steps checked, %zu violations%s%s", steps, violations, first.empty() ? "" : ", first: ",
                first.c_str())};
}

// Per-size horizon yielding at least 1e6 applied events, from a pilot run.
double horizon_for_events(std::size_t n, double events)
{
    const Network net = configuration_model(n, 2.0, 3, std::min<std::uint32_t>(1000, n - 1), 999);
    SimConfig cfg;
    cfg.model = build_model("sis", "");
    cfg.seed = 999;
    cfg.init = parse_initial_assignment(*cfg.model, "I:0.05");
    cfg.record.mode = SampleMode::FinalOnly;
    cfg.horizon = 2.0;
    const auto r = run_simulation(EngineKind::Reject, net, cfg);
    // Per-unit-time event rate after the initial rise; 20% margin.
    return std::ceil(1.2 * events / static_cast<double>(r.stats.applied_events) * cfg.horizon);
}

struct PerfTable {
    double reject_small = 0, reject_large = 0, ga_large = 0;
    std::uint64_t min_events = ~std::uint64_t{0};
    bool ran = false;
};

PerfTable& perf()
{
    static PerfTable t;
    if (t.ran)
        return t;
    t.ran = true;
    auto bench = [&](std::size_t n, std::vector<std::string> engines) {
        BenchOptions o;
        o.sizes = {n};
        o.gammas = {2.0};
        o.engines = std::move(engines);
        o.model = "sis";
        o.params = "mu=1,lambda=0.6";
        o.init = "I:0.05";
        o.replications = 5;
        o.kmin = 3;
        o.kmax = std::min<std::uint32_t>(1000, static_cast<std::uint32_t>(n - 1));
        o.horizon = horizon_for_events(n, 1e6);
        o.seed = 5;
        std::ostringstream csv, log;
        const auto recs = cmd_bench(o, csv, log);
        std::cout << "  n = " << n << ", horizon " << o.horizon << '\n';
        std::map<std::string, std::pair<double, int>> mean;
        for (const auto& r : recs) {
            mean[r.engine].first += r.cpu_time_per_step;
            ++mean[r.engine].second;
            t.min_events = std::min(t.min_events, r.applied_events);
        }
        for (auto& [eng, acc] : mean) {
            acc.first /= acc.second;
            std::cout << "    " << eng << ": " << fmt("%.3f us/step", acc.first * 1e6) << " over " << acc.second
                      << " replications\n";
        }
        return mean;
    };
    auto large = bench(100000, {"reject", "ga"});
    auto small = bench(1000, {"reject"});
    t.reject_large = large["reject"].first;
    t.ga_large = large["ga"].first;
    t.reject_small = small["reject"].first;
    return t;
}

Outcome criterion5()
{
    const PerfTable& t = perf();
    return {t.reject_large <= t.ga_large && t.min_events >= 1000000,
            fmt("n = 1e5: reject %.3f us/step, ga %.3f us/step (min applied events per run %llu)", t.reject_large * 1e6,
                t.ga_large * 1e6, static_cast<unsigned long long>(t.min_events))};
}

Outcome criterion6()
{
    const PerfTable& t = perf();
    const double ratio = t.reject_large / t.reject_small;
    return {ratio <= 3.0 && t.min_events >= 1000000,
            fmt("reject %.3f us/step at n = 1e5 vs %.3f at n = 1e3, ratio %.2f (limit 3)", t.reject_large * 1e6,
                t.reject_small * 1e6, ratio)};
}

Outcome criterion7()
{
    const std::size_t n = 10000;
    const int reps = 50;
    const double horizon = 150.0, dt = 1.0;
    const auto model = build_model("competing", "l1=0.6,l2=0.63,m1=0.6,m2=0.7");
    const StateId I = model->state("I"), J = model->state("J");
    std::vector<double> fi, fj;
    for (int rep = 0; rep < reps; ++rep) {
        const Network net = configuration_model(n, 2.0, 3, 1000, 700 + rep);
        SimConfig cfg;
        cfg.model = model;
        cfg.horizon = horizon;
        cfg.seed = 7;
        cfg.stream = rep;
        cfg.init = parse_initial_assignment(*model, "I:0.02,J:0.02");
        cfg.record.mode = SampleMode::Grid;
        cfg.record.grid_dt = dt;
        const auto r = run_simulation(EngineKind::Reject, net, cfg);
        const auto& tr = r.trajectory;
        fi.resize(tr.rows(), 0.0);
        fj.resize(tr.rows(), 0.0);
        for (std::size_t g = 0; g < tr.rows(); ++g) {
            fi[g] += static_cast<double>(tr.row(g)[I]) / (n * reps);
            fj[g] += static_cast<double>(tr.row(g)[J]) / (n * reps);
        }
    }
    std::ptrdiff_t early = -1, late = -1;
    for (std::size_t g = 0; g < fi.size(); ++g) {
        if (early < 0 && fj[g] > fi[g])
            early = static_cast<std::ptrdiff_t>(g);
        if (early >= 0 && late < 0 && fj[g] < 1e-3 && fi[g] > 0.05)
            late = static_cast<std::ptrdiff_t>(g);
    }
    for (double t : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, horizon}) {
        const auto g = static_cast<std::size_t>(t / dt);
        if (g < fi.size())
            std::cout << "  t = " << t << fmt(": I %.4f, J %.5f", fi[g], fj[g]) << '\n';
    }
    const bool pass = early >= 0 && late > early && static_cast<double>(late) * dt < horizon;
    return {pass, fmt("J leads at t = %.0f; J < 1e-3 with I > 0.05 from t = %.0f (horizon %.0f, %d replications)",
                      early * dt, late * dt, horizon, reps)};
}

Outcome criterion8()
{
    return oracle_equivalence(true, {EngineKind::Reject, EngineKind::Ga}, {"path"});
}

Outcome criterion9()
{
    const Network star = graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    TemporalStream cut;
    for (NodeId leaf = 1; leaf < 5; ++leaf)
        cut.push_back({0.0, TemporalChange::Op::Remove, 0, leaf});
    SimConfig cfg;
    cfg.model = build_model("sis", "mu=1,lambda=0.6");
    cfg.horizon = 1.0;
    cfg.seed = 9;
    cfg.init = InitialAssignment::explicit_states(states_of(*cfg.model, {"I", "S", "I", "S", "S"}));
    cfg.record.mode = SampleMode::FinalOnly;
    const StateId I = cfg.model->state("I");
    const int runs = 100000;
    int still0 = 0, still2 = 0, others = 0;
    for (int r = 0; r < runs; ++r) {
        cfg.stream = r;
        const auto res = run_simulation(EngineKind::Reject, star, cfg, cut);
        still0 += res.final_states[0] == I;
        still2 += res.final_states[2] == I;
        others += (res.final_states[1] == I) + (res.final_states[3] == I) + (res.final_states[4] == I);
    }
    const double p = std::exp(-1.0), se = std::sqrt(p * (1 - p) / runs);
    const double z0 = (still0 / double(runs) - p) / se, z2 = (still2 / double(runs) - p) / se;
    return {std::abs(z0) <= 4 && std::abs(z2) <= 4 && others == 0,
            fmt("P(still infected at 1): centre %.4f (z %.2f), leaf %.4f (z %.2f) vs e^-1 = %.4f; %d infections of "
                "cut-off nodes",
                still0 / double(runs), z0, still2 / double(runs), z2, p, others)};
}

Outcome criterion10()
{
    const Network net = configuration_model(5000, 2.0, 3, 1000, 10);
    bool all = true;
    std::string detail;
    auto check = [&](const std::string& label, EngineKind k, const std::string& model, const TemporalStream& temporal) {
        SimConfig cfg;
        cfg.model = build_model(model, "");
        cfg.horizon = 3.0;
        cfg.seed = 10;
        cfg.stream = 3;
        cfg.init = parse_initial_assignment(*cfg.model, default_init(model));
        cfg.record.event_log = true;
        const std::string a = event_log_csv(run_simulation(k, net, cfg, temporal).event_log);
        const std::string b = event_log_csv(run_simulation(k, net, cfg, temporal).event_log);
        const bool same = a == b && a.size() > 100;
        all = all && same;
        detail += (detail.empty() ? "" : ", ") + label + (same ? " identical" : " DIFFER") + fmt(" (%zu bytes)", a.size());
    };
    TemporalStream churn;
    for (NodeId v = 1; v < 200; ++v)
        if (!net.has_edge(0, v))
            churn.push_back({0.01 * v, TemporalChange::Op::Add, 0, v});
    check("reject/sis", EngineKind::Reject, "sis", {});
    check("reject/sir", EngineKind::Reject, "sir", {});
    check("reject/competing+temporal", EngineKind::Reject, "competing", churn);
    check("ga/sis", EngineKind::Ga, "sis", {});
    check("ga/sir", EngineKind::Ga, "sir", {});
    check("oga/sis", EngineKind::Oga, "sis", {});
    return {all, detail};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence of reject, ga and oga on edge, path and star", criterion1},
        {"attempt counts of a frozen degree-10 node follow Poisson(lambda k T)", criterion2},
        {"OGA rejects centre attempts with probability (k - k_S)/k", criterion3},
        {"queue invariants after every step of a 1000-node SIS run", criterion4},
        {"time per step of reject <= ga at n = 1e5", criterion5},
        {"time per step of reject grows at most 3x from n = 1e3 to 1e5", criterion6},
        {"competing pathogens: J leads early, I takes over", criterion7},
        {"weighted engines with unit weights pass oracle equivalence on the path", criterion8},
        {"all edges removed at t = 0 leaves only recoveries", criterion9},
        {"repeated runs give byte-identical event logs", criterion10},
    };
    std::set<std::size_t> only;
    for (int i = 1; i < argc; ++i)
        only.insert(std::stoul(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const std::size_t num = i + 1;
        if (!only.empty() && !only.count(num))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << num << ": " << criteria[i].first << " -- "
                  << o.detail << fmt(" [%.1fs]", secs) << std::endl;
        failed += !o.pass;
    }
    std::cout << (failed ? "acceptance FAILED: " + std::to_string(failed) + " criteria" : std::string("all criteria passed"))
              << std::endl;
    return failed ? 1 : 0;
}
