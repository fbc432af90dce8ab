#include "rejsim/harness.hpp"

#include "rejsim/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>

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

void write_text(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f)
        throw Error(Errc::IoError, "failed writing " + path.string());
}

struct PresetInfo {
    std::vector<std::pair<std::string, double>> defaults;
    std::string init;
};

const PresetInfo* preset_info(std::string_view name)
{
    static const std::map<std::string, PresetInfo, std::less<>> table{
        {"sis", {{{"mu", 1.0}, {"lambda", 0.6}}, "I:0.05"}},
        {"sir", {{{"mu1", 1.1}, {"mu2", 0.3}, {"lambda", 0.6}}, "I:0.02,R:0.02"}},
        {"competing", {{{"l1", 0.6}, {"l2", 0.63}, {"m1", 0.6}, {"m2", 0.7}}, "I:0.02,J:0.02"}},
    };
    const auto it = table.find(name);
    return it == table.end() ? nullptr : &it->second;
}

std::vector<std::pair<std::string, double>> resolve_params(std::string_view name, std::string_view params)
{
    const PresetInfo* info = preset_info(name);
    if (!info)
        throw Error(Errc::ParseError, "unknown model '" + std::string(name) + "' (sis, sir, competing, file)");
    auto values = info->defaults;
    params = trim(params);
    while (!params.empty()) {
        const auto comma = params.find(',');
        const auto item = trim(params.substr(0, comma));
        params = comma == std::string_view::npos ? std::string_view{} : params.substr(comma + 1);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::ParseError, "expected key=value in --params, got '" + std::string(item) + "'");
        const auto key = trim(item.substr(0, eq));
        const auto num = trim(item.substr(eq + 1));
        auto slot = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == key; });
        if (slot == values.end())
            throw Error(Errc::ParseError, "model '" + std::string(name) + "' has no parameter '" + std::string(key) + "'");
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
        if (ec != std::errc() || ptr != num.data() + num.size())
            throw Error(Errc::ParseError, "bad number '" + std::string(num) + "' for " + std::string(key));
        slot->second = v;
    }
    return values;
}

} // namespace

EngineKind parse_engine(std::string_view name)
{
    if (name == "reject")
        return EngineKind::Reject;
    if (name == "ga")
        return EngineKind::Ga;
    if (name == "ga-generic")
        return EngineKind::GaGeneric;
    if (name == "oga")
        return EngineKind::Oga;
    throw Error(Errc::ParseError, "unknown engine '" + std::string(name) + "' (reject, ga, ga-generic, oga)");
}

std::string engine_name(EngineKind kind)
{
    switch (kind) {
    case EngineKind::Reject: return "reject";
    case EngineKind::Ga: return "ga";
    case EngineKind::GaGeneric: return "ga-generic";
    case EngineKind::Oga: return "oga";
    }
    return "?";
}

RunResult run_simulation(EngineKind kind, const Network& net, const SimConfig& cfg, const TemporalStream& temporal,
                         Fault fault)
{
    if (kind != EngineKind::Reject && (!temporal.empty() || fault != Fault::None))
        throw Error(Errc::Unsupported, "temporal streams and fault injection need the reject engine");
    switch (kind) {
    case EngineKind::Reject: {
        RejectEngine e(net, cfg, temporal, fault);
        return e.run();
    }
    case EngineKind::Ga:
        if (cfg.model && cfg.model->as_sis() && !net.weighted()) {
            GillespieSisEngine e(net, cfg);
            return e.run();
        }
        [[fallthrough]];
    case EngineKind::GaGeneric: {
        GillespieGenericEngine e(net, cfg);
        return e.run();
    }
    case EngineKind::Oga: {
        OgaEngine e(net, cfg);
        return e.run();
    }
    }
    throw Error(Errc::Unsupported, "unknown engine");
}

std::shared_ptr<const Model> build_model(std::string_view name, std::string_view params,
                                         const std::filesystem::path& model_file)
{
    if (name == "file") {
        if (model_file.empty())
            throw Error(Errc::ParseError, "--model file needs --model-file");
        if (!trim(params).empty())
            throw Error(Errc::ParseError, "--params does not apply to model files; put rates in the file");
        return std::make_shared<const Model>(validate(load_model_file(model_file)));
    }
    const auto p = resolve_params(name, params);
    if (name == "sis")
        return std::make_shared<const Model>(presets::sis(p[0].second, p[1].second));
    if (name == "sir")
        return std::make_shared<const Model>(presets::sir(p[0].second, p[1].second, p[2].second));
    return std::make_shared<const Model>(presets::competing(p[0].second, p[1].second, p[2].second, p[3].second));
}

std::string preset_params(std::string_view name, std::string_view params)
{
    std::string out;
    for (const auto& [k, v] : resolve_params(name, params))
        out += (out.empty() ? "" : ",") + k + "=" + format_double(v);
    return out;
}

std::string default_init(std::string_view model)
{
    const PresetInfo* info = preset_info(model);
    if (!info)
        throw Error(Errc::BadInitialAssignment, "model '" + std::string(model) + "' has no default --init; give one");
    return info->init;
}

/* generate */

std::string config_line(const GenerateOptions& o)
{
    return "rejsim generate --nodes " + std::to_string(o.nodes) + " --gamma " + format_double(o.gamma) + " --kmin " +
           std::to_string(o.kmin) + " --kmax " + std::to_string(o.kmax) + " --seed " + std::to_string(o.seed) +
           " --out " + o.out.string();
}

GenerateSummary cmd_generate(const GenerateOptions& o, std::ostream& log)
{
    if (o.out.empty())
        throw Error(Errc::IoError, "generate needs --out");
    const Network net = configuration_model(o.nodes, o.gamma, o.kmin, o.kmax, o.seed);
    write_edge_list(o.out, net, config_line(o));
    const GenerateSummary s{net.size(), net.edge_count(),
                            net.size() == 0 ? 0.0 : 2.0 * static_cast<double>(net.edge_count()) / net.size(),
                            net.max_degree()};
    log << "nodes " << s.nodes << "\nedges " << s.edges << "\nmean_degree " << format_double(s.mean_degree)
        << "\nmax_degree " << s.max_degree << '\n';
    return s;
}

/* simulate */

std::string config_line(const SimulateOptions& o)
{
    std::string s = "rejsim simulate --network " + o.network.string() + " --model " + o.model;
    if (o.model == "file")
        s += " --model-file " + o.model_file.string();
    else
        s += " --params " + preset_params(o.model, o.params);
    s += " --init " + (o.init.empty() ? default_init(o.model) : o.init);
    s += " --horizon " + format_double(o.horizon) + " --seed " + std::to_string(o.seed) + " --stream " +
         std::to_string(o.stream) + " --engine " + o.engine;
    if (!o.temporal.empty())
        s += " --temporal " + o.temporal.string();
    if (o.grid > 0.0)
        s += " --grid " + format_double(o.grid);
    return s;
}

std::string stats_json(const RunResult& r, std::string_view config, std::string_view engine)
{
    nlohmann::ordered_json j;
    j["config"] = config;
    j["engine"] = engine;
    j["applied_events"] = r.stats.applied_events;
    j["early_rejects"] = r.stats.early_rejects;
    j["late_rejects"] = r.stats.late_rejects;
    j["stale_skips"] = r.stats.stale_skips;
    j["wall_time"] = r.stats.wall_time;
    j["cpu_time_per_step"] = r.stats.time_per_step();
    j["queue_peak"] = r.stats.queue_peak;
    auto& counts = j["final_counts"];
    counts = nlohmann::ordered_json::object();
    const auto& t = r.trajectory;
    if (t.rows() > 0) {
        const auto last = t.row(t.rows() - 1);
        for (std::size_t s = 0; s < t.state_names.size(); ++s)
            counts[t.state_names[s]] = last[s];
    }
    return j.dump(2) + "\n";
}

RunResult cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& log)
{
    const auto model = build_model(o.model, o.params, o.model_file);
    const Network net = read_edge_list(o.network);
    SimConfig cfg;
    cfg.model = model;
    cfg.horizon = o.horizon;
    cfg.seed = o.seed;
    cfg.stream = o.stream;
    cfg.init = parse_initial_assignment(*model, o.init.empty() ? default_init(o.model) : o.init);
    cfg.record.mode = o.grid > 0.0 ? SampleMode::Grid : SampleMode::EveryEvent;
    cfg.record.grid_dt = o.grid;
    cfg.record.event_log = !o.events.empty();
    const TemporalStream temporal = o.temporal.empty() ? TemporalStream{} : read_temporal_stream(o.temporal);

    const std::string config = config_line(o);
    log << "# " << config << '\n';
    const EngineKind kind = parse_engine(o.engine);
    RunResult r = run_simulation(kind, net, cfg, temporal);

    const std::string csv = trajectory_csv(r.trajectory);
    if (o.out.empty())
        out << csv;
    else
        write_text(o.out, csv);
    if (!o.stats.empty())
        write_text(o.stats, stats_json(r, config, engine_name(kind)));
    if (!o.events.empty())
        write_text(o.events, event_log_csv(r.event_log));
    log << "applied_events " << r.stats.applied_events << "\nearly_rejects " << r.stats.early_rejects
        << "\nlate_rejects " << r.stats.late_rejects << "\nwall_time " << format_double(r.stats.wall_time) << '\n';
    return r;
}

/* bench */

std::string bench_csv_row(const BenchRecord& r)
{
    return r.engine + ',' + r.model + ',' + std::to_string(r.n) + ',' + format_double(r.gamma) + ',' +
           std::to_string(r.replication) + ',' + std::to_string(r.applied_events) + ',' +
           std::to_string(r.early_rejects) + ',' + std::to_string(r.late_rejects) + ',' + format_double(r.wall_time) +
           ',' + format_double(r.cpu_time_per_step);
}

std::string config_line(const BenchOptions& o)
{
    auto join = [](const auto& xs, auto fmt) {
        std::string s;
        for (const auto& x : xs)
            s += (s.empty() ? "" : ",") + fmt(x);
        return s;
    };
    std::string s = "rejsim bench --sizes " + join(o.sizes, [](std::size_t n) { return std::to_string(n); }) +
                    " --gammas " + join(o.gammas, [](double g) { return format_double(g); }) + " --engines " +
                    join(o.engines, [](const std::string& e) { return e; }) + " --model " + o.model;
    if (o.model == "file")
        s += " --model-file " + o.model_file.string();
    else
        s += " --params " + preset_params(o.model, o.params);
    s += " --init " + (o.init.empty() ? default_init(o.model) : o.init) + " --replications " +
         std::to_string(o.replications) + " --horizon " + format_double(o.horizon) + " --kmin " +
         std::to_string(o.kmin) + " --kmax " + std::to_string(o.kmax) + " --seed " + std::to_string(o.seed);
    if (!o.warmup)
        s += " --no-warmup";
    return s;
}

std::vector<BenchRecord> cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& log)
{
    const auto model = build_model(o.model, o.params, o.model_file);
    const InitialAssignment init = parse_initial_assignment(*model, o.init.empty() ? default_init(o.model) : o.init);
    std::vector<EngineKind> engines;
    for (const auto& e : o.engines)
        engines.push_back(parse_engine(e));

    std::ofstream file;
    std::ostream* sink = &out;
    if (!o.out.empty()) {
        bool fresh = true;
        if (std::ifstream existing(o.out); existing) {
            std::string first;
            if (std::getline(existing, first)) {
                if (first != bench_csv_header)
                    throw Error(Errc::IoError, o.out.string() + " exists with a different header");
                fresh = false;
            }
        }
        file.open(o.out, std::ios::app);
        if (!file)
            throw Error(Errc::IoError, "cannot open " + o.out.string() + " for appending");
        sink = &file;
        if (fresh)
            *sink << bench_csv_header << '\n';
    } else {
        *sink << bench_csv_header << '\n';
    }
    log << "# " << config_line(o) << '\n';

    SimConfig cfg;
    cfg.model = model;
    cfg.horizon = o.horizon;
    cfg.seed = o.seed;
    cfg.init = init;
    cfg.record.mode = SampleMode::FinalOnly;

    std::vector<BenchRecord> records;
    for (std::size_t gi = 0; gi < o.gammas.size(); ++gi) {
        for (std::size_t ni = 0; ni < o.sizes.size(); ++ni) {
            for (std::size_t rep = 0; rep < o.replications; ++rep) {
                const std::uint64_t net_seed =
                    RandomSource(o.seed, (std::uint64_t{gi} << 48) ^ (std::uint64_t{ni} << 32) ^ rep).next_u64();
                const Network net = configuration_model(o.sizes[ni], o.gammas[gi], o.kmin, o.kmax, net_seed);
                for (EngineKind kind : engines) {
                    if (rep == 0 && o.warmup) {
                        cfg.stream = ~std::uint64_t{0};
                        (void)run_simulation(kind, net, cfg);
                    }
                    cfg.stream = rep + 1;
                    const RunResult r = run_simulation(kind, net, cfg);
                    BenchRecord rec{engine_name(kind),
                                    model->name(),
                                    o.sizes[ni],
                                    o.gammas[gi],
                                    rep,
                                    r.stats.applied_events,
                                    r.stats.early_rejects,
                                    r.stats.late_rejects,
                                    r.stats.wall_time,
                                    r.stats.time_per_step()};
                    *sink << bench_csv_row(rec) << '\n' << std::flush;
                    records.push_back(std::move(rec));
                }
            }
        }
    }
    return records;
}

/* verify */

std::string config_line(const VerifyOptions& o)
{
    std::string s = "rejsim verify --network " + o.network.string() + " --model " + o.model;
    if (o.model == "file")
        s += " --model-file " + o.model_file.string();
    else
        s += " --params " + preset_params(o.model, o.params);
    s += " --init " + o.init + " --horizon " + format_double(o.horizon) + " --runs " + std::to_string(o.runs) +
         " --engine " + o.engine + " --seed " + std::to_string(o.seed);
    if (o.fault == Fault::AbandonChainOnEarlyReject)
        s += " --inject-fault abandon-chain";
    return s;
}

ConformanceReport verify_marginals(const Network& net, std::shared_ptr<const Model> model,
                                   std::span<const StateId> initial, double horizon, std::uint64_t runs,
                                   EngineKind engine, std::uint64_t seed, Fault fault)
{
    const std::size_t m = model->num_states();
    const std::vector<double> exact = exact_marginals(net, *model, initial, horizon);

    SimConfig cfg;
    cfg.model = std::move(model);
    cfg.horizon = horizon;
    cfg.seed = seed;
    cfg.init = InitialAssignment::explicit_states({initial.begin(), initial.end()});
    cfg.record.mode = SampleMode::FinalOnly;

    std::vector<std::uint64_t> hits(net.size() * m, 0);
    for (std::uint64_t r = 0; r < runs; ++r) {
        cfg.stream = r;
        const RunResult res = run_simulation(engine, net, cfg, {}, fault);
        for (std::size_t v = 0; v < net.size(); ++v)
            ++hits[v * m + res.final_states[v]];
    }
    std::vector<double> empirical(hits.size());
    for (std::size_t i = 0; i < hits.size(); ++i)
        empirical[i] = static_cast<double>(hits[i]) / static_cast<double>(runs);
    return conformance_test(empirical, exact, m, runs);
}

std::string conformance_json(const ConformanceReport& rep, const Model& model, std::string_view config,
                             std::string_view engine)
{
    nlohmann::ordered_json j;
    j["config"] = config;
    j["engine"] = engine;
    j["model"] = model.name();
    j["runs"] = rep.runs;
    j["threshold"] = rep.threshold;
    j["passed"] = rep.passed;
    j["max_abs_z"] = rep.max_abs_z;
    j["note"] = rep.note;
    auto& arr = j["marginals"];
    arr = nlohmann::ordered_json::array();
    for (const auto& c : rep.checks) {
        nlohmann::ordered_json e;
        e["node"] = c.node;
        e["state"] = model.state_name(c.state);
        e["exact"] = c.exact;
        e["empirical"] = c.empirical;
        e["z"] = c.z; // non-finite z is written as null
        e["pass"] = c.pass;
        arr.push_back(std::move(e));
    }
    return j.dump(2) + "\n";
}

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& log)
{
    const auto model = build_model(o.model, o.params, o.model_file);
    const Network net = read_edge_list(o.network);
    (void)StateCodec(net.size(), model->num_states());
    const InitialAssignment init = parse_initial_assignment(*model, o.init);
    if (init.per_node.empty())
        throw Error(Errc::BadInitialAssignment, "verify needs one explicit state per node, e.g. --init I,S");
    if (init.per_node.size() != net.size())
        throw Error(Errc::BadInitialAssignment, "--init lists " + std::to_string(init.per_node.size()) +
                                                    " states for " + std::to_string(net.size()) + " nodes");

    const std::string config = config_line(o);
    log << "# " << config << '\n';
    const EngineKind kind = parse_engine(o.engine);
    const ConformanceReport rep = verify_marginals(net, model, init.per_node, o.horizon, o.runs, kind, o.seed, o.fault);
    const std::string json = conformance_json(rep, *model, config, engine_name(kind));
    if (o.out.empty())
        out << json;
    else
        write_text(o.out, json);
    log << (rep.passed ? "conformant" : "NOT conformant") << ", max |z| = " << format_double(rep.max_abs_z) << '\n';
    return rep.passed ? 0 : 2;
}

} // namespace rejsim
