#pragma once

#include "rejsim/engine_baseline.hpp"
#include "rejsim/engine_reject.hpp"
#include "rejsim/exact_oracle.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rejsim {

enum class EngineKind {
    Reject,
    Ga,        ///< S-I edge list for SIS on unweighted networks, direct method otherwise
    GaGeneric, ///< direct method for every model
    Oga,
};

/// "reject", "ga", "ga-generic", "oga". Throws ParseError.
EngineKind parse_engine(std::string_view name);
std::string engine_name(EngineKind kind);

/// Runs one replication to the horizon. Temporal streams and faults are
/// only understood by the rejection engine (Unsupported otherwise).
RunResult run_simulation(EngineKind kind, const Network& net, const SimConfig& cfg, const TemporalStream& temporal = {},
                         Fault fault = Fault::None);

/// Preset ("sis", "sir", "competing") with `key=value,...` overrides of the
/// default rates, or "file" with a model file. Throws ParseError.
std::shared_ptr<const Model> build_model(std::string_view name, std::string_view params,
                                         const std::filesystem::path& model_file = {});

/// Canonical `key=value,...` rates of a preset after overrides.
std::string preset_params(std::string_view name, std::string_view params);

struct GenerateOptions {
    std::size_t nodes = 0;
    double gamma = 2.0;
    std::uint32_t kmin = 3;
    std::uint32_t kmax = 1000;
    std::uint64_t seed = 0;
    std::filesystem::path out;
};

struct GenerateSummary {
    std::size_t nodes;
    std::size_t edges;
    double mean_degree;
    std::size_t max_degree;
};

std::string config_line(const GenerateOptions& o);
/// Writes the edge list with the config line as a comment header.
GenerateSummary cmd_generate(const GenerateOptions& o, std::ostream& log);

struct SimulateOptions {
    std::filesystem::path network;
    std::string model = "sis";
    std::string params;
    std::filesystem::path model_file;
    std::string init;
    double horizon = 10.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::string engine = "reject";
    std::filesystem::path temporal;
    std::filesystem::path out;    ///< trajectory CSV; stdout when empty
    std::filesystem::path stats;  ///< RunStats JSON; none when empty
    std::filesystem::path events; ///< event log CSV; none when empty
    double grid = 0.0;            ///< > 0 samples on a uniform grid
};

std::string config_line(const SimulateOptions& o);
RunResult cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& log);

struct BenchRecord {
    std::string engine;
    std::string model;
    std::size_t n;
    double gamma;
    std::size_t replication;
    std::uint64_t applied_events;
    std::uint64_t early_rejects;
    std::uint64_t late_rejects;
    double wall_time;
    double cpu_time_per_step;
};

inline constexpr std::string_view bench_csv_header =
    "engine,model,n,gamma,replication,applied_events,early_rejects,late_rejects,wall_time,cpu_time_per_step";

std::string bench_csv_row(const BenchRecord& r);

struct BenchOptions {
    std::vector<std::size_t> sizes;
    std::vector<double> gammas{2.0};
    std::vector<std::string> engines{"reject", "ga"};
    std::string model = "sis";
    std::string params;
    std::filesystem::path model_file;
    std::string init; ///< preset default when empty
    std::size_t replications = 5;
    double horizon = 10.0;
    std::uint32_t kmin = 3;
    std::uint32_t kmax = 1000;
    std::uint64_t seed = 0;
    std::filesystem::path out; ///< appended to; stdout when empty
    bool warmup = true;
};

std::string config_line(const BenchOptions& o);
/// Every (gamma, n, replication) gets its own network, shared by all
/// engines; each engine does one untimed warm-up run per network size.
std::vector<BenchRecord> cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& log);

/// Default initial fractions of the presets ("I:0.05" for SIS and so on).
std::string default_init(std::string_view model);

struct VerifyOptions {
    std::filesystem::path network;
    std::string model = "sis";
    std::string params;
    std::filesystem::path model_file;
    std::string init; ///< one state per node
    double horizon = 1.0;
    std::uint64_t runs = 100000;
    std::string engine = "reject";
    std::uint64_t seed = 0;
    std::filesystem::path out; ///< JSON report; stdout when empty
    Fault fault = Fault::None;
};

std::string config_line(const VerifyOptions& o);
/// Replicates the run and compares per-node marginals at the horizon with
/// the exact transient solution. Run r uses stream r.
ConformanceReport verify_marginals(const Network& net, std::shared_ptr<const Model> model,
                                   std::span<const StateId> initial, double horizon, std::uint64_t runs,
                                   EngineKind engine, std::uint64_t seed, Fault fault = Fault::None);
/// Returns the process exit code: 0 conformant, 2 not.
int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& log);

std::string conformance_json(const ConformanceReport& rep, const Model& model, std::string_view config,
                             std::string_view engine);

/// JSON object with the run statistics and final per-state counts.
std::string stats_json(const RunResult& r, std::string_view config, std::string_view engine);

} // namespace rejsim
