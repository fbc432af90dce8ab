// rejsim: generate networks, simulate spreading processes, benchmark the
// engines and check them against the exact solution.

#include "rejsim/error.hpp"
#include "rejsim/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_model_flags(CLI::App* cmd, std::string& model, std::string& params, std::filesystem::path& model_file)
{
    cmd->add_option("--model", model, "sis, sir, competing or file")->capture_default_str();
    cmd->add_option("--params", params, "rate overrides, e.g. mu=1.0,lambda=0.6 (sir: mu1,mu2,lambda; "
                                        "competing: l1,l2,m1,m2)");
    cmd->add_option("--model-file", model_file, "model definition for --model file");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rejection-based simulation of spreading processes on networks"};
    app.require_subcommand(1);

    rejsim::GenerateOptions gen;
    auto* g = app.add_subcommand("generate", "configuration-model network with power-law degrees");
    g->add_option("--nodes", gen.nodes, "number of nodes")->required();
    g->add_option("--gamma", gen.gamma, "degree exponent, P(k) ~ k^-gamma")->capture_default_str();
    g->add_option("--kmin", gen.kmin, "smallest degree")->capture_default_str();
    g->add_option("--kmax", gen.kmax, "largest degree")->capture_default_str();
    g->add_option("--seed", gen.seed, "random seed")->capture_default_str();
    g->add_option("--out", gen.out, "edge-list file")->required();

    rejsim::SimulateOptions sim;
    auto* s = app.add_subcommand("simulate", "one trajectory");
    s->add_option("--network", sim.network, "edge-list file")->required();
    add_model_flags(s, sim.model, sim.params, sim.model_file);
    s->add_option("--init", sim.init, "fractions (I:0.05) or one state per node (I,S,S)");
    s->add_option("--horizon", sim.horizon, "end time")->capture_default_str();
    s->add_option("--seed", sim.seed, "random seed")->capture_default_str();
    s->add_option("--stream", sim.stream, "random stream")->capture_default_str();
    s->add_option("--engine", sim.engine, "reject, ga, ga-generic or oga")->capture_default_str();
    s->add_option("--temporal", sim.temporal, "edge change stream (time,op,src,dst[,weight])");
    s->add_option("--out", sim.out, "trajectory CSV (default stdout)");
    s->add_option("--stats", sim.stats, "run statistics JSON");
    s->add_option("--events", sim.events, "event log CSV");
    s->add_option("--grid", sim.grid, "sample counts every dt instead of at every event");

    rejsim::BenchOptions bench;
    bool no_warmup = false;
    auto* b = app.add_subcommand("bench", "time per state-changing step across sizes and engines");
    b->add_option("--sizes", bench.sizes, "network sizes")->required()->delimiter(',');
    b->add_option("--gammas", bench.gammas, "degree exponents")->delimiter(',')->capture_default_str();
    b->add_option("--engines", bench.engines, "engines")->delimiter(',')->capture_default_str();
    add_model_flags(b, bench.model, bench.params, bench.model_file);
    b->add_option("--init", bench.init, "initial fractions (model default when omitted)");
    b->add_option("--replications", bench.replications, "timed runs per size and engine")->capture_default_str();
    b->add_option("--horizon", bench.horizon, "end time")->capture_default_str();
    b->add_option("--kmin", bench.kmin, "smallest degree")->capture_default_str();
    b->add_option("--kmax", bench.kmax, "largest degree")->capture_default_str();
    b->add_option("--seed", bench.seed, "random seed")->capture_default_str();
    b->add_option("--out", bench.out, "CSV to append to (default stdout)");
    b->add_flag("--no-warmup", no_warmup, "skip the untimed warm-up run");

    rejsim::VerifyOptions ver;
    std::string fault;
    auto* v = app.add_subcommand("verify", "compare per-node marginals with the exact solution");
    v->add_option("--network", ver.network, "edge-list file (small)")->required();
    add_model_flags(v, ver.model, ver.params, ver.model_file);
    v->add_option("--init", ver.init, "one state per node, e.g. I,S")->required();
    v->add_option("--horizon", ver.horizon, "time of the marginals")->capture_default_str();
    v->add_option("--runs", ver.runs, "replications")->capture_default_str();
    v->add_option("--engine", ver.engine, "reject, ga, ga-generic or oga")->capture_default_str();
    v->add_option("--seed", ver.seed, "random seed")->capture_default_str();
    v->add_option("--out", ver.out, "JSON report (default stdout)");
    v->add_option("--inject-fault", fault, "deliberately broken engine variant")->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*g) {
            rejsim::cmd_generate(gen, std::cerr);
        } else if (*s) {
            rejsim::cmd_simulate(sim, std::cout, std::cerr);
        } else if (*b) {
            bench.warmup = !no_warmup;
            rejsim::cmd_bench(bench, std::cout, std::cerr);
        } else if (*v) {
            if (fault == "abandon-chain")
                ver.fault = rejsim::Fault::AbandonChainOnEarlyReject;
            else if (!fault.empty())
                throw rejsim::Error(rejsim::Errc::ParseError, "unknown fault '" + fault + "'");
            return rejsim::cmd_verify(ver, std::cout, std::cerr);
        }
    } catch (const rejsim::Error& e) {
        std::cerr << "error [" << rejsim::errc_name(e.code()) << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
