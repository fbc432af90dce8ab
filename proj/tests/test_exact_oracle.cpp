#include "support.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <numeric>

using namespace rejsim;
using namespace testing;

namespace {

Errc error_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::Unsupported;
}

// Dense generator written out directly from the rules, node 0 least significant.
Eigen::MatrixXd dense_generator(const Network& net, const Model& m)
{
    const std::size_t n = net.size(), k = m.num_states();
    std::size_t size = 1;
    for (std::size_t i = 0; i < n; ++i)
        size *= k;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(size, size);
    std::vector<std::size_t> digit(n);
    for (std::size_t x = 0; x < size; ++x) {
        std::size_t rest = x, place = 1;
        std::vector<std::size_t> places(n);
        for (std::size_t v = 0; v < n; ++v) {
            digit[v] = rest % k;
            rest /= k;
            places[v] = place;
            place *= k;
        }
        auto moved = [&](std::size_t v, std::size_t to) { return x + (to - digit[v]) * places[v]; };
        for (std::size_t v = 0; v < n; ++v) {
            for (const auto& r : m.node_rules())
                if (r.from == digit[v])
                    q(x, moved(v, r.to)) += r.rate;
            for (const auto& r : m.edge_rules()) {
                if (r.target_from != digit[v])
                    continue;
                const auto nb = net.neighbors(static_cast<NodeId>(v));
                for (std::size_t j = 0; j < nb.size(); ++j)
                    if (digit[nb[j]] == r.contact)
                        q(x, moved(v, r.target_to)) += r.rate * (net.weighted() ? net.weights(static_cast<NodeId>(v))[j] : 1.0);
            }
        }
    }
    for (std::size_t x = 0; x < size; ++x)
        q(x, x) = -(q.row(x).sum() - q(x, x));
    return q;
}

Eigen::VectorXd expm_transient(const Eigen::MatrixXd& q, std::size_t start, double t)
{
    const Eigen::MatrixXd p = (q * t).exp();
    return p.row(static_cast<Eigen::Index>(start)).transpose();
}

} // namespace

TEST_CASE("state codec")
{
    const StateCodec c(4, 3);
    CHECK(c.size() == 81);
    const std::vector<StateId> s{2, 0, 1, 2};
    const GlobalState x = c.encode(s);
    CHECK(x == 2 + 0 * 3 + 1 * 9 + 2 * 27);
    CHECK(c.decode(x) == s);
    CHECK(c.digit(x, 2) == 1);
    CHECK(c.decode(c.with(x, 0, 0)) == std::vector<StateId>{0, 0, 1, 2});
    CHECK(c.decode(c.with(x, 1, 2)) == std::vector<StateId>{2, 2, 1, 2});
    for (GlobalState y = 0; y < c.size(); ++y)
        REQUIRE(c.encode(c.decode(y)) == y);

    CHECK_NOTHROW(StateCodec(24, 2));
    CHECK(error_of([] { StateCodec(25, 2); }) == Errc::StateSpaceTooLarge);
    CHECK(error_of([] { StateCodec(16, 3); }) == Errc::StateSpaceTooLarge);
    CHECK(error_of([&] { c.encode(std::vector<StateId>{0, 1}); }) == Errc::BadInitialAssignment);
    CHECK(error_of([&] { c.encode(std::vector<StateId>{0, 1, 3, 0}); }) == Errc::BadInitialAssignment);
}

TEST_CASE("generator entries on the two-node SIS chain")
{
    const auto m = sis();
    const Generator g = build_generator(two_node(), *m);
    CHECK(g.size() == 4);
    const StateId S = m->state("S"), I = m->state("I");
    const GlobalState is = g.codec.encode(std::vector<StateId>{I, S});
    // (I,S): recovery of node 0 at 1, infection of node 1 at 0.6.
    CHECK(g.exit_rate[is] == doctest::Approx(1.6));
    double rowsum = 0;
    for (auto k = g.row_start[is]; k < g.row_start[is + 1]; ++k)
        rowsum += g.rate[k];
    CHECK(rowsum == doctest::Approx(1.6));
    CHECK(g.exit_rate[g.codec.encode(std::vector<StateId>{S, S})] == 0.0);
    CHECK(g.exit_rate[g.codec.encode(std::vector<StateId>{I, I})] == doctest::Approx(2.0));
    CHECK(g.max_exit_rate() == doctest::Approx(2.0));
}

TEST_CASE("closed forms")
{
    SUBCASE("single decaying node")
    {
        const auto decay = shared(validate({"decay", {"I", "S"}, {{"I", "S", 1.3}}, {}}));
        const auto p = exact_marginals(graph(1, {}), *decay, std::vector<StateId>{0}, 0.7);
        CHECK(p[0] == doctest::Approx(std::exp(-1.3 * 0.7)).epsilon(1e-9));
        CHECK(p[1] == doctest::Approx(-std::expm1(-1.3 * 0.7)).epsilon(1e-9));
    }
    SUBCASE("two-state flip-flop")
    {
        const double a = 0.8, b = 2.5, t = 0.9;
        const auto ff = shared(validate({"ff", {"A", "B"}, {{"A", "B", a}, {"B", "A", b}}, {}}));
        const auto p = exact_marginals(graph(1, {}), *ff, std::vector<StateId>{0}, t);
        CHECK(p[0] == doctest::Approx(b / (a + b) + a / (a + b) * std::exp(-(a + b) * t)).epsilon(1e-9));
    }
    SUBCASE("independent nodes on an empty graph factorize")
    {
        const auto m = sir();
        const auto init = states_of(*m, {"I", "I", "S"});
        const auto p = exact_marginals(graph(3, {}), *m, init, 1.0);
        // I -> R at 1.1, R -> S at 0.3: P(I) = e^{-1.1}.
        CHECK(p[0 * 3 + m->state("I")] == doctest::Approx(std::exp(-1.1)).epsilon(1e-9));
        CHECK(p[1 * 3 + m->state("I")] == doctest::Approx(std::exp(-1.1)).epsilon(1e-9));
        CHECK(p[2 * 3 + m->state("S")] == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("one infection attempt before a recovery")
    {
        // SIR without waning: P(node 1 ever infected by t) for I on node 0 and S on node 1,
        // from the first-event race: lambda / (lambda + mu1) * (1 - e^{-(lambda + mu1) t}).
        const auto m = shared(validate({"sir_nowane", {"S", "I", "R"}, {{"I", "R", 1.1}}, {{"S", "I", "I", 0.6}}}));
        const double t = 1.2;
        const auto p = exact_marginals(two_node(), *m, states_of(*m, {"I", "S"}), t);
        const double infected_before = 0.6 / 1.7 * -std::expm1(-1.7 * t);
        CHECK(p[1 * 3 + m->state("S")] == doctest::Approx(1.0 - infected_before).epsilon(1e-9));
    }
}

TEST_CASE("transient distribution is a probability vector with the semigroup property")
{
    const auto m = competing();
    const Generator g = build_generator(star5(), *m);
    const auto p0 = point_distribution(g.codec, states_of(*m, {"S", "I", "J", "S", "S"}));
    CHECK(transient(g, p0, 0.0) == p0);
    const auto p1 = transient(g, p0, 0.6);
    const auto p2 = transient(g, p1, 0.9);
    const auto p3 = transient(g, p0, 1.5);
    CHECK(std::accumulate(p3.begin(), p3.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
    for (std::size_t i = 0; i < p3.size(); ++i) {
        REQUIRE(p3[i] >= 0.0);
        REQUIRE(p3[i] == doctest::Approx(p2[i]).epsilon(1e-8).scale(1.0));
    }
    // SIS on two nodes is absorbed in all-S.
    const auto s = sis();
    const Generator gs = build_generator(two_node(), *s);
    const auto late = transient(gs, point_distribution(gs.codec, states_of(*s, {"I", "I"})), 40.0);
    CHECK(late[gs.codec.encode(states_of(*s, {"S", "S"}))] > 0.999);

    CHECK(error_of([&] { transient(g, p0, -1.0); }) == Errc::DegenerateParameters);
    CHECK(error_of([&] { transient(g, p0, std::nan("")); }) == Errc::DegenerateParameters);
    CHECK(error_of([&] { transient(g, Distribution(3, 0.0), 1.0); }) == Errc::DegenerateParameters);
    CHECK(error_of([] { build_generator(configuration_model(30, 2.5, 1, 5, 1), *sis()); }) ==
          Errc::StateSpaceTooLarge);
}

namespace {

std::shared_ptr<const Model> random_model(RandomSource& rng)
{
    ModelSpec s;
    s.name = "random";
    const std::size_t m = 2 + rng.draw_uniform_index(2);
    for (std::size_t i = 0; i < m; ++i)
        s.states.push_back("s" + std::to_string(i));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            if (a != b && rng.uniform() < 0.5)
                s.node_rules.push_back({s.states[a], s.states[b], 0.1 + 2 * rng.uniform()});
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t c = 0; c < m; ++c)
            if (rng.uniform() < 0.4) {
                std::size_t b = rng.draw_uniform_index(m - 1);
                if (b >= a)
                    ++b;
                s.edge_rules.push_back({s.states[a], s.states[b], s.states[c], 0.1 + 2 * rng.uniform()});
            }
    return shared(validate(s));
}

} // namespace

TEST_CASE("property: uniformization agrees with a dense matrix exponential")
{
    RandomSource rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng.draw_uniform_index(4);
        std::vector<Edge> edges;
        const bool weighted = rng.uniform() < 0.5;
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = a + 1; b < n; ++b)
                if (rng.uniform() < 0.6)
                    edges.push_back({a, b, weighted ? 0.2 + 2 * rng.uniform() : 1.0});
        const Network net = Network::from_edges(n, edges, weighted);
        std::shared_ptr<const Model> m;
        switch (trial % 4) {
        case 0: m = sis(); break;
        case 1: m = sir(); break;
        case 2: m = competing(); break;
        default: m = random_model(rng);
        }
        std::vector<StateId> init(n);
        for (auto& s : init)
            s = static_cast<StateId>(rng.draw_uniform_index(m->num_states()));
        const double t = 0.1 + 2.5 * rng.uniform();

        const Generator g = build_generator(net, *m);
        const auto p0 = point_distribution(g.codec, init);
        const auto fast = transient(g, p0, t);
        const auto ref = expm_transient(dense_generator(net, *m), g.codec.encode(init), t);
        REQUIRE(fast.size() == static_cast<std::size_t>(ref.size()));
        for (std::size_t i = 0; i < fast.size(); ++i)
            REQUIRE(std::abs(fast[i] - ref[static_cast<Eigen::Index>(i)]) < 1e-8);
    }
}

TEST_CASE("conformance z-scores")
{
    CHECK(conformance_z(0.51, 0.5, 10000) == doctest::Approx(2.0));
    CHECK(conformance_z(0.49, 0.5, 10000) == doctest::Approx(-2.0));
    CHECK(conformance_z(0.0, 0.0, 10000) == 0.0);
    CHECK(std::isinf(conformance_z(0.001, 0.0, 10000)));

    // Two nodes, two states.
    const std::vector<double> exact{0.5, 0.5, 1.0, 0.0};
    const auto good = conformance_test(std::vector<double>{0.51, 0.49, 1.0, 0.0}, exact, 2, 10000);
    CHECK(good.checks.size() == 4);
    CHECK(good.passed);
    CHECK(good.max_abs_z == doctest::Approx(2.0));
    CHECK_FALSE(good.note.empty());
    CHECK(good.checks[2].node == 1);
    CHECK(good.checks[2].state == 0);

    CHECK_FALSE(conformance_test(std::vector<double>{0.53, 0.47, 1.0, 0.0}, exact, 2, 10000).passed);
    // A marginal the chain cannot reach must never be observed.
    CHECK_FALSE(conformance_test(std::vector<double>{0.5, 0.5, 0.9999, 0.0001}, exact, 2, 10000).passed);
    // Round-off below 1e-12 counts as exactly 0 or 1.
    CHECK(conformance_test(std::vector<double>{0.5, 0.5, 1.0, 0.0}, std::vector<double>{0.5, 0.5, 1 - 1e-14, 1e-14},
                           2, 10000)
              .passed);

    CHECK(error_of([&] { conformance_test(exact, exact, 2, 999); }) == Errc::DegenerateParameters);
    CHECK(error_of([&] { conformance_test(exact, std::vector<double>{1.0}, 2, 10000); }) ==
          Errc::DegenerateParameters);
}
