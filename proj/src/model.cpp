#include "rejsim/model.hpp"

#include "rejsim/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rejsim {

std::optional<StateId> Model::find_state(std::string_view name) const
{
    for (std::size_t i = 0; i < state_names_.size(); ++i)
        if (state_names_[i] == name)
            return static_cast<StateId>(i);
    return std::nullopt;
}

StateId Model::state(std::string_view name) const
{
    if (auto s = find_state(name))
        return *s;
    throw Error(Errc::UnknownState, "state '" + std::string(name) + "' is not declared");
}

std::uint16_t Model::pick_node_rule(StateId s, double u) const
{
    const auto& rules = node_rules_from_.at(s);
    double target = u * exit_rate_[s];
    for (std::size_t i = 0; i + 1 < rules.size(); ++i) {
        target -= node_rules_[rules[i]].rate;
        if (target < 0.0)
            return rules[i];
    }
    return rules.back();
}

std::uint16_t Model::pick_contact_rule(StateId c, double u) const
{
    const auto& rules = edge_rules_by_contact_.at(c);
    double target = u * contact_rate_[c];
    for (std::size_t i = 0; i + 1 < rules.size(); ++i) {
        target -= edge_rules_[rules[i]].rate;
        if (target < 0.0)
            return rules[i];
    }
    return rules.back();
}

std::optional<SisView> Model::as_sis() const
{
    if (num_states() != 2 || node_rules_.size() != 1 || edge_rules_.size() != 1)
        return std::nullopt;
    const NodeRule& cure = node_rules_[0];
    const EdgeRule& infect = edge_rules_[0];
    if (infect.contact != infect.target_to || infect.target_from != cure.to || cure.from != infect.contact)
        return std::nullopt;
    return SisView{cure.to, cure.from, cure.rate, infect.rate};
}

namespace {

void check_rate(double rate, const std::string& what)
{
    if (!std::isfinite(rate))
        throw Error(Errc::NonPositiveRate, what + ": rate is not finite");
    if (!(rate > 0.0))
        throw Error(Errc::NonPositiveRate, what + ": rate must be > 0");
}

} // namespace

Model validate(const ModelSpec& spec)
{
    Model m;
    m.name_ = spec.name;
    if (spec.states.empty())
        throw Error(Errc::UnknownState, "model declares no states");
    if (spec.states.size() > max_states)
        throw Error(Errc::DuplicateState, "too many states");
    for (const auto& name : spec.states) {
        if (name.empty())
            throw Error(Errc::DuplicateState, "state names must be non-empty");
        if (std::count(spec.states.begin(), spec.states.end(), name) > 1)
            throw Error(Errc::DuplicateState, "state '" + name + "' declared twice");
    }
    m.state_names_ = spec.states;
    const std::size_t ns = spec.states.size();

    for (const auto& r : spec.node_rules) {
        const std::string what = "node rule " + r.from + " -> " + r.to;
        NodeRule rule{m.state(r.from), m.state(r.to), r.rate};
        if (rule.from == rule.to)
            throw Error(Errc::SelfTransition, what);
        check_rate(r.rate, what);
        for (const auto& other : m.node_rules_)
            if (other.from == rule.from && other.to == rule.to)
                throw Error(Errc::DuplicateRule, what);
        m.node_rules_.push_back(rule);
    }
    for (const auto& r : spec.edge_rules) {
        const std::string what = "edge rule " + r.target_from + " + " + r.contact + " -> " + r.target_to + " + " + r.contact;
        EdgeRule rule{m.state(r.target_from), m.state(r.target_to), m.state(r.contact), r.rate};
        if (rule.target_from == rule.target_to)
            throw Error(Errc::SelfTransition, what);
        check_rate(r.rate, what);
        for (const auto& other : m.edge_rules_)
            if (other.target_from == rule.target_from && other.contact == rule.contact)
                throw Error(Errc::DuplicateRule, what);
        m.edge_rules_.push_back(rule);
    }

    m.exit_rate_.assign(ns, 0.0);
    m.contact_rate_.assign(ns, 0.0);
    m.residence_deterministic_.assign(ns, 1);
    m.node_rules_from_.resize(ns);
    m.edge_rules_by_contact_.resize(ns);
    m.edge_rules_by_target_.resize(ns);
    for (std::size_t i = 0; i < m.node_rules_.size(); ++i) {
        const auto& r = m.node_rules_[i];
        m.exit_rate_[r.from] += r.rate;
        m.node_rules_from_[r.from].push_back(static_cast<std::uint16_t>(i));
    }
    for (std::size_t i = 0; i < m.edge_rules_.size(); ++i) {
        const auto& r = m.edge_rules_[i];
        m.contact_rate_[r.contact] += r.rate;
        m.residence_deterministic_[r.target_from] = 0;
        m.edge_rules_by_contact_[r.contact].push_back(static_cast<std::uint16_t>(i));
        m.edge_rules_by_target_[r.target_from].push_back(static_cast<std::uint16_t>(i));
    }
    m.rejection_simulable_ = true;
    for (std::size_t s = 0; s < ns; ++s)
        if (m.contact_rate_[s] > 0.0 && !m.residence_deterministic_[s])
            m.rejection_simulable_ = false;
    return m;
}

namespace presets {

Model sis(double mu, double lambda)
{
    return validate(ModelSpec{
        "sis", {"S", "I"}, {{"I", "S", mu}}, {{"S", "I", "I", lambda}}});
}

Model sir(double mu1, double mu2, double lambda)
{
    return validate(ModelSpec{
        "sir", {"S", "I", "R"}, {{"I", "R", mu1}, {"R", "S", mu2}}, {{"S", "I", "I", lambda}}});
}

Model competing(double l1, double l2, double m1, double m2)
{
    return validate(ModelSpec{"competing",
                              {"S", "I", "J"},
                              {{"I", "S", m1}, {"J", "S", m2}},
                              {{"S", "I", "I", l1}, {"S", "J", "J", l2}}});
}

} // namespace presets

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string strip_spaces(std::string_view s)
{
    std::string out;
    for (char c : s)
        if (c != ' ' && c != '\t' && c != '\r')
            out.push_back(c);
    return out;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& msg)
{
    throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + msg);
}

double parse_rate(std::string_view text, std::size_t line_no)
{
    text = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        parse_fail(line_no, "bad rate literal '" + std::string(text) + "'");
    return value;
}

bool valid_name(std::string_view s)
{
    return !s.empty() && s.find_first_of("+-><@#,") == std::string_view::npos;
}

} // namespace

ModelSpec parse_model(std::string_view text)
{
    ModelSpec spec;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        line = trim(line);
        if (line.empty() || line.front() == '#')
            continue;
        const auto ws = line.find_first_of(" \t");
        const std::string_view keyword = line.substr(0, ws);
        const std::string_view rest = ws == std::string_view::npos ? std::string_view{} : trim(line.substr(ws));

        if (keyword == "state") {
            const std::string name(rest);
            if (!valid_name(name) || name.find_first_of(" \t") != std::string::npos)
                parse_fail(line_no, "bad state name '" + name + "'");
            spec.states.push_back(name);
            continue;
        }
        if (keyword != "node" && keyword != "edge")
            parse_fail(line_no, "unknown declaration '" + std::string(keyword) + "'");

        const auto at = rest.rfind('@');
        if (at == std::string_view::npos)
            parse_fail(line_no, "missing '@ <rate>'");
        const double rate = parse_rate(rest.substr(at + 1), line_no);
        const std::string body = strip_spaces(rest.substr(0, at));
        const auto arrow = body.find("->");
        if (arrow == std::string::npos)
            parse_fail(line_no, "missing '->'");
        const std::string lhs = body.substr(0, arrow);
        const std::string rhs = body.substr(arrow + 2);

        if (keyword == "node") {
            if (!valid_name(lhs) || !valid_name(rhs))
                parse_fail(line_no, "node rule must read '<from> -> <to> @ <rate>'");
            spec.node_rules.push_back({lhs, rhs, rate});
        } else {
            const auto lp = lhs.find('+');
            const auto rp = rhs.find('+');
            if (lp == std::string::npos || rp == std::string::npos)
                parse_fail(line_no, "edge rule must read '<A> + <C> -> <B> + <C> @ <rate>'");
            const std::string a = lhs.substr(0, lp), c1 = lhs.substr(lp + 1);
            const std::string b = rhs.substr(0, rp), c2 = rhs.substr(rp + 1);
            if (!valid_name(a) || !valid_name(b) || !valid_name(c1) || !valid_name(c2))
                parse_fail(line_no, "bad state name in edge rule");
            if (c1 != c2)
                parse_fail(line_no, "contact state must be unchanged ('" + c1 + "' vs '" + c2 + "')");
            spec.edge_rules.push_back({a, b, c1, rate});
        }
    }
    return spec;
}

ModelSpec load_model_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::IoError, "cannot open model file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    ModelSpec spec = parse_model(buf.str());
    spec.name = path.stem().string();
    return spec;
}

} // namespace rejsim
