#include "rejsim/error.hpp"
#include "rejsim/netgraph.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>
#include <unordered_map>

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

[[noreturn]] void malformed(std::size_t line_no, std::string_view line)
{
    throw Error(Errc::MalformedLine, "line " + std::to_string(line_no) + ": '" + std::string(line) + "'");
}

template <typename T>
bool parse_number(std::string_view field, T& out)
{
    field = trim(field);
    if (field.empty())
        return false;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc() && ptr == field.data() + field.size();
}

struct RawEdge {
    std::uint64_t a;
    std::uint64_t b;
    double weight;
};

struct PairHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const noexcept
    {
        return std::hash<std::uint64_t>{}(p.first * 0x9E3779B97F4A7C15ull ^ p.second);
    }
};

struct RawEdges {
    std::vector<RawEdge> edges;
    bool weighted = false;
};

RawEdges scan_edges(std::string_view text)
{
    RawEdges out;
    std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::size_t, PairHash> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        const std::string_view line = trim(text.substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (line.empty() || line.front() == '#')
            continue;

        std::string_view fields[3];
        std::size_t count = 0;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            if (count == 3)
                malformed(line_no, line);
            fields[count++] = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        if (count < 2)
            malformed(line_no, line);

        RawEdge e{0, 0, 1.0};
        if (!parse_number(fields[0], e.a) || !parse_number(fields[1], e.b))
            malformed(line_no, line);
        if (count == 3) {
            if (!parse_number(fields[2], e.weight))
                malformed(line_no, line);
            if (!(e.weight > 0.0) || !std::isfinite(e.weight))
                throw Error(Errc::NonPositiveWeight, "line " + std::to_string(line_no) + ": weight must be > 0");
            out.weighted = true;
        }
        if (e.a == e.b)
            throw Error(Errc::SelfLoop, "line " + std::to_string(line_no) + ": self-loop at node " + std::to_string(e.a));
        if (e.a > e.b)
            std::swap(e.a, e.b);
        const std::pair key{e.a, e.b};
        if (const auto it = seen.find(key); it != seen.end()) {
            if (out.edges[it->second].weight != e.weight)
                throw Error(Errc::AsymmetricWeight, "line " + std::to_string(line_no) + ": edge listed with different weights");
            continue;
        }
        seen.emplace(key, out.edges.size());
        out.edges.push_back(e);
    }
    return out;
}

} // namespace

Network parse_edge_list(std::string_view text)
{
    const RawEdges raw = scan_edges(text);
    std::uint64_t max_id = 0;
    bool any = false;
    for (const auto& e : raw.edges) {
        max_id = std::max(max_id, e.b);
        any = true;
    }
    if (max_id >= std::numeric_limits<NodeId>::max())
        throw Error(Errc::DegenerateParameters, "node id exceeds 32-bit range");
    std::vector<Edge> edges;
    edges.reserve(raw.edges.size());
    for (const auto& e : raw.edges)
        edges.push_back({static_cast<NodeId>(e.a), static_cast<NodeId>(e.b), e.weight});
    return Network::from_edges(any ? static_cast<std::size_t>(max_id) + 1 : 0, edges, raw.weighted);
}

RemappedNetwork parse_edge_list_remapped(std::string_view text)
{
    const RawEdges raw = scan_edges(text);
    RemappedNetwork out;
    std::unordered_map<std::uint64_t, NodeId> dense;
    auto map_id = [&](std::uint64_t id) {
        auto [it, inserted] = dense.try_emplace(id, static_cast<NodeId>(out.original_id.size()));
        if (inserted)
            out.original_id.push_back(id);
        return it->second;
    };
    std::vector<Edge> edges;
    edges.reserve(raw.edges.size());
    for (const auto& e : raw.edges) {
        const NodeId a = map_id(e.a);
        const NodeId b = map_id(e.b);
        edges.push_back({a, b, e.weight});
    }
    out.network = Network::from_edges(out.original_id.size(), edges, raw.weighted);
    return out;
}

Network read_edge_list(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::IoError, "cannot open edge list " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_edge_list(buf.str());
}

std::string format_edge_list(const Network& net)
{
    std::string out;
    char buf[32];
    auto put = [&](auto v) {
        const auto r = std::to_chars(buf, buf + sizeof buf, v);
        out.append(buf, r.ptr);
    };
    for (const auto& e : net.edges()) {
        put(e.src);
        out += ',';
        put(e.dst);
        if (net.weighted()) {
            out += ',';
            put(e.weight);
        }
        out += '\n';
    }
    return out;
}

void write_edge_list(const std::filesystem::path& path, const Network& net, std::string_view header_comment)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::IoError, "cannot write edge list " + path.string());
    if (!header_comment.empty())
        out << "# " << header_comment << '\n';
    out << format_edge_list(net);
    if (!out)
        throw Error(Errc::IoError, "write failed for " + path.string());
}

} // namespace rejsim
