#include "episource/network.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "episource/rng.hpp"

namespace episource {

namespace {

std::vector<std::string> tokenize(const std::string& line)
{
    std::string body = line;
    if (auto hash = body.find('#'); hash != std::string::npos)
        body.resize(hash);
    std::istringstream in(body);
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok)
        tokens.push_back(std::move(tok));
    return tokens;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line, const std::string& what)
{
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::int64_t parse_int(const std::string& tok, const std::filesystem::path& path, int line)
{
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        parse_fail(path, line, "expected an integer, got '" + tok + "'");
    return value;
}

} // namespace

static_network static_network::from_edges(node_id node_count,
                                          std::vector<std::pair<node_id, node_id>> edges)
{
    if (node_count < 0)
        throw std::invalid_argument("node_count must be non-negative");
    for (auto& [u, v] : edges) {
        if (u < 0 || u >= node_count || v < 0 || v >= node_count)
            throw std::invalid_argument("edge endpoint out of range");
        if (u == v)
            throw std::invalid_argument("self-loop rejected");
        if (u > v)
            std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    static_network g;
    g.node_count_ = node_count;
    g.offsets_.assign(static_cast<std::size_t>(node_count) + 1, 0);
    for (const auto& [u, v] : edges) {
        ++g.offsets_[u + 1];
        ++g.offsets_[v + 1];
    }
    for (node_id i = 0; i < node_count; ++i)
        g.offsets_[i + 1] += g.offsets_[i];
    g.adj_.resize(static_cast<std::size_t>(g.offsets_[node_count]));
    std::vector<std::int64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const auto& [u, v] : edges) {
        g.adj_[cursor[u]++] = v;
        g.adj_[cursor[v]++] = u;
    }
    // edges were sorted, so each adjacency list comes out ascending
    return g;
}

bool static_network::has_edge(node_id u, node_id v) const
{
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<std::pair<node_id, node_id>> static_network::edges() const
{
    std::vector<std::pair<node_id, node_id>> out;
    out.reserve(static_cast<std::size_t>(edge_count()));
    for (node_id u = 0; u < node_count_; ++u)
        for (node_id v : neighbors(u))
            if (u < v)
                out.emplace_back(u, v);
    return out;
}

temporal_network temporal_network::from_events(node_id node_count,
                                               std::vector<contact_event> events)
{
    for (const auto& e : events) {
        if (e.u < 0 || e.u >= node_count || e.v < 0 || e.v >= node_count)
            throw std::invalid_argument("event endpoint out of range");
        if (e.u == e.v)
            throw std::invalid_argument("self-contact rejected");
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const contact_event& a, const contact_event& b) { return a.t < b.t; });
    temporal_network tn;
    tn.node_count = node_count;
    if (!events.empty()) {
        tn.t_min = events.front().t;
        tn.t_max = events.back().t;
    }
    tn.events = std::move(events);
    return tn;
}

node_id id_map::intern(const std::string& label)
{
    auto [it, inserted] = dense_.try_emplace(label, static_cast<node_id>(labels_.size()));
    if (inserted)
        labels_.push_back(label);
    return it->second;
}

std::optional<node_id> id_map::lookup(const std::string& label) const
{
    auto it = dense_.find(label);
    if (it == dense_.end())
        return std::nullopt;
    return it->second;
}

id_map id_map::identity(node_id n)
{
    id_map ids;
    for (node_id i = 0; i < n; ++i)
        ids.intern(std::to_string(i));
    return ids;
}

void id_map::save_csv(const std::filesystem::path& path) const
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << "original_id,dense_id\n";
    for (node_id i = 0; i < size(); ++i)
        out << labels_[i] << "," << i << "\n";
}

id_map id_map::load_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    id_map ids;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 || line.empty())
            continue; // header
        auto comma = line.find(',');
        if (comma == std::string::npos)
            parse_fail(path, lineno, "expected 'original_id,dense_id'");
        std::string label = line.substr(0, comma);
        node_id dense = static_cast<node_id>(parse_int(line.substr(comma + 1), path, lineno));
        if (dense != ids.size())
            parse_fail(path, lineno, "dense ids must be consecutive from 0");
        ids.intern(label);
    }
    return ids;
}

loaded_static load_static(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());

    id_map ids;
    std::vector<std::pair<node_id, node_id>> edges;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tokens = tokenize(line);
        if (tokens.empty())
            continue;
        if (tokens.size() != 2)
            parse_fail(path, lineno, "expected 'u v'");
        if (tokens[0] == tokens[1])
            parse_fail(path, lineno, "self-loop '" + tokens[0] + "'");
        node_id u = ids.intern(tokens[0]);
        node_id v = ids.intern(tokens[1]);
        edges.emplace_back(u, v);
    }
    loaded_static out;
    out.net = static_network::from_edges(ids.size(), std::move(edges));
    out.ids = std::move(ids);
    return out;
}

loaded_temporal load_temporal(const std::filesystem::path& path, std::int32_t discard_before)
{
    if (discard_before < 0)
        throw std::invalid_argument("discard_before must be non-negative");
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());

    struct raw_event
    {
        std::string u, v;
        std::int32_t t;
    };
    std::vector<raw_event> kept;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tokens = tokenize(line);
        if (tokens.empty())
            continue;
        if (tokens.size() != 3)
            parse_fail(path, lineno, "expected 'u v t'");
        if (tokens[0] == tokens[1])
            parse_fail(path, lineno, "self-contact '" + tokens[0] + "'");
        auto t = parse_int(tokens[2], path, lineno);
        if (t < 0)
            parse_fail(path, lineno, "negative timestamp");
        if (t < discard_before)
            continue;
        kept.push_back({std::move(tokens[0]), std::move(tokens[1]),
                        static_cast<std::int32_t>(t - discard_before)});
    }
    if (kept.empty())
        throw std::runtime_error(path.string() + ": no events remain after discarding t < " +
                                 std::to_string(discard_before));

    id_map ids;
    std::vector<contact_event> events;
    events.reserve(kept.size());
    for (auto& e : kept)
        events.push_back({ids.intern(e.u), ids.intern(e.v), e.t});
    loaded_temporal out;
    out.net = temporal_network::from_events(ids.size(), std::move(events));
    out.ids = std::move(ids);
    return out;
}

static_network make_lattice(int rows, int cols)
{
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("lattice dimensions must be positive");
    std::vector<std::pair<node_id, node_id>> edges;
    edges.reserve(static_cast<std::size_t>(2) * rows * cols);
    auto id = [cols](int r, int c) { return static_cast<node_id>(r * cols + c); };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols)
                edges.emplace_back(id(r, c), id(r, c + 1));
            if (r + 1 < rows)
                edges.emplace_back(id(r, c), id(r + 1, c));
        }
    }
    return static_network::from_edges(static_cast<node_id>(rows) * cols, std::move(edges));
}

temporal_network make_synthetic_contacts(node_id nodes, int days, int neighbors_per_side,
                                         int chords, double activity, std::uint64_t seed)
{
    if (nodes < 3 || days < 1 || neighbors_per_side < 1)
        throw std::invalid_argument("synthetic contact network needs >=3 nodes, >=1 day, k>=1");
    if (activity < 0.0 || activity > 1.0)
        throw std::invalid_argument("activity must be in [0,1]");

    std::set<std::pair<node_id, node_id>> edge_set;
    auto add = [&](node_id a, node_id b) {
        if (a > b)
            std::swap(a, b);
        return a != b && edge_set.emplace(a, b).second;
    };
    for (node_id i = 0; i < nodes; ++i)
        for (int k = 1; k <= neighbors_per_side; ++k)
            add(i, static_cast<node_id>((i + k) % nodes));

    rng_stream rng(derive_seed(seed, 0x636f6e74616374ULL));
    int placed = 0;
    for (int attempts = 0; placed < chords && attempts < 100 * (chords + 1); ++attempts) {
        auto a = static_cast<node_id>(rng.below(static_cast<std::uint64_t>(nodes)));
        auto b = static_cast<node_id>(rng.below(static_cast<std::uint64_t>(nodes)));
        if (add(a, b))
            ++placed;
    }

    std::vector<std::pair<node_id, node_id>> edges(edge_set.begin(), edge_set.end());
    std::vector<contact_event> events;
    for (std::int32_t day = 0; day < days; ++day)
        for (const auto& [a, b] : edges)
            if (rng.bernoulli(activity))
                events.push_back({a, b, day});
    return temporal_network::from_events(nodes, std::move(events));
}

std::vector<std::int32_t> bfs_distances(const static_network& g, node_id u)
{
    std::vector<std::int32_t> dist(static_cast<std::size_t>(g.node_count()), -1);
    std::deque<node_id> queue;
    dist[u] = 0;
    queue.push_back(u);
    while (!queue.empty()) {
        node_id x = queue.front();
        queue.pop_front();
        for (node_id y : g.neighbors(x)) {
            if (dist[y] < 0) {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    return dist;
}

std::optional<std::int32_t> graph_distance(const static_network& g, node_id u, node_id v)
{
    if (u < 0 || u >= g.node_count() || v < 0 || v >= g.node_count())
        throw std::invalid_argument("node id out of range");
    if (u == v)
        return 0;
    auto dist = bfs_distances(g, u);
    if (dist[v] < 0)
        return std::nullopt;
    return dist[v];
}

temporal_network randomize_bins(const temporal_network& tn, std::int32_t delta,
                                std::uint64_t seed)
{
    if (delta < 1)
        throw std::invalid_argument("delta must be >= 1");
    std::vector<contact_event> events = tn.events;
    rng_stream rng(derive_seed(seed, 0x62696e73ULL));

    // events are sorted by t, so every bin is a contiguous range
    std::size_t begin = 0;
    while (begin < events.size()) {
        std::int32_t bin_index = (events[begin].t - tn.t_min) / delta;
        std::int32_t bin_end_t = tn.t_min + (bin_index + 1) * delta;
        std::size_t end = begin;
        while (end < events.size() && events[end].t < bin_end_t)
            ++end;

        std::vector<std::int32_t> stamps;
        stamps.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i)
            stamps.push_back(events[i].t);
        for (std::size_t i = stamps.size(); i > 1; --i)
            std::swap(stamps[i - 1], stamps[rng.below(i)]);
        for (std::size_t i = begin; i < end; ++i)
            events[i].t = stamps[i - begin];
        begin = end;
    }
    return temporal_network::from_events(tn.node_count, std::move(events));
}

static_network aggregate(const temporal_network& tn)
{
    std::vector<std::pair<node_id, node_id>> edges;
    edges.reserve(tn.events.size());
    for (const auto& e : tn.events)
        edges.emplace_back(e.u, e.v);
    return static_network::from_edges(tn.node_count, std::move(edges));
}

} // namespace episource
