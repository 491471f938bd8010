#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace episource {

using node_id = std::int32_t;

// Undirected, unweighted graph over dense node ids [0, node_count).
// Immutable after construction; adjacency stored in CSR form, sorted.
class static_network
{
public:
    static_network() = default;

    // Validates: ids in range, no self-loops; duplicate edges are collapsed.
    static static_network from_edges(node_id node_count,
                                     std::vector<std::pair<node_id, node_id>> edges);

    node_id node_count() const { return node_count_; }
    std::int64_t edge_count() const { return static_cast<std::int64_t>(adj_.size()) / 2; }

    std::span<const node_id> neighbors(node_id u) const
    {
        return {adj_.data() + offsets_[u], adj_.data() + offsets_[u + 1]};
    }

    int degree(node_id u) const { return static_cast<int>(offsets_[u + 1] - offsets_[u]); }

    bool has_edge(node_id u, node_id v) const;

    // All edges as (u,v) with u < v, sorted.
    std::vector<std::pair<node_id, node_id>> edges() const;

private:
    node_id node_count_ = 0;
    std::vector<std::int64_t> offsets_;
    std::vector<node_id> adj_;
};

struct contact_event
{
    node_id u = 0;
    node_id v = 0;
    std::int32_t t = 0; // integer day

    friend bool operator==(const contact_event&, const contact_event&) = default;
};

// Time-ordered contact events over dense node ids.
struct temporal_network
{
    node_id node_count = 0;
    std::vector<contact_event> events; // sorted non-decreasing by t
    std::int32_t t_min = 0;
    std::int32_t t_max = 0;

    static temporal_network from_events(node_id node_count, std::vector<contact_event> events);
};

// Maps arbitrary file labels to dense node ids, in order of first appearance.
class id_map
{
public:
    node_id intern(const std::string& label);
    std::optional<node_id> lookup(const std::string& label) const;
    const std::string& original(node_id dense) const { return labels_[dense]; }
    node_id size() const { return static_cast<node_id>(labels_.size()); }

    // Identity map over [0,n): original label of i is "i".
    static id_map identity(node_id n);

    void save_csv(const std::filesystem::path& path) const;
    static id_map load_csv(const std::filesystem::path& path);

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, node_id> dense_;
};

struct loaded_static
{
    static_network net;
    id_map ids;
};

struct loaded_temporal
{
    temporal_network net;
    id_map ids;
};

// Edge list: "u v" per line, '#' comments, arbitrary labels.
loaded_static load_static(const std::filesystem::path& path);

// Contact list: "u v t" per line. Events before discard_before are dropped
// and remaining timestamps shifted so day discard_before becomes day 0.
loaded_temporal load_temporal(const std::filesystem::path& path, std::int32_t discard_before);

// 4-connected rows x cols grid, no periodic boundary; node (r,c) = r*cols + c.
static_network make_lattice(int rows, int cols);

// Synthetic temporal contact network: a ring where every node is linked to
// its neighbors_per_side nearest neighbors on each side plus `chords` random
// long-range edges; each backbone edge is active on any given day of
// [0, days) independently with probability `activity`.
temporal_network make_synthetic_contacts(node_id nodes, int days, int neighbors_per_side,
                                         int chords, double activity, std::uint64_t seed);

// BFS distances from u; -1 marks unreachable nodes.
std::vector<std::int32_t> bfs_distances(const static_network& g, node_id u);

// Shortest-path length, or nullopt when v is unreachable from u.
std::optional<std::int32_t> graph_distance(const static_network& g, node_id u, node_id v);

// Permutes timestamps within consecutive delta-day bins aligned to t_min;
// endpoints stay with their event, multiset of stamps per bin is preserved.
temporal_network randomize_bins(const temporal_network& tn, std::int32_t delta,
                                std::uint64_t seed);

// Collapses temporal events to a static edge set.
static_network aggregate(const temporal_network& tn);

} // namespace episource
