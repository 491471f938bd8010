#include "episource/spreading.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace episource {

const char* model_name(model_kind m)
{
    switch (m) {
    case model_kind::sir: return "sir";
    case model_kind::si: return "si";
    case model_kind::ic: return "ic";
    }
    return "?";
}

model_kind model_from_name(const std::string& name)
{
    if (name == "sir")
        return model_kind::sir;
    if (name == "si")
        return model_kind::si;
    if (name == "ic")
        return model_kind::ic;
    throw std::invalid_argument("unknown model '" + name + "' (expected sir, si or ic)");
}

spreading_params spreading_params::make(model_kind model, double p, double q, int steps)
{
    spreading_params params;
    params.model = model;
    params.p = p;
    params.q = model == model_kind::si ? 0.0 : model == model_kind::ic ? 1.0 : q;
    params.steps = steps;
    params.validate();
    return params;
}

void spreading_params::validate() const
{
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("p and q must be in [0,1]");
    if (steps < 1)
        throw std::invalid_argument("step horizon must be positive");
    if (model == model_kind::si && q != 0.0)
        throw std::invalid_argument("SI requires q = 0");
    if (model == model_kind::ic && q != 1.0)
        throw std::invalid_argument("IC requires q = 1");
}

void temporal_params::validate() const
{
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("p and q must be in [0,1]");
    if (t0 > t_end)
        throw std::invalid_argument("t0 must not exceed t_end");
}

snapshot::snapshot(std::vector<node_id> ever_infected, node_id node_count,
                   std::optional<std::vector<node_id>> observed)
    : ever_(std::move(ever_infected)), observed_(std::move(observed))
{
    std::sort(ever_.begin(), ever_.end());
    ever_.erase(std::unique(ever_.begin(), ever_.end()), ever_.end());
    ever_mask_.assign(static_cast<std::size_t>(node_count), 0);
    for (node_id v : ever_) {
        if (v < 0 || v >= node_count)
            throw std::invalid_argument("snapshot node out of range");
        ever_mask_[v] = 1;
    }
    if (observed_) {
        std::sort(observed_->begin(), observed_->end());
        observed_->erase(std::unique(observed_->begin(), observed_->end()), observed_->end());
        observed_mask_.assign(static_cast<std::size_t>(node_count), 0);
        for (node_id v : *observed_) {
            if (v < 0 || v >= node_count)
                throw std::invalid_argument("observed node out of range");
            observed_mask_[v] = 1;
        }
        for (node_id v : ever_)
            if (!observed_mask_[v])
                throw std::invalid_argument("ever-infected node missing from the observed mask");
    }
}

std::vector<std::uint8_t> snapshot::forbidden_mask() const
{
    std::vector<std::uint8_t> forbidden(ever_mask_.size(), 0);
    for (std::size_t v = 0; v < ever_mask_.size(); ++v)
        forbidden[v] = !ever_mask_[v] && (!observed_ || observed_mask_[v]);
    return forbidden;
}

void snapshot::save(const std::filesystem::path& path, const id_map& ids) const
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    for (node_id v : ever_)
        out << ids.original(v) << "\n";
}

snapshot snapshot::load(const std::filesystem::path& path, const id_map& ids,
                        node_id node_count,
                        const std::optional<std::filesystem::path>& observed_path)
{
    auto read_ids = [&ids](const std::filesystem::path& p) {
        std::ifstream in(p);
        if (!in)
            throw std::runtime_error("cannot open " + p.string());
        std::vector<node_id> nodes;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos)
                line.resize(hash);
            std::string label;
            std::istringstream(line) >> label;
            if (label.empty())
                continue;
            auto dense = ids.lookup(label);
            if (!dense)
                throw std::runtime_error(p.string() + ":" + std::to_string(lineno) +
                                         ": unknown node '" + label + "'");
            nodes.push_back(*dense);
        }
        return nodes;
    };

    std::optional<std::vector<node_id>> observed;
    if (observed_path)
        observed = read_ids(*observed_path);
    return snapshot(read_ids(path), node_count, std::move(observed));
}

namespace {

struct prune_state
{
    const std::uint8_t* forbidden = nullptr;
    const snapshot* target = nullptr;
    double x_floor = 0.0;
    std::int64_t union_size = 0; // |target ∪ ever| while running

    explicit prune_state(const prune_spec* spec)
    {
        if (!spec)
            return;
        forbidden = spec->forbidden;
        if (spec->target && spec->x_floor > 0.0) {
            target = spec->target;
            x_floor = spec->x_floor;
            union_size = static_cast<std::int64_t>(target->ever_infected().size());
        }
    }

    // true => stop the simulation
    bool on_infect(node_id v)
    {
        if (forbidden && forbidden[v])
            return true;
        if (target && !target->is_infected(v)) {
            ++union_size;
            double best = static_cast<double>(target->ever_infected().size()) /
                          static_cast<double>(union_size);
            if (best < x_floor)
                return true;
        }
        return false;
    }

    void on_source(node_id v)
    {
        if (target && !target->is_infected(v))
            ++union_size;
    }
};

sim_outcome finish(sim_scratch& scratch, bool pruned)
{
    sim_outcome out;
    out.ever = scratch.ever;
    out.pruned = pruned;
    std::sort(out.ever.begin(), out.ever.end());
    // reset scratch for the next run; every touched node is in ever
    for (node_id v : scratch.ever)
        scratch.state[v] = 0;
    scratch.ever.clear();
    scratch.frontier.clear();
    scratch.next_frontier.clear();
    return out;
}

constexpr std::uint8_t kSusceptible = 0;
constexpr std::uint8_t kInfected = 1;
constexpr std::uint8_t kRecovered = 2;

} // namespace

sim_outcome simulate_static(const static_network& g, const spreading_params& params,
                            node_id source, rng_stream& rng, const prune_spec* prune,
                            sim_scratch* scratch, std::vector<int>* step_sizes)
{
    if (source < 0 || source >= g.node_count())
        throw std::invalid_argument("source out of range");

    sim_scratch local;
    sim_scratch& s = scratch ? *scratch : local;
    if (s.state.size() != static_cast<std::size_t>(g.node_count()))
        s.state.assign(static_cast<std::size_t>(g.node_count()), 0);

    prune_state pruning(prune);
    pruning.on_source(source);

    s.state[source] = kInfected;
    s.ever.push_back(source);
    s.frontier.push_back(source);
    if (step_sizes)
        step_sizes->push_back(1);

    const double p = params.p;
    const double q = params.q;
    for (int step = 0; step < params.steps && !s.frontier.empty(); ++step) {
        s.next_frontier.clear();
        // transmission attempts, evaluated against the start-of-step state
        for (node_id u : s.frontier) {
            for (node_id v : g.neighbors(u)) {
                if (s.state[v] == kSusceptible && rng.bernoulli(p)) {
                    s.state[v] = kInfected;
                    s.ever.push_back(v);
                    s.next_frontier.push_back(v);
                    if (pruning.on_infect(v))
                        return finish(s, true);
                }
            }
        }
        // recovery of the nodes that were infected when the step began
        for (node_id u : s.frontier) {
            if (rng.bernoulli(q))
                s.state[u] = kRecovered;
            else
                s.next_frontier.push_back(u);
        }
        std::swap(s.frontier, s.next_frontier);
        if (step_sizes)
            step_sizes->push_back(static_cast<int>(s.ever.size()));
    }
    return finish(s, false);
}

sim_outcome simulate_static(const static_network& g, const spreading_params& params,
                            node_id source, std::uint64_t seed, const snapshot* prune_target)
{
    rng_stream rng(seed);
    if (!prune_target)
        return simulate_static(g, params, source, rng);
    auto forbidden = prune_target->forbidden_mask();
    prune_spec prune{forbidden.data(), nullptr, 0.0};
    return simulate_static(g, params, source, rng, &prune);
}

sim_outcome simulate_temporal(const temporal_network& tn, const temporal_params& params,
                              node_id source, rng_stream& rng, const prune_spec* prune,
                              sim_scratch* scratch)
{
    if (source < 0 || source >= tn.node_count)
        throw std::invalid_argument("source out of range");

    sim_scratch local;
    sim_scratch& s = scratch ? *scratch : local;
    if (s.state.size() != static_cast<std::size_t>(tn.node_count))
        s.state.assign(static_cast<std::size_t>(tn.node_count), 0);

    prune_state pruning(prune);
    pruning.on_source(source);

    s.state[source] = kInfected;
    s.ever.push_back(source);
    s.frontier.push_back(source); // currently infected, any order

    const double p = params.p;
    const double q = params.q;
    auto it = std::lower_bound(tn.events.begin(), tn.events.end(), params.t0,
                               [](const contact_event& e, std::int32_t t) { return e.t < t; });

    for (std::int32_t day = params.t0; day <= params.t_end && !s.frontier.empty(); ++day) {
        for (; it != tn.events.end() && it->t == day; ++it) {
            node_id a = it->u;
            node_id b = it->v;
            if (s.state[a] == kInfected && s.state[b] == kSusceptible) {
                // fall through with (a,b) oriented infected -> susceptible
            } else if (s.state[b] == kInfected && s.state[a] == kSusceptible) {
                std::swap(a, b);
            } else {
                continue;
            }
            if (rng.bernoulli(p)) {
                s.state[b] = kInfected;
                s.ever.push_back(b);
                s.frontier.push_back(b);
                if (pruning.on_infect(b))
                    return finish(s, true);
            }
        }
        if (day < params.t_end) {
            // day-boundary recovery, including nodes infected earlier today
            for (std::size_t i = 0; i < s.frontier.size();) {
                if (rng.bernoulli(q)) {
                    s.state[s.frontier[i]] = kRecovered;
                    s.frontier[i] = s.frontier.back();
                    s.frontier.pop_back();
                } else {
                    ++i;
                }
            }
        }
    }
    return finish(s, false);
}

sim_outcome simulate_temporal(const temporal_network& tn, const temporal_params& params,
                              node_id source, std::uint64_t seed, const snapshot* prune_target)
{
    rng_stream rng(seed);
    if (!prune_target)
        return simulate_temporal(tn, params, source, rng);
    auto forbidden = prune_target->forbidden_mask();
    prune_spec prune{forbidden.data(), nullptr, 0.0};
    return simulate_temporal(tn, params, source, rng, &prune);
}

void pq_prior::validate() const
{
    if (p.empty() || p.size() != q.size() || p.size() != weight.size())
        throw std::invalid_argument("pq prior needs matching non-empty p, q, weight lists");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0 && p[i] <= 1.0) || !(q[i] >= 0.0 && q[i] <= 1.0))
            throw std::invalid_argument("pq prior values must be in [0,1]");
        if (weight[i] < 0.0)
            throw std::invalid_argument("pq prior weights must be non-negative");
        total += weight[i];
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("pq prior weights must sum to 1");
}

namespace {

std::size_t draw_prior_index(const pq_prior& prior, rng_stream& rng)
{
    double u = rng.next_unit();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < prior.weight.size(); ++i) {
        acc += prior.weight[i];
        if (u < acc)
            return i;
    }
    return prior.weight.size() - 1;
}

} // namespace

static_backend& static_backend::with_pq_prior(pq_prior prior)
{
    prior.validate();
    prior_ = std::move(prior);
    return *this;
}

sim_outcome static_backend::run(node_id source, rng_stream& rng, const prune_spec* prune,
                                sim_scratch& scratch) const
{
    spreading_params params = params_;
    if (prior_) {
        std::size_t i = draw_prior_index(*prior_, rng);
        params.p = prior_->p[i];
        params.q = prior_->q[i];
    }
    return simulate_static(*g_, params, source, rng, prune, &scratch);
}

temporal_backend& temporal_backend::with_t0_window(std::int32_t lo, std::int32_t hi)
{
    if (lo > hi)
        throw std::invalid_argument("empty t0 window");
    if (lo < tn_->t_min || hi > params_.t_end)
        throw std::invalid_argument("t0 window outside the data range");
    t0_window_ = {lo, hi};
    return *this;
}

temporal_backend& temporal_backend::with_pq_prior(pq_prior prior)
{
    prior.validate();
    prior_ = std::move(prior);
    return *this;
}

sim_outcome temporal_backend::run(node_id source, rng_stream& rng, const prune_spec* prune,
                                  sim_scratch& scratch) const
{
    temporal_params params = params_;
    if (t0_window_)
        params.t0 = static_cast<std::int32_t>(rng.uniform_int(t0_window_->first, t0_window_->second));
    if (prior_) {
        std::size_t i = draw_prior_index(*prior_, rng);
        params.p = prior_->p[i];
        params.q = prior_->q[i];
    }
    return simulate_temporal(*tn_, params, source, rng, prune, &scratch);
}

std::vector<sim_outcome> batch_simulate(const sim_backend& backend, node_id source,
                                        std::uint64_t n, std::uint64_t seed,
                                        const prune_spec* prune, std::size_t jobs)
{
    if (n < 1)
        throw std::invalid_argument("n must be >= 1");
    std::vector<sim_outcome> outcomes(n);

    std::size_t workers = jobs ? jobs : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<std::size_t>(workers, n);

    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        sim_scratch scratch;
        for (std::uint64_t i = begin; i < end; ++i) {
            rng_stream rng(derive_seed(seed, i));
            outcomes[i] = backend.run(source, rng, prune, scratch);
        }
    };
    if (workers <= 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            std::uint64_t begin = n * w / workers;
            std::uint64_t end = n * (w + 1) / workers;
            pool.emplace_back(work, begin, end);
        }
        for (auto& t : pool)
            t.join();
    }
    return outcomes;
}

} // namespace episource
