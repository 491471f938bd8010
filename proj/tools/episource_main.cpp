// episource: epidemic source inference from a single snapshot.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "episource/detectability.hpp"
#include "episource/estimators.hpp"
#include "episource/network.hpp"
#include "episource/oracle.hpp"
#include "episource/spreading.hpp"

namespace fs = std::filesystem;
using namespace episource;

namespace {

class config_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct network_options
{
    std::string network_path;
    std::string lattice; // "RxC"
    std::string temporal_path;
    std::string synthetic; // "nodes,days,k,chords,activity,seed"
    int discard_before = 0;

    void add_flags(CLI::App& cmd, bool with_static, bool with_temporal)
    {
        if (with_static) {
            cmd.add_option("--network", network_path, "Edge-list file ('u v' per line)");
            cmd.add_option("--lattice", lattice, "4-connected lattice, e.g. 30x30");
        }
        if (with_temporal) {
            cmd.add_option("--temporal", temporal_path, "Contact file ('u v t' per line)");
            cmd.add_option("--synthetic", synthetic,
                           "Synthetic contacts: nodes,days,k,chords,activity,seed");
            cmd.add_option("--discard-before", discard_before,
                           "Drop events before this day and re-base timestamps");
        }
    }

    bool is_temporal() const { return !temporal_path.empty() || !synthetic.empty(); }

    loaded_static load_static_net() const
    {
        if (!network_path.empty() && !lattice.empty())
            throw config_error("--network and --lattice are mutually exclusive");
        if (!network_path.empty())
            return load_static(network_path);
        if (!lattice.empty()) {
            auto x = lattice.find('x');
            if (x == std::string::npos)
                throw config_error("--lattice expects RxC, e.g. 30x30");
            int rows = std::stoi(lattice.substr(0, x));
            int cols = std::stoi(lattice.substr(x + 1));
            auto g = make_lattice(rows, cols);
            return {std::move(g), id_map::identity(static_cast<node_id>(rows) * cols)};
        }
        throw config_error("a static network is required (--network or --lattice)");
    }

    loaded_temporal load_temporal_net() const
    {
        if (!temporal_path.empty() && !synthetic.empty())
            throw config_error("--temporal and --synthetic are mutually exclusive");
        if (!temporal_path.empty())
            return load_temporal(temporal_path, discard_before);
        if (!synthetic.empty()) {
            std::istringstream in(synthetic);
            std::int64_t nodes, days, k, chords, gseed;
            double activity;
            char c1, c2, c3, c4, c5;
            if (!(in >> nodes >> c1 >> days >> c2 >> k >> c3 >> chords >> c4 >> activity >> c5 >>
                  gseed) ||
                c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' || c5 != ',')
                throw config_error("--synthetic expects nodes,days,k,chords,activity,seed");
            auto tn = make_synthetic_contacts(static_cast<node_id>(nodes), static_cast<int>(days),
                                              static_cast<int>(k), static_cast<int>(chords),
                                              activity, static_cast<std::uint64_t>(gseed));
            auto ids = id_map::identity(tn.node_count);
            return {std::move(tn), std::move(ids)};
        }
        throw config_error("a temporal network is required (--temporal or --synthetic)");
    }
};

fs::path prepare_out_dir(const std::string& out)
{
    if (out.empty())
        throw config_error("--out is required");
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

// The effective config is echoed for provenance. --jobs is dropped: it must
// not affect any output.
void echo_config(CLI::App& app, const fs::path& dir)
{
    std::string text = app.config_to_str(true, false);
    std::ostringstream filtered;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("jobs=", 0) != 0)
            filtered << line << "\n";
    std::ofstream out(dir / "config.ini");
    out << filtered.str();
}

std::uint64_t fnv1a(const std::string& text)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t config_hash(CLI::App& app)
{
    std::string text = app.config_to_str(true, false);
    std::ostringstream canon;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("jobs=", 0) != 0)
            canon << line << "\n";
    return fnv1a(canon.str());
}

// Counts complete data rows and drops a torn trailing line so an
// interrupted run can resume cleanly.
std::uint64_t recover_csv(const fs::path& path, const std::string& header)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return 0;
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    auto last_newline = content.find_last_of('\n');
    if (last_newline == std::string::npos)
        return 0;
    if (last_newline + 1 != content.size()) {
        content.resize(last_newline + 1);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content;
    }
    std::uint64_t lines = 0;
    for (char c : content)
        if (c == '\n')
            ++lines;
    if (lines == 0)
        return 0;
    if (content.rfind(header + "\n", 0) != 0)
        throw std::runtime_error(path.string() + ": unexpected header, cannot resume");
    return lines - 1;
}

struct manifest
{
    std::uint64_t hash = 0;
    std::uint64_t total = 0;
    std::uint64_t completed = 0;

    void save(const fs::path& path) const
    {
        nlohmann::ordered_json doc;
        doc["config_hash"] = hash;
        doc["total_records"] = total;
        doc["completed_records"] = completed;
        std::ofstream out(path);
        out << doc.dump(2) << "\n";
    }

    static std::optional<manifest> load(const fs::path& path)
    {
        std::ifstream in(path);
        if (!in)
            return std::nullopt;
        nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
        if (doc.is_discarded()) // torn by an interrupted save; restart fresh
            return std::nullopt;
        manifest m;
        m.hash = doc.at("config_hash").get<std::uint64_t>();
        m.total = doc.at("total_records").get<std::uint64_t>();
        m.completed = doc.at("completed_records").get<std::uint64_t>();
        return m;
    }
};

struct common_options
{
    std::uint64_t seed = 0;
    std::size_t jobs = 0;
    std::string out;

    void add_flags(CLI::App& cmd)
    {
        cmd.add_option("--seed", seed, "Root RNG seed");
        cmd.add_option("--jobs", jobs, "Worker threads (0 = all cores)");
        cmd.add_option("--out", out, "Output directory")->required();
    }
};

struct model_options
{
    std::string model = "sir";
    double p = 0.0;
    double q = 0.0;
    int steps = 1;
    std::int32_t t0 = 0;
    std::int32_t t_end = 0;

    void add_flags(CLI::App& cmd, bool with_static, bool with_temporal)
    {
        cmd.add_option("--model", model, "Spreading model: sir, si or ic")
            ->check(CLI::IsMember({"sir", "si", "ic"}));
        cmd.add_option("-p", p, "Transmission probability per contact")->required();
        cmd.add_option("-q", q, "Recovery probability per step/day");
        if (with_static)
            cmd.add_option("-T", steps, "Step horizon (static model)");
        if (with_temporal) {
            cmd.add_option("--t0", t0, "Epidemic start day (temporal model)");
            cmd.add_option("--t-end", t_end, "Observation day (temporal model)");
        }
    }

    spreading_params static_params() const
    {
        return spreading_params::make(model_from_name(model), p, q, steps);
    }

    temporal_params temporal() const
    {
        temporal_params params;
        params.p = p;
        params.q = q;
        params.t0 = t0;
        params.t_end = t_end;
        params.validate();
        return params;
    }
};

int run_simulate(CLI::App& cmd, const network_options& net, const model_options& model,
                 const common_options& common, const std::string& source_label)
{
    fs::path dir = prepare_out_dir(common.out);
    echo_config(cmd, dir);

    id_map ids;
    sim_outcome outcome;
    node_id source = 0;

    auto pick_source = [&](node_id node_count) {
        if (!source_label.empty()) {
            auto s = ids.lookup(source_label);
            if (!s)
                throw config_error("unknown source '" + source_label + "'");
            return *s;
        }
        rng_stream rng(derive_seed(common.seed, 0x736f75726365ULL));
        return static_cast<node_id>(rng.below(static_cast<std::uint64_t>(node_count)));
    };

    if (net.is_temporal()) {
        auto [tn, tids] = net.load_temporal_net();
        ids = std::move(tids);
        source = pick_source(tn.node_count);
        outcome = simulate_temporal(tn, model.temporal(), source,
                                    derive_seed(common.seed, 0x73696dULL));
    } else {
        auto [g, gids] = net.load_static_net();
        ids = std::move(gids);
        source = pick_source(g.node_count());
        outcome = simulate_static(g, model.static_params(), source,
                                  derive_seed(common.seed, 0x73696dULL));
    }

    snapshot snap(outcome.ever, ids.size());
    snap.save(dir / "snapshot.txt", ids);
    ids.save_csv(dir / "ids.csv");

    nlohmann::ordered_json meta;
    meta["source"] = ids.original(source);
    meta["seed"] = common.seed;
    meta["ever_infected"] = outcome.ever.size();
    std::ofstream meta_out(dir / "outcome.json");
    meta_out << meta.dump(2) << "\n";

    std::cout << "source=" << ids.original(source) << " ever_infected=" << outcome.ever.size()
              << "\n";
    return 0;
}

int run_infer(CLI::App& cmd, const network_options& net, const model_options& model,
              const common_options& common, const std::string& snapshot_path,
              const std::string& observed_path, const std::string& estimator,
              std::uint64_t n, std::int32_t epsilon)
{
    fs::path dir = prepare_out_dir(common.out);
    echo_config(cmd, dir);

    estimator_kind kind = estimator_from_name(estimator);
    std::optional<fs::path> observed;
    if (!observed_path.empty())
        observed = observed_path;

    posterior post;
    id_map ids;

    if (net.is_temporal()) {
        auto [tn, tids] = net.load_temporal_net();
        ids = std::move(tids);
        snapshot snap = snapshot::load(snapshot_path, ids, tn.node_count, observed);
        temporal_params params = model.temporal();
        soft_margin_config sm;
        sm.n = n;
        sm.seed = common.seed;
        sm.jobs = common.jobs;
        switch (kind) {
        case estimator_kind::soft_margin:
            post = marginalize_t0(tn, params, epsilon, snap, snap.ever_infected(), sm, {});
            break;
        case estimator_kind::jordan:
            post = jordan_center(aggregate(tn), snap);
            break;
        case estimator_kind::random:
            post = random_estimator(snap, common.seed);
            break;
        default:
            throw config_error("direct estimation is not supported on temporal networks");
        }
    } else {
        auto [g, gids] = net.load_static_net();
        ids = std::move(gids);
        snapshot snap = snapshot::load(snapshot_path, ids, g.node_count(), observed);
        static_backend backend(g, model.static_params());
        switch (kind) {
        case estimator_kind::direct: {
            direct_mc_config mc;
            mc.n = n;
            mc.seed = common.seed;
            mc.jobs = common.jobs;
            post = direct_mc(backend, snap, snap.ever_infected(), mc);
            break;
        }
        case estimator_kind::soft_margin: {
            soft_margin_config sm;
            sm.n = n;
            sm.seed = common.seed;
            sm.jobs = common.jobs;
            post = soft_margin_adaptive(backend, snap, snap.ever_infected(), sm, {});
            break;
        }
        case estimator_kind::jordan:
            post = jordan_center(g, snap);
            break;
        case estimator_kind::random:
            post = random_estimator(snap, common.seed);
            break;
        }
    }

    post.save_json(dir / "posterior.json", ids);
    post.save_csv(dir / "posterior.csv", ids);

    if (post.undefined) {
        std::cerr << "posterior undefined: no simulation reproduced the snapshot; "
                     "increase -n or widen the estimator\n";
        return 1;
    }
    std::cout << "ml=" << ids.original(post.ml_candidate())
              << " entropy=" << normalized_entropy(post) << "\n";
    return 0;
}

int run_verify(CLI::App& cmd, const network_options& net, const model_options& model,
               const common_options& common, const std::string& snapshot_path,
               const std::string& estimator, std::uint64_t n, double tv_threshold,
               const enumeration_budget& budget)
{
    fs::path dir = prepare_out_dir(common.out);
    echo_config(cmd, dir);

    auto [g, ids] = net.load_static_net();
    snapshot snap = snapshot::load(snapshot_path, ids, g.node_count());
    spreading_params params = model.static_params();

    posterior exact;
    try {
        exact = exact_posterior(g, params, snap, budget);
    } catch (const budget_error& e) {
        std::cerr << "oracle budget exceeded: " << e.what() << "\n";
        return 1;
    }

    static_backend backend(g, params);
    estimator_kind kind = estimator_from_name(estimator);
    posterior estimated;
    if (kind == estimator_kind::direct) {
        direct_mc_config mc;
        mc.n = n;
        mc.seed = common.seed;
        mc.jobs = common.jobs;
        estimated = direct_mc(backend, snap, snap.ever_infected(), mc);
    } else if (kind == estimator_kind::soft_margin) {
        soft_margin_config sm;
        sm.n = n;
        sm.seed = common.seed;
        sm.jobs = common.jobs;
        estimated = soft_margin_adaptive(backend, snap, snap.ever_infected(), sm, {});
    } else {
        throw config_error("verify supports the direct and soft-margin estimators");
    }

    if (exact.undefined || estimated.undefined) {
        std::cerr << "verify: " << (exact.undefined ? "oracle" : "estimator")
                  << " posterior is undefined\n";
        return 1;
    }

    double tv = 0.0;
    for (std::size_t i = 0; i < exact.probs.size(); ++i)
        tv += std::abs(exact.probs[i] - estimated.probs[i]);
    tv /= 2.0;

    bool pass = tv < tv_threshold;
    std::cout << "tv=" << tv << " threshold=" << tv_threshold << " => "
              << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

std::vector<double> parse_grid(const std::string& text, const char* what)
{
    std::vector<double> grid;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty())
            grid.push_back(std::stod(item));
    if (grid.empty())
        throw config_error(std::string(what) + " grid must be non-empty");
    return grid;
}

int run_sweep(CLI::App& cmd, const common_options& common, int rows, int cols, int steps,
              const std::string& p_grid, const std::string& q_grid, int realizations,
              const std::string& estimator, std::uint64_t n, bool central_source)
{
    fs::path dir = prepare_out_dir(common.out);
    echo_config(cmd, dir);

    sweep_config cfg;
    cfg.rows = rows;
    cfg.cols = cols;
    cfg.steps = steps;
    cfg.p_grid = parse_grid(p_grid, "p");
    cfg.q_grid = parse_grid(q_grid, "q");
    cfg.realizations = realizations;
    cfg.estimator = estimator_from_name(estimator);
    cfg.n = n;
    cfg.seed = common.seed;
    cfg.jobs = common.jobs;
    cfg.central_source = central_source;

    std::uint64_t total = cfg.p_grid.size() * cfg.q_grid.size() *
                          static_cast<std::uint64_t>(cfg.realizations);
    fs::path records_path = dir / "records.csv";
    fs::path manifest_path = dir / "manifest.json";

    manifest m;
    m.hash = config_hash(cmd);
    m.total = total;

    std::uint64_t skip = 0;
    if (auto existing = manifest::load(manifest_path)) {
        if (existing->hash != m.hash)
            throw config_error("output directory holds a different run; choose a fresh --out");
        skip = recover_csv(records_path, detectability_record::csv_header());
        if (skip > total)
            throw std::runtime_error("records.csv has more rows than this config produces");
    }

    std::ofstream records;
    if (skip == 0) {
        records.open(records_path, std::ios::trunc);
        records << detectability_record::csv_header() << "\n";
    } else {
        records.open(records_path, std::ios::app);
    }
    if (!records)
        throw std::runtime_error("cannot write " + records_path.string());

    m.completed = skip;
    m.save(manifest_path);

    lattice_sweep(cfg,
                  [&](const detectability_record& record) {
                      records << record.csv_row() << "\n";
                      records.flush();
                      ++m.completed;
                      m.save(manifest_path);
                  },
                  skip);

    std::cout << "records=" << m.completed << " file=" << records_path.string() << "\n";
    return 0;
}

experiment_row parse_experiment_row(const std::string& line)
{
    experiment_row row;
    char c;
    std::istringstream in(line);
    if (!(in >> row.experiment >> c >> row.true_source >> c >> row.ml_candidate >> c >>
          row.distance >> c >> row.epsilon >> c >> row.delta >> c >> row.n))
        throw std::runtime_error("malformed experiment row: " + line);
    return row;
}

int run_temporal(CLI::App& cmd, const network_options& net, const common_options& common,
                 double p, double q, std::int32_t t0_lo, std::int32_t t0_hi, std::int32_t t_end,
                 int experiments, std::int32_t epsilon, std::int32_t delta,
                 const std::string& estimator, std::uint64_t n)
{
    fs::path dir = prepare_out_dir(common.out);
    echo_config(cmd, dir);

    auto [tn, ids] = net.load_temporal_net();
    ids.save_csv(dir / "ids.csv");

    temporal_experiment_config cfg;
    cfg.p = p;
    cfg.q = q;
    cfg.t0_lo = t0_lo;
    cfg.t0_hi = t0_hi;
    cfg.t_end = t_end;
    cfg.experiments = experiments;
    cfg.epsilon = epsilon;
    cfg.delta = delta;
    cfg.estimator = estimator_from_name(estimator);
    cfg.n = n;
    cfg.seed = common.seed;
    cfg.jobs = common.jobs;

    fs::path rows_path = dir / "experiments.csv";
    fs::path manifest_path = dir / "manifest.json";

    manifest m;
    m.hash = config_hash(cmd);
    m.total = static_cast<std::uint64_t>(experiments);

    std::uint64_t skip = 0;
    std::optional<std::vector<experiment_row>> resumed;
    if (auto existing = manifest::load(manifest_path)) {
        if (existing->hash != m.hash)
            throw config_error("output directory holds a different run; choose a fresh --out");
        skip = recover_csv(rows_path, experiment_row::csv_header());
        if (skip > m.total)
            throw std::runtime_error("experiments.csv has more rows than this config produces");
        if (skip > 0) {
            resumed.emplace();
            std::ifstream in(rows_path);
            std::string line;
            std::getline(in, line); // header
            while (std::getline(in, line))
                if (!line.empty())
                    resumed->push_back(parse_experiment_row(line));
        }
    }

    std::ofstream rows;
    if (skip == 0) {
        rows.open(rows_path, std::ios::trunc);
        rows << experiment_row::csv_header() << "\n";
    } else {
        rows.open(rows_path, std::ios::app);
    }
    if (!rows)
        throw std::runtime_error("cannot write " + rows_path.string());

    m.completed = skip;
    m.save(manifest_path);

    experiment_report report = temporal_experiment(
        tn, cfg,
        [&](const experiment_row& row) {
            rows << row.csv_row() << "\n";
            rows.flush();
            ++m.completed;
            m.save(manifest_path);
        },
        skip, std::move(resumed));

    std::ofstream summary(dir / "summary.json");
    summary << report.summary_json() << "\n";

    std::cout << "experiments=" << report.rows.size()
              << " within_1=" << report.fraction_within(1) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Epidemic source inference from a single infection snapshot"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Read options from a key=value file");
    app.get_config_formatter_base()->comment('#');

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Run one spreading realization");
    sim_cmd->configurable();
    network_options sim_net;
    model_options sim_model;
    common_options sim_common;
    std::string sim_source;
    sim_net.add_flags(*sim_cmd, true, true);
    sim_model.add_flags(*sim_cmd, true, true);
    sim_common.add_flags(*sim_cmd);
    sim_cmd->add_option("--source", sim_source, "Source node label (default: seeded draw)");

    // infer
    auto* inf_cmd = app.add_subcommand("infer", "Estimate the source posterior of a snapshot");
    inf_cmd->configurable();
    network_options inf_net;
    model_options inf_model;
    common_options inf_common;
    std::string inf_snapshot, inf_observed, inf_estimator = "soft-margin";
    std::uint64_t inf_n = 10000;
    std::int32_t inf_epsilon = 0;
    inf_net.add_flags(*inf_cmd, true, true);
    inf_model.add_flags(*inf_cmd, true, true);
    inf_common.add_flags(*inf_cmd);
    inf_cmd->add_option("--snapshot", inf_snapshot, "Ever-infected node file")->required();
    inf_cmd->add_option("--observed", inf_observed, "Observed-node mask file");
    inf_cmd->add_option("--estimator", inf_estimator,
                        "direct, soft-margin, jordan or random");
    inf_cmd->add_option("-n", inf_n, "Simulations per candidate");
    inf_cmd->add_option("--epsilon", inf_epsilon, "Start-day uncertainty (temporal)");

    // verify
    auto* ver_cmd = app.add_subcommand("verify", "Check an estimator against the exact oracle");
    ver_cmd->configurable();
    network_options ver_net;
    model_options ver_model;
    common_options ver_common;
    std::string ver_snapshot, ver_estimator = "direct";
    std::uint64_t ver_n = 1000000;
    double ver_threshold = 0.02;
    enumeration_budget ver_budget;
    ver_net.add_flags(*ver_cmd, true, false);
    ver_model.add_flags(*ver_cmd, true, false);
    ver_common.add_flags(*ver_cmd);
    ver_cmd->add_option("--snapshot", ver_snapshot, "Ever-infected node file")->required();
    ver_cmd->add_option("--estimator", ver_estimator, "direct or soft-margin");
    ver_cmd->add_option("-n", ver_n, "Simulations per candidate");
    ver_cmd->add_option("--tv-threshold", ver_threshold, "Pass when TV distance is below this");
    ver_cmd->add_option("--max-branches", ver_budget.max_branches, "Oracle branch budget");
    ver_cmd->add_option("--max-nodes", ver_budget.max_nodes, "Oracle node budget");
    ver_cmd->add_option("--max-steps", ver_budget.max_steps, "Oracle step budget");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Lattice detectability sweep over (p,q)");
    sweep_cmd->configurable();
    common_options sweep_common;
    int sweep_rows = 30, sweep_cols = 30, sweep_steps = 5, sweep_realizations = 50;
    std::string sweep_p = "0.1,0.45,0.8", sweep_q = "0.5", sweep_estimator = "soft-margin";
    std::uint64_t sweep_n = 10000;
    bool sweep_central = false;
    sweep_common.add_flags(*sweep_cmd);
    sweep_cmd->add_option("--rows", sweep_rows, "Lattice rows");
    sweep_cmd->add_option("--cols", sweep_cols, "Lattice columns");
    sweep_cmd->add_option("-T", sweep_steps, "Step horizon");
    sweep_cmd->add_option("--p-grid", sweep_p, "Comma-separated p values");
    sweep_cmd->add_option("--q-grid", sweep_q, "Comma-separated q values");
    sweep_cmd->add_option("--realizations", sweep_realizations, "Realizations per (p,q) cell");
    sweep_cmd->add_option("--estimator", sweep_estimator, "direct, soft-margin, jordan or random");
    sweep_cmd->add_option("-n", sweep_n, "Simulations per candidate");
    sweep_cmd->add_flag("--central-source", sweep_central, "Start every realization at the center");

    // temporal
    auto* temp_cmd = app.add_subcommand("temporal", "Source-detection experiments on contacts");
    temp_cmd->configurable();
    network_options temp_net;
    common_options temp_common;
    double temp_p = 0.3, temp_q = 0.01;
    std::int32_t temp_t0_lo = 100, temp_t0_hi = 200, temp_t_end = 300;
    int temp_experiments = 500;
    std::int32_t temp_epsilon = 0, temp_delta = 0;
    std::string temp_estimator = "soft-margin";
    std::uint64_t temp_n = 20000;
    temp_net.add_flags(*temp_cmd, false, true);
    temp_common.add_flags(*temp_cmd);
    temp_cmd->add_option("-p", temp_p, "Transmission probability per contact");
    temp_cmd->add_option("-q", temp_q, "Recovery probability per day");
    temp_cmd->add_option("--t0-lo", temp_t0_lo, "Earliest true start day");
    temp_cmd->add_option("--t0-hi", temp_t0_hi, "Latest true start day");
    temp_cmd->add_option("--t-end", temp_t_end, "Observation day");
    temp_cmd->add_option("--experiments", temp_experiments, "Number of experiments");
    temp_cmd->add_option("--epsilon", temp_epsilon, "Start-day uncertainty half-width");
    temp_cmd->add_option("--delta", temp_delta, "Timestamp randomization bin width");
    temp_cmd->add_option("--estimator", temp_estimator, "soft-margin or random");
    temp_cmd->add_option("-n", temp_n, "Simulations per candidate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim_cmd->parsed())
            return run_simulate(app, sim_net, sim_model, sim_common, sim_source);
        if (inf_cmd->parsed())
            return run_infer(app, inf_net, inf_model, inf_common, inf_snapshot, inf_observed,
                             inf_estimator, inf_n, inf_epsilon);
        if (ver_cmd->parsed())
            return run_verify(app, ver_net, ver_model, ver_common, ver_snapshot, ver_estimator,
                              ver_n, ver_threshold, ver_budget);
        if (sweep_cmd->parsed())
            return run_sweep(app, sweep_common, sweep_rows, sweep_cols, sweep_steps, sweep_p,
                             sweep_q, sweep_realizations, sweep_estimator, sweep_n, sweep_central);
        if (temp_cmd->parsed())
            return run_temporal(app, temp_net, temp_common, temp_p, temp_q, temp_t0_lo,
                                temp_t0_hi, temp_t_end, temp_experiments, temp_epsilon,
                                temp_delta, temp_estimator, temp_n);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
