#include "semchain/cli.hpp"

#include <csignal>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <unistd.h>

#include "semchain/atomic_file.hpp"
#include "semchain/config.hpp"
#include "semchain/event_log.hpp"
#include "semchain/http_api.hpp"
#include "semchain/log_reader.hpp"
#include "semchain/metrics.hpp"
#include "semchain/orchestrator.hpp"
#include "semchain/simulate.hpp"

namespace semchain {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    bool deterministic = false;
    std::string out;

    // prepare-embeddings
    std::string input;
    std::string input_format = "word2vec-binary";
    std::string output;
    std::string output_format;
    std::optional<std::size_t> min_length;
    bool synthetic = false;
    std::optional<std::size_t> words;
    std::optional<std::size_t> dim;

    // serve
    std::optional<std::string> host;
    std::optional<int> port;
    std::string log_dir;
    bool create_plan = false;

    // analyze / export-trajectories
    std::string logs;
    std::string unit = "round";
    bool include_oov = false;
    double q = 0.05;
};

AppConfig config_or_default(const Options& o) {
    if (!o.config.empty()) return load_config(o.config);
    return parse_config({{"embeddings", {{"synthetic", json::object()}}}}, fs::current_path());
}

// Fails fast on an output directory that cannot be created.
fs::path prepare_out_dir(const std::string& out) {
    if (out.empty()) throw ConfigError("--out is required");
    const fs::path dir = out;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
    return dir;
}

int prepare_embeddings(const Options& o, std::ostream& out) {
    if (o.output.empty()) throw ConfigError("--output is required");
    const auto out_format = config_vector_format(o.output_format.empty() ? o.input_format : o.output_format);
    VocabFilterRules rules;
    std::optional<SyntheticVocabSpec> spec;
    if (!o.config.empty()) {
        const auto cfg = load_config(o.config);
        rules = cfg.filter;
        spec = cfg.embeddings.synthetic;
    }
    if (o.min_length) rules.min_length = *o.min_length;

    std::optional<EmbeddingTable> source;
    if (o.synthetic) {
        if (!o.input.empty()) throw ConfigError("--synthetic and --input are mutually exclusive");
        auto s = spec.value_or(SyntheticVocabSpec{});
        if (o.words) s.words = *o.words;
        if (o.dim) s.dim = *o.dim;
        if (o.seed) s.seed = *o.seed;
        source.emplace(make_synthetic_table(s));
    } else {
        if (o.input.empty()) throw ConfigError("--input or --synthetic is required");
        const auto in_format = config_vector_format(o.input_format);
        if (!fs::exists(o.input)) throw ConfigError(fmt::format("input '{}' does not exist", o.input));
        source.emplace(load_embeddings(fs::path(o.input), in_format));
    }
    const auto filtered = filter_vocabulary(*source, rules);
    write_embeddings(fs::path(o.output), filtered, out_format);
    out << fmt::format("kept {} of {} words ({} dims) -> {}\n", filtered.size(), source->size(), filtered.dim(),
                       o.output);
    return exit_ok;
}

// Replaces <out>/logs with the staged directory in one rename.
void publish_logs(const fs::path& staging, const fs::path& target) {
    const auto old = target.parent_path() / fmt::format(".old-logs-{}", ::getpid());
    if (fs::exists(target)) fs::rename(target, old);
    fs::rename(staging, target);
    fs::remove_all(old);
}

int simulate(const Options& o, std::ostream& out) {
    auto cfg = load_config(o.config);
    if (o.seed) cfg.plan.seed = *o.seed;
    const auto jobs = o.jobs.value_or(cfg.jobs);
    if (jobs == 0) throw ConfigError("--jobs must be >= 1");
    const auto games = build_games(cfg.plan);
    for (const auto& g : games) {
        for (const auto& d : g.roster) {
            if (d.is_human()) throw ConfigError("simulate needs a plan without human rounds");
        }
    }
    const auto out_dir = prepare_out_dir(o.out);
    auto rt = make_runtime(cfg);
    const Clock clock{o.deterministic};
    const auto runs = run_games(*rt.table, games, rt.environment(o.deterministic), clock, jobs);

    const auto staging = out_dir / fmt::format(".staging-logs-{}", ::getpid());
    fs::remove_all(staging);
    fs::create_directories(staging);
    std::size_t guesses = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& id = games[i].game_id;
        write_event_log_atomic(staging / (id + ".jsonl"), runs[i].events);
        if (!runs[i].llm_exchanges.empty()) {
            write_event_log_atomic(staging / (id + ".llm.jsonl"), runs[i].llm_exchanges);
        }
        for (const auto& e : runs[i].events) guesses += e.at("type") == "guess_submitted" ? 1 : 0;
    }
    write_file_atomic(out_dir / "plan.json", json(cfg.plan).dump(2) + "\n");
    publish_logs(staging, out_dir / "logs");
    out << fmt::format("{} games, {} guesses -> {}\n", runs.size(), guesses, (out_dir / "logs").string());
    return exit_ok;
}

int serve(const Options& o, std::ostream& out) {
    auto cfg = load_config(o.config);
    if (o.seed) cfg.plan.seed = *o.seed;
    auto rt = make_runtime(cfg);

    OrchestratorOptions opts;
    opts.log_dir = o.log_dir.empty() ? cfg.log_dir : fs::path(o.log_dir);
    opts.clock = Clock{o.deterministic};
    opts.machine_workers = o.jobs.value_or(cfg.service.machine_workers);
    opts.turn_timeout = cfg.service.turn_timeout;
    opts.seed = cfg.service.seed;
    opts.deterministic_tokens = o.deterministic;

    // Block the stop signals before any thread starts so sigwait sees them.
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

    Orchestrator orch(*rt.table, rt.environment(o.deterministic), opts);
    if (o.create_plan) {
        try {
            orch.create_experiment(cfg.plan);
            out << fmt::format("created plan '{}'\n", cfg.plan.plan_id);
        } catch (const ServiceError& e) {
            if (e.code() != ServiceError::Code::duplicate_plan) throw;
            out << fmt::format("plan '{}' already present\n", cfg.plan.plan_id);
        }
    }
    ApiServer api(orch);
    const auto host = o.host.value_or(cfg.service.host);
    const auto port = api.start(host, o.port.value_or(cfg.service.port));
    out << fmt::format("listening on http://{}:{} (logs in {})\n", host, port, opts.log_dir.string()) << std::flush;

    int sig = 0;
    sigwait(&stop_signals, &sig);
    api.stop();
    out << "stopped\n";
    return exit_ok;
}

std::vector<GameRecord> read_logs_for(const Options& o, const AppConfig& cfg) {
    const fs::path dir = o.logs.empty() ? cfg.log_dir : fs::path(o.logs);
    if (!fs::is_directory(dir)) throw ConfigError(fmt::format("log directory '{}' does not exist", dir.string()));
    auto records = read_game_logs(dir);
    if (records.empty()) throw ConfigError(fmt::format("no game logs in '{}'", dir.string()));
    return records;
}

int analyze_logs(const Options& o, std::ostream& out) {
    const auto cfg = config_or_default(o);
    if (o.out.empty()) throw ConfigError("--out is required");
    AnalysisOptions opts;
    if (o.unit == "round") {
        opts.unit = PerformanceUnit::round;
    } else if (o.unit == "participant") {
        opts.unit = PerformanceUnit::participant;
    } else {
        throw ConfigError(fmt::format("unknown --unit '{}'", o.unit));
    }
    opts.diversity.include_oov = o.include_oov;
    opts.fdr_q = o.q;
    const auto records = read_logs_for(o, cfg);
    const auto table = load_table(cfg);
    const auto report = analyze(records, table, opts);
    const auto dir = prepare_out_dir(o.out);
    write_report_csv(report, dir);
    out << fmt::format("analyzed {} games -> {}\n", records.size(), dir.string());
    return exit_ok;
}

int export_trajectories(const Options& o, std::ostream& out) {
    const auto cfg = config_or_default(o);
    if (o.out.empty()) throw ConfigError("--out is required");
    const auto records = read_logs_for(o, cfg);
    const auto table = load_table(cfg);
    std::vector<Centroid> all;
    for (const auto& r : records) {
        auto c = round_centroids(r, table);
        all.insert(all.end(), std::make_move_iterator(c.begin()), std::make_move_iterator(c.end()));
    }
    const auto dir = prepare_out_dir(o.out);
    write_file_atomic(dir / "centroids.csv", centroids_csv(all, table.dim()));
    out << fmt::format("{} centroids -> {}\n", all.size(), (dir / "centroids.csv").string());
    return exit_ok;
}

template <typename F>
int with_exit_codes(F&& f, std::ostream& err) {
    try {
        return f();
    } catch (const ConfigError& e) {
        err << "semchain: config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const ProviderError& e) {
        err << "semchain: provider error: " << e.what() << "\n";
        return exit_provider_error;
    } catch (const IoError& e) {
        err << "semchain: I/O error: " << e.what() << "\n";
        return exit_io_error;
    } catch (const EmbeddingError& e) {
        err << "semchain: I/O error: " << e.what() << "\n";
        return exit_io_error;
    } catch (const fs::filesystem_error& e) {
        err << "semchain: I/O error: " << e.what() << "\n";
        return exit_io_error;
    } catch (const std::invalid_argument& e) {
        err << "semchain: config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        err << "semchain: error: " << e.what() << "\n";
        return exit_failure;
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Transmission-chain word guessing experiments", "semchain"};
    app.require_subcommand(1, 1);
    Options o;

    const auto add_config = [&](CLI::App* sub, bool required) {
        auto* opt = sub->add_option("--config", o.config, "JSON configuration file");
        if (required) opt->required();
        opt->check(CLI::ExistingFile);
    };

    auto* prep = app.add_subcommand("prepare-embeddings", "Filter a vector file and write it back out");
    add_config(prep, false);
    prep->add_option("--input", o.input, "Source vector file")->check(CLI::ExistingFile);
    prep->add_option("--input-format", o.input_format, "word2vec-binary or word2vec-text");
    prep->add_option("--output", o.output, "Destination vector file");
    prep->add_option("--output-format", o.output_format, "Defaults to the input format");
    prep->add_option("--min-length", o.min_length, "Shortest word kept");
    prep->add_flag("--synthetic", o.synthetic, "Generate a clustered vocabulary instead of reading one");
    prep->add_option("--words", o.words, "Synthetic vocabulary size");
    prep->add_option("--dim", o.dim, "Synthetic vector dimension");
    prep->add_option("--seed", o.seed, "Synthetic generator seed");

    auto* sim = app.add_subcommand("simulate", "Run a machine-only plan and write its logs");
    add_config(sim, true);
    sim->add_option("--seed", o.seed, "Override the plan seed");
    sim->add_option("--jobs", o.jobs, "Games run in parallel")->check(CLI::PositiveNumber);
    sim->add_flag("--deterministic", o.deterministic, "Zero timestamps and latencies");
    sim->add_option("--out", o.out, "Output directory (logs go to <out>/logs)")->required();

    auto* srv = app.add_subcommand("serve", "Start the HTTP service");
    add_config(srv, true);
    srv->add_option("--host", o.host, "Bind address");
    srv->add_option("--port", o.port, "Port (0 picks a free one)");
    srv->add_option("--log-dir", o.log_dir, "Event log directory");
    srv->add_option("--seed", o.seed, "Override the plan seed");
    srv->add_option("--jobs", o.jobs, "Machine-round workers")->check(CLI::PositiveNumber);
    srv->add_flag("--deterministic", o.deterministic, "Zero timestamps; reproducible tokens");
    srv->add_flag("--create-plan", o.create_plan, "Create the configured plan at startup");

    auto* ana = app.add_subcommand("analyze", "Compute metrics CSVs from event logs");
    add_config(ana, false);
    ana->add_option("--logs", o.logs, "Directory of <game_id>.jsonl logs");
    ana->add_option("--out", o.out, "Output directory")->required();
    ana->add_option("--unit", o.unit, "Individual performance unit: round or participant");
    ana->add_flag("--include-oov", o.include_oov, "Count out-of-vocabulary guesses in diversity");
    ana->add_option("--q", o.q, "False discovery rate")->check(CLI::Range(0.0, 1.0));
    ana->add_option("--jobs", o.jobs, "Accepted for symmetry; analysis is single-threaded");

    auto* exp = app.add_subcommand("export-trajectories", "Write per-round centroid vectors");
    add_config(exp, false);
    exp->add_option("--logs", o.logs, "Directory of <game_id>.jsonl logs");
    exp->add_option("--out", o.out, "Output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return exit_ok;
        }
        err << "semchain: " << e.what() << "\n";
        return exit_config_error;
    }

    return with_exit_codes(
        [&]() -> int {
            if (prep->parsed()) return prepare_embeddings(o, out);
            if (sim->parsed()) return simulate(o, out);
            if (srv->parsed()) return serve(o, out);
            if (ana->parsed()) return analyze_logs(o, out);
            return export_trajectories(o, out);
        },
        err);
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace semchain
