// Command-line entry point: synthesis, CSV ingestion, benchmark generation,
// dual-execution validation, baseline/agent evaluation, and report
// re-aggregation. Every artifact-producing subcommand writes a run manifest
// alongside its output so runs are reproducible from flags alone.
#include <sqlite3.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "lifebench/agent/agent.hpp"
#include "lifebench/baselines/baselines.hpp"
#include "lifebench/benchgen/benchgen.hpp"
#include "lifebench/core/num.hpp"
#include "lifebench/lifelog/csv_io.hpp"
#include "lifebench/lifelog/synth.hpp"

namespace {

using namespace lifebench;

constexpr const char* kVersion = "0.1.0";

std::string now_iso() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// One manifest per artifact-producing run: the resolved configuration plus
// paths, timestamps, and tool versions.
struct RunManifest {
    nlohmann::ordered_json j;

    explicit RunManifest(const std::string& subcommand) {
        j["subcommand"] = subcommand;
        j["started"] = now_iso();
        j["versions"]["lifebench"] = kVersion;
        j["versions"]["sqlite"] = SQLITE_VERSION;
        j["config"] = nlohmann::ordered_json::object();
        j["inputs"] = nlohmann::ordered_json::array();
        j["outputs"] = nlohmann::ordered_json::array();
    }
    void config(const std::string& key, const nlohmann::ordered_json& value) {
        j["config"][key] = value;
    }
    void input(const std::string& path) { j["inputs"].push_back(path); }
    void output(const std::string& path) { j["outputs"].push_back(path); }
    void write(const std::filesystem::path& path) {
        j["finished"] = now_iso();
        write_text(path, j.dump(2) + "\n");
    }
};

std::vector<benchgen::QAInstance> load_bench(const std::string& path) {
    return benchgen::from_jsonl_text(read_text(path));
}

int default_jobs() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// Runs fn(i) for i in [0, n) across `jobs` threads; exceptions surface on the
// caller's thread. Result ordering is the caller's concern (index-addressed).
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// --- synth ------------------------------------------------------------

struct SynthOpts {
    int users = 20;
    int days = 28;
    std::uint64_t seed = 42;
    double missing_rate = 0.05;
    std::string out;
};

int run_synth(const SynthOpts& o) {
    SynthSpec spec;
    spec.seed = o.seed;
    spec.n_users = o.users;
    spec.n_days = o.days;
    spec.missing_rate = o.missing_rate;
    spec.validate();
    AlignedDataset ds = synthesize_dataset(spec);
    auto files = export_csv(ds, o.out);

    RunManifest m("synth");
    m.config("users", o.users);
    m.config("days", o.days);
    m.config("seed", o.seed);
    m.config("missing_rate", o.missing_rate);
    for (const auto& f : files) m.output((std::filesystem::path(o.out) / f).string());
    m.write(std::filesystem::path(o.out) / "run_manifest.json");

    std::cout << "wrote " << files.size() << " files to " << o.out << " (" << ds.users.size()
              << " users, " << ds.date_span.length() << " days)\n";
    return 0;
}

// --- ingest -----------------------------------------------------------

struct IngestOpts {
    std::string in;
    std::string manifest;  // defaults to <in>/manifest.ini
    std::string db;
};

int run_ingest(const IngestOpts& o) {
    const std::string manifest =
        o.manifest.empty() ? (std::filesystem::path(o.in) / "manifest.ini").string() : o.manifest;
    LoadResult loaded = load_csv(o.in, manifest);
    for (const auto& d : loaded.diagnostics) std::cerr << d.str() << "\n";
    if (!loaded.ok()) {
        std::cerr << loaded.diagnostics.size() << " ingestion problem(s)\n";
        return 1;
    }
    RelationalStore store = RelationalStore::build(loaded.dataset, o.db);

    RunManifest m("ingest");
    m.config("manifest", manifest);
    m.input(o.in);
    m.output(o.db);
    m.write(o.db + ".manifest.json");

    std::cout << "ingested " << store.row_count("daily_metrics") << " daily rows, "
              << store.row_count("events") << " events into " << o.db << "\n";
    return 0;
}

// --- generate ---------------------------------------------------------

struct GenerateOpts {
    std::string db;
    int total = 0;
    int single = -1;
    std::uint64_t seed = 7;
    double mix_tolerance = 0.02;
    std::string out;
};

int run_generate(const GenerateOpts& o) {
    RelationalStore store = RelationalStore::open(o.db);
    AlignedDataset ds = dataset_from_store(store);

    benchgen::GenConfig cfg;
    cfg.seed = o.seed;
    cfg.total = o.total;
    cfg.single_count = o.single;
    cfg.mix_tolerance = o.mix_tolerance;
    auto bench = benchgen::generate_benchmark(ds, store, cfg);
    write_text(o.out, benchgen::to_jsonl(bench));

    RunManifest m("generate");
    m.config("total", o.total);
    m.config("single", o.single);
    m.config("seed", o.seed);
    m.config("mix_tolerance", o.mix_tolerance);
    m.input(o.db);
    m.output(o.out);
    m.write(o.out + ".manifest.json");

    std::cout << "generated " << bench.size() << " instances -> " << o.out << "\n";
    return 0;
}

// --- validate ----------------------------------------------------------

struct ValidateOpts {
    std::string db;
    std::string bench;
    int jobs = default_jobs();
};

int run_validate(const ValidateOpts& o) {
    RelationalStore store = RelationalStore::open(o.db);
    AlignedDataset ds = dataset_from_store(store);
    auto bench = load_bench(o.bench);

    std::vector<std::string> failures(bench.size());
    std::vector<char> ok(bench.size(), 0);
    parallel_for(static_cast<int>(bench.size()), o.jobs, [&](int i) {
        std::string diag;
        ok[i] = benchgen::verify_instance(bench[i], ds, store, &diag) ? 1 : 0;
        if (!ok[i]) failures[i] = diag;
    });

    int verified = 0;
    int shown = 0;
    for (size_t i = 0; i < bench.size(); ++i) {
        if (ok[i]) {
            ++verified;
        } else if (shown < 10) {
            std::cerr << bench[i].instance_id << ": " << failures[i] << "\n";
            ++shown;
        }
    }
    std::cout << verified << "/" << bench.size() << " verified\n";
    return verified == static_cast<int>(bench.size()) ? 0 : 1;
}

// --- eval / agent / report ---------------------------------------------

struct BackendOpts {
    std::string backend = "scripted";
    std::string replay;  // scripted: JSONL replay file
    llm::RemoteConfig remote;
    std::string audit;
};

std::unique_ptr<llm::Backend> make_backend(const BackendOpts& o) {
    std::unique_ptr<llm::Backend> b;
    if (o.backend == "scripted") {
        if (o.replay.empty())
            throw CLI::ValidationError("--replay", "a scripted backend needs a replay file");
        b = std::make_unique<llm::ScriptedBackend>(llm::ScriptedBackend::from_file(o.replay));
    } else if (o.backend == "remote") {
        b = std::make_unique<llm::RemoteBackend>(o.remote);
    } else {
        throw CLI::ValidationError("--backend", "must be scripted or remote");
    }
    if (!o.audit.empty()) b->set_audit_path(o.audit);
    return b;
}

void add_backend_flags(CLI::App* cmd, BackendOpts& o) {
    cmd->add_option("--backend", o.backend, "Backend kind: scripted | remote")
        ->check(CLI::IsMember({"scripted", "remote"}))
        ->capture_default_str();
    cmd->add_option("--replay", o.replay, "Replay JSONL for the scripted backend");
    cmd->add_option("--base-url", o.remote.base_url, "Remote endpoint, scheme + host[:port]");
    cmd->add_option("--model", o.remote.model, "Remote model name");
    cmd->add_option("--api-path", o.remote.path, "Remote URL path")->capture_default_str();
    cmd->add_option("--api-key-env", o.remote.api_key_env,
                    "Environment variable holding the API key")
        ->capture_default_str();
    cmd->add_option("--temperature", o.remote.temperature, "Sampling temperature")
        ->capture_default_str();
    cmd->add_option("--max-tokens", o.remote.max_tokens, "Completion token cap")
        ->capture_default_str();
    cmd->add_option("--timeout-ms", o.remote.timeout_ms, "Per-request timeout")
        ->capture_default_str();
    cmd->add_option("--audit", o.audit,
                    "Append every exchange to this JSONL file (forces --jobs 1)");
}

struct EvalOpts {
    std::string mode;
    std::string bench;
    std::string db;
    BackendOpts backend;
    int budget = 12;
    int token_budget = 8000;
    int limit = 0;  // 0 = all
    int jobs = default_jobs();
    std::string report;
    std::string facets;
    std::string predictions;
    std::string trace_dir;
};

nlohmann::ordered_json prediction_json(const evalkit::Prediction& p, const evalkit::Verdict& v) {
    nlohmann::ordered_json j;
    j["instance_id"] = p.instance_id;
    j["raw_text"] = p.raw_text;
    j["parse_error"] = p.parse_error;
    j["parsed"] = p.parsed ? qlang::answer_to_json(*p.parsed) : nlohmann::ordered_json(nullptr);
    j["dp_sql"] = p.dp_sql ? nlohmann::ordered_json(*p.dp_sql) : nlohmann::ordered_json(nullptr);
    j["acc"] = v.acc;
    j["va"] = v.va ? nlohmann::ordered_json(*v.va) : nlohmann::ordered_json(nullptr);
    j["ex"] = v.ex ? nlohmann::ordered_json(*v.ex) : nlohmann::ordered_json(nullptr);
    return j;
}

void print_report_summary(const evalkit::Report& r) {
    auto pct = [](const std::optional<double>& v) {
        return v ? format_number(*v) + "%" : std::string("-");
    };
    std::cout << "n=" << r.total << " acc=" << format_number(r.acc_pct) << "% va=" << pct(r.va_pct)
              << " ex=" << pct(r.ex_pct) << " acc|ex=" << pct(r.accex_pct) << "\n";
}

int run_eval(const EvalOpts& o) {
    RelationalStore store = RelationalStore::open(o.db);
    AlignedDataset ds = dataset_from_store(store);
    auto bench = load_bench(o.bench);
    if (o.limit > 0 && static_cast<int>(bench.size()) > o.limit) bench.resize(o.limit);

    // one backend per worker: session logs stay coherent and scripted lookups
    // are read-only copies
    int jobs = o.backend.audit.empty() ? o.jobs : 1;
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(bench.size())));
    std::vector<std::unique_ptr<llm::Backend>> backends;
    for (int t = 0; t < jobs; ++t) backends.push_back(make_backend(o.backend));
    std::atomic<int> round_robin{0};

    const int n = static_cast<int>(bench.size());
    std::vector<evalkit::Prediction> preds(n);
    std::vector<evalkit::Verdict> verdicts(n);
    std::vector<std::string> traces(n);
    std::mutex assign_mutex;
    std::map<std::thread::id, llm::Backend*> assigned;
    auto my_backend = [&]() -> llm::Backend& {
        std::lock_guard lock(assign_mutex);
        auto [it, fresh] = assigned.try_emplace(std::this_thread::get_id(), nullptr);
        if (fresh) it->second = backends[round_robin.fetch_add(1) % jobs].get();
        return *it->second;
    };

    parallel_for(n, jobs, [&](int i) {
        llm::Backend& backend = my_backend();
        const auto& inst = bench[i];
        if (o.mode == "cp") {
            preds[i] = baselines::run_cp(inst, ds, backend, {o.token_budget});
        } else if (o.mode == "dp") {
            preds[i] = baselines::run_dp(inst, store, backend);
        } else {
            auto result = agent::run_agent_on(inst, ds, store, backend, o.budget);
            preds[i] = std::move(result.prediction);
            traces[i] = result.trace_jsonl();
        }
        verdicts[i] = baselines::score_prediction(preds[i], inst, ds);
    });

    evalkit::Report report = evalkit::aggregate_report(verdicts, bench);
    write_text(o.report, report.to_json().dump(2) + "\n");
    if (!o.facets.empty()) write_text(o.facets, report.facet_csv());
    if (!o.predictions.empty()) {
        std::string lines;
        for (int i = 0; i < n; ++i) lines += prediction_json(preds[i], verdicts[i]).dump() + "\n";
        write_text(o.predictions, lines);
    }
    if (o.mode == "agent" && !o.trace_dir.empty())
        for (int i = 0; i < n; ++i)
            write_text(std::filesystem::path(o.trace_dir) / (bench[i].instance_id + ".jsonl"),
                       traces[i]);

    RunManifest m("eval");
    m.config("mode", o.mode);
    m.config("backend", o.backend.backend);
    m.config("budget", o.budget);
    m.config("token_budget", o.token_budget);
    m.config("limit", o.limit);
    m.config("jobs", jobs);
    m.input(o.bench);
    m.input(o.db);
    if (!o.backend.replay.empty()) m.input(o.backend.replay);
    m.output(o.report);
    if (!o.facets.empty()) m.output(o.facets);
    if (!o.predictions.empty()) m.output(o.predictions);
    m.write(o.report + ".manifest.json");

    print_report_summary(report);
    return 0;
}

struct AgentOpts1 {
    std::string db;
    std::string query;
    int budget = 12;
    BackendOpts backend;
    std::string trace;
};

int run_agent_once(const AgentOpts1& o) {
    RelationalStore store = RelationalStore::open(o.db);
    AlignedDataset ds = dataset_from_store(store);
    auto backend = make_backend(o.backend);

    agent::AgentOptions opts;
    opts.budget = o.budget;
    auto result = agent::run_agent(o.query, ds, store, *backend, opts);
    if (!o.trace.empty()) write_text(o.trace, result.trace_jsonl());

    std::cout << result.prediction.raw_text << "\n";
    std::cout << "[" << result.backend_calls << " backend call(s), " << result.trace.size()
              << " step(s)" << (result.budget_exhausted ? ", budget exhausted" : "")
              << (result.backend_failed ? ", backend failed" : "") << "]\n";
    return result.backend_failed ? 1 : 0;
}

struct ReportOpts {
    std::string bench;
    std::string predictions;
    std::string report;
    std::string facets;
};

int run_report(const ReportOpts& o) {
    auto bench = load_bench(o.bench);
    std::map<std::string, evalkit::Verdict> by_id;
    std::istringstream in(read_text(o.predictions));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        evalkit::Verdict v;
        v.acc = j.at("acc").get<bool>();
        if (!j.at("va").is_null()) v.va = j["va"].get<bool>();
        if (!j.at("ex").is_null()) v.ex = j["ex"].get<bool>();
        by_id[j.at("instance_id").get<std::string>()] = v;
    }

    std::vector<benchgen::QAInstance> covered;
    std::vector<evalkit::Verdict> verdicts;
    int missing = 0;
    for (auto& inst : bench) {
        auto it = by_id.find(inst.instance_id);
        if (it == by_id.end()) {
            ++missing;
            continue;
        }
        verdicts.push_back(it->second);
        covered.push_back(std::move(inst));
    }
    if (missing > 0)
        std::cerr << missing << " instance(s) have no prediction and were skipped\n";
    if (covered.empty()) {
        std::cerr << "no instance in the benchmark matches a prediction\n";
        return 1;
    }

    evalkit::Report report = evalkit::aggregate_report(verdicts, covered);
    write_text(o.report, report.to_json().dump(2) + "\n");
    if (!o.facets.empty()) write_text(o.facets, report.facet_csv());

    RunManifest m("report");
    m.input(o.bench);
    m.input(o.predictions);
    m.output(o.report);
    if (!o.facets.empty()) m.output(o.facets);
    m.write(o.report + ".manifest.json");

    print_report_summary(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lifelog QA benchmark toolkit"};
    app.require_subcommand(1);

    SynthOpts synth_opts;
    auto* synth = app.add_subcommand("synth", "Synthesize a deterministic lifelog CSV bundle");
    synth->add_option("--users", synth_opts.users, "Number of users")->capture_default_str();
    synth->add_option("--days", synth_opts.days, "Number of days")->capture_default_str();
    synth->add_option("--seed", synth_opts.seed, "RNG seed")->capture_default_str();
    synth->add_option("--missing-rate", synth_opts.missing_rate, "Per-(user,day,domain) gap rate")
        ->capture_default_str();
    synth->add_option("--out", synth_opts.out, "Output directory")->required();

    IngestOpts ingest_opts;
    auto* ingest = app.add_subcommand("ingest", "Load a CSV bundle into a SQLite database");
    ingest->add_option("--in", ingest_opts.in, "CSV bundle directory")->required();
    ingest->add_option("--manifest", ingest_opts.manifest,
                       "Column-mapping manifest (default <in>/manifest.ini)");
    ingest->add_option("--db", ingest_opts.db, "Output database file")->required();

    GenerateOpts gen_opts;
    auto* gen = app.add_subcommand("generate", "Generate a verified QA benchmark");
    gen->add_option("--db", gen_opts.db, "Source database file")->required();
    gen->add_option("--total", gen_opts.total, "Total instances")->required();
    gen->add_option("--single", gen_opts.single, "Single-user instance count")->required();
    gen->add_option("--seed", gen_opts.seed, "RNG seed")->capture_default_str();
    gen->add_option("--mix-tolerance", gen_opts.mix_tolerance, "Allowed mix deviation")
        ->capture_default_str();
    gen->add_option("--out", gen_opts.out, "Output benchmark JSONL")->required();

    ValidateOpts val_opts;
    auto* val = app.add_subcommand("validate", "Re-run the dual-execution check per instance");
    val->add_option("--db", val_opts.db, "Database file")->required();
    val->add_option("--bench", val_opts.bench, "Benchmark JSONL")->required();
    val->add_option("--jobs", val_opts.jobs, "Worker threads")->capture_default_str();

    EvalOpts eval_opts;
    auto* eval = app.add_subcommand("eval", "Evaluate a backend on a benchmark");
    eval->add_option("--mode", eval_opts.mode, "cp | dp | agent")
        ->required()
        ->check(CLI::IsMember({"cp", "dp", "agent"}));
    eval->add_option("--bench", eval_opts.bench, "Benchmark JSONL")->required();
    eval->add_option("--db", eval_opts.db, "Database file")->required();
    eval->add_option("--budget", eval_opts.budget, "Agent step budget")->capture_default_str();
    eval->add_option("--token-budget", eval_opts.token_budget, "CP context token budget")
        ->capture_default_str();
    eval->add_option("--limit", eval_opts.limit, "Evaluate only the first N instances");
    eval->add_option("--jobs", eval_opts.jobs, "Worker threads")->capture_default_str();
    eval->add_option("--report", eval_opts.report, "Report JSON output")->required();
    eval->add_option("--facets", eval_opts.facets, "Facet CSV output");
    eval->add_option("--predictions", eval_opts.predictions, "Per-instance prediction JSONL");
    eval->add_option("--trace-dir", eval_opts.trace_dir, "Agent trace directory (mode agent)");
    add_backend_flags(eval, eval_opts.backend);

    AgentOpts1 agent_opts;
    auto* agent_cmd = app.add_subcommand("agent", "One-shot agent run over a database");
    agent_cmd->add_option("--db", agent_opts.db, "Database file")->required();
    agent_cmd->add_option("--query", agent_opts.query, "Natural-language question")->required();
    agent_cmd->add_option("--budget", agent_opts.budget, "Step budget")->capture_default_str();
    agent_cmd->add_option("--trace", agent_opts.trace, "Trace JSONL output");
    add_backend_flags(agent_cmd, agent_opts.backend);

    ReportOpts report_opts;
    auto* report = app.add_subcommand("report", "Re-aggregate a report from prediction logs");
    report->add_option("--bench", report_opts.bench, "Benchmark JSONL")->required();
    report->add_option("--predictions", report_opts.predictions, "Prediction JSONL")->required();
    report->add_option("--report", report_opts.report, "Report JSON output")->required();
    report->add_option("--facets", report_opts.facets, "Facet CSV output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage problems are exit 2, --help is 0
    }

    try {
        if (*synth) return run_synth(synth_opts);
        if (*ingest) return run_ingest(ingest_opts);
        if (*gen) return run_generate(gen_opts);
        if (*val) return run_validate(val_opts);
        if (*eval) return run_eval(eval_opts);
        if (*agent_cmd) return run_agent_once(agent_opts);
        if (*report) return run_report(report_opts);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
