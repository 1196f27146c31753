// Python bindings for the core pipeline: synthesis, storage, benchmark
// generation/verification, scoring, and backend-driven evaluation. Structured
// values cross the boundary as JSON strings; the lifebench python package
// wraps them into dicts.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lifebench/agent/agent.hpp"
#include "lifebench/baselines/baselines.hpp"
#include "lifebench/benchgen/benchgen.hpp"
#include "lifebench/lifelog/csv_io.hpp"
#include "lifebench/lifelog/registry.hpp"
#include "lifebench/lifelog/synth.hpp"

namespace py = pybind11;
using namespace lifebench;

namespace {

benchgen::QAInstance instance_of(const std::string& json) {
    return benchgen::instance_from_json(nlohmann::json::parse(json));
}

nlohmann::ordered_json cell_json(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) return *d;
    if (const std::string* s = std::get_if<std::string>(&c)) return *s;
    return nullptr;
}

nlohmann::ordered_json prediction_verdict_json(const evalkit::Prediction& p,
                                               const evalkit::Verdict& v) {
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

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lifelog QA benchmark toolkit (C++ core)";

    py::class_<AlignedDataset>(m, "Dataset")
        .def_property_readonly(
            "users",
            [](const AlignedDataset& ds) {
                return std::vector<UserId>(ds.users.begin(), ds.users.end());
            })
        .def_property_readonly(
            "date_span",
            [](const AlignedDataset& ds) {
                return std::make_pair(format_date(ds.date_span.start),
                                      format_date(ds.date_span.end));
            })
        .def_property_readonly(
            "reference_date",
            [](const AlignedDataset& ds) { return format_date(ds.reference_date); })
        .def("series",
             [](const AlignedDataset& ds, const UserId& user, const std::string& metric,
                const std::string& start, const std::string& end) {
                 auto s = parse_date(start);
                 auto e = parse_date(end);
                 if (!s || !e) throw std::invalid_argument("start/end must be ISO dates");
                 std::vector<std::pair<std::string, double>> out;
                 for (const auto& [d, v] : ds.series(user, metric, {*s, *e}))
                     out.emplace_back(format_date(d), v);
                 return out;
             },
             py::arg("user"), py::arg("metric"), py::arg("start"), py::arg("end"));

    py::class_<RelationalStore>(m, "Store")
        .def("run",
             [](const RelationalStore& store, const std::string& sql) {
                 auto [diag, table] = store.run(sql);
                 nlohmann::ordered_json j;
                 j["verdict"] = to_string(diag.verdict);
                 j["message"] = diag.message;
                 j["columns"] = table.columns;
                 j["rows"] = nlohmann::ordered_json::array();
                 for (const auto& row : table.rows) {
                     auto r = nlohmann::ordered_json::array();
                     for (const auto& c : row) r.push_back(cell_json(c));
                     j["rows"].push_back(std::move(r));
                 }
                 return j.dump();
             },
             py::arg("sql"), "SELECT-only execution; returns a JSON string")
        .def("checksum", &RelationalStore::checksum)
        .def("row_count", &RelationalStore::row_count, py::arg("table"));

    py::class_<llm::ScriptedBackend>(m, "ScriptedBackend")
        .def(py::init([](const std::string& path) {
                 return llm::ScriptedBackend::from_file(path);
             }),
             py::arg("path"))
        .def_property_readonly("call_count", &llm::ScriptedBackend::call_count);

    m.def("synthesize",
          [](int users, int days, std::uint64_t seed, double missing_rate) {
              SynthSpec spec;
              spec.n_users = users;
              spec.n_days = days;
              spec.seed = seed;
              spec.missing_rate = missing_rate;
              spec.validate();
              return synthesize_dataset(spec);
          },
          py::arg("users"), py::arg("days"), py::arg("seed") = 42,
          py::arg("missing_rate") = 0.05);

    m.def("export_csv",
          [](const AlignedDataset& ds, const std::string& dir) { return export_csv(ds, dir); },
          py::arg("dataset"), py::arg("dir"));
    m.def("load_csv",
          [](const std::string& dir, const std::string& manifest) {
              LoadResult r = load_csv(dir, manifest);
              std::vector<std::string> diags;
              for (const auto& d : r.diagnostics) diags.push_back(d.str());
              if (!r.ok()) throw std::runtime_error("ingestion failed: " + diags.front());
              return r.dataset;
          },
          py::arg("dir"), py::arg("manifest"));

    m.def("build_store",
          [](const AlignedDataset& ds, const std::string& path) {
              return RelationalStore::build(ds, path);
          },
          py::arg("dataset"), py::arg("path") = ":memory:");
    m.def("open_store", &RelationalStore::open, py::arg("path"));
    m.def("dataset_from_store", &dataset_from_store, py::arg("store"));
    m.def("schema_ddl", [] { return schema_ddl(); });
    m.def("metric_registry_csv", &registry_csv);

    m.def("generate_benchmark",
          [](const AlignedDataset& ds, const RelationalStore& store, int total, int single,
             std::uint64_t seed) {
              benchgen::GenConfig cfg;
              cfg.total = total;
              cfg.single_count = single;
              cfg.seed = seed;
              return benchgen::to_jsonl(benchgen::generate_benchmark(ds, store, cfg));
          },
          py::arg("dataset"), py::arg("store"), py::arg("total"), py::arg("single"),
          py::arg("seed") = 7, "Returns the benchmark as a JSONL string");

    m.def("verify_instance",
          [](const std::string& instance_json, const AlignedDataset& ds,
             const RelationalStore& store) {
              std::string diag;
              bool ok = benchgen::verify_instance(instance_of(instance_json), ds, store, &diag);
              return std::make_pair(ok, diag);
          },
          py::arg("instance_json"), py::arg("dataset"), py::arg("store"));

    m.def("parse_answer",
          [](const std::string& text, const std::string& kind) -> std::optional<std::string> {
              auto k = qlang::answer_kind_from_string(kind);
              if (!k) throw std::invalid_argument("unknown answer kind: " + kind);
              auto v = evalkit::parse_answer(text, *k);
              if (!v) return std::nullopt;
              return qlang::answer_to_json(*v).dump();
          },
          py::arg("text"), py::arg("kind"));
    m.def("score_accuracy",
          [](const std::string& pred_json, const std::string& gt_json) {
              return evalkit::score_accuracy(
                  qlang::answer_from_json(nlohmann::json::parse(pred_json)),
                  qlang::answer_from_json(nlohmann::json::parse(gt_json)));
          },
          py::arg("prediction_json"), py::arg("ground_truth_json"));
    m.def("number_matches", &evalkit::number_matches, py::arg("prediction"),
          py::arg("ground_truth"));

    m.def("make_dp_oracle_replay",
          [](const std::string& bench_jsonl, const RelationalStore& store) {
              // replay entries that answer each instance with its own verified
              // SQL and ground truth — a pipeline sanity fixture
              llm::ScriptedBackend sb;
              for (const auto& inst : benchgen::from_jsonl_text(bench_jsonl)) {
                  const std::string sql_reply = "```sql\n" + inst.sql + "\n```";
                  sb.add(baselines::dp_sql_messages(inst), sql_reply);
                  auto [diag, table] = store.run(inst.sql);
                  const std::string note = "Query results:\n" + table.render_text();
                  sb.add(baselines::dp_answer_messages(inst, sql_reply, note),
                         "ANSWER: " + qlang::format_answer(inst.ground_truth));
              }
              return sb.to_jsonl();
          },
          py::arg("bench_jsonl"), py::arg("store"),
          "Oracle replay JSONL for eval mode 'dp' over the given benchmark");

    m.def("evaluate",
          [](const std::string& mode, const std::string& bench_jsonl, const AlignedDataset& ds,
             const RelationalStore& store, llm::ScriptedBackend& backend, int budget,
             int token_budget) {
              auto bench = benchgen::from_jsonl_text(bench_jsonl);
              std::vector<evalkit::Verdict> verdicts;
              std::string predictions;
              for (const auto& inst : bench) {
                  evalkit::Prediction pred;
                  if (mode == "cp")
                      pred = baselines::run_cp(inst, ds, backend, {token_budget});
                  else if (mode == "dp")
                      pred = baselines::run_dp(inst, store, backend);
                  else if (mode == "agent")
                      pred = agent::run_agent_on(inst, ds, store, backend, budget).prediction;
                  else
                      throw std::invalid_argument("mode must be cp, dp, or agent");
                  auto verdict = baselines::score_prediction(pred, inst, ds);
                  predictions += prediction_verdict_json(pred, verdict).dump() + "\n";
                  verdicts.push_back(verdict);
              }
              auto report = evalkit::aggregate_report(verdicts, bench);
              return std::make_pair(report.to_json().dump(), predictions);
          },
          py::arg("mode"), py::arg("bench_jsonl"), py::arg("dataset"), py::arg("store"),
          py::arg("backend"), py::arg("budget") = 12, py::arg("token_budget") = 8000,
          "Returns (report_json, predictions_jsonl)");
}
