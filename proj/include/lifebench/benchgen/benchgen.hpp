// Benchmark generation: the template catalog, parameter sampling, question
// rendering, ground-truth derivation (interpreter), SQL compilation, and the
// dual-execution check every emitted instance must pass.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lifebench/core/rng.hpp"
#include "lifebench/lifelog/types.hpp"
#include "lifebench/qlang/compile.hpp"
#include "lifebench/qlang/interpret.hpp"
#include "lifebench/store/store.hpp"

namespace lifebench::benchgen {

enum class TaskType { FQ, AS, NC, CQ, TA };
enum class Scope { SingleUser, MultiUser };

const char* to_string(TaskType t);
const char* to_string(Scope s);
std::optional<TaskType> task_from_string(const std::string& s);
std::optional<Scope> scope_from_string(const std::string& s);

// One sampled parameter assignment: everything needed to render and execute.
struct Draw {
    std::string question;
    qlang::NodePtr program;
    std::string params_key;  // canonical assignment, the dedup key with template_id
    std::vector<UserId> user_ids;
    TimeWindow window{};
    std::set<DomainTag> domains;
};

struct Template {
    std::string id;
    TaskType task = TaskType::FQ;
    qlang::AnswerValue::Kind answer = qlang::AnswerValue::Kind::Number;
    Scope scope = Scope::SingleUser;
    // Samples one assignment; nullopt when the draw is structurally impossible
    // (the caller retries with fresh randomness).
    std::function<std::optional<Draw>(Rng&, const AlignedDataset&)> sample;
};

// The shipped catalog; >= 2 templates per task type, every answer type, both
// scopes, and one four-domain composite.
const std::vector<Template>& template_catalog();

struct QAInstance {
    std::string instance_id;
    std::string question;
    TaskType task_type = TaskType::FQ;
    qlang::AnswerValue::Kind answer_type = qlang::AnswerValue::Kind::Number;
    Scope scope = Scope::SingleUser;
    std::set<DomainTag> domains;
    std::vector<UserId> user_ids;
    TimeWindow window{};
    qlang::NodePtr program;
    std::string sql;
    qlang::AnswerValue ground_truth;
    std::string template_id;
    std::uint64_t seed = 0;
};

struct TemplateExhausted : std::runtime_error {
    explicit TemplateExhausted(const std::string& id)
        : std::runtime_error("template exhausted after 50 retries: " + id) {}
};

struct InfeasibleMix : std::runtime_error {
    explicit InfeasibleMix(const std::string& why)
        : std::runtime_error("infeasible generation mix: " + why) {}
};

// Draws parameters until the instance passes interpretation and the
// dual-execution check and is not a duplicate; throws TemplateExhausted after
// 50 failed attempts. `dedup` holds params_key values already used for this
// template and is updated on success.
QAInstance instantiate_template(const Template& tpl, const AlignedDataset& ds,
                                const RelationalStore& store, Rng& rng,
                                std::set<std::string>& dedup);

struct GenConfig {
    std::uint64_t seed = 7;
    int total = 0;
    int single_count = 0;  // multi count = total - single_count
    std::map<TaskType, double> task_mix = {{TaskType::FQ, 0.20},
                                           {TaskType::AS, 0.20},
                                           {TaskType::NC, 0.20},
                                           {TaskType::CQ, 0.20},
                                           {TaskType::TA, 0.20}};
    std::map<qlang::AnswerValue::Kind, double> answer_mix = {
        {qlang::AnswerValue::Kind::Number, 0.45},
        {qlang::AnswerValue::Kind::YesNo, 0.20},
        {qlang::AnswerValue::Kind::Text, 0.20},
        {qlang::AnswerValue::Kind::Pair, 0.075},
        {qlang::AnswerValue::Kind::List, 0.075}};
    double mix_tolerance = 0.02;

    void validate() const;  // throws std::invalid_argument
};

// Deterministic in (dataset, config); output sorted by instance_id; scope
// counts exact, task/answer mixes within mix_tolerance of config.
std::vector<QAInstance> generate_benchmark(const AlignedDataset& ds, const RelationalStore& store,
                                           const GenConfig& config);

// Re-runs the dual-execution check for one stored instance.
bool verify_instance(const QAInstance& inst, const AlignedDataset& ds,
                     const RelationalStore& store, std::string* diagnostic = nullptr);

// JSON Lines round-trip (field names documented in FORMATS.md).
nlohmann::ordered_json instance_to_json(const QAInstance& inst);
QAInstance instance_from_json(const nlohmann::json& j);  // throws std::runtime_error
std::string to_jsonl(const std::vector<QAInstance>& instances);
std::vector<QAInstance> from_jsonl_text(const std::string& text);

}  // namespace lifebench::benchgen
