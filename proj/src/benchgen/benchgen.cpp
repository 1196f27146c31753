#include "lifebench/benchgen/benchgen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lifebench/core/num.hpp"

namespace lifebench::benchgen {

using qlang::AnswerValue;

const char* to_string(TaskType t) {
    switch (t) {
        case TaskType::FQ: return "FQ";
        case TaskType::AS: return "AS";
        case TaskType::NC: return "NC";
        case TaskType::CQ: return "CQ";
        case TaskType::TA: return "TA";
    }
    return "?";
}

const char* to_string(Scope s) { return s == Scope::SingleUser ? "single" : "multi"; }

std::optional<TaskType> task_from_string(const std::string& s) {
    for (TaskType t : {TaskType::FQ, TaskType::AS, TaskType::NC, TaskType::CQ, TaskType::TA})
        if (s == to_string(t)) return t;
    return std::nullopt;
}

std::optional<Scope> scope_from_string(const std::string& s) {
    if (s == "single") return Scope::SingleUser;
    if (s == "multi") return Scope::MultiUser;
    return std::nullopt;
}

void GenConfig::validate() const {
    if (total <= 0) throw std::invalid_argument("total must be positive");
    if (single_count < 0 || single_count > total)
        throw std::invalid_argument("single_count out of range");
    auto check_mix = [](const auto& mix, const char* name) {
        double sum = 0.0;
        for (const auto& [_, v] : mix) {
            if (v < 0.0) throw std::invalid_argument(std::string(name) + " entry negative");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument(std::string(name) + " must sum to 1");
    };
    check_mix(task_mix, "task_mix");
    check_mix(answer_mix, "answer_mix");
    if (mix_tolerance <= 0.0) throw std::invalid_argument("mix_tolerance must be positive");
}

QAInstance instantiate_template(const Template& tpl, const AlignedDataset& ds,
                                const RelationalStore& store, Rng& rng,
                                std::set<std::string>& dedup) {
    for (int attempt = 0; attempt < 50; ++attempt) {
        auto draw = tpl.sample(rng, ds);
        if (!draw) continue;
        if (dedup.count(draw->params_key)) continue;

        AnswerValue gt;
        try {
            gt = qlang::interpret(*draw->program, ds);
        } catch (const qlang::EvalError&) {
            continue;  // empty window / too few points: resample
        }

        const std::string sql = qlang::compile_to_sql(*draw->program);
        if (validate_sql(sql).verdict != SqlVerdict::Valid) continue;
        auto res = store.execute_select(sql);
        if (res.status != ExecStatus::Ok) continue;
        AnswerValue decoded;
        try {
            decoded = qlang::decode_result(res.table, tpl.answer);
        } catch (const std::runtime_error&) {
            continue;
        }
        // dual-execution gate; float-boundary label flips are rejected here
        if (!qlang::answers_equal(decoded, gt, 1e-9)) continue;

        dedup.insert(draw->params_key);
        QAInstance inst;
        inst.question = std::move(draw->question);
        inst.task_type = tpl.task;
        inst.answer_type = tpl.answer;
        inst.scope = tpl.scope;
        inst.domains = std::move(draw->domains);
        inst.user_ids = std::move(draw->user_ids);
        inst.window = draw->window;
        inst.program = std::move(draw->program);
        inst.sql = sql;
        inst.ground_truth = std::move(gt);
        inst.template_id = tpl.id;
        return inst;
    }
    throw TemplateExhausted(tpl.id);
}

namespace {

std::string pad5(int n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05d", n);
    return buf;
}

}  // namespace

std::vector<QAInstance> generate_benchmark(const AlignedDataset& ds, const RelationalStore& store,
                                           const GenConfig& config) {
    config.validate();
    const auto& cat = template_catalog();

    // quota allocation: scope counts are hard, task/answer mixes greedy-balanced
    std::vector<int> counts(cat.size(), 0);
    std::map<TaskType, int> task_cnt;
    std::map<AnswerValue::Kind, int> ans_cnt;
    int scope_rem[2] = {config.single_count, config.total - config.single_count};
    auto mix_of = [](const auto& mix, auto key) {
        auto it = mix.find(key);
        return it == mix.end() ? 0.0 : it->second;
    };
    // integer quotas for both mixes (largest-remainder rounding)
    auto int_quota = [&](const auto& mix) {
        std::map<std::decay_t<decltype(mix.begin()->first)>, int> quota;
        int assigned = 0;
        std::vector<std::pair<double, std::decay_t<decltype(mix.begin()->first)>>> rem;
        for (const auto& [key, frac] : mix) {
            double exact = frac * config.total;
            quota[key] = static_cast<int>(exact);
            assigned += quota[key];
            rem.emplace_back(exact - std::floor(exact), key);
        }
        std::sort(rem.rbegin(), rem.rend());
        for (size_t i = 0; assigned < config.total && i < rem.size(); ++i, ++assigned)
            ++quota[rem[i].second];
        return quota;
    };
    auto task_rem = int_quota(config.task_mix);
    auto ans_rem = int_quota(config.answer_mix);
    // which scopes can serve each task (FQ, e.g., may be single-user only)
    std::map<TaskType, std::set<Scope>> task_scopes;
    for (const auto& tp : cat) task_scopes[tp.task].insert(tp.scope);

    for (int i = 0; i < config.total; ++i) {
        double best = -1e18;
        int pick = -1;
        for (size_t j = 0; j < cat.size(); ++j) {
            const Template& tp = cat[j];
            int si = tp.scope == Scope::SingleUser ? 0 : 1;
            if (scope_rem[si] <= 0) continue;
            // prefer templates serving both unfilled quotas, then one, then none
            double score = -1e-3 * counts[j];
            if (task_rem[tp.task] > 0) {
                score += 1e6;
                // serve scope-exclusive tasks before their scope fills up
                if (task_scopes[tp.task].size() == 1) score += 1e3;
                score += mix_of(config.task_mix, tp.task);
            }
            if (ans_rem[tp.answer] > 0) {
                score += 1e6;
                // scarcer answer kinds (fewer remaining) win ties
                score -= 1e-2 * ans_rem[tp.answer];
            }
            if (score > best + 1e-12) {
                best = score;
                pick = static_cast<int>(j);
            }
        }
        if (pick < 0) throw InfeasibleMix("scope quota cannot be filled by the catalog");
        const Template& chosen = cat[static_cast<size_t>(pick)];
        ++counts[static_cast<size_t>(pick)];
        ++task_cnt[chosen.task];
        ++ans_cnt[chosen.answer];
        if (task_rem[chosen.task] > 0) --task_rem[chosen.task];
        if (ans_rem[chosen.answer] > 0) --ans_rem[chosen.answer];
        --scope_rem[chosen.scope == Scope::SingleUser ? 0 : 1];
    }
    // repair pass: the greedy can strand over-quota answer kinds inside tasks
    // that offer no template of an under-quota kind, so single swaps are not
    // enough. Chains of same-task, same-scope swaps fix that: each link trades
    // one answer kind for another inside one task, leaving task and scope
    // counts untouched, and the whole chain moves one instance from an
    // over-quota kind to an under-quota one.
    {
        auto ans_quota = int_quota(config.answer_mix);
        const std::vector<AnswerValue::Kind> kinds = {
            AnswerValue::Kind::YesNo, AnswerValue::Kind::Number, AnswerValue::Kind::Text,
            AnswerValue::Kind::Pair, AnswerValue::Kind::List};
        auto kind_index = [&](AnswerValue::Kind k) {
            for (size_t i = 0; i < kinds.size(); ++i)
                if (kinds[i] == k) return i;
            return kinds.size();
        };
        // one link: decrement some template of kind `from`, increment one of
        // kind `to` sharing its task and scope
        auto apply_link = [&](size_t from, size_t to) -> bool {
            for (size_t j = 0; j < cat.size(); ++j) {
                if (counts[j] == 0 || kind_index(cat[j].answer) != from) continue;
                for (size_t k = 0; k < cat.size(); ++k) {
                    if (kind_index(cat[k].answer) != to || cat[k].task != cat[j].task ||
                        cat[k].scope != cat[j].scope)
                        continue;
                    --counts[j];
                    ++counts[k];
                    --ans_cnt[cat[j].answer];
                    ++ans_cnt[cat[k].answer];
                    return true;
                }
            }
            return false;
        };
        auto repair_once = [&]() -> bool {
            size_t under = kinds.size();
            for (size_t i = 0; i < kinds.size(); ++i)
                if (ans_cnt[kinds[i]] < ans_quota[kinds[i]]) {
                    under = i;
                    break;
                }
            if (under == kinds.size()) return false;
            // BFS from every over-quota kind toward `under` along available links
            std::vector<int> prev(kinds.size(), -1);
            std::vector<size_t> frontier;
            for (size_t i = 0; i < kinds.size(); ++i)
                if (ans_cnt[kinds[i]] > ans_quota[kinds[i]]) {
                    prev[i] = static_cast<int>(i);
                    frontier.push_back(i);
                }
            while (!frontier.empty() && prev[under] < 0) {
                std::vector<size_t> next;
                for (size_t a : frontier)
                    for (size_t b = 0; b < kinds.size(); ++b) {
                        if (prev[b] >= 0 || b == a) continue;
                        bool linked = false;
                        for (size_t j = 0; j < cat.size() && !linked; ++j) {
                            if (counts[j] == 0 || kind_index(cat[j].answer) != a) continue;
                            for (size_t k = 0; k < cat.size(); ++k)
                                if (kind_index(cat[k].answer) == b && cat[k].task == cat[j].task &&
                                    cat[k].scope == cat[j].scope) {
                                    linked = true;
                                    break;
                                }
                        }
                        if (linked) {
                            prev[b] = static_cast<int>(a);
                            next.push_back(b);
                        }
                    }
                frontier = std::move(next);
            }
            if (prev[under] < 0) return false;
            std::vector<size_t> path{under};
            while (prev[path.back()] != static_cast<int>(path.back()))
                path.push_back(static_cast<size_t>(prev[path.back()]));
            // apply links from the over-quota end toward `under`
            for (size_t i = path.size(); i-- > 1;)
                if (!apply_link(path[i], path[i - 1])) return false;
            return true;
        };
        for (int guard = 0; guard < 4 * config.total && repair_once(); ++guard) {
        }
    }

    // tolerance floor of two instances keeps tiny totals feasible
    const double slack = std::max(config.mix_tolerance * config.total, 2.0) + 1e-9;
    for (const auto& [task, frac] : config.task_mix)
        if (std::abs(task_cnt[task] - frac * config.total) > slack)
            throw InfeasibleMix(std::string("task mix for ") + to_string(task));
    for (const auto& [kind, frac] : config.answer_mix)
        if (std::abs(ans_cnt[kind] - frac * config.total) > slack)
            throw InfeasibleMix(std::string("answer mix for ") + qlang::to_string(kind) + ": got " +
                                std::to_string(ans_cnt[kind]) + " of " +
                                std::to_string(config.total) + ", want " +
                                format_number(frac * config.total));

    // per-template generation; exhausted quotas shift to a compatible template
    std::vector<std::set<std::string>> dedup(cat.size());
    std::vector<int> emitted(cat.size(), 0), draws(cat.size(), 0);
    std::vector<bool> exhausted(cat.size(), false);
    std::vector<QAInstance> out;
    out.reserve(static_cast<size_t>(config.total));

    std::vector<std::pair<size_t, int>> work;
    for (size_t j = 0; j < cat.size(); ++j)
        if (counts[j] > 0) work.emplace_back(j, counts[j]);

    auto fallback_for = [&](size_t j) -> std::optional<size_t> {
        auto match = [&](auto pred) -> std::optional<size_t> {
            for (size_t k = 0; k < cat.size(); ++k)
                if (k != j && !exhausted[k] && cat[k].scope == cat[j].scope && pred(cat[k]))
                    return k;
            return std::nullopt;
        };
        if (auto k = match([&](const Template& t) {
                return t.task == cat[j].task && t.answer == cat[j].answer;
            }))
            return k;
        if (auto k = match([&](const Template& t) { return t.answer == cat[j].answer; })) return k;
        return match([](const Template&) { return true; });
    };

    for (size_t wi = 0; wi < work.size(); ++wi) {
        auto [j, quota] = work[wi];
        const Template& tpl = cat[j];
        for (int n = 0; n < quota; ++n) {
            const std::string draw_key = tpl.id + "#" + std::to_string(draws[j]++);
            const std::uint64_t seed = fnv1a(draw_key, config.seed ^ 0xcbf29ce484222325ull);
            Rng rng(seed);
            try {
                QAInstance inst = instantiate_template(tpl, ds, store, rng, dedup[j]);
                inst.seed = seed;
                inst.instance_id = tpl.id + "-" + pad5(emitted[j]++);
                out.push_back(std::move(inst));
            } catch (const TemplateExhausted&) {
                exhausted[j] = true;
                auto fb = fallback_for(j);
                if (!fb)
                    throw InfeasibleMix("template " + tpl.id + " exhausted with no fallback");
                work.emplace_back(*fb, quota - n);
                break;
            }
        }
    }

    std::sort(out.begin(), out.end(),
              [](const QAInstance& a, const QAInstance& b) { return a.instance_id < b.instance_id; });
    return out;
}

bool verify_instance(const QAInstance& inst, const AlignedDataset& ds,
                     const RelationalStore& store, std::string* diagnostic) {
    auto fail = [&](const std::string& why) {
        if (diagnostic) *diagnostic = inst.instance_id + ": " + why;
        return false;
    };
    AnswerValue gt;
    try {
        gt = qlang::interpret(*inst.program, ds);
    } catch (const std::exception& e) {
        return fail(std::string("interpretation failed: ") + e.what());
    }
    if (!qlang::answers_equal(gt, inst.ground_truth, 1e-9))
        return fail("stored ground truth differs from interpretation");
    auto v = validate_sql(inst.sql);
    if (v.verdict != SqlVerdict::Valid) return fail("sql not valid: " + v.message);
    auto res = store.execute_select(inst.sql);
    if (res.status != ExecStatus::Ok) return fail("sql execution failed: " + res.message);
    AnswerValue decoded;
    try {
        decoded = qlang::decode_result(res.table, inst.answer_type);
    } catch (const std::exception& e) {
        return fail(std::string("decode failed: ") + e.what());
    }
    if (!qlang::answers_equal(decoded, gt, 1e-9))
        return fail("interpreter and SQL disagree");
    return true;
}

nlohmann::ordered_json instance_to_json(const QAInstance& inst) {
    nlohmann::ordered_json j;
    j["instance_id"] = inst.instance_id;
    j["question"] = inst.question;
    j["task_type"] = to_string(inst.task_type);
    j["answer_type"] = qlang::to_string(inst.answer_type);
    j["scope"] = to_string(inst.scope);
    auto doms = nlohmann::ordered_json::array();
    for (DomainTag d : inst.domains) doms.push_back(to_string(d));
    j["domains"] = std::move(doms);
    j["user_ids"] = inst.user_ids;
    j["window_start"] = format_date(inst.window.start);
    j["window_end"] = format_date(inst.window.end);
    j["program"] = qlang::ir_to_json(*inst.program);
    j["sql"] = inst.sql;
    j["ground_truth"] = qlang::answer_to_json(inst.ground_truth);
    j["template_id"] = inst.template_id;
    j["seed"] = inst.seed;
    return j;
}

QAInstance instance_from_json(const nlohmann::json& j) {
    QAInstance inst;
    inst.instance_id = j.at("instance_id").get<std::string>();
    inst.question = j.at("question").get<std::string>();
    auto task = task_from_string(j.at("task_type").get<std::string>());
    if (!task) throw std::runtime_error("bad task_type");
    inst.task_type = *task;
    auto kind = qlang::answer_kind_from_string(j.at("answer_type").get<std::string>());
    if (!kind) throw std::runtime_error("bad answer_type");
    inst.answer_type = *kind;
    auto scope = scope_from_string(j.at("scope").get<std::string>());
    if (!scope) throw std::runtime_error("bad scope");
    inst.scope = *scope;
    for (const auto& d : j.at("domains")) {
        auto dom = domain_from_string(d.get<std::string>());
        if (!dom) throw std::runtime_error("bad domain");
        inst.domains.insert(*dom);
    }
    inst.user_ids = j.at("user_ids").get<std::vector<std::string>>();
    auto ws = parse_date(j.at("window_start").get<std::string>());
    auto we = parse_date(j.at("window_end").get<std::string>());
    if (!ws || !we) throw std::runtime_error("bad window");
    inst.window = {*ws, *we};
    inst.program = qlang::ir_from_json(j.at("program"));
    inst.sql = j.at("sql").get<std::string>();
    inst.ground_truth = qlang::answer_from_json(j.at("ground_truth"));
    inst.template_id = j.at("template_id").get<std::string>();
    inst.seed = j.at("seed").get<std::uint64_t>();
    return inst;
}

std::string to_jsonl(const std::vector<QAInstance>& instances) {
    std::string out;
    for (const auto& inst : instances) {
        out += instance_to_json(inst).dump();
        out += '\n';
    }
    return out;
}

std::vector<QAInstance> from_jsonl_text(const std::string& text) {
    std::vector<QAInstance> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        out.push_back(instance_from_json(nlohmann::json::parse(line)));
    }
    return out;
}

}  // namespace lifebench::benchgen
