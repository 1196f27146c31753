#include "lifebench/lifelog/registry.hpp"

#include <sstream>
#include <stdexcept>

namespace lifebench {

const char* to_string(DomainTag d) {
    switch (d) {
        case DomainTag::Diet: return "diet";
        case DomainTag::Sleep: return "sleep";
        case DomainTag::Activity: return "activity";
        case DomainTag::Emotion: return "emotion";
    }
    return "?";
}

std::optional<DomainTag> domain_from_string(const std::string& s) {
    if (s == "diet" || s == "Diet") return DomainTag::Diet;
    if (s == "sleep" || s == "Sleep") return DomainTag::Sleep;
    if (s == "activity" || s == "Activity") return DomainTag::Activity;
    if (s == "emotion" || s == "Emotion") return DomainTag::Emotion;
    return std::nullopt;
}

const char* to_string(Granularity g) { return g == Granularity::Daily ? "daily" : "event"; }
const char* to_string(ValueKind k) { return k == ValueKind::Number ? "number" : "category"; }

const std::vector<MetricInfo>& metric_registry() {
    static const std::vector<MetricInfo> kRegistry = {
        {"sleep.total_minutes", DomainTag::Sleep, Granularity::Daily, "minutes", ValueKind::Number,
         "sleep duration (minutes)"},
        {"sleep.deep_minutes", DomainTag::Sleep, Granularity::Daily, "minutes", ValueKind::Number,
         "deep sleep duration (minutes)"},
        {"activity.steps", DomainTag::Activity, Granularity::Daily, "count", ValueKind::Number,
         "step count"},
        {"activity.total_minutes", DomainTag::Activity, Granularity::Daily, "minutes",
         ValueKind::Number, "total activity time (minutes)"},
        {"activity.aerobic_minutes", DomainTag::Activity, Granularity::Daily, "minutes",
         ValueKind::Number, "aerobic exercise time (minutes)"},
        {"activity.sedentary_minutes", DomainTag::Activity, Granularity::Daily, "minutes",
         ValueKind::Number, "sedentary time (minutes)"},
        {"diet.calories", DomainTag::Diet, Granularity::Daily, "kcal", ValueKind::Number,
         "calorie intake (kcal)"},
        {"emotion.score", DomainTag::Emotion, Granularity::Daily, "score", ValueKind::Number,
         "emotion score (1-10)"},
        {"emotion.stress_score", DomainTag::Emotion, Granularity::Daily, "score",
         ValueKind::Number, "stress score (1-10)"},
        {"diet.category", DomainTag::Diet, Granularity::Event, "category", ValueKind::Category,
         "diet category"},
        {"activity.session_minutes", DomainTag::Activity, Granularity::Event, "minutes",
         ValueKind::Number, "activity session duration (minutes)"},
    };
    return kRegistry;
}

const MetricInfo* find_metric(const std::string& name) {
    for (const auto& m : metric_registry())
        if (m.name == name) return &m;
    return nullptr;
}

std::vector<const MetricInfo*> numeric_daily_metrics() {
    std::vector<const MetricInfo*> out;
    for (const auto& m : metric_registry())
        if (m.granularity == Granularity::Daily && m.kind == ValueKind::Number) out.push_back(&m);
    return out;
}

const std::vector<std::string>& diet_categories() {
    static const std::vector<std::string> kCategories = {
        "balanced", "high_carb", "high_fat", "high_protein", "vegetarian"};
    return kCategories;
}

std::string registry_csv() {
    std::ostringstream os;
    os << "name,domain,granularity,unit,value_kind\n";
    for (const auto& m : metric_registry())
        os << m.name << ',' << to_string(m.domain) << ',' << to_string(m.granularity) << ','
           << m.unit << ',' << to_string(m.kind) << '\n';
    return os.str();
}

}  // namespace lifebench
