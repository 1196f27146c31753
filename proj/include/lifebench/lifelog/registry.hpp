// The closed metric registry. Templates, the SQL compiler, and agent tools
// all validate metric names against this table; data/metric_registry.csv
// ships the same rows for documentation.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lifebench/lifelog/types.hpp"

namespace lifebench {

enum class Granularity { Daily, Event };
enum class ValueKind { Number, Category };

const char* to_string(Granularity g);
const char* to_string(ValueKind k);

struct MetricInfo {
    std::string name;
    DomainTag domain;
    Granularity granularity;
    std::string unit;
    ValueKind kind;
    std::string phrase;  // natural-language rendering used by templates
};

const std::vector<MetricInfo>& metric_registry();
const MetricInfo* find_metric(const std::string& name);

// Numeric daily metrics, the ones usable in series/aggregate queries.
std::vector<const MetricInfo*> numeric_daily_metrics();

// Category values emitted for diet.category events.
const std::vector<std::string>& diet_categories();

// Renders the registry as the shipped CSV (data/metric_registry.csv).
std::string registry_csv();

}  // namespace lifebench
