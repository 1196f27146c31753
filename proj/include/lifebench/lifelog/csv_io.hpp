// CSV bundle export/ingestion. One file per (domain, granularity); an
// INI-style manifest maps logical fields to column names (see FORMATS.md).
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lifebench/lifelog/types.hpp"

namespace lifebench {

struct Diagnostic {
    std::string file;
    int line = 0;  // 0 = file-level problem
    std::string message;

    std::string str() const;  // "file:line: message"
};

struct LoadResult {
    AlignedDataset dataset;
    std::vector<Diagnostic> diagnostics;  // rejected rows and file-level errors
    bool ok() const { return diagnostics.empty(); }
};

// Writes one CSV per (domain, granularity) with data plus manifest.ini and
// metric_registry.csv. Returns the written file names.
std::vector<std::string> export_csv(const AlignedDataset& ds, const std::filesystem::path& dir);

LoadResult load_csv(const std::filesystem::path& dir, const std::filesystem::path& manifest);

// Builds the aligned dataset; throws std::runtime_error on duplicate
// (user, date, metric) daily keys or a reference date outside the span.
AlignedDataset align(std::vector<EventRecord> events, std::vector<DailyMetric> daily,
                     Date reference_date);

}  // namespace lifebench
