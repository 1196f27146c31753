#include "lifebench/lifelog/csv_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "lifebench/core/csv.hpp"
#include "lifebench/core/num.hpp"
#include "lifebench/lifelog/registry.hpp"

namespace lifebench {

namespace {

std::string table_name(DomainTag d, Granularity g) {
    return std::string(to_string(d)) + "_" + (g == Granularity::Daily ? "daily" : "events");
}

std::string value_str(const MetricValue& v) {
    if (is_numeric(v)) return format_number(std::get<double>(v));
    return std::get<std::string>(v);
}

struct TableSpec {
    std::string name;
    std::string file;
    DomainTag domain = DomainTag::Diet;
    Granularity granularity = Granularity::Daily;
    std::map<std::string, std::string> cols;  // logical field -> column name
};

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::string Diagnostic::str() const {
    std::ostringstream os;
    os << file;
    if (line > 0) os << ':' << line;
    os << ": " << message;
    return os.str();
}

std::vector<std::string> export_csv(const AlignedDataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    std::ostringstream manifest;
    manifest << "# lifebench CSV ingestion manifest\n"
             << "# one [table] section per (domain, granularity) file\n";

    for (DomainTag dom : {DomainTag::Diet, DomainTag::Sleep, DomainTag::Activity,
                          DomainTag::Emotion}) {
        for (Granularity g : {Granularity::Daily, Granularity::Event}) {
            const std::string name = table_name(dom, g);
            std::vector<std::string> lines;
            if (g == Granularity::Daily) {
                for (const auto& r : ds.daily)
                    if (r.domain == dom)
                        lines.push_back(csv_join({r.user, format_date(r.date), r.metric,
                                                  value_str(r.value), r.unit}));
            } else {
                for (const auto& e : ds.events)
                    if (e.domain == dom)
                        lines.push_back(csv_join({e.user, format_timestamp(e.start),
                                                  e.end ? format_timestamp(*e.end) : "",
                                                  e.metric, value_str(e.value), e.unit}));
            }
            if (lines.empty()) continue;
            std::sort(lines.begin(), lines.end());
            const std::string file = name + ".csv";
            std::ofstream out(dir / file, std::ios::binary);
            if (g == Granularity::Daily)
                out << "user_id,date,metric,value,unit\n";
            else
                out << "user_id,start_time,end_time,metric,value,unit\n";
            for (const auto& l : lines) out << l << '\n';
            written.push_back(file);

            manifest << '[' << name << "]\n"
                     << "file = " << file << '\n'
                     << "domain = " << to_string(dom) << '\n'
                     << "granularity = " << to_string(g) << '\n'
                     << "user = user_id\n";
            if (g == Granularity::Daily)
                manifest << "date = date\n";
            else
                manifest << "start = start_time\nend = end_time\n";
            manifest << "metric = metric\nvalue = value\nunit = unit\n\n";
        }
    }

    manifest << "[meta]\nreference_date = " << format_date(ds.reference_date) << '\n';
    {
        std::ofstream out(dir / "manifest.ini", std::ios::binary);
        out << manifest.str();
        written.push_back("manifest.ini");
    }
    {
        std::ofstream out(dir / "metric_registry.csv", std::ios::binary);
        out << registry_csv();
        written.push_back("metric_registry.csv");
    }
    return written;
}

LoadResult load_csv(const std::filesystem::path& dir, const std::filesystem::path& manifest_path) {
    LoadResult result;
    std::vector<TableSpec> tables;
    std::optional<Date> reference_date;

    {
        std::ifstream in(manifest_path);
        if (!in) {
            result.diagnostics.push_back({manifest_path.string(), 0, "cannot open manifest"});
            return result;
        }
        std::string line, section;
        TableSpec cur;
        std::map<std::string, std::string> meta;
        auto flush = [&] {
            if (section.empty() || section == "meta") return;
            cur.name = section;
            tables.push_back(cur);
            cur = TableSpec{};
        };
        int ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            line = trim(line);
            if (line.empty() || line[0] == '#') continue;
            if (line.front() == '[' && line.back() == ']') {
                flush();
                section = line.substr(1, line.size() - 2);
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos) {
                result.diagnostics.push_back(
                    {manifest_path.string(), ln, "expected 'key = value'"});
                continue;
            }
            std::string key = trim(line.substr(0, eq));
            std::string val = trim(line.substr(eq + 1));
            if (section == "meta") {
                meta[key] = val;
            } else if (key == "file") {
                cur.file = val;
            } else if (key == "domain") {
                auto d = domain_from_string(val);
                if (d)
                    cur.domain = *d;
                else
                    result.diagnostics.push_back(
                        {manifest_path.string(), ln, "unknown domain '" + val + "'"});
            } else if (key == "granularity") {
                cur.granularity = (val == "event") ? Granularity::Event : Granularity::Daily;
            } else {
                cur.cols[key] = val;
            }
        }
        flush();
        if (auto it = meta.find("reference_date"); it != meta.end())
            reference_date = parse_date(it->second);
    }

    std::vector<EventRecord> events;
    std::vector<DailyMetric> daily;

    for (const auto& t : tables) {
        const auto path = dir / t.file;
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            result.diagnostics.push_back({t.file, 0, "cannot open file"});
            continue;
        }
        int line_no = 0;
        auto header = csv_read_record(in, line_no);
        if (!header) {
            result.diagnostics.push_back({t.file, 0, "empty file"});
            continue;
        }
        auto col_index = [&](const std::string& logical,
                             bool required) -> std::optional<size_t> {
            auto it = t.cols.find(logical);
            if (it == t.cols.end()) {
                if (required)
                    result.diagnostics.push_back(
                        {t.file, 0, "manifest missing mapping for '" + logical + "'"});
                return std::nullopt;
            }
            auto pos = std::find(header->begin(), header->end(), it->second);
            if (pos == header->end()) {
                if (required)
                    result.diagnostics.push_back(
                        {t.file, 0, "missing column '" + it->second + "'"});
                return std::nullopt;
            }
            return static_cast<size_t>(pos - header->begin());
        };

        const bool is_event = t.granularity == Granularity::Event;
        auto c_user = col_index("user", true);
        auto c_metric = col_index("metric", true);
        auto c_value = col_index("value", true);
        auto c_unit = col_index("unit", true);
        auto c_date = is_event ? std::nullopt : col_index("date", true);
        auto c_start = is_event ? col_index("start", true) : std::nullopt;
        auto c_end = is_event ? col_index("end", false) : std::nullopt;
        if (!c_user || !c_metric || !c_value || !c_unit || (is_event ? !c_start : !c_date))
            continue;

        while (auto rec = csv_read_record(in, line_no)) {
            const auto& row = *rec;
            auto cell = [&](std::optional<size_t> idx) -> std::string {
                return (idx && *idx < row.size()) ? row[*idx] : "";
            };
            const std::string metric_name = cell(c_metric);
            const MetricInfo* info = find_metric(metric_name);
            if (!info) {
                result.diagnostics.push_back(
                    {t.file, line_no, "unknown metric '" + metric_name + "'"});
                continue;
            }
            if (cell(c_user).empty()) {
                result.diagnostics.push_back({t.file, line_no, "empty user id"});
                continue;
            }
            MetricValue value;
            if (info->kind == ValueKind::Number) {
                auto num = parse_number(cell(c_value));
                if (!num || !std::isfinite(*num)) {
                    result.diagnostics.push_back(
                        {t.file, line_no, "non-numeric value '" + cell(c_value) + "'"});
                    continue;
                }
                value = *num;
            } else {
                value = cell(c_value);
            }

            if (is_event) {
                auto start = parse_timestamp(cell(c_start));
                if (!start) {
                    result.diagnostics.push_back(
                        {t.file, line_no, "unparseable timestamp '" + cell(c_start) + "'"});
                    continue;
                }
                std::optional<std::int64_t> end;
                if (!cell(c_end).empty()) {
                    end = parse_timestamp(cell(c_end));
                    if (!end) {
                        result.diagnostics.push_back(
                            {t.file, line_no, "unparseable timestamp '" + cell(c_end) + "'"});
                        continue;
                    }
                    if (*end < *start) {
                        result.diagnostics.push_back({t.file, line_no, "end before start"});
                        continue;
                    }
                }
                events.push_back({cell(c_user), t.domain, *start, end, metric_name, value,
                                  cell(c_unit)});
            } else {
                auto date = parse_date(cell(c_date));
                if (!date) {
                    result.diagnostics.push_back(
                        {t.file, line_no, "unparseable date '" + cell(c_date) + "'"});
                    continue;
                }
                daily.push_back({cell(c_user), t.domain, *date, metric_name, value,
                                 cell(c_unit)});
            }
        }
    }

    if (events.empty() && daily.empty()) {
        result.diagnostics.push_back({manifest_path.string(), 0, "no rows loaded"});
        return result;
    }

    try {
        Date ref = reference_date.value_or(Date{0});
        if (!reference_date) {
            for (const auto& r : daily) ref = std::max(ref, r.date);
            for (const auto& e : events) ref = std::max(ref, e.date());
        }
        result.dataset = align(std::move(events), std::move(daily), ref);
    } catch (const std::exception& e) {
        result.diagnostics.push_back({manifest_path.string(), 0, e.what()});
    }
    return result;
}

AlignedDataset align(std::vector<EventRecord> events, std::vector<DailyMetric> daily,
                     Date reference_date) {
    if (events.empty() && daily.empty()) throw std::runtime_error("align: no records");
    AlignedDataset ds;
    ds.events = std::move(events);
    ds.daily = std::move(daily);
    for (const auto& r : ds.daily) ds.users.insert(r.user);
    for (const auto& e : ds.events) ds.users.insert(e.user);
    ds.finalize();
    for (size_t i = 1; i < ds.daily.size(); ++i) {
        const auto& a = ds.daily[i - 1];
        const auto& b = ds.daily[i];
        if (a.user == b.user && a.metric == b.metric && a.date == b.date)
            throw std::runtime_error("align: duplicate daily key (" + a.user + ", " +
                                     format_date(a.date) + ", " + a.metric + ")");
    }
    if (!ds.date_span.contains(reference_date))
        throw std::runtime_error("align: reference_date " + format_date(reference_date) +
                                 " outside span");
    ds.reference_date = reference_date;
    return ds;
}

}  // namespace lifebench
