// Minimal RFC-4180 reader/writer used by the lifelog CSV bundle.
#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace lifebench {

std::string csv_quote(const std::string& field);
std::string csv_join(const std::vector<std::string>& fields);

// Reads one logical CSV record (may span lines inside quotes).
// Returns nullopt at end of stream; advances `line_no` past consumed lines.
std::optional<std::vector<std::string>> csv_read_record(std::istream& in, int& line_no);

}  // namespace lifebench
