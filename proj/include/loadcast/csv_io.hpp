#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "loadcast/series.hpp"

namespace loadcast {

/// Local wall-clock timestamp, hour resolution.
struct Timestamp {
    Date date;
    int hour = 0;
};

/// Accepts YYYY-MM-DDTHH:MM[:SS] (a space may replace the T); minutes and
/// seconds must be zero.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Date date, int hour);

struct IngestIssue {
    std::string customer_id;
    std::string message;
};

struct IngestReport {
    /// Data rows read from both files.
    std::size_t rows = 0;
    /// Doubled autumn 02:00 readings kept for DST repair.
    std::size_t dst_duplicates = 0;
    /// Hours missing from a customer's range, excluding the spring 02:00.
    std::vector<IngestIssue> gaps;
};

/// Reads consumption and temperature tables with columns
/// customer_id,timestamp,value. Rows are sorted by local time (stable, so
/// the two autumn 02:00 readings keep file order). A repeated hour other
/// than the autumn 02:00 is rejected, as is a customer present in only one
/// file. Errors cite file and line.
std::vector<RawSeries> ingest(std::istream& consumption, std::istream& temperature, IngestReport* report = nullptr,
                              const std::string& consumption_name = "consumption",
                              const std::string& temperature_name = "temperature");
std::vector<RawSeries> ingest(const std::filesystem::path& consumption, const std::filesystem::path& temperature,
                              IngestReport* report = nullptr);

/// Writes the canonical form read back by ingest.
void export_raw(std::ostream& consumption, std::ostream& temperature, std::span<const RawSeries> series);
void export_raw(const std::filesystem::path& consumption, const std::filesystem::path& temperature,
                std::span<const RawSeries> series);

/// Splits a CSV line on commas, trimming blanks, CR and surrounding quotes.
std::vector<std::string> split_csv_line(std::string_view line);
double parse_double(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);

/// Reads a CSV file whose first line is a header containing `columns`.
/// Returns the rows as field vectors ordered like `columns`, with their line
/// numbers.
struct CsvTable {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;
};
CsvTable read_csv(std::istream& in, std::span<const std::string_view> columns, const std::string& source);
CsvTable read_csv(const std::filesystem::path& path, std::span<const std::string_view> columns);

std::ofstream open_output(const std::filesystem::path& path);

}  // namespace loadcast
