#include "loadcast/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

#include "loadcast/error.hpp"

namespace loadcast {

namespace {

constexpr const char* kModule = "cli-app";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len) {
    int v = 0;
    const char* b = text.data() + pos;
    const auto [p, ec] = std::from_chars(b, b + len, v);
    if (ec != std::errc{} || p != b + len) return -1;
    return v;
}

struct Row {
    Reading reading;
    std::size_t line;
};

using RowsByCustomer = std::map<std::string, std::vector<Row>>;

RowsByCustomer read_readings(std::istream& in, const std::string& source, IngestReport& report) {
    static constexpr std::string_view kColumns[] = {"customer_id", "timestamp", "value"};
    CsvTable table = read_csv(in, kColumns, source);
    RowsByCustomer out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& f = table.rows[i];
        const std::size_t line = table.lines[i];
        try {
            if (f[0].empty()) throw InputError(kModule, "empty customer_id");
            const Timestamp ts = parse_timestamp(f[1]);
            const double v = parse_double(f[2], "value");
            out[f[0]].push_back({{ts.date, ts.hour, v}, line});
        } catch (const InputError& e) {
            throw InputError(kModule, fmt::format("{}:{}: {}", source, line, e.what()));
        }
        ++report.rows;
    }
    return out;
}

std::vector<Reading> canonicalize(const std::string& customer, std::vector<Row> rows, const std::string& source,
                                  IngestReport& report) {
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.reading.date, a.reading.hour) < std::tie(b.reading.date, b.reading.hour);
    });
    std::vector<Reading> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size();) {
        std::size_t j = i + 1;
        while (j < rows.size() && rows[j].reading.date == rows[i].reading.date &&
               rows[j].reading.hour == rows[i].reading.hour)
            ++j;
        const Reading& r = rows[i].reading;
        if (j - i > 1) {
            const bool autumn_switch =
                r.hour == 2 && r.date == eu_dst_days(static_cast<int>(r.date.year())).autumn && j - i == 2;
            if (!autumn_switch)
                throw InputError(kModule, fmt::format("{}: customer {} has {} readings for {} (lines {}, {})", source,
                                                      customer, j - i, format_timestamp(r.date, r.hour), rows[i].line,
                                                      rows[i + 1].line));
            ++report.dst_duplicates;
        }
        for (std::size_t k = i; k < j; ++k) out.push_back(rows[k].reading);
        i = j;
    }

    // Gap report: hours absent from the covered range, ignoring the spring 02:00.
    const Date first = out.front().date;
    const Date last = out.back().date;
    std::set<std::pair<int, int>> present;
    for (const Reading& r : out) present.emplace(days_between(first, r.date), r.hour);
    std::size_t missing = 0;
    std::string example;
    for (int d = 0; d <= days_between(first, last); ++d) {
        const Date date = add_days(first, d);
        const Date spring = eu_dst_days(static_cast<int>(date.year())).spring;
        for (int h = 0; h < 24; ++h) {
            if (date == spring && h == 2) continue;
            if (!present.count({d, h})) {
                if (missing++ == 0) example = format_timestamp(date, h);
            }
        }
    }
    if (missing > 0)
        report.gaps.push_back({customer, fmt::format("{}: {} missing hours, first at {}", source, missing, example)});
    return out;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    text = trim(text);
    // YYYY-MM-DDTHH:MM or YYYY-MM-DDTHH:MM:SS
    const bool shape_ok = (text.size() == 16 || text.size() == 19) && (text[10] == 'T' || text[10] == ' ') &&
                          text[13] == ':' && (text.size() == 16 || text[16] == ':');
    if (!shape_ok) throw InputError(kModule, fmt::format("malformed timestamp '{}'", text));
    Timestamp ts;
    ts.date = parse_date(text.substr(0, 10));
    const int hour = parse_fixed(text, 11, 2);
    const int minute = parse_fixed(text, 14, 2);
    const int second = text.size() == 19 ? parse_fixed(text, 17, 2) : 0;
    if (hour < 0 || hour > 23) throw InputError(kModule, fmt::format("invalid hour in timestamp '{}'", text));
    if (minute != 0 || second != 0)
        throw InputError(kModule, fmt::format("timestamp '{}' is not on the hour", text));
    ts.hour = hour;
    return ts;
}

std::string format_timestamp(Date date, int hour) { return fmt::format("{}T{:02}:00:00", format_date(date), hour); }

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

double parse_double(std::string_view text, std::string_view what) {
    text = trim(text);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || p != text.data() + text.size() || !std::isfinite(v))
        throw InputError(kModule, fmt::format("{} '{}' is not a finite number", what, text));
    return v;
}

long long parse_integer(std::string_view text, std::string_view what) {
    text = trim(text);
    long long v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || p != text.data() + text.size())
        throw InputError(kModule, fmt::format("{} '{}' is not an integer", what, text));
    return v;
}

CsvTable read_csv(std::istream& in, std::span<const std::string_view> columns, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::size_t> index;
    CsvTable table;
    std::size_t header_fields = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (index.empty()) {
            if (line_no == 1 && fields[0].starts_with("\xEF\xBB\xBF")) fields[0].erase(0, 3);
            for (std::string_view c : columns) {
                const auto it = std::find(fields.begin(), fields.end(), c);
                if (it == fields.end())
                    throw InputError(kModule, fmt::format("{}:{}: header lacks column '{}'", source, line_no, c));
                index.push_back(static_cast<std::size_t>(it - fields.begin()));
            }
            header_fields = fields.size();
            continue;
        }
        if (fields.size() != header_fields)
            throw InputError(kModule, fmt::format("{}:{}: expected {} fields, found {}", source, line_no, header_fields,
                                                  fields.size()));
        std::vector<std::string> row;
        row.reserve(index.size());
        for (std::size_t i : index) row.push_back(std::move(fields[i]));
        table.rows.push_back(std::move(row));
        table.lines.push_back(line_no);
    }
    if (in.bad()) throw InputError(kModule, source + ": read error");
    if (index.empty()) throw InputError(kModule, source + ": empty file, expected a header row");
    return table;
}

CsvTable read_csv(const std::filesystem::path& path, std::span<const std::string_view> columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(kModule, "cannot open " + path.string());
    return read_csv(in, columns, path.string());
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(kModule, "cannot open " + path.string() + " for writing");
    return out;
}

std::vector<RawSeries> ingest(std::istream& consumption, std::istream& temperature, IngestReport* report,
                              const std::string& consumption_name, const std::string& temperature_name) {
    IngestReport local;
    IngestReport& rep = report ? *report : local;
    RowsByCustomer cons = read_readings(consumption, consumption_name, rep);
    RowsByCustomer temp = read_readings(temperature, temperature_name, rep);

    for (const auto& [id, rows] : cons)
        if (!temp.count(id))
            throw InputError(kModule, fmt::format("customer {} appears in {} but not in {} (first at line {})", id,
                                                  consumption_name, temperature_name, rows.front().line));
    for (const auto& [id, rows] : temp)
        if (!cons.count(id))
            throw InputError(kModule, fmt::format("customer {} appears in {} but not in {} (first at line {})", id,
                                                  temperature_name, consumption_name, rows.front().line));

    std::vector<RawSeries> out;
    out.reserve(cons.size());
    for (auto& [id, rows] : cons) {
        RawSeries s;
        s.customer_id = id;
        s.consumption = canonicalize(id, std::move(rows), consumption_name, rep);
        s.temperature = canonicalize(id, std::move(temp.at(id)), temperature_name, rep);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<RawSeries> ingest(const std::filesystem::path& consumption, const std::filesystem::path& temperature,
                              IngestReport* report) {
    std::ifstream c(consumption, std::ios::binary);
    if (!c) throw InputError(kModule, "cannot open " + consumption.string());
    std::ifstream t(temperature, std::ios::binary);
    if (!t) throw InputError(kModule, "cannot open " + temperature.string());
    return ingest(c, t, report, consumption.string(), temperature.string());
}

void export_raw(std::ostream& consumption, std::ostream& temperature, std::span<const RawSeries> series) {
    auto write = [](std::ostream& out, const std::string& id, const std::vector<Reading>& readings) {
        for (const Reading& r : readings) out << fmt::format("{},{},{}\n", id, format_timestamp(r.date, r.hour), r.value);
    };
    consumption << "customer_id,timestamp,value\n";
    temperature << "customer_id,timestamp,value\n";
    for (const RawSeries& s : series) {
        write(consumption, s.customer_id, s.consumption);
        write(temperature, s.customer_id, s.temperature);
    }
}

void export_raw(const std::filesystem::path& consumption, const std::filesystem::path& temperature,
                std::span<const RawSeries> series) {
    std::ofstream c = open_output(consumption);
    std::ofstream t = open_output(temperature);
    export_raw(c, t, series);
}

}  // namespace loadcast
