#include "memestat/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <json.hpp>
#include <set>
#include <sstream>
#include <unordered_set>

#include "memestat/error.hpp"

namespace memestat {

namespace {

using nlohmann::json;

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        lines.push_back(strip_cr(text.substr(0, nl)));
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
    return lines;
}

bool is_blank(std::string_view s) {
    return s.find_first_not_of(" \t") == std::string_view::npos;
}

std::optional<std::int64_t> epoch_from_json(const json& v) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (!std::isfinite(d)) return std::nullopt;
        return static_cast<std::int64_t>(std::floor(d));
    }
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        std::int64_t out = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec == std::errc{} && ptr == s.data() + s.size()) return out;
        double d = 0.0;
        auto [ptr2, ec2] = std::from_chars(s.data(), s.data() + s.size(), d);
        if (ec2 == std::errc{} && ptr2 == s.data() + s.size() && std::isfinite(d)) {
            return static_cast<std::int64_t>(std::floor(d));
        }
    }
    return std::nullopt;
}

struct CsvRows {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

CsvRows read_csv(std::string_view text, std::string_view expected_header, std::string_view what) {
    const auto lines = split_lines(text);
    std::size_t i = 0;
    while (i < lines.size() && is_blank(lines[i])) ++i;
    if (i == lines.size()) throw InputError(std::string(what) + ": missing header `" + std::string(expected_header) + "`");
    std::string_view header = lines[i];
    if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
    if (header != expected_header) {
        throw InputError(std::string(what) + ": expected header `" + std::string(expected_header) + "`, got `" +
                         std::string(header) + "`");
    }
    CsvRows out;
    for (++i; i < lines.size(); ++i) {
        if (is_blank(lines[i])) continue;
        out.rows.push_back(split_csv_line(lines[i]));
        out.line_numbers.push_back(i + 1);
    }
    return out;
}

[[noreturn]] void fail_at(std::string_view what, std::size_t line, const std::string& msg) {
    throw InputError(std::string(what) + " line " + std::to_string(line) + ": " + msg);
}

struct DatedValue {
    Date date;
    double value;
};

DailySeries to_series(std::vector<DatedValue> rows, std::string_view what) {
    std::sort(rows.begin(), rows.end(), [](const DatedValue& a, const DatedValue& b) { return a.date < b.date; });
    std::vector<Date> dates;
    std::vector<double> values;
    for (const auto& r : rows) {
        if (!dates.empty() && dates.back() == r.date) {
            throw InputError(std::string(what) + ": duplicate date " + format_iso_date(r.date));
        }
        dates.push_back(r.date);
        values.push_back(r.value);
    }
    return {std::move(dates), std::move(values)};
}

std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view contents) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write failed for " + path);
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    if (quoted) throw InputError("unterminated quoted CSV field");
    fields.push_back(std::move(field));
    return fields;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

// ---------------------------------------------------------------------------

PostReadResult parse_posts(std::string_view text, const ReadOptions& options) {
    PostReadResult result;
    std::unordered_set<std::string> seen;
    std::size_t non_blank = 0;
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (is_blank(line)) continue;
        ++non_blank;
        auto reject = [&] {
            ++result.malformed;
            result.malformed_lines.push_back(line_no);
        };
        const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (obj.is_discarded() || !obj.is_object()) {
            reject();
            continue;
        }
        const auto id = obj.find("id");
        const auto created = obj.find("created_utc");
        const auto body = obj.find("body");
        if (id == obj.end() || created == obj.end() || body == obj.end() || !id->is_string() || !body->is_string()) {
            reject();
            continue;
        }
        const auto ts = epoch_from_json(*created);
        const auto& id_str = id->get_ref<const std::string&>();
        if (!ts || id_str.empty() || !seen.insert(id_str).second) {
            reject();
            continue;
        }
        result.posts.push_back({id_str, *ts, body->get<std::string>()});
    }

    const auto allowed = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(options.max_malformed_fraction * static_cast<double>(non_blank))));
    if (result.malformed > allowed) {
        throw InputError("posts: " + std::to_string(result.malformed) + " of " + std::to_string(non_blank) +
                         " lines malformed (first at line " + std::to_string(result.malformed_lines.front()) + ")");
    }
    std::sort(result.posts.begin(), result.posts.end(), [](const Post& a, const Post& b) {
        return a.timestamp < b.timestamp || (a.timestamp == b.timestamp && a.id < b.id);
    });
    return result;
}

PostReadResult read_posts(const std::string& path, const ReadOptions& options) {
    return parse_posts(read_text_file(path), options);
}

std::string format_posts(const std::vector<Post>& posts) {
    std::string out;
    for (const auto& p : posts) {
        nlohmann::ordered_json obj;
        obj["id"] = p.id;
        obj["created_utc"] = p.timestamp;
        obj["body"] = p.text;
        out += obj.dump(-1, ' ', false, json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

void write_posts(const std::string& path, const std::vector<Post>& posts) {
    write_text_file(path, format_posts(posts));
}

DailySeries parse_prices(std::string_view text) {
    const auto csv = read_csv(text, "date,close", "prices");
    std::vector<DatedValue> rows;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& f = csv.rows[r];
        const auto line = csv.line_numbers[r];
        if (f.size() != 2) fail_at("prices", line, "expected 2 fields");
        const auto date = parse_iso_date(f[0]);
        if (!date) fail_at("prices", line, "bad date '" + f[0] + "'");
        double close = 0.0;
        auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), close);
        if (ec != std::errc{} || ptr != f[1].data() + f[1].size() || !std::isfinite(close)) {
            fail_at("prices", line, "bad close '" + f[1] + "'");
        }
        if (close <= 0.0) fail_at("prices", line, "close must be positive");
        rows.push_back({*date, close});
    }
    return to_series(std::move(rows), "prices");
}

DailySeries read_prices(const std::string& path) {
    return parse_prices(read_text_file(path));
}

std::string format_prices(const DailySeries& s) {
    std::string out = "date,close\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += format_iso_date(s.dates()[i]) + "," + shortest(s.values()[i]) + "\n";
    }
    return out;
}

DailySeries parse_trends(std::string_view text) {
    const auto csv = read_csv(text, "date,interest", "trends");
    std::vector<DatedValue> rows;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& f = csv.rows[r];
        const auto line = csv.line_numbers[r];
        if (f.size() != 2) fail_at("trends", line, "expected 2 fields");
        const auto date = parse_iso_date(f[0]);
        if (!date) fail_at("trends", line, "bad date '" + f[0] + "'");
        long interest = 0;
        auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), interest);
        if (ec != std::errc{} || ptr != f[1].data() + f[1].size()) {
            fail_at("trends", line, "bad interest '" + f[1] + "'");
        }
        if (interest < 0 || interest > 100) fail_at("trends", line, "interest " + f[1] + " outside 0..100");
        rows.push_back({*date, static_cast<double>(interest)});
    }
    return to_series(std::move(rows), "trends");
}

DailySeries read_trends(const std::string& path) {
    return parse_trends(read_text_file(path));
}

std::string format_trends(const DailySeries& s) {
    std::string out = "date,interest\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += format_iso_date(s.dates()[i]) + "," + std::to_string(std::lround(s.values()[i])) + "\n";
    }
    return out;
}

std::vector<LabelRecord> parse_labels(std::string_view text) {
    const auto csv = read_csv(text, "post_id,label", "labels");
    std::vector<LabelRecord> out;
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& f = csv.rows[r];
        const auto line = csv.line_numbers[r];
        if (f.size() != 2) fail_at("labels", line, "expected 2 fields");
        if (f[0].empty()) fail_at("labels", line, "empty post_id");
        const auto label = parse_label(f[1]);
        if (!label) fail_at("labels", line, "unknown label '" + f[1] + "'");
        if (!seen.insert(f[0]).second) fail_at("labels", line, "duplicate post_id " + f[0]);
        out.push_back({f[0], *label});
    }
    return out;
}

std::vector<LabelRecord> read_labels(const std::string& path) {
    return parse_labels(read_text_file(path));
}

std::string format_labels(const std::vector<LabelRecord>& records) {
    std::string out = "post_id,label\n";
    for (const auto& r : records) {
        out += csv_escape(r.post_id);
        out += ',';
        out += label_name(r.label);
        out += '\n';
    }
    return out;
}

LabelMap to_label_map(const std::vector<LabelRecord>& records) {
    LabelMap map;
    for (const auto& r : records) map.emplace(r.post_id, r.label);
    return map;
}

DailySeries comment_volume(std::span<const Post> posts) {
    std::map<Date, std::size_t> counts;
    for (const auto& p : posts) ++counts[utc_day(p.timestamp)];
    std::vector<Date> dates;
    std::vector<double> values;
    for (const auto& [d, c] : counts) {
        dates.push_back(d);
        values.push_back(static_cast<double>(c));
    }
    return {std::move(dates), std::move(values)};
}

std::vector<Post> filter_window(std::span<const Post> posts, Date from, Date to) {
    std::vector<Post> out;
    for (const auto& p : posts) {
        const Date d = utc_day(p.timestamp);
        if (from <= d && d <= to) out.push_back(p);
    }
    return out;
}

}  // namespace memestat
