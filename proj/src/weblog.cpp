#include "dsom/weblog.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include <zlib.h>

#include "dsom/text.hpp"

namespace dsom::weblog {

namespace {

constexpr std::array<std::string_view, 12> month_names{"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                       "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

int parse_fixed(std::string_view s, std::size_t pos, std::size_t len) {
    if (pos + len > s.size()) throw std::invalid_argument("timestamp too short");
    int value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("bad digit in timestamp");
        value = value * 10 + (s[i] - '0');
    }
    return value;
}

/// Reads a double-quoted field starting at `pos` (which must hold the quote).
/// Backslash escapes the next character. With `allow_open`, a missing closing
/// quote takes the rest of the line.
std::string read_quoted(std::string_view line, std::size_t& pos, bool allow_open) {
    std::string out;
    ++pos;
    while (pos < line.size()) {
        const char ch = line[pos];
        if (ch == '\\' && pos + 1 < line.size()) {
            out.push_back(line[pos + 1]);
            pos += 2;
            continue;
        }
        if (ch == '"') {
            ++pos;
            return out;
        }
        out.push_back(ch);
        ++pos;
    }
    if (!allow_open) throw std::invalid_argument("unterminated quoted field");
    return std::string(text::trim(out));
}

void skip_spaces(std::string_view line, std::size_t& pos) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
}

std::string_view read_token(std::string_view line, std::size_t& pos) {
    skip_spaces(line, pos);
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
    return line.substr(start, pos - start);
}

std::optional<std::string> dash_is_absent(std::string s) {
    if (s.empty() || s == "-") return std::nullopt;
    return s;
}

std::string quote_field(const std::optional<std::string>& value) {
    std::string out = "\"";
    if (!value) {
        out.push_back('-');
    } else {
        for (char ch : *value) {
            if (ch == '"' || ch == '\\') out.push_back('\\');
            out.push_back(ch);
        }
    }
    out.push_back('"');
    return out;
}

std::string_view strip_query(std::string_view url) {
    const std::size_t cut = url.find_first_of("?#");
    return cut == std::string_view::npos ? url : url.substr(0, cut);
}

/// Path part of an absolute or relative URL, without query.
std::string_view url_path(std::string_view url) {
    url = strip_query(url);
    const std::size_t scheme = url.find("://");
    if (scheme != std::string_view::npos) {
        const std::size_t slash = url.find('/', scheme + 3);
        return slash == std::string_view::npos ? std::string_view("/") : url.substr(slash);
    }
    return url;
}

bool is_image(std::string_view url, const FilterSpec& filters) {
    const std::string path = text::to_lower(url_path(url));
    return std::any_of(filters.image_extensions.begin(), filters.image_extensions.end(),
                       [&path](const std::string& ext) {
                           const std::string e = text::to_lower(ext);
                           return path.size() >= e.size() &&
                                  path.compare(path.size() - e.size(), e.size(), e) == 0;
                       });
}

bool robot_agent(const std::optional<std::string>& agent, const FilterSpec& filters) {
    if (!agent) return false;
    const std::string lower = text::to_lower(*agent);
    return std::any_of(filters.robot_agents.begin(), filters.robot_agents.end(),
                       [&lower](const std::string& needle) {
                           return lower.find(text::to_lower(needle)) != std::string::npos;
                       });
}

using VisitorKey = std::pair<std::string, std::string>;

VisitorKey visitor_of(const LogRecord& r) { return {r.ip, r.agent.value_or("")}; }

}  // namespace

ParseError::ParseError(std::size_t line_number, std::string reason)
    : std::runtime_error("line " + std::to_string(line_number) + ": " + reason),
      line_number_(line_number),
      reason_(std::move(reason)) {}

Timestamp parse_timestamp(std::string_view s) {
    s = text::trim(s);
    // 10/Jan/2003:15:33:43 +0200
    if (s.size() != 26 || s[2] != '/' || s[6] != '/' || s[11] != ':' || s[14] != ':' ||
        s[17] != ':' || s[20] != ' ') {
        throw std::invalid_argument("timestamp not in dd/Mon/yyyy:HH:MM:SS +zzzz form");
    }
    const int day = parse_fixed(s, 0, 2);
    const std::string mon = text::to_lower(s.substr(3, 3));
    int month = 0;
    for (std::size_t k = 0; k < month_names.size(); ++k) {
        if (text::to_lower(month_names[k]) == mon) month = static_cast<int>(k) + 1;
    }
    if (month == 0) throw std::invalid_argument("unknown month '" + std::string(s.substr(3, 3)) + "'");
    const int year = parse_fixed(s, 7, 4);
    const int hour = parse_fixed(s, 12, 2);
    const int minute = parse_fixed(s, 15, 2);
    const int second = parse_fixed(s, 18, 2);
    if (s[21] != '+' && s[21] != '-') throw std::invalid_argument("timezone needs a sign");
    const int zone_h = parse_fixed(s, 22, 2);
    const int zone_m = parse_fixed(s, 24, 2);
    if (hour > 23 || minute > 59 || second > 60 || zone_m > 59) {
        throw std::invalid_argument("time field out of range");
    }

    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                             std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
    const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
    const int offset = (s[21] == '-' ? -1 : 1) * (zone_h * 60 + zone_m);
    const std::int64_t local = days * 86400 + hour * 3600 + minute * 60 + second;
    return {local - offset * 60, offset};
}

std::string format_timestamp(const Timestamp& ts) {
    using namespace std::chrono;
    const std::int64_t local = ts.utc_seconds + ts.offset_minutes * 60;
    std::int64_t days = local / 86400;
    std::int64_t secs = local % 86400;
    if (secs < 0) {
        secs += 86400;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    const int off = ts.offset_minutes < 0 ? -ts.offset_minutes : ts.offset_minutes;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%02u/%s/%04d:%02d:%02d:%02d %c%02d%02d",
                  static_cast<unsigned>(ymd.day()),
                  std::string(month_names[static_cast<unsigned>(ymd.month()) - 1]).c_str(),
                  static_cast<int>(ymd.year()), static_cast<int>(secs / 3600),
                  static_cast<int>(secs / 60 % 60), static_cast<int>(secs % 60),
                  ts.offset_minutes < 0 ? '-' : '+', off / 60, off % 60);
    return buf;
}

LogRecord parse_log_line(std::string_view line, std::size_t line_number) {
    auto fail = [line_number](const std::string& reason) { return ParseError(line_number, reason); };
    line = text::trim(line);
    if (line.empty()) throw fail("empty line");

    LogRecord rec;
    std::size_t pos = 0;
    rec.ip = std::string(read_token(line, pos));

    const std::size_t bracket = line.find('[', pos);
    if (bracket == std::string_view::npos) throw fail("missing [timestamp]");
    std::vector<std::string_view> ids;
    {
        std::size_t p = pos;
        while (true) {
            auto tok = read_token(line.substr(0, bracket), p);
            if (tok.empty()) break;
            ids.push_back(tok);
        }
    }
    if (ids.size() == 2) {
        rec.ident = dash_is_absent(std::string(ids[0]));
        rec.user = dash_is_absent(std::string(ids[1]));
    } else if (!(ids.size() == 1 && ids[0] == "--")) {
        throw fail("expected ident and user fields before the timestamp");
    }

    const std::size_t close = line.find(']', bracket);
    if (close == std::string_view::npos) throw fail("unterminated timestamp");
    try {
        rec.timestamp = parse_timestamp(line.substr(bracket + 1, close - bracket - 1));
    } catch (const std::invalid_argument& e) {
        throw fail(e.what());
    }

    pos = close + 1;
    skip_spaces(line, pos);
    if (pos >= line.size() || line[pos] != '"') throw fail("missing quoted request");
    std::string request;
    try {
        request = read_quoted(line, pos, false);
    } catch (const std::invalid_argument& e) {
        throw fail(e.what());
    }
    {
        std::size_t p = 0;
        rec.method = std::string(read_token(request, p));
        rec.url = std::string(read_token(request, p));
        rec.protocol = std::string(read_token(request, p));
        skip_spaces(request, p);
        if (rec.method.empty() || rec.url.empty() || p != request.size()) {
            throw fail("malformed request '" + request + "'");
        }
    }

    const auto status = read_token(line, pos);
    try {
        const long long code = text::parse_integer(status);
        if (code < 100 || code > 599) throw fail("status out of range");
        rec.status = static_cast<int>(code);
    } catch (const std::invalid_argument&) {
        throw fail("bad status '" + std::string(status) + "'");
    }

    const auto size = read_token(line, pos);
    if (size.empty()) throw fail("missing size");
    if (size != "-") {
        try {
            const long long bytes = text::parse_integer(size);
            if (bytes < 0) throw fail("negative size");
            rec.size = static_cast<std::uint64_t>(bytes);
        } catch (const std::invalid_argument&) {
            throw fail("bad size '" + std::string(size) + "'");
        }
    }

    for (auto* field : {&rec.referrer, &rec.agent}) {
        skip_spaces(line, pos);
        if (pos >= line.size()) break;
        if (line[pos] != '"') throw fail("unexpected trailing text");
        *field = dash_is_absent(read_quoted(line, pos, true));
    }
    skip_spaces(line, pos);
    if (pos != line.size()) throw fail("unexpected trailing text");
    return rec;
}

std::string format_log_line(const LogRecord& r) {
    std::string out = r.ip;
    out += ' ';
    out += r.ident.value_or("-");
    out += ' ';
    out += r.user.value_or("-");
    out += " [" + format_timestamp(r.timestamp) + "] \"" + r.method + ' ' + r.url;
    if (!r.protocol.empty()) out += ' ' + r.protocol;
    out += "\" " + std::to_string(r.status) + ' ';
    out += r.size ? std::to_string(*r.size) : "-";
    out += ' ' + quote_field(r.referrer) + ' ' + quote_field(r.agent);
    return out;
}

std::vector<Navigation> build_navigations(std::span<const ServerHit> hits, const FilterSpec& filters,
                                          FilterStats* stats) {
    FilterStats local;
    FilterStats& st = stats ? *stats : local;
    st = FilterStats{};

    std::set<VisitorKey> robots;
    if (filters.robots_txt_marks_robot) {
        for (const auto& hit : hits) {
            if (url_path(hit.record.url) == "/robots.txt") robots.insert(visitor_of(hit.record));
        }
    }

    std::map<VisitorKey, std::vector<const ServerHit*>> groups;
    for (const auto& hit : hits) {
        ++st.read;
        const LogRecord& r = hit.record;
        if (r.status < filters.min_status || r.status > filters.max_status) {
            ++st.status;
        } else if (is_image(r.url, filters)) {
            ++st.image;
        } else if (robot_agent(r.agent, filters) || robots.count(visitor_of(r))) {
            ++st.robot;
        } else {
            groups[visitor_of(r)].push_back(&hit);
        }
    }

    std::vector<Navigation> navs;
    for (auto& [key, group] : groups) {
        std::stable_sort(group.begin(), group.end(), [](const ServerHit* a, const ServerHit* b) {
            return a->record.timestamp.utc_seconds < b->record.timestamp.utc_seconds;
        });
        Navigation current;
        for (const ServerHit* hit : group) {
            const Timestamp& t = hit->record.timestamp;
            if (!current.requests.empty() &&
                t.utc_seconds - current.requests.back().time.utc_seconds > filters.gap_seconds) {
                navs.push_back(std::move(current));
                current = Navigation{};
            }
            if (current.requests.empty()) {
                current.ip = key.first;
                current.agent = key.second;
            }
            current.requests.push_back({t, hit->server, hit->record.url});
        }
        if (!current.requests.empty()) navs.push_back(std::move(current));
    }

    std::vector<Navigation> kept;
    for (auto& nav : navs) {
        if (filters.long_only &&
            !(nav.duration() > filters.min_duration && nav.page_count() > filters.min_pages)) {
            st.short_navigation += nav.page_count();
            continue;
        }
        const bool has_all = std::all_of(
            filters.required_servers.begin(), filters.required_servers.end(),
            [&nav](const std::string& server) {
                return std::any_of(nav.requests.begin(), nav.requests.end(),
                                   [&server](const Request& rq) { return rq.server == server; });
            });
        if (!has_all) {
            st.missing_server += nav.page_count();
            continue;
        }
        st.retained += nav.page_count();
        kept.push_back(std::move(nav));
    }

    std::sort(kept.begin(), kept.end(), [](const Navigation& a, const Navigation& b) {
        return std::tie(a.requests.front().time.utc_seconds, a.ip, a.agent) <
               std::tie(b.requests.front().time.utc_seconds, b.ip, b.agent);
    });
    for (std::size_t i = 0; i < kept.size(); ++i) kept[i].id = i;
    return kept;
}

std::string Rubric::path() const {
    std::string out = "/";
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (i) out.push_back('/');
        out += levels[i];
    }
    return out;
}

std::string Rubric::label() const { return server + path(); }

Rubric truncate_url(std::string_view url, std::string_view server, std::size_t depth) {
    Rubric rubric;
    url = strip_query(url);
    const std::size_t scheme = url.find("://");
    std::string_view path = url;
    if (scheme != std::string_view::npos) {
        const std::size_t slash = url.find('/', scheme + 3);
        rubric.server = std::string(url.substr(scheme + 3, slash == std::string_view::npos
                                                               ? std::string_view::npos
                                                               : slash - scheme - 3));
        path = slash == std::string_view::npos ? std::string_view() : url.substr(slash);
    } else {
        rubric.server = std::string(server);
    }
    std::size_t pos = 0;
    while (pos < path.size() && rubric.levels.size() < depth) {
        const std::size_t next = path.find('/', pos);
        const auto segment = path.substr(pos, next == std::string_view::npos ? std::string_view::npos
                                                                             : next - pos);
        if (!segment.empty()) rubric.levels.emplace_back(segment);
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return rubric;
}

ModalTable modal_tables(const std::vector<Navigation>& navs, std::size_t depth) {
    // server -> rubric path -> column
    std::map<std::string, std::map<std::string, std::size_t>> layout;
    for (const auto& nav : navs) {
        for (const auto& rq : nav.requests) {
            const Rubric rubric = truncate_url(rq.url, rq.server, depth);
            layout[rubric.server][rubric.path()] = 0;
        }
    }

    ModalTable table;
    std::map<std::string, std::size_t> var_index;
    for (auto& [server, mods] : layout) {
        ModalVariable var;
        var.name = server;
        for (auto& [path, column] : mods) {
            column = var.modalities.size();
            var.modalities.push_back(path);
        }
        var.counts.assign(navs.size() * var.modalities.size(), 0.0);
        var_index[server] = table.variables.size();
        table.variables.push_back(std::move(var));
    }
    for (std::size_t i = 0; i < navs.size(); ++i) {
        table.observations.push_back("N" + std::to_string(navs[i].id));
        for (const auto& rq : navs[i].requests) {
            const Rubric rubric = truncate_url(rq.url, rq.server, depth);
            ModalVariable& var = table.variables[var_index[rubric.server]];
            var.counts[i * var.modalities.size() + layout[rubric.server][rubric.path()]] += 1.0;
        }
    }
    return table;
}

BinaryTable binary_table(const std::vector<Navigation>& navs, std::size_t depth) {
    std::map<std::string, std::set<std::size_t>> visits;  // rubric label -> navigation columns
    for (std::size_t i = 0; i < navs.size(); ++i) {
        for (const auto& rq : navs[i].requests) {
            visits[truncate_url(rq.url, rq.server, depth).label()].insert(i);
        }
    }
    BinaryTable table;
    for (const auto& nav : navs) table.cols.push_back("N" + std::to_string(nav.id));
    table.bits.assign(visits.size() * navs.size(), 0);
    std::size_t row = 0;
    for (const auto& [label, cols] : visits) {
        table.rows.push_back(label);
        for (std::size_t c : cols) table.bits[row * navs.size() + c] = 1;
        ++row;
    }
    return table;
}

void write_navigation_table(std::ostream& out, const std::vector<Navigation>& navs) {
    using namespace std::chrono;
    out << "request,navigation,time,date,url\n";
    std::size_t request = 0;
    for (const auto& nav : navs) {
        for (const auto& rq : nav.requests) {
            const std::int64_t t = rq.time.utc_seconds;
            std::int64_t days = t / 86400;
            std::int64_t secs = t % 86400;
            if (secs < 0) {
                secs += 86400;
                --days;
            }
            const year_month_day ymd{sys_days{std::chrono::days{days}}};
            char when[32];
            std::snprintf(when, sizeof when, "%02d:%02d:%02d,%02u/%02u/%02d",
                          static_cast<int>(secs / 3600), static_cast<int>(secs / 60 % 60),
                          static_cast<int>(secs % 60), static_cast<unsigned>(ymd.day()),
                          static_cast<unsigned>(ymd.month()), static_cast<int>(ymd.year()) % 100);
            const std::string url = rq.url.find("://") != std::string::npos
                                        ? rq.url
                                        : "http://" + rq.server + rq.url;
            out << request++ << ',' << nav.id << ',' << when << ',' << text::quote_csv(url) << '\n';
        }
    }
}

LogFile read_log_file(const std::string& path, const std::string& server) {
    gzFile file = gzopen(path.c_str(), "rb");
    if (!file) throw IoError("cannot open log file '" + path + "'");

    LogFile result;
    std::string line;
    std::array<char, 8192> buf{};
    std::size_t line_number = 0;
    auto flush = [&] {
        ++line_number;
        if (!text::trim(line).empty()) {
            ++result.lines;
            try {
                result.hits.push_back({server, parse_log_line(line, line_number)});
            } catch (const ParseError& e) {
                result.errors.push_back(e);
            }
        }
        line.clear();
    };
    while (gzgets(file, buf.data(), static_cast<int>(buf.size())) != nullptr) {
        line += buf.data();
        if (!line.empty() && line.back() == '\n') {
            line.pop_back();
            flush();
        }
    }
    int err = 0;
    const char* msg = gzerror(file, &err);
    const bool failed = err != Z_OK && err != Z_STREAM_END;
    const std::string reason = failed && msg ? msg : "";
    gzclose(file);
    if (failed) throw IoError("error reading '" + path + "': " + reason);
    if (!line.empty()) flush();
    return result;
}

}  // namespace dsom::weblog
