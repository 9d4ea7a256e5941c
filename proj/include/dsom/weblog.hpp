#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dsom/dissim.hpp"

namespace dsom::weblog {

/// An instant from an access log. Ordering uses UTC only.
struct Timestamp {
    std::int64_t utc_seconds = 0;
    int offset_minutes = 0;  // the zone the log line was written in

    bool operator==(const Timestamp&) const = default;
};

/// "dd/Mon/yyyy:HH:MM:SS +zzzz"
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(const Timestamp& ts);

/// One extended-CLF line. "-" fields are absent.
struct LogRecord {
    std::string ip;
    std::optional<std::string> ident;
    std::optional<std::string> user;
    Timestamp timestamp;
    std::string method;
    std::string url;
    std::string protocol;
    int status = 0;
    std::optional<std::uint64_t> size;
    std::optional<std::string> referrer;
    std::optional<std::string> agent;

    bool operator==(const LogRecord&) const = default;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line_number, std::string reason);
    std::size_t line_number() const { return line_number_; }
    const std::string& reason() const { return reason_; }

private:
    std::size_t line_number_;
    std::string reason_;
};

/// Accepts common and combined formats. The trailing quoted field may lack its
/// closing quote, and a lone "--" stands for absent ident and user.
LogRecord parse_log_line(std::string_view line, std::size_t line_number = 0);
std::string format_log_line(const LogRecord& record);

/// A record tagged with the server whose log it came from.
struct ServerHit {
    std::string server;
    LogRecord record;
};

struct FilterSpec {
    int min_status = 200;
    int max_status = 399;
    std::vector<std::string> image_extensions{".gif", ".jpg", ".jpeg", ".png", ".bmp", ".ico"};
    /// Case-insensitive substrings of the user agent that mark a robot.
    std::vector<std::string> robot_agents{"bot", "crawler", "spider", "slurp"};
    /// Any visitor that fetched /robots.txt is a robot.
    bool robots_txt_marks_robot = true;
    std::int64_t gap_seconds = 1800;
    /// Keep only navigations longer than min_duration seconds with more than
    /// min_pages requests.
    bool long_only = false;
    std::int64_t min_duration = 60;
    std::size_t min_pages = 10;
    /// When nonempty, navigations must contain a request to every listed server.
    std::vector<std::string> required_servers;
};

struct FilterStats {
    std::size_t read = 0;
    std::size_t status = 0;
    std::size_t image = 0;
    std::size_t robot = 0;
    std::size_t short_navigation = 0;
    std::size_t missing_server = 0;
    std::size_t retained = 0;
};

struct Request {
    Timestamp time;
    std::string server;
    std::string url;
};

struct Navigation {
    std::size_t id = 0;
    std::string ip;
    std::string agent;
    std::vector<Request> requests;  // time-ordered, never empty

    std::int64_t duration() const {
        return requests.back().time.utc_seconds - requests.front().time.utc_seconds;
    }
    std::size_t page_count() const { return requests.size(); }
};

/// Filters, groups by (ip, agent), sorts by time and splits whenever two
/// consecutive requests are more than gap_seconds apart. Navigations are
/// numbered from 0 in order of (start time, ip, agent).
std::vector<Navigation> build_navigations(std::span<const ServerHit> hits, const FilterSpec& filters,
                                          FilterStats* stats = nullptr);

/// Server plus the first path segments of a URL.
struct Rubric {
    std::string server;
    std::vector<std::string> levels;

    /// "/" followed by the levels joined with "/".
    std::string path() const;
    /// server + path()
    std::string label() const;
    auto operator<=>(const Rubric&) const = default;
};

/// Absolute URLs carry their own host; relative ones use `server`. Query
/// strings and fragments are dropped.
Rubric truncate_url(std::string_view url, std::string_view server, std::size_t depth);

/// One modal variable per server (sorted by name); modalities are the rubric
/// paths seen on that server. Observations are labelled "N<id>".
ModalTable modal_tables(const std::vector<Navigation>& navs, std::size_t depth = 1);

/// Rows are the distinct rubrics (sorted by label), columns the navigations.
BinaryTable binary_table(const std::vector<Navigation>& navs, std::size_t depth = 1);

/// CSV with header "request,navigation,time,date,url" (UTC time and dd/mm/yy date).
void write_navigation_table(std::ostream& out, const std::vector<Navigation>& navs);

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LogFile {
    std::vector<ServerHit> hits;
    std::size_t lines = 0;  // nonblank lines seen
    std::vector<ParseError> errors;
};

/// Reads a plain or gzip-compressed log. Malformed lines are collected, not
/// thrown. Throws IoError when the file cannot be opened.
LogFile read_log_file(const std::string& path, const std::string& server);

}  // namespace dsom::weblog
