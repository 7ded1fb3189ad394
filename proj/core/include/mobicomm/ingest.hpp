#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mobicomm {

using Seconds = std::int64_t;

enum class SessionStatus { Start, Stop };

/// One association/disassociation line of a RADIUS-style session log.
struct SessionRecord {
    Seconds timestamp = 0;
    std::string ap_id;
    std::string node_id;
    std::optional<Seconds> session_time;  // present on Stop lines
    SessionStatus status = SessionStatus::Start;

    bool operator==(const SessionRecord&) const = default;
};

/// Presence of one node at one AP over [start, end).
struct AssociationInterval {
    std::string node_id;
    std::string ap_id;
    Seconds start = 0;
    Seconds end = 0;

    Seconds duration() const { return end - start; }
    bool operator==(const AssociationInterval&) const = default;
    auto operator<=>(const AssociationInterval&) const = default;
};

/// Column order is fixed: timestamp, ap_id, node_id, session_time, status.
struct LogFormat {
    char delimiter = ',';
};

struct ParseResult {
    std::vector<SessionRecord> records;
    std::size_t malformed_count = 0;
    bool header_skipped = false;
    /// 1-based line numbers of the first few malformed lines.
    std::vector<std::size_t> malformed_lines;
};

/// Parses a session log. Malformed lines are counted, not fatal; more than
/// half malformed raises DataError (format mismatch). Blank lines are
/// ignored. A first line whose first field is non-numeric is a header.
ParseResult parse_session_log(std::istream& in, const LogFormat& format = {});
ParseResult parse_session_log_file(const std::filesystem::path& path, const LogFormat& format = {});

std::string format_session_log(const std::vector<SessionRecord>& records, const LogFormat& format = {});

struct ReconciliationReport {
    std::size_t paired = 0;          // Start matched with a Stop
    std::size_t reassociated = 0;    // Start closed by a later Start
    std::size_t backfilled = 0;      // lone Stop expanded from session_time
    std::size_t dropped_stops = 0;   // lone Stop without usable session_time
    std::size_t dangling_closed = 0; // Start still open at stream end
    std::size_t zero_length = 0;     // intervals dropped for start == end
};

struct IntervalBuildResult {
    std::vector<AssociationInterval> intervals;
    ReconciliationReport report;
};

/// Pairs Start/Stop records per (node, ap).
/// Output is sorted by (node_id, start, ap_id, end).
IntervalBuildResult build_intervals(std::vector<SessionRecord> records);

struct SmoothingParams {
    Seconds gap = 60;
    Seconds flicker = 30;
};

/// Removes ping-pong artifacts per node until nothing changes:
///  - flicker absorption: a visit shorter than `flicker` at AP b, sandwiched
///    between two visits at AP a with both surrounding gaps < `gap`, is
///    deleted and the two AP a visits are joined;
///  - same-AP merge: visits at the same AP separated by at most `gap`
///    (overlapping and touching included) are joined.
/// Output is sorted like build_intervals.
std::vector<AssociationInterval> smooth_ping_pong(std::vector<AssociationInterval> intervals,
                                                  const SmoothingParams& params = {});

/// Intervals CSV: header node_id,ap_id,start,end.
std::string format_intervals_csv(const std::vector<AssociationInterval>& intervals);
std::vector<AssociationInterval> parse_intervals_csv(std::string_view text);

/// Start/Stop record pair per interval, sorted by timestamp.
std::vector<SessionRecord> intervals_to_records(const std::vector<AssociationInterval>& intervals);

}  // namespace mobicomm
