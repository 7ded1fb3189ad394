#include "mobicomm/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "mobicomm/error.hpp"
#include "mobicomm/text.hpp"

namespace mobicomm {

namespace {

constexpr std::size_t kMaxReportedLines = 20;

std::optional<SessionStatus> parse_status(std::string_view s) {
    s = trim(s);
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "start") return SessionStatus::Start;
    if (lower == "stop") return SessionStatus::Stop;
    return std::nullopt;
}

std::optional<SessionRecord> parse_record(std::string_view line, char delimiter) {
    const auto fields = split_fields(line, delimiter);
    if (fields.size() != 5) return std::nullopt;
    const auto ts = parse_int(fields[0]);
    if (!ts || *ts < 0) return std::nullopt;
    SessionRecord rec;
    rec.timestamp = *ts;
    rec.ap_id = std::string(trim(fields[1]));
    rec.node_id = std::string(trim(fields[2]));
    if (rec.ap_id.empty() || rec.node_id.empty()) return std::nullopt;
    if (!trim(fields[3]).empty()) {
        const auto st = parse_int(fields[3]);
        if (!st || *st < 0) return std::nullopt;
        rec.session_time = *st;
    }
    const auto status = parse_status(fields[4]);
    if (!status) return std::nullopt;
    rec.status = *status;
    return rec;
}

bool record_order(const SessionRecord& a, const SessionRecord& b) {
    return std::tie(a.timestamp, a.node_id, a.ap_id, a.status) <
           std::tie(b.timestamp, b.node_id, b.ap_id, b.status);
}

bool interval_order(const AssociationInterval& a, const AssociationInterval& b) {
    return std::tie(a.node_id, a.start, a.ap_id, a.end) < std::tie(b.node_id, b.start, b.ap_id, b.end);
}

// One node's timeline: returns true when something changed.
bool absorb_flicker(std::vector<AssociationInterval>& visits, const SmoothingParams& p) {
    std::sort(visits.begin(), visits.end(), [](const auto& a, const auto& b) {
        return std::tie(a.start, a.end, a.ap_id) < std::tie(b.start, b.end, b.ap_id);
    });
    bool changed = false;
    std::size_t i = 0;
    while (i + 2 < visits.size()) {
        const auto& first = visits[i];
        const auto& mid = visits[i + 1];
        const auto& last = visits[i + 2];
        const bool sandwich = first.ap_id == last.ap_id && mid.ap_id != first.ap_id;
        if (sandwich && mid.duration() < p.flicker && mid.start - first.end < p.gap &&
            last.start - mid.end < p.gap) {
            visits[i].end = std::max(first.end, last.end);
            visits.erase(visits.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                         visits.begin() + static_cast<std::ptrdiff_t>(i) + 3);
            changed = true;
            if (i > 0) --i;  // the joined visit may now close a sandwich on its left
            continue;
        }
        ++i;
    }
    return changed;
}

bool merge_same_ap(std::vector<AssociationInterval>& visits, Seconds gap) {
    std::sort(visits.begin(), visits.end(), [](const auto& a, const auto& b) {
        return std::tie(a.ap_id, a.start, a.end) < std::tie(b.ap_id, b.start, b.end);
    });
    bool changed = false;
    std::vector<AssociationInterval> out;
    out.reserve(visits.size());
    for (auto& v : visits) {
        if (!out.empty() && out.back().ap_id == v.ap_id && v.start - out.back().end <= gap) {
            out.back().end = std::max(out.back().end, v.end);
            changed = true;
        } else {
            out.push_back(std::move(v));
        }
    }
    visits = std::move(out);
    return changed;
}

}  // namespace

ParseResult parse_session_log(std::istream& in, const LogFormat& format) {
    if (!in) throw DataError("session log stream is not readable");
    ParseResult result;
    std::string line;
    std::size_t line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        const auto content = trim(line);
        if (content.empty()) continue;
        if (first_content_line) {
            first_content_line = false;
            const auto fields = split_fields(content, format.delimiter);
            if (!parse_int(fields.front())) {
                result.header_skipped = true;
                continue;
            }
        }
        if (auto rec = parse_record(content, format.delimiter)) {
            result.records.push_back(std::move(*rec));
        } else {
            ++result.malformed_count;
            if (result.malformed_lines.size() < kMaxReportedLines) result.malformed_lines.push_back(line_no);
        }
    }
    if (in.bad()) throw DataError("I/O error while reading session log");
    const std::size_t total = result.records.size() + result.malformed_count;
    if (total > 0 && 2 * result.malformed_count > total) {
        throw DataError(fmt::format("format mismatch: {} of {} lines malformed (delimiter '{}')",
                                    result.malformed_count, total, format.delimiter));
    }
    return result;
}

ParseResult parse_session_log_file(const std::filesystem::path& path, const LogFormat& format) {
    std::istringstream in(read_file(path));
    return parse_session_log(in, format);
}

std::string format_session_log(const std::vector<SessionRecord>& records, const LogFormat& format) {
    std::string out;
    const char d = format.delimiter;
    for (const auto& r : records) {
        out += fmt::format("{}{}{}{}{}{}{}{}{}\n", r.timestamp, d, r.ap_id, d, r.node_id, d,
                           r.session_time ? std::to_string(*r.session_time) : std::string(), d,
                           r.status == SessionStatus::Start ? "Start" : "Stop");
    }
    return out;
}

IntervalBuildResult build_intervals(std::vector<SessionRecord> records) {
    std::sort(records.begin(), records.end(), record_order);
    IntervalBuildResult result;
    auto& report = result.report;
    std::map<std::pair<std::string, std::string>, Seconds> open;  // (node, ap) -> start

    auto emit = [&](const std::string& node, const std::string& ap, Seconds start, Seconds end) {
        if (end <= start) {
            ++report.zero_length;
            return;
        }
        result.intervals.push_back({node, ap, start, end});
    };

    for (const auto& r : records) {
        auto key = std::make_pair(r.node_id, r.ap_id);
        auto it = open.find(key);
        if (r.status == SessionStatus::Start) {
            if (it != open.end()) {
                emit(r.node_id, r.ap_id, it->second, r.timestamp);
                ++report.reassociated;
                it->second = r.timestamp;
            } else {
                open.emplace(std::move(key), r.timestamp);
            }
            continue;
        }
        if (it != open.end()) {
            emit(r.node_id, r.ap_id, it->second, r.timestamp);
            ++report.paired;
            open.erase(it);
        } else if (r.session_time && *r.session_time > 0) {
            emit(r.node_id, r.ap_id, r.timestamp - *r.session_time, r.timestamp);
            ++report.backfilled;
        } else {
            ++report.dropped_stops;
        }
    }

    const Seconds last_seen = records.empty() ? 0 : records.back().timestamp;
    for (const auto& [key, start] : open) {
        emit(key.first, key.second, start, last_seen);
        ++report.dangling_closed;
    }
    std::sort(result.intervals.begin(), result.intervals.end(), interval_order);
    return result;
}

std::vector<AssociationInterval> smooth_ping_pong(std::vector<AssociationInterval> intervals,
                                                  const SmoothingParams& params) {
    if (params.gap < 0 || params.flicker < 0) throw DomainError("smoothing gap and flicker must be >= 0");
    std::map<std::string, std::vector<AssociationInterval>> by_node;
    for (auto& iv : intervals) {
        if (iv.end <= iv.start) continue;
        by_node[iv.node_id].push_back(std::move(iv));
    }
    std::vector<AssociationInterval> out;
    for (auto& [node, visits] : by_node) {
        while (true) {
            const bool absorbed = absorb_flicker(visits, params);
            const bool merged = merge_same_ap(visits, params.gap);
            if (!absorbed && !merged) break;
        }
        std::move(visits.begin(), visits.end(), std::back_inserter(out));
    }
    std::sort(out.begin(), out.end(), interval_order);
    return out;
}

std::string format_intervals_csv(const std::vector<AssociationInterval>& intervals) {
    std::string out = "node_id,ap_id,start,end\n";
    for (const auto& iv : intervals) out += fmt::format("{},{},{},{}\n", iv.node_id, iv.ap_id, iv.start, iv.end);
    return out;
}

std::vector<AssociationInterval> parse_intervals_csv(std::string_view text) {
    std::vector<AssociationInterval> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty() || (line_no == 1 && line.starts_with("node_id"))) continue;
        const auto f = split_fields(line, ',');
        std::optional<Seconds> s, e;
        if (f.size() == 4) {
            s = parse_int(f[2]);
            e = parse_int(f[3]);
        }
        if (!s || !e || *e <= *s) throw DataError(fmt::format("intervals CSV line {}: malformed", line_no));
        out.push_back({std::string(trim(f[0])), std::string(trim(f[1])), *s, *e});
    }
    return out;
}

std::vector<SessionRecord> intervals_to_records(const std::vector<AssociationInterval>& intervals) {
    std::vector<SessionRecord> records;
    records.reserve(2 * intervals.size());
    for (const auto& iv : intervals) {
        records.push_back({iv.start, iv.ap_id, iv.node_id, Seconds{0}, SessionStatus::Start});
        records.push_back({iv.end, iv.ap_id, iv.node_id, iv.duration(), SessionStatus::Stop});
    }
    std::sort(records.begin(), records.end(), record_order);
    return records;
}

}  // namespace mobicomm
