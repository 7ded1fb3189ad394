#include "mobicomm/encounter.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include <fmt/format.h>

#include "mobicomm/error.hpp"
#include "mobicomm/parallel.hpp"
#include "mobicomm/text.hpp"

namespace mobicomm {

namespace {

constexpr std::string_view kEncounterHeader = "UserA,UserB,PoI Id,Encounter Start Time,Encounter End Time";

struct Endpoint {
    Seconds time;
    bool is_start;
    std::size_t interval;  // index into the AP's interval list
};

std::vector<EncounterEvent> sweep_one_ap(const std::vector<const AssociationInterval*>& visits) {
    std::vector<Endpoint> points;
    points.reserve(2 * visits.size());
    for (std::size_t i = 0; i < visits.size(); ++i) {
        points.push_back({visits[i]->start, true, i});
        points.push_back({visits[i]->end, false, i});
    }
    // Ends before starts at equal times: touching intervals never overlap.
    std::sort(points.begin(), points.end(), [](const Endpoint& a, const Endpoint& b) {
        return std::tie(a.time, a.is_start, a.interval) < std::tie(b.time, b.is_start, b.interval);
    });

    std::vector<EncounterEvent> out;
    std::vector<std::size_t> active;
    std::vector<std::size_t> slot(visits.size());
    for (const auto& p : points) {
        if (!p.is_start) {
            // swap-remove keeps deletion O(1)
            const std::size_t pos = slot[p.interval];
            active[pos] = active.back();
            slot[active[pos]] = pos;
            active.pop_back();
            continue;
        }
        const auto& cur = *visits[p.interval];
        for (std::size_t other : active) {
            const auto& o = *visits[other];
            if (o.node_id == cur.node_id) continue;
            const Seconds end = std::min(cur.end, o.end);
            // cur.start is the later start; o is still active so o.end > cur.start
            const bool cur_first = cur.node_id < o.node_id;
            out.push_back({cur_first ? cur.node_id : o.node_id, cur_first ? o.node_id : cur.node_id,
                           cur.ap_id, cur.start, end});
        }
        slot[p.interval] = active.size();
        active.push_back(p.interval);
    }
    return out;
}

}  // namespace

bool encounter_order(const EncounterEvent& a, const EncounterEvent& b) {
    return std::tie(a.start, a.node_a, a.node_b, a.poi_id, a.end) <
           std::tie(b.start, b.node_a, b.node_b, b.poi_id, b.end);
}

std::vector<EncounterEvent> extract_encounters(const std::vector<AssociationInterval>& intervals,
                                               unsigned threads) {
    std::map<std::string_view, std::vector<const AssociationInterval*>> by_ap;
    for (const auto& iv : intervals) {
        if (iv.end > iv.start) by_ap[iv.ap_id].push_back(&iv);
    }
    std::vector<const std::vector<const AssociationInterval*>*> groups;
    groups.reserve(by_ap.size());
    for (const auto& [ap, visits] : by_ap) groups.push_back(&visits);

    std::vector<std::vector<EncounterEvent>> per_ap(groups.size());
    parallel_for(groups.size(), threads, [&](std::size_t g) { per_ap[g] = sweep_one_ap(*groups[g]); });

    std::vector<EncounterEvent> events;
    for (auto& chunk : per_ap) std::move(chunk.begin(), chunk.end(), std::back_inserter(events));
    return collapse_simultaneous(std::move(events));
}

namespace {

using PairKey = std::pair<std::string, std::string>;

std::map<PairKey, std::vector<EncounterEvent>> group_by_pair(std::vector<EncounterEvent> events) {
    std::map<PairKey, std::vector<EncounterEvent>> by_pair;
    for (auto& e : events) {
        PairKey key{e.node_a, e.node_b};
        by_pair[std::move(key)].push_back(std::move(e));
    }
    for (auto& [key, list] : by_pair) std::sort(list.begin(), list.end(), encounter_order);
    return by_pair;
}

// Joins events of one pair (sorted by start) while `joinable` says so.
template <typename Joinable>
std::vector<EncounterEvent> join_runs(std::vector<EncounterEvent> events, Joinable joinable) {
    auto by_pair = group_by_pair(std::move(events));
    std::vector<EncounterEvent> out;
    for (auto& [key, list] : by_pair) {
        EncounterEvent cur = list.front();
        Seconds longest = cur.duration();
        for (std::size_t i = 1; i < list.size(); ++i) {
            const auto& next = list[i];
            if (joinable(cur, next)) {
                if (next.duration() > longest) {
                    longest = next.duration();
                    cur.poi_id = next.poi_id;
                }
                cur.end = std::max(cur.end, next.end);
            } else {
                out.push_back(std::move(cur));
                cur = next;
                longest = cur.duration();
            }
        }
        out.push_back(std::move(cur));
    }
    std::sort(out.begin(), out.end(), encounter_order);
    return out;
}

}  // namespace

std::vector<EncounterEvent> collapse_simultaneous(std::vector<EncounterEvent> events) {
    if (events.empty()) return events;
    return join_runs(std::move(events),
                     [](const EncounterEvent& cur, const EncounterEvent& next) { return next.start < cur.end; });
}

std::vector<EncounterEvent> merge_cross_ap_encounters(std::vector<EncounterEvent> events, Seconds gap) {
    if (gap < 0) throw DomainError("merge gap must be >= 0");
    if (gap == 0 || events.empty()) {
        std::sort(events.begin(), events.end(), encounter_order);
        return events;
    }
    return join_runs(std::move(events), [gap](const EncounterEvent& cur, const EncounterEvent& next) {
        return next.start - cur.end < gap;
    });
}

std::string format_encounters_csv(const std::vector<EncounterEvent>& events) {
    std::string out(kEncounterHeader);
    out += '\n';
    for (const auto& e : events) out += fmt::format("{},{},{},{},{}\n", e.node_a, e.node_b, e.poi_id, e.start, e.end);
    return out;
}

std::vector<EncounterEvent> parse_encounters_csv(std::string_view text) {
    std::vector<EncounterEvent> out;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty() || (line_no == 1 && line.starts_with("UserA"))) continue;
        const auto f = split_fields(line, ',');
        std::optional<Seconds> s, e;
        if (f.size() == 5) {
            s = parse_int(f[3]);
            e = parse_int(f[4]);
        }
        if (!s || !e || *e <= *s) throw DataError(fmt::format("encounters CSV line {}: malformed", line_no));
        std::string a(trim(f[0])), b(trim(f[1]));
        if (a == b) throw DataError(fmt::format("encounters CSV line {}: self encounter", line_no));
        if (b < a) std::swap(a, b);
        out.push_back({std::move(a), std::move(b), std::string(trim(f[2])), *s, *e});
    }
    std::sort(out.begin(), out.end(), encounter_order);
    return out;
}

}  // namespace mobicomm
