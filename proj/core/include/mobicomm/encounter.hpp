#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mobicomm/ingest.hpp"

namespace mobicomm {

/// Two nodes present at the same AP over an overlapping interval.
/// Canonical orientation: node_a < node_b lexicographically.
struct EncounterEvent {
    std::string node_a;
    std::string node_b;
    std::string poi_id;
    Seconds start = 0;
    Seconds end = 0;

    Seconds duration() const { return end - start; }
    bool operator==(const EncounterEvent&) const = default;
};

/// Output order: (start, node_a, node_b, poi_id, end).
bool encounter_order(const EncounterEvent& a, const EncounterEvent& b);

/// Per-AP sweep over interval endpoints. Touching intervals (zero overlap)
/// are not encounters. Overlapping encounters of one pair at different APs
/// are collapsed by collapse_simultaneous(). Sorted by encounter_order.
std::vector<EncounterEvent> extract_encounters(const std::vector<AssociationInterval>& intervals,
                                               unsigned threads = 1);

/// Merges overlapping events of the same pair into one spanning event
/// (earliest start, latest end, poi of the longest constituent).
std::vector<EncounterEvent> collapse_simultaneous(std::vector<EncounterEvent> events);

/// Merges consecutive events of the same pair whose separation is < gap.
/// gap == 0 disables the pass.
std::vector<EncounterEvent> merge_cross_ap_encounters(std::vector<EncounterEvent> events, Seconds gap);

/// Header: UserA,UserB,PoI Id,Encounter Start Time,Encounter End Time
std::string format_encounters_csv(const std::vector<EncounterEvent>& events);
std::vector<EncounterEvent> parse_encounters_csv(std::string_view text);

}  // namespace mobicomm
