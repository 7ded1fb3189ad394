#include <doctest.h>

#include <random>

#include "mobicomm/encounter.hpp"
#include "oracles.hpp"

using namespace mobicomm;

namespace {

AssociationInterval iv(std::string node, std::string ap, Seconds s, Seconds e) {
    return {std::move(node), std::move(ap), s, e};
}

}  // namespace

TEST_CASE("overlap gives one encounter") {
    auto ev = extract_encounters({iv("N1", "AP1", 0, 100), iv("N2", "AP1", 50, 200)});
    REQUIRE(ev.size() == 1);
    CHECK(ev[0] == EncounterEvent{"N1", "N2", "AP1", 50, 100});
}

TEST_CASE("touching endpoints are not an encounter") {
    CHECK(extract_encounters({iv("N1", "AP1", 0, 50), iv("N2", "AP1", 50, 100)}).empty());
}

TEST_CASE("three co-located nodes give three encounters") {
    std::vector<AssociationInterval> in{iv("N3", "AP1", 0, 100), iv("N1", "AP1", 0, 100), iv("N2", "AP1", 0, 100)};
    auto ev = extract_encounters(in);
    CHECK(ev.size() == 3);
    CHECK(oracle::as_keys(ev) == oracle::brute_force_encounters(in));
}

TEST_CASE("different APs do not meet") {
    CHECK(extract_encounters({iv("N1", "AP1", 0, 100), iv("N2", "AP2", 0, 100)}).empty());
}

TEST_CASE("cross-AP merge") {
    std::vector<EncounterEvent> ev{{"A", "B", "AP1", 0, 100}, {"A", "B", "AP2", 110, 200}};
    auto merged = merge_cross_ap_encounters(ev, 60);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].start == 0);
    CHECK(merged[0].end == 200);
    CHECK(merge_cross_ap_encounters(ev, 0) == ev);
    std::vector<EncounterEvent> single{{"A", "B", "AP1", 0, 100}};
    CHECK(merge_cross_ap_encounters(single, 60) == single);
}

TEST_CASE("simultaneous encounters of one pair collapse") {
    auto out = collapse_simultaneous({{"A", "B", "AP1", 0, 100}, {"A", "B", "AP2", 50, 300}});
    REQUIRE(out.size() == 1);
    CHECK(out[0] == EncounterEvent{"A", "B", "AP2", 0, 300});
}

TEST_CASE("sweep line matches brute force on random interval sets") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        auto in = oracle::random_intervals(rng, 2 + trial % 30, 1 + trial % 5, 200, 20'000);
        auto ev = extract_encounters(in, 1 + trial % 3);
        REQUIRE(oracle::as_keys(ev) == oracle::brute_force_encounters(in));
        for (const auto& e : ev) {
            CHECK(e.node_a < e.node_b);
            CHECK(e.start < e.end);
        }
    }
}

TEST_CASE("order-preserving relabeling relabels output") {
    std::mt19937_64 rng(5);
    auto in = oracle::random_intervals(rng, 10, 3, 50, 5000);
    auto relabeled = in;
    for (auto& x : relabeled) x.node_id = "x_" + x.node_id;
    auto a = extract_encounters(in);
    auto b = extract_encounters(relabeled);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(b[i].node_a == "x_" + a[i].node_a);
        CHECK(b[i].node_b == "x_" + a[i].node_b);
        CHECK(b[i].start == a[i].start);
    }
}

TEST_CASE("emitted events lie inside both intervals") {
    std::mt19937_64 rng(9);
    std::vector<AssociationInterval> in;
    for (const auto& x : oracle::random_intervals(rng, 8, 2, 60, 4000)) {
        bool elsewhere = false;
        for (const auto& y : in) elsewhere = elsewhere || (y.node_id == x.node_id && y.start < x.end && x.start < y.end);
        if (!elsewhere) in.push_back(x);
    }
    for (const auto& e : extract_encounters(in)) {
        bool a_inside = false, b_inside = false;
        for (const auto& x : in) {
            if (x.ap_id != e.poi_id) continue;
            if (x.node_id == e.node_a && x.start <= e.start && e.end <= x.end) a_inside = true;
            if (x.node_id == e.node_b && x.start <= e.start && e.end <= x.end) b_inside = true;
        }
        CHECK(a_inside);
        CHECK(b_inside);
    }
}

TEST_CASE("encounter CSV round-trip") {
    std::vector<EncounterEvent> ev{{"A", "B", "AP1", 0, 100}, {"B", "C", "AP2", 5, 9}};
    auto text = format_encounters_csv(ev);
    CHECK(text.rfind("UserA,UserB,PoI Id,Encounter Start Time,Encounter End Time\n", 0) == 0);
    CHECK(parse_encounters_csv(text) == ev);
}
