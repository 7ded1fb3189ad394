#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mobicomm/contact_graph.hpp"
#include "mobicomm/encounter.hpp"
#include "mobicomm/ingest.hpp"

namespace mobicomm {

/// Seeded generator with platform-independent derived distributions
/// (the standard library distributions are implementation-defined).
class Random {
public:
    explicit Random(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform in [0, n), unbiased.
    std::uint64_t index(std::uint64_t n);
    /// Exponential with the given mean.
    double exponential(double mean);
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

enum class SyntheticModel { PreferentialAttachment, SmallWorld };

struct SyntheticSpec {
    SyntheticModel model = SyntheticModel::SmallWorld;
    std::size_t nodes = 0;
    std::size_t m = 2;     // edges per arriving node (preferential attachment)
    std::size_t k = 2;     // ring degree, k / 2 neighbours per side (small world)
    double p = 0.0;        // rewiring probability (small world)
    std::uint64_t seed = 1;
};

/// DomainError unless N > m >= 1 (preferential attachment) or
/// N > k >= 2, k even, 0 <= p <= 1 (small world).
void validate(const SyntheticSpec& spec);

/// Clique on m + 1 nodes, then each arriving node links to m distinct
/// existing nodes sampled proportionally to degree. Node ids "0".."N-1".
ContactGraph barabasi_albert(const SyntheticSpec& spec);

/// Ring lattice with k / 2 neighbours per side; each lattice edge is rewired
/// with probability p to a uniform target that creates neither a self-loop
/// nor a parallel edge.
ContactGraph watts_strogatz(const SyntheticSpec& spec);

ContactGraph generate(const SyntheticSpec& spec);

struct ContactTraceSpec {
    std::size_t nodes = 200;
    double days = 30;
    double contacts_per_node_per_day = 5;
    double mean_contact_seconds = 600;
    std::uint64_t seed = 1;
};

/// Homogeneous Poisson contact process: contacts start at rate
/// nodes * contacts_per_node_per_day / 2 per day between uniform random
/// pairs, with exponential durations (at least one second), clipped to the
/// trace span [0, days * 86400]. Overlapping contacts of one pair are
/// joined. poi_id is "synthetic".
std::vector<EncounterEvent> poisson_contact_trace(const ContactTraceSpec& spec);

struct AssociationLogSpec {
    std::size_t nodes = 1000;
    std::size_t access_points = 100;
    double days = 7;
    double sessions_per_node_per_day = 2;
    double mean_session_seconds = 3600;
    /// Probability that a session ends with a short hop to another AP and
    /// back (a ping-pong artifact).
    double ping_pong_probability = 0.1;
    std::uint64_t seed = 1;
};

/// Start/Stop association log of nodes visiting access points. Each node
/// prefers a few home APs so contacts recur. Sorted by timestamp.
std::vector<SessionRecord> synthetic_association_log(const AssociationLogSpec& spec);

}  // namespace mobicomm
