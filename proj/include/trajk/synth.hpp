#pragma once

#include <cstdint>
#include <vector>

#include "trajk/anonymizer.hpp"
#include "trajk/records.hpp"
#include "trajk/road_graph.hpp"

namespace trajk {

/// Knobs for the synthetic city generator. Everything downstream is a pure
/// function of these values; in particular, the same seed reproduces the
/// same city and the same traffic byte for byte.
struct SynthParams {
    std::uint64_t seed = 1;
    int grid = 20;                   // grid x grid lattice of intersections
    double arterial_fraction = 0.2;  // fraction of grid lines promoted to arterials
    int users = 500;                 // trips per period (history and current)
    int samples_per_user = 2;        // sparse samples per current-period trip
    double base_lat = 35.0;
    double base_lon = 139.0;
    double spacing_deg = 0.001;  // lattice pitch, roughly 100 m
};

/// A generated city: the lattice road network with designated arterial
/// corridors, one hour of current-period traffic, and the preceding hour
/// of history-period traffic. History trips carry waypoint-dense samples
/// that pin their routes; current trips are sampled sparsely so the route
/// between samples must be estimated. Trips are drawn from a shared
/// template pool, biased to travel along arterials when any exist.
struct SynthCity {
    RoadGraph graph;
    std::vector<SegmentKey> arterial_edges;  // sorted canonical keys
    std::vector<LocationRecord> current_records;
    std::vector<LocationRecord> history_records;
};

SynthCity synth_city(const SynthParams& params);

}  // namespace trajk
