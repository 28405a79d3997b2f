#pragma once
// Finite population with overlapping sampling frames.
//
// A Population is a flat list of units (villages / ground plots / pixel fill)
// plus one or more frames. Each frame partitions its member units into
// primary units (districts or spectral clusters); the units listed under a
// psu are that frame's second-stage units. A unit may appear in several
// frames under different psu parents; identity is the global unit id.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mfy {

struct UnitRecord {
    std::string id;
    std::optional<std::pair<double, double>> location; // world (x, y)
    std::optional<double> yield;                       // kg/ha; empty for fill units
    std::map<int, int> memberships;                    // frame id -> psu index in that frame
};

struct Psu {
    std::string id;
    std::vector<int> units; // indices into Population::units, sorted
    int size() const { return static_cast<int>(units.size()); } // M_i
};

struct Frame {
    int id = 0;
    std::vector<Psu> psus;

    int psu_count() const { return static_cast<int>(psus.size()); } // N
    long long ssu_total() const {                                   // M0
        long long t = 0;
        for (const auto& p : psus) t += p.size();
        return t;
    }
    double mbar() const { // average ssus per psu, full precision
        return static_cast<double>(ssu_total()) / static_cast<double>(psu_count());
    }
    int psu_index(std::string_view psu_id) const;
};

// Frame-membership pattern of a unit: sorted frame ids.
using DomainKey = std::vector<int>;

struct FramePartition {
    int frame_id = 0;
    std::vector<std::pair<std::string, std::vector<std::string>>> psus; // psu id -> unit ids
};

struct Population {
    std::vector<UnitRecord> units;
    std::vector<Frame> frames; // sorted by id
    std::optional<double> true_mean;

    const Frame& frame(int id) const;
    const Frame* find_frame(int id) const;
    int unit_index(std::string_view unit_id) const; // -1 if absent
    void rebuild_index();

    double unit_yield(int unit) const; // throws on missing yield

private:
    std::unordered_map<std::string, int> index_;
};

// Validates and assembles a population. Derived counts are always computed
// from the partitions, never taken on trust. Units may pre-declare
// memberships (they are checked against the partitions) or leave them empty
// (they are derived).
Population build_population(std::vector<UnitRecord> units,
                            const std::vector<FramePartition>& partitions);

DomainKey domain_of(const UnitRecord& unit);

// Diagnostic: domain -> unit count over the whole population.
std::map<DomainKey, int> domain_census(const Population& pop);

} // namespace mfy
