#include "mfy/frame_model.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace mfy {

int Frame::psu_index(std::string_view psu_id) const {
    for (int i = 0; i < psu_count(); ++i) {
        if (psus[i].id == psu_id) return i;
    }
    return -1;
}

const Frame& Population::frame(int id) const {
    const Frame* f = find_frame(id);
    if (!f) throw std::invalid_argument("unknown frame id " + std::to_string(id));
    return *f;
}

const Frame* Population::find_frame(int id) const {
    for (const auto& f : frames) {
        if (f.id == id) return &f;
    }
    return nullptr;
}

int Population::unit_index(std::string_view unit_id) const {
    auto it = index_.find(std::string(unit_id));
    return it == index_.end() ? -1 : it->second;
}

void Population::rebuild_index() {
    index_.clear();
    index_.reserve(units.size());
    for (int i = 0; i < static_cast<int>(units.size()); ++i) {
        index_.emplace(units[i].id, i);
    }
}

double Population::unit_yield(int unit) const {
    const UnitRecord& u = units.at(static_cast<std::size_t>(unit));
    if (!u.yield) {
        throw std::runtime_error("missing yield for unit '" + u.id + "'");
    }
    return *u.yield;
}

Population build_population(std::vector<UnitRecord> units,
                            const std::vector<FramePartition>& partitions) {
    Population pop;
    pop.units = std::move(units);

    // Unique unit ids.
    {
        std::unordered_set<std::string> seen;
        for (const auto& u : pop.units) {
            if (!seen.insert(u.id).second) {
                throw std::invalid_argument("duplicate unit id '" + u.id + "'");
            }
        }
    }
    pop.rebuild_index();

    // Declared memberships are checked against the partitions below.
    std::vector<std::map<int, int>> declared;
    declared.reserve(pop.units.size());
    for (auto& u : pop.units) {
        declared.push_back(u.memberships);
        u.memberships.clear();
    }

    std::unordered_set<int> frame_ids;
    for (const auto& part : partitions) {
        if (!frame_ids.insert(part.frame_id).second) {
            throw std::invalid_argument("duplicate frame id " + std::to_string(part.frame_id));
        }
        Frame frame;
        frame.id = part.frame_id;
        std::unordered_set<std::string> psu_ids;
        for (const auto& [psu_id, unit_ids] : part.psus) {
            if (!psu_ids.insert(psu_id).second) {
                throw std::invalid_argument("duplicate psu id '" + psu_id + "' in frame " +
                                            std::to_string(part.frame_id));
            }
            if (unit_ids.empty()) {
                throw std::invalid_argument("psu '" + psu_id + "' of frame " +
                                            std::to_string(part.frame_id) + " is empty");
            }
            Psu psu;
            psu.id = psu_id;
            const int psu_index = static_cast<int>(frame.psus.size());
            for (const auto& uid : unit_ids) {
                const int ui = pop.unit_index(uid);
                if (ui < 0) {
                    throw std::invalid_argument("frame " + std::to_string(part.frame_id) +
                                                " references unknown unit '" + uid + "'");
                }
                auto [it, inserted] = pop.units[ui].memberships.emplace(part.frame_id, psu_index);
                if (!inserted) {
                    throw std::invalid_argument("unit '" + uid + "' listed in two psus of frame " +
                                                std::to_string(part.frame_id));
                }
                psu.units.push_back(ui);
            }
            std::sort(psu.units.begin(), psu.units.end());
            frame.psus.push_back(std::move(psu));
        }
        pop.frames.push_back(std::move(frame));
    }
    std::sort(pop.frames.begin(), pop.frames.end(),
              [](const Frame& a, const Frame& b) { return a.id < b.id; });

    // Completeness and declared-membership consistency.
    for (std::size_t i = 0; i < pop.units.size(); ++i) {
        const UnitRecord& u = pop.units[i];
        if (u.memberships.empty()) {
            throw std::invalid_argument("unit '" + u.id + "' belongs to no frame");
        }
        for (const auto& [fid, psu] : declared[i]) {
            auto it = u.memberships.find(fid);
            if (it == u.memberships.end()) {
                throw std::invalid_argument("unit '" + u.id + "' declared in frame " +
                                            std::to_string(fid) +
                                            " but absent from every psu of that frame");
            }
            (void)psu;
        }
    }
    return pop;
}

DomainKey domain_of(const UnitRecord& unit) {
    DomainKey key;
    key.reserve(unit.memberships.size());
    for (const auto& [fid, psu] : unit.memberships) key.push_back(fid);
    // std::map iterates in key order, so the key is already sorted and
    // independent of frame ordering elsewhere.
    return key;
}

std::map<DomainKey, int> domain_census(const Population& pop) {
    std::map<DomainKey, int> census;
    for (const auto& u : pop.units) ++census[domain_of(u)];
    return census;
}

} // namespace mfy
