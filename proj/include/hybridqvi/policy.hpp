// Feedback policy on the solver grid: continuous control per node plus the
// discrete action (autonomous jump selector at A nodes, jump/decline with a
// destination at C nodes).
#ifndef HYBRIDQVI_POLICY_HPP
#define HYBRIDQVI_POLICY_HPP

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "hybridqvi/grid.hpp"

namespace hybridqvi {

enum class CAction : std::uint8_t { None = 0, Decline = 1, Jump = 2 };

struct PolicyEntry {
    NodeTag tag = NodeTag::Free;
    int uIndex = -1;        // free and declined-C nodes
    int vIndex = -1;        // A nodes
    CAction cAction = CAction::None;
    int destIndex = -1;     // index into the grid's destination list
};

struct Policy {
    std::vector<std::vector<PolicyEntry>> entries;  // per chart, per node

    const PolicyEntry& at(int chart, std::size_t node) const {
        return entries.at(chart).at(node);
    }
    // Entry at the grid node nearest to s.
    const PolicyEntry& nearest(const ModelGrid& grid, const HybridState& s) const {
        return entries.at(s.chart).at(grid.charts.at(s.chart).nearestNode(s.x));
    }

    void write_csv(std::ostream& out, const ModelGrid& grid) const;
};

}  // namespace hybridqvi

#endif
