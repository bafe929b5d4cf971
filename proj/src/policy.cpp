#include "hybridqvi/policy.hpp"

#include <iomanip>
#include <ostream>

namespace hybridqvi {

namespace {

const char* tag_name(NodeTag t) {
    switch (t) {
        case NodeTag::A: return "A";
        case NodeTag::C: return "C";
        case NodeTag::Free: return "free";
    }
    return "?";
}

const char* action_name(const PolicyEntry& e) {
    switch (e.cAction) {
        case CAction::Jump: return "jump";
        case CAction::Decline: return "decline";
        case CAction::None: return e.tag == NodeTag::A ? "v" : "";
    }
    return "";
}

}  // namespace

void Policy::write_csv(std::ostream& out, const ModelGrid& grid) const {
    int maxDim = 0;
    for (const auto& g : grid.charts) maxDim = std::max(maxDim, g.dim);
    out << "chart,node";
    for (int d = 1; d <= maxDim; ++d) out << ",x" << d;
    out << ",tag,u_index,action,v_index,dest_chart";
    for (int d = 1; d <= maxDim; ++d) out << ",dest_x" << d;
    out << '\n';
    out << std::setprecision(17);

    for (std::size_t ci = 0; ci < entries.size(); ++ci) {
        const ChartGrid& g = grid.charts[ci];
        for (std::size_t i = 0; i < entries[ci].size(); ++i) {
            const PolicyEntry& e = entries[ci][i];
            const Vec x = g.node(i);
            out << ci << ',' << i;
            for (int d = 0; d < maxDim; ++d) {
                out << ',';
                if (d < g.dim) out << x[d];
            }
            out << ',' << tag_name(e.tag) << ',';
            if (e.uIndex >= 0) out << e.uIndex;
            out << ',' << action_name(e) << ',';
            if (e.vIndex >= 0) out << e.vIndex;
            out << ',';
            const bool jump = e.cAction == CAction::Jump && e.destIndex >= 0;
            const HybridState* dest =
                jump ? &grid.destinations.at(e.destIndex) : nullptr;
            if (dest) out << dest->chart;
            for (int d = 0; d < maxDim; ++d) {
                out << ',';
                if (dest && d < static_cast<int>(dest->x.size())) out << dest->x[d];
            }
            out << '\n';
        }
    }
}

}  // namespace hybridqvi
