#include "frag/stopline.hpp"

#include <cmath>
#include <sstream>
#include <stack>

namespace frag {

StoppedConfiguration stop_at(const PathRecord& path, double eta) {
    if (!(eta > path.params.size_floor && eta <= 1.0))
        throw std::invalid_argument("stop_at: eta must lie in (size_floor, 1]");

    struct Node {
        std::uint64_t id;
        double size;  // relative to initial mass
        double birth;
    };

    StoppedConfiguration sc;
    sc.eta = eta;
    std::vector<std::uint64_t> unfinished;

    std::stack<Node> todo;
    todo.push({path.root_id, 1.0, 0.0});
    while (!todo.empty()) {
        Node n = todo.top();
        todo.pop();
        auto it = path.split_index.find(n.id);
        if (it == path.split_index.end()) {
            // Terminal without a split: below the floor it is already past the
            // line (handled by its parent), at or above eta the line is open.
            if (n.size >= eta) unfinished.push_back(n.id);
            continue;
        }
        const JumpEvent& ev = path.events[it->second];
        for (std::size_t i = 0; i < ev.ratios.size(); ++i) {
            double child_size = n.size * ev.ratios[i];
            if (child_size < eta)
                sc.blocks.push_back({child_size, n.size, ev.time});
            else
                todo.push({ev.child_blocks[i], child_size, ev.time});
        }
    }
    if (!unfinished.empty()) {
        std::ostringstream msg;
        msg << "stop_at: incomplete stopping line at eta = " << eta << "; " << unfinished.size()
            << " line(s) of descent have not passed below eta (extend the horizon)";
        throw IncompleteStopLine(msg.str(), std::move(unfinished));
    }
    return sc;
}

double lambda_martingale(const StoppedConfiguration& sc, double p_star) {
    double sum = 0.0;
    for (const auto& b : sc.blocks) sum += std::pow(b.size, 1.0 + p_star);
    return sum;
}

double empirical_mean(const StoppedConfiguration& sc, const TestFunction& f, double p_star) {
    double sum = 0.0;
    for (const auto& b : sc.blocks) sum += std::pow(b.size, 1.0 + p_star) * f(b.size / sc.eta);
    return sum;
}

void write_stopped_csv(const StoppedConfiguration& sc, std::ostream& os) {
    os << "eta,size,parent_size,creation_time\n";
    os.precision(17);
    for (const auto& b : sc.blocks)
        os << sc.eta << ',' << b.size << ',' << b.parent_size << ',' << b.creation_time << '\n';
}

}  // namespace frag
