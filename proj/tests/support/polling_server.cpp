#include "polling_server.hpp"

#include <deque>

namespace platoon::testing {

std::vector<double> exhaustive_polling_starts(const std::vector<Arrival>& arrivals, double b, double s)
{
    std::vector<double> start(arrivals.size(), 0.0);
    std::deque<std::size_t> queue[2];
    std::size_t next = 0;
    int lane = arrivals.empty() ? 0 : arrivals.front().lane - 1;
    double free_at = -1e300;
    auto admit = [&](double before) {
        for (; next < arrivals.size() && arrivals[next].earliest < before; ++next) {
            queue[arrivals[next].lane - 1].push_back(next);
        }
    };
    while (true) {
        admit(free_at);
        std::size_t who = 0;
        double at = 0.0;
        if (!queue[lane].empty()) {
            who = queue[lane].front();
            queue[lane].pop_front();
            at = free_at;
        } else if (!queue[1 - lane].empty()) {
            lane = 1 - lane;
            who = queue[lane].front();
            queue[lane].pop_front();
            at = free_at + s;
        } else if (next < arrivals.size()) {
            // idle: the next arrival is served at once or after the setup
            who = next++;
            const int l = arrivals[who].lane - 1;
            at = l == lane ? arrivals[who].earliest : std::max(arrivals[who].earliest, free_at + s);
            lane = l;
        } else {
            break;
        }
        start[who] = at;
        free_at = at + b;
    }
    return start;
}

}  // namespace platoon::testing
