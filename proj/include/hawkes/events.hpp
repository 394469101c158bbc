#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hawkes {

struct Event {
    double t = 0.0;
    int component = 0;  // 0-based in memory; 1-based in files
};

// Time-sorted marked points on [warmup_start, T]. Events before time 0 are
// warm-up history, not part of the observed counting processes.
struct EventStream {
    int d = 1;
    double T = 0.0;
    double warmup_start = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::vector<Event> events;

    void validate() const {
        for (std::size_t i = 0; i < events.size(); ++i) {
            const Event& e = events[i];
            if (e.component < 0 || e.component >= d)
                throw std::runtime_error("EventStream: component out of range");
            if (e.t < warmup_start || e.t > T)
                throw std::runtime_error("EventStream: event time outside [warmup_start, T]");
            if (i > 0 && e.t - events[i - 1].t < 1e-12)
                throw std::runtime_error("EventStream: degenerate tie between event times");
        }
    }

    std::size_t count_in(double a, double b, int component_filter = -1) const {
        std::size_t n = 0;
        for (const Event& e : events)
            if (e.t >= a && e.t < b && (component_filter < 0 || e.component == component_filter)) ++n;
        return n;
    }
};

inline void save_events(const EventStream& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write event file: " + path);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", s.T);
    out << "# hawkes-events v1 d=" << s.d << " T=" << buf << "\n";
    for (const Event& e : s.events) {
        std::snprintf(buf, sizeof(buf), "%.9f,%d\n", e.t, e.component + 1);
        out << buf;
    }
}

inline EventStream load_events(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read event file: " + path);
    std::string header;
    std::getline(in, header);
    EventStream s;
    if (std::sscanf(header.c_str(), "# hawkes-events v1 d=%d T=%lf", &s.d, &s.T) != 2)
        throw std::runtime_error("bad event file header: " + header);
    std::string line;
    double prev = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double t;
        int m;
        if (std::sscanf(line.c_str(), "%lf,%d", &t, &m) != 2)
            throw std::runtime_error("bad event line: " + line);
        if (m < 1 || m > s.d) throw std::runtime_error("event component out of range: " + line);
        if (!(t > prev)) throw std::runtime_error("event times not strictly increasing at: " + line);
        prev = t;
        s.events.push_back({t, m - 1});
    }
    s.warmup_start = s.events.empty() ? 0.0 : std::min(0.0, s.events.front().t);
    return s;
}

}  // namespace hawkes
