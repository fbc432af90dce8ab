#pragma once

#include "rejsim/error.hpp"
#include "rejsim/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rejsim {

enum class EventKind : std::uint8_t {
    Transition, ///< node rule firing at `node`
    Attack,     ///< contact attempt from `node` (source) onto `target`
};

struct Event {
    double time;
    NodeId node;
    NodeId target;
    /// Copy of the owner's attempt_seq (Attack) or transition_seq
    /// (Transition) at scheduling time.
    std::uint32_t stamp;
    /// Temporal change counter at scheduling time; an attack is only valid
    /// across edges that existed then.
    std::uint32_t epoch;
    std::uint16_t rule;
    EventKind kind;
};

/// Lazy invalidation: an event whose stamp no longer matches its owner's
/// counter was superseded and carries no meaning.
inline bool is_stale(const Event& e, const NodeRuntime& owner) noexcept
{
    return e.kind == EventKind::Attack ? e.stamp != owner.attempt_seq : e.stamp != owner.transition_seq;
}

/// Binary min-heap of events keyed by time. Ties pop in heap order.
class EventQueue {
public:
    bool empty() const noexcept { return heap_.empty(); }
    std::size_t size() const noexcept { return heap_.size(); }
    std::size_t peak() const noexcept { return peak_; }
    double last_popped_time() const noexcept { return floor_; }
    const Event& top() const { return heap_.front(); }
    std::span<const Event> contents() const noexcept { return heap_; }

    /// Throws NonFiniteTime, or TimeInPast when scheduling before the last
    /// popped time.
    void push(const Event& e)
    {
        if (!std::isfinite(e.time))
            throw Error(Errc::NonFiniteTime, "event time is not finite");
        if (e.time < floor_)
            throw Error(Errc::TimeInPast, "event at " + std::to_string(e.time) + " precedes " + std::to_string(floor_));
        heap_.push_back(e);
        std::push_heap(heap_.begin(), heap_.end(), later);
        peak_ = std::max(peak_, heap_.size());
    }

    std::optional<Event> pop()
    {
        if (heap_.empty())
            return std::nullopt;
        std::pop_heap(heap_.begin(), heap_.end(), later);
        const Event e = heap_.back();
        heap_.pop_back();
        floor_ = e.time;
        return e;
    }

    /// Drops every event; `now` becomes the earliest admissible push time.
    void clear(double now = 0.0)
    {
        heap_.clear();
        floor_ = now;
    }

    /// Rebuilds the heap keeping only events for which `keep(e)` holds.
    template <typename Pred>
    void retain(Pred keep)
    {
        std::erase_if(heap_, [&](const Event& e) { return !keep(e); });
        std::make_heap(heap_.begin(), heap_.end(), later);
    }

    /// Forgets the push floor; used when a run starts over at time `now`.
    void set_floor(double now) noexcept { floor_ = now; }

private:
    static bool later(const Event& a, const Event& b) noexcept { return a.time > b.time; }

    std::vector<Event> heap_;
    std::size_t peak_ = 0;
    double floor_ = 0.0;
};

} // namespace rejsim
