#pragma once

#include <chrono>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dreamkg/kg_store.hpp"
#include "dreamkg/ontology.hpp"

namespace dreamkg {

struct AnyTime {
    bool operator==(const AnyTime&) const = default;
};

/// Open at a specific minute of a specific day.
struct OpenAt {
    Day day = Day::Mon;
    int minute = 0;

    bool operator==(const OpenAt&) const = default;
};

/// Open for some part of [start_min, end_min) on at least one of `days`.
struct OpenDuring {
    std::set<Day> days;
    int start_min = 0;
    int end_min = kMinutesPerDay;

    bool operator==(const OpenDuring&) const = default;
};

using TemporalConstraint = std::variant<AnyTime, OpenAt, OpenDuring>;

bool is_valid(const TemporalConstraint& c) noexcept;

inline constexpr std::string_view kTimezone = "America/New_York";

/// The "now" a query is evaluated against. Always injected, never read ambiently.
struct ClockContext {
    Day now_day = Day::Mon;
    int now_min = 0;

    bool operator==(const ClockContext&) const = default;
};

/// Converts a UTC instant to wall-clock time in America/New_York (US DST rules).
ClockContext clock_from_utc(std::chrono::system_clock::time_point utc);

/// Parses ISO 8601 "YYYY-MM-DDTHH:MM[:SS]" as New York wall time. A trailing "Z" or
/// "+HH:MM"/"-HH:MM" offset makes it an absolute instant that is converted.
std::optional<ClockContext> clock_from_iso8601(std::string_view text);

/// Shifts a UTC instant into New York local time, as a local sys_seconds value.
std::chrono::sys_seconds new_york_local(std::chrono::sys_seconds utc);

bool satisfies(const std::vector<const HoursWindow*>& windows, const TemporalConstraint& c);

/// The windows that make `satisfies` true (all windows under AnyTime).
std::vector<const HoursWindow*> matching_windows(const std::vector<const HoursWindow*>& windows,
                                                 const TemporalConstraint& c);

class UnrecognizedTemporalCue : public std::runtime_error {
public:
    explicit UnrecognizedTemporalCue(const std::string& cue)
        : std::runtime_error("unrecognized temporal cue: '" + cue + "'") {}
};

enum class TemporalFragmentKind {
    Now,        // now, open now, right now, currently, earlier today
    Today,
    LaterToday,
    Tonight,
    Tomorrow,
    Weekend,
    Weekday,
    NamedDay,
    PartOfDay,  // morning, afternoon, evening
    After,
    Before,
    At,
    Between,
};

struct TemporalFragment {
    std::size_t begin = 0;  // byte offsets into the scanned text
    std::size_t end = 0;
    TemporalFragmentKind kind = TemporalFragmentKind::Now;
    std::optional<Day> day;
    int start_min = 0;
    int end_min = 0;
};

/// Finds every temporal expression in `text`, in order of occurrence, non-overlapping.
std::vector<TemporalFragment> scan_temporal(std::string_view text);

/// Constants for the relative day-part phrases.
struct DayParts {
    int tonight_start = 18 * 60;
    int morning_start = 6 * 60;
    int afternoon_start = 12 * 60;
    int evening_start = 17 * 60;
};

/// Resolves a relative cue ("open now", "after 8pm on weekends", "on Tuesdays") against
/// the injected clock. Throws UnrecognizedTemporalCue.
TemporalConstraint resolve_now(std::string_view cue, const ClockContext& clock,
                               const DayParts& parts = {});

/// "11:00 AM"
std::string format_clock_12h(int minute_of_day);

}  // namespace dreamkg
