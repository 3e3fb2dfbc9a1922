#include "dreamkg/temporal.hpp"

#include <algorithm>
#include <cstdio>
#include <regex>

namespace dreamkg {

namespace {

using namespace std::chrono;

Day day_from_weekday(weekday wd) {
    // weekday: Sunday = 0; Day: Mon = 0
    return day_at(static_cast<int>(wd.c_encoding()) + 6);
}

ClockContext context_from_local(sys_seconds local) {
    const auto days = floor<std::chrono::days>(local);
    const auto minute = duration_cast<minutes>(local - days).count();
    return ClockContext{day_from_weekday(weekday{days}), static_cast<int>(minute)};
}

bool overlaps(const HoursWindow& w, int start, int end) {
    return std::max(w.open_min, start) < std::min(w.close_min, end);
}

bool window_matches(const HoursWindow& w, const TemporalConstraint& c) {
    return std::visit(
        [&](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, AnyTime>) {
                return true;
            } else if constexpr (std::is_same_v<T, OpenAt>) {
                return w.day == v.day && w.open_min <= v.minute && v.minute < w.close_min;
            } else {
                return v.days.count(w.day) != 0 && overlaps(w, v.start_min, v.end_min);
            }
        },
        c);
}

// Lowercased-text patterns. A time is "8pm", "8 pm", "8:30 p.m.", "noon", "midnight" or "18:30".
const std::string kTime =
    R"((?:\d{1,2}(?::\d{2})?\s*(?:a\.?m\.?|p\.?m\.?)(?![a-z])|\d{1,2}:\d{2}|noon|midnight))";

std::optional<int> parse_time_token(std::string_view tok) {
    std::string t(tok);
    if (t == "noon") return 12 * 60;
    if (t == "midnight") return 0;
    static const std::regex re(R"((\d{1,2})(?::(\d{2}))?\s*(a|p)?)");
    std::smatch m;
    if (!std::regex_search(t, m, re)) return std::nullopt;
    int h = std::stoi(m[1].str());
    const int mins = m[2].matched ? std::stoi(m[2].str()) : 0;
    if (mins > 59) return std::nullopt;
    if (m[3].matched) {
        if (h < 1 || h > 12) return std::nullopt;
        h %= 12;
        if (m[3].str() == "p") h += 12;
    } else if (h > 23) {
        return std::nullopt;
    }
    return h * 60 + mins;
}

struct Pattern {
    std::regex re;
    TemporalFragmentKind kind;
};

const std::vector<Pattern>& patterns() {
    using K = TemporalFragmentKind;
    static const std::vector<Pattern> all = [] {
        const auto icase = std::regex::ECMAScript | std::regex::optimize;
        const std::string t = "(" + kTime + ")";
        std::vector<Pattern> v;
        v.push_back({std::regex(R"(\b(?:between|from)\s+)" + t + R"(\s*(?:and|to|-|until)\s*)" + t, icase),
                     K::Between});
        v.push_back({std::regex(R"(\b(?:after|past|from)\s+)" + t, icase), K::After});
        v.push_back({std::regex(R"(\b(?:before|until|till|by)\s+)" + t, icase), K::Before});
        v.push_back({std::regex(R"(\b(?:at|around)\s+)" + t, icase), K::At});
        v.push_back({std::regex(R"(\b)" + t, icase), K::At});
        v.push_back({std::regex(R"(\b(?:earlier today|right now|open now|currently|at the moment|now)\b)", icase),
                     K::Now});
        v.push_back({std::regex(R"(\blater today\b)", icase), K::LaterToday});
        v.push_back({std::regex(R"(\b(?:tonight|this evening)\b)", icase), K::Tonight});
        v.push_back({std::regex(R"(\btoday\b)", icase), K::Today});
        v.push_back({std::regex(R"(\btomorrow\b)", icase), K::Tomorrow});
        v.push_back({std::regex(R"(\b(?:on |this |over the |during the )?weekends?\b)", icase), K::Weekend});
        v.push_back({std::regex(R"(\b(?:on )?weekdays\b|\bduring the week\b)", icase), K::Weekday});
        v.push_back({std::regex(
                         R"(\b(?:on |this |next )?(monday|tuesday|wednesday|thursday|friday|saturday|sunday)s?\b)",
                         icase),
                     K::NamedDay});
        v.push_back({std::regex(R"(\b(?:in the|this) (morning|afternoon|evening)\b)", icase), K::PartOfDay});
        return v;
    }();
    return all;
}

void fill_fragment(TemporalFragment& f, const std::smatch& m, const DayParts& parts) {
    using K = TemporalFragmentKind;
    switch (f.kind) {
        case K::Between:
            f.start_min = parse_time_token(m[1].str()).value_or(-1);
            f.end_min = parse_time_token(m[2].str()).value_or(-1);
            break;
        case K::After:
        case K::Before:
        case K::At:
            f.start_min = parse_time_token(m[1].str()).value_or(-1);
            break;
        case K::NamedDay:
            f.day = day_from_text(m[1].str());
            break;
        case K::PartOfDay: {
            const auto part = m[1].str();
            if (part == "morning") {
                f.start_min = parts.morning_start;
                f.end_min = parts.afternoon_start;
            } else if (part == "afternoon") {
                f.start_min = parts.afternoon_start;
                f.end_min = parts.evening_start;
            } else {
                f.start_min = parts.evening_start;
                f.end_min = kMinutesPerDay;
            }
            break;
        }
        default:
            break;
    }
}

}  // namespace

bool is_valid(const TemporalConstraint& c) noexcept {
    return std::visit(
        [](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, AnyTime>) {
                return true;
            } else if constexpr (std::is_same_v<T, OpenAt>) {
                return v.minute >= 0 && v.minute <= kMinutesPerDay;
            } else {
                return !v.days.empty() && v.start_min >= 0 && v.end_min <= kMinutesPerDay &&
                       v.start_min < v.end_min;
            }
        },
        c);
}

sys_seconds new_york_local(sys_seconds utc) {
    const auto ymd = year_month_day{floor<days>(utc)};
    const auto y = ymd.year();
    // US rules since 2007: second Sunday in March 02:00 EST to first Sunday in November 02:00 EDT.
    const sys_seconds dst_start = sys_days{y / March / Sunday[2]} + hours{7};
    const sys_seconds dst_end = sys_days{y / November / Sunday[1]} + hours{6};
    const bool dst = utc >= dst_start && utc < dst_end;
    return utc - (dst ? hours{4} : hours{5});
}

ClockContext clock_from_utc(system_clock::time_point utc) {
    return context_from_local(new_york_local(floor<seconds>(utc)));
}

std::optional<ClockContext> clock_from_iso8601(std::string_view text) {
    static const std::regex re(
        R"(^(\d{4})-(\d{2})-(\d{2})[T ](\d{2}):(\d{2})(?::(\d{2})(?:\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?$)");
    std::string s(text);
    std::smatch m;
    if (!std::regex_match(s, m, re)) return std::nullopt;
    const year_month_day ymd{year{std::stoi(m[1].str())}, month{static_cast<unsigned>(std::stoi(m[2].str()))},
                             day{static_cast<unsigned>(std::stoi(m[3].str()))}};
    if (!ymd.ok()) return std::nullopt;
    const int hh = std::stoi(m[4].str());
    const int mm = std::stoi(m[5].str());
    const int ss = m[6].matched ? std::stoi(m[6].str()) : 0;
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    sys_seconds stamp = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
    if (!m[7].matched) return context_from_local(stamp);
    const auto zone = m[7].str();
    if (zone != "Z") {
        const int sign = zone[0] == '-' ? -1 : 1;
        std::string digits;
        for (char c : zone.substr(1))
            if (c != ':') digits.push_back(c);
        const int off = std::stoi(digits.substr(0, 2)) * 60 + std::stoi(digits.substr(2, 2));
        stamp -= minutes{sign * off};
    }
    return context_from_local(new_york_local(stamp));
}

bool satisfies(const std::vector<const HoursWindow*>& windows, const TemporalConstraint& c) {
    if (std::holds_alternative<AnyTime>(c)) return true;
    return std::any_of(windows.begin(), windows.end(),
                       [&](const HoursWindow* w) { return window_matches(*w, c); });
}

std::vector<const HoursWindow*> matching_windows(const std::vector<const HoursWindow*>& windows,
                                                 const TemporalConstraint& c) {
    std::vector<const HoursWindow*> out;
    std::copy_if(windows.begin(), windows.end(), std::back_inserter(out),
                 [&](const HoursWindow* w) { return window_matches(*w, c); });
    return out;
}

std::vector<TemporalFragment> scan_temporal(std::string_view text) {
    const auto lower = ascii_lower(text);
    std::vector<TemporalFragment> found;
    const DayParts parts;
    for (const auto& p : patterns()) {
        for (auto it = std::sregex_iterator(lower.begin(), lower.end(), p.re); it != std::sregex_iterator();
             ++it) {
            const auto& m = *it;
            TemporalFragment f;
            f.begin = static_cast<std::size_t>(m.position(0));
            f.end = f.begin + static_cast<std::size_t>(m.length(0));
            f.kind = p.kind;
            fill_fragment(f, m, parts);
            found.push_back(f);
        }
    }
    std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        if (a.begin != b.begin) return a.begin < b.begin;
        return (a.end - a.begin) > (b.end - b.begin);
    });
    std::vector<TemporalFragment> accepted;
    for (const auto& f : found) {
        const bool clash = std::any_of(accepted.begin(), accepted.end(), [&](const auto& a) {
            return f.begin < a.end && a.begin < f.end;
        });
        if (!clash) accepted.push_back(f);
    }
    return accepted;
}

TemporalConstraint resolve_now(std::string_view cue, const ClockContext& clock, const DayParts& parts) {
    using K = TemporalFragmentKind;
    const auto fragments = scan_temporal(cue);
    const std::string cue_text(cue);
    if (fragments.empty()) throw UnrecognizedTemporalCue(cue_text);

    bool now = false;
    bool other = false;
    std::set<Day> days;
    int lo = 0;
    int hi = kMinutesPerDay;
    std::optional<int> at;

    for (const auto& f : fragments) {
        if (f.kind != K::Now && f.kind != K::Today) other = true;
        switch (f.kind) {
            case K::Now: now = true; break;
            case K::Today: days.insert(clock.now_day); break;
            case K::LaterToday:
                days.insert(clock.now_day);
                lo = std::max(lo, clock.now_min);
                break;
            case K::Tonight:
                days.insert(clock.now_day);
                lo = std::max(lo, parts.tonight_start);
                break;
            case K::Tomorrow: days.insert(next_day(clock.now_day)); break;
            case K::Weekend: days.insert({Day::Sat, Day::Sun}); break;
            case K::Weekday: days.insert({Day::Mon, Day::Tue, Day::Wed, Day::Thu, Day::Fri}); break;
            case K::NamedDay:
                if (!f.day) throw UnrecognizedTemporalCue(cue_text);
                days.insert(*f.day);
                break;
            case K::PartOfDay:
            case K::Between:
                if (f.start_min < 0 || f.end_min < 0) throw UnrecognizedTemporalCue(cue_text);
                lo = std::max(lo, f.start_min);
                hi = std::min(hi, f.end_min);
                break;
            case K::After:
                if (f.start_min < 0) throw UnrecognizedTemporalCue(cue_text);
                lo = std::max(lo, f.start_min);
                break;
            case K::Before:
                if (f.start_min < 0) throw UnrecognizedTemporalCue(cue_text);
                hi = std::min(hi, f.start_min == 0 ? kMinutesPerDay : f.start_min);
                break;
            case K::At:
                if (f.start_min < 0 || (at && *at != f.start_min)) throw UnrecognizedTemporalCue(cue_text);
                at = f.start_min;
                break;
        }
    }

    if (now) {
        if (other) throw UnrecognizedTemporalCue(cue_text);
        return OpenAt{clock.now_day, clock.now_min};
    }
    if (days.empty()) days.insert(clock.now_day);
    if (at) {
        if (*at < lo || *at >= hi) throw UnrecognizedTemporalCue(cue_text);
        if (days.size() == 1) return OpenAt{*days.begin(), *at};
        return OpenDuring{days, *at, *at + 1};
    }
    if (lo >= hi) throw UnrecognizedTemporalCue(cue_text);
    return OpenDuring{days, lo, hi};
}

std::string format_clock_12h(int minute_of_day) {
    const int m = ((minute_of_day % kMinutesPerDay) + kMinutesPerDay) % kMinutesPerDay;
    int h = m / 60;
    const bool pm = h >= 12;
    h %= 12;
    if (h == 0) h = 12;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%d:%02d %s", h, m % 60, pm ? "PM" : "AM");
    return buf;
}

}  // namespace dreamkg
