#include "dreamkg/ontology.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

namespace dreamkg {

namespace {

constexpr std::array<std::pair<std::string_view, Cost>, 14> kCostLookup{{
    {"free", Cost::Free},
    {"no cost", Cost::Free},
    {"free of charge", Cost::Free},
    {"no charge", Cost::Free},
    {"paid", Cost::Paid},
    {"fee", Cost::Paid},
    {"fee required", Cost::Paid},
    {"fee-based", Cost::Paid},
    {"sliding scale", Cost::SlidingScale},
    {"sliding_scale", Cost::SlidingScale},
    {"sliding-scale", Cost::SlidingScale},
    {"income-based", Cost::SlidingScale},
    {"unknown", Cost::Unknown},
    {"", Cost::Unknown},
}};

std::string trim_lower(std::string_view text) {
    auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    auto end = text.find_last_not_of(" \t\r\n");
    return ascii_lower(text.substr(begin, end - begin + 1));
}

}  // namespace

std::string ascii_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) {
        return static_cast<char>(std::tolower(ch));
    });
    return out;
}

std::string_view to_token(Category c) noexcept {
    switch (c) {
        case Category::Food: return "food";
        case Category::MentalHealth: return "mental_health";
        case Category::Shelter: return "shelter";
        case Category::Library: return "library";
        case Category::SocialSecurity: return "social_security";
    }
    return "food";
}

std::optional<Category> category_from_token(std::string_view token) noexcept {
    for (auto c : kAllCategories)
        if (to_token(c) == token) return c;
    return std::nullopt;
}

std::string_view display_label(Category c) noexcept {
    switch (c) {
        case Category::Food: return "Food";
        case Category::MentalHealth: return "Mental Health";
        case Category::Shelter: return "Shelter";
        case Category::Library: return "Library";
        case Category::SocialSecurity: return "Social Security";
    }
    return "Food";
}

std::string_view to_token(Cost c) noexcept {
    switch (c) {
        case Cost::Free: return "free";
        case Cost::Paid: return "paid";
        case Cost::SlidingScale: return "sliding_scale";
        case Cost::Unknown: return "unknown";
    }
    return "unknown";
}

std::optional<Cost> cost_from_token(std::string_view token) noexcept {
    for (auto c : kAllCosts)
        if (to_token(c) == token) return c;
    return std::nullopt;
}

std::string_view display_label(Cost c) noexcept {
    switch (c) {
        case Cost::Free: return "Free";
        case Cost::Paid: return "Paid";
        case Cost::SlidingScale: return "Sliding Scale";
        case Cost::Unknown: return "Cost Unknown";
    }
    return "Cost Unknown";
}

Cost normalize_cost(std::string_view text) noexcept {
    const auto key = trim_lower(text);
    for (const auto& [name, cost] : kCostLookup)
        if (name == key) return cost;
    return Cost::Unknown;
}

std::string_view to_token(Day d) noexcept {
    static constexpr std::array<std::string_view, 7> names{"Mon", "Tue", "Wed", "Thu",
                                                           "Fri", "Sat", "Sun"};
    return names[static_cast<std::size_t>(index_of(d))];
}

std::string_view full_name(Day d) noexcept {
    static constexpr std::array<std::string_view, 7> names{
        "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"};
    return names[static_cast<std::size_t>(index_of(d))];
}

std::optional<Day> day_from_text(std::string_view text) noexcept {
    auto key = trim_lower(text);
    if (key.size() > 3 && key.back() == 's') key.pop_back();
    for (auto d : kAllDays) {
        if (key == ascii_lower(to_token(d)) || key == ascii_lower(full_name(d))) return d;
    }
    return std::nullopt;
}

bool is_feature_tag(std::string_view tag) noexcept {
    if (tag.empty() || tag.front() == '_' || tag.back() == '_') return false;
    char prev = '\0';
    for (char ch : tag) {
        const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_';
        if (!ok) return false;
        if (ch == '_' && prev == '_') return false;
        prev = ch;
    }
    return true;
}

}  // namespace dreamkg
