#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dreamkg {

// The five service domains the graph and the query front end understand.
enum class Category : std::uint8_t { Food, MentalHealth, Shelter, Library, SocialSecurity };

inline constexpr std::array<Category, 5> kAllCategories{
    Category::Food, Category::MentalHealth, Category::Shelter, Category::Library,
    Category::SocialSecurity};

enum class Cost : std::uint8_t { Free, Paid, SlidingScale, Unknown };

inline constexpr std::array<Cost, 4> kAllCosts{Cost::Free, Cost::Paid, Cost::SlidingScale,
                                               Cost::Unknown};

enum class Day : std::uint8_t { Mon, Tue, Wed, Thu, Fri, Sat, Sun };

inline constexpr std::array<Day, 7> kAllDays{Day::Mon, Day::Tue, Day::Wed, Day::Thu,
                                             Day::Fri, Day::Sat, Day::Sun};

inline constexpr int kMinutesPerDay = 1440;

/// Machine token, e.g. "mental_health". Used in the dataset, compiled queries and logs.
std::string_view to_token(Category c) noexcept;
std::optional<Category> category_from_token(std::string_view token) noexcept;

/// Human label used on stop headers ("Library", "Mental Health").
std::string_view display_label(Category c) noexcept;

std::string_view to_token(Cost c) noexcept;
std::optional<Cost> cost_from_token(std::string_view token) noexcept;
std::string_view display_label(Cost c) noexcept;

/// Maps free-text cost strings from source data onto the four-value enum.
/// Matching is case-insensitive; anything not in the lookup table is Unknown.
Cost normalize_cost(std::string_view text) noexcept;

/// "Mon".."Sun".
std::string_view to_token(Day d) noexcept;
/// Accepts "Tue", "tue", "Tuesday", "tuesdays".
std::optional<Day> day_from_text(std::string_view text) noexcept;
std::string_view full_name(Day d) noexcept;

constexpr int index_of(Day d) noexcept { return static_cast<int>(d); }
constexpr Day day_at(int index) noexcept { return static_cast<Day>(((index % 7) + 7) % 7); }
constexpr Day next_day(Day d) noexcept { return day_at(index_of(d) + 1); }

/// Lowercase ASCII snake_case: [a-z0-9]+(_[a-z0-9]+)*
bool is_feature_tag(std::string_view tag) noexcept;

std::string ascii_lower(std::string_view text);

}  // namespace dreamkg
