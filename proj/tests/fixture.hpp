#pragma once

#include <memory>
#include <string>

#include "dreamkg/engine.hpp"

namespace fixture {

inline std::string path(const std::string& file) { return std::string(DREAMKG_DATA_DIR) + "/" + file; }

inline dreamkg::EnginePaths paths() {
    return {path("dataset.json"), path("gazetteer.json"), path("lexicon.json")};
}

// Tuesday 2026-10-20, noon in Philadelphia.
inline constexpr const char* kTuesdayNoon = "2026-10-20T12:00:00";

inline std::unique_ptr<dreamkg::Engine> engine(const char* clock = kTuesdayNoon, dreamkg::EngineOptions options = {}) {
    return dreamkg::Engine::from_files(paths(), options, dreamkg::FixedClock::from_iso8601(clock));
}

inline const char* kFig2Query = "Is there a library on West Lehigh Avenue with free Wi-Fi on Tuesdays?";

}  // namespace fixture
