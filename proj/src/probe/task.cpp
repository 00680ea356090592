#include "probe/task.hpp"

#include <algorithm>
#include <cctype>

#include "error.hpp"

namespace orthoprobe::probe {

std::string_view to_string(Task t) {
  switch (t) {
    case Task::DepDepth: return "dep_depth";
    case Task::DepDistance: return "dep_distance";
    case Task::LexDepth: return "lex_depth";
    case Task::LexDistance: return "lex_distance";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  for (Task t : kAllTasks)
    if (to_string(t) == name) return t;
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::InLang: return "InLang";
    case Regime::MappedLangs: return "MappedLangs";
    case Regime::AllLangs: return "AllLangs";
  }
  return "?";
}

Regime parse_regime(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
  std::erase(key, '-');
  std::erase(key, '_');
  if (key == "inlang") return Regime::InLang;
  if (key == "mappedlangs" || key == "mappedl") return Regime::MappedLangs;
  if (key == "alllangs" || key == "alll") return Regime::AllLangs;
  throw ConfigError("unknown regime '" + std::string(name) + "' (expected InLang, MappedLangs or AllLangs)");
}

}  // namespace orthoprobe::probe
