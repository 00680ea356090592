#pragma once

#include <array>
#include <string>
#include <string_view>

namespace orthoprobe::probe {

enum class Task { DepDepth, DepDistance, LexDepth, LexDistance };

inline constexpr std::array<Task, 4> kAllTasks = {Task::DepDepth, Task::DepDistance, Task::LexDepth,
                                                   Task::LexDistance};

constexpr bool is_distance(Task t) { return t == Task::DepDistance || t == Task::LexDistance; }
constexpr bool is_lexical(Task t) { return t == Task::LexDepth || t == Task::LexDistance; }

std::string_view to_string(Task t);
Task parse_task(std::string_view name);  // ConfigError on unknown names

/// Cross-lingual parameter sharing.
///  InLang:      one map and one scaling vector per (task, language).
///  MappedLangs: one map per language (first language is a frozen identity
///               anchor), scaling vectors shared across languages.
///  AllLangs:    one shared map and shared scaling vectors.
enum class Regime { InLang, MappedLangs, AllLangs };

std::string_view to_string(Regime r);
Regime parse_regime(std::string_view name);

}  // namespace orthoprobe::probe
