#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eval/stats.hpp"
#include "json.hpp"
#include "probe/task.hpp"

namespace orthoprobe::eval {

/// Raw per-seed scores, indexed [task][regime][language]. NaN marks a
/// seed that produced no score.
struct ScoreTable {
  std::vector<std::string> languages;  // column order
  std::map<probe::Task, std::map<probe::Regime, std::map<std::string, std::vector<double>>>> scores;

  void add(probe::Task task, probe::Regime regime, const std::string& language, double value);
};

/// language -> family name. "Indo-European" (any case, with or without the
/// hyphen) forms the IE group; everything else is non-IE.
using FamilyMap = std::map<std::string, std::string>;

bool is_indo_european(const std::string& family);

struct ReportCell {
  std::optional<double> value;  // mean over seeds (or over member languages)
  std::optional<double> delta;  // value - InLang value, when InLang is in the table
  double spread = 0.0;          // sample std. dev. over seeds
  std::size_t seeds = 0;
  std::optional<WelchTest> test;  // regime vs InLang over seeds
};

struct ReportRow {
  probe::Regime regime = probe::Regime::InLang;
  std::map<std::string, ReportCell> languages;
  ReportCell indo_european;
  ReportCell non_indo_european;
  ReportCell all;
};

struct TaskReport {
  probe::Task task = probe::Task::DepDistance;
  std::vector<ReportRow> rows;
};

struct ParsingRow {
  std::string language;
  std::string regime;
  std::size_t fewshot = 0;
  std::size_t sentences = 0;
  std::optional<double> uas;
  std::optional<double> uuas;
};

struct EvaluationReport {
  std::vector<std::string> languages;
  std::vector<TaskReport> tasks;
  std::size_t seed_count = 0;
  double alpha = 0.05;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<ParsingRow> parsing;

  const ReportRow* find(probe::Task task, probe::Regime regime) const;
};

/// Per-language seed means, IE / non-IE / all averages (arithmetic mean of
/// member languages), deltas against InLang and Welch tests. ConfigError when
/// a language is missing from `families`.
EvaluationReport aggregate_report(const ScoreTable& table, const FamilyMap& families, double alpha = 0.05);

nlohmann::json to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& j);

/// Aligned text table: per-language columns plus I-E / N-I-E / All, one
/// block per task, InLang absolute and other regimes as deltas with `*`
/// marking significant differences.
std::string render_table(const EvaluationReport& report);

}  // namespace orthoprobe::eval
