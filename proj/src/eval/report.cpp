#include "eval/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "error.hpp"

namespace orthoprobe::eval {

using probe::Regime;
using probe::Task;

void ScoreTable::add(Task task, Regime regime, const std::string& language, double value) {
  if (std::find(languages.begin(), languages.end(), language) == languages.end()) languages.push_back(language);
  scores[task][regime][language].push_back(value);
}

bool is_indo_european(const std::string& family) {
  std::string key;
  for (char c : family)
    if (std::isalpha(static_cast<unsigned char>(c))) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return key == "indoeuropean" || key == "ie";
}

const ReportRow* EvaluationReport::find(Task task, Regime regime) const {
  for (const auto& t : tasks) {
    if (t.task != task) continue;
    for (const auto& r : t.rows)
      if (r.regime == regime) return &r;
  }
  return nullptr;
}

namespace {

std::vector<double> finite(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v)
    if (std::isfinite(x)) out.push_back(x);
  return out;
}

ReportCell language_cell(const std::vector<double>& seeds) {
  ReportCell c;
  const auto vals = finite(seeds);
  c.seeds = vals.size();
  if (vals.empty()) return c;
  const auto ms = mean_spread(vals);
  c.value = ms.mean;
  c.spread = ms.stddev;
  return c;
}

/// Per-seed group means: seed s contributes only when every member has a
/// finite value for it.
std::vector<double> group_seed_means(const std::map<std::string, std::vector<double>>& by_lang,
                                     const std::vector<std::string>& members) {
  if (members.empty()) return {};
  std::size_t seeds = SIZE_MAX;
  for (const auto& m : members) {
    auto it = by_lang.find(m);
    seeds = std::min(seeds, it == by_lang.end() ? std::size_t{0} : it->second.size());
  }
  std::vector<double> out;
  for (std::size_t s = 0; s < seeds; ++s) {
    double sum = 0.0;
    bool ok = true;
    for (const auto& m : members) {
      const double v = by_lang.at(m)[s];
      if (!std::isfinite(v)) ok = false;
      sum += v;
    }
    if (ok) out.push_back(sum / static_cast<double>(members.size()));
  }
  return out;
}

ReportCell group_cell(const ReportRow& row, const std::vector<std::string>& members,
                      const std::map<std::string, std::vector<double>>& seeds,
                      const std::map<std::string, std::vector<double>>* baseline, double alpha) {
  ReportCell c;
  double sum = 0.0;
  double dsum = 0.0;
  std::size_t n = 0;
  std::size_t dn = 0;
  for (const auto& m : members) {
    const auto& cell = row.languages.at(m);
    if (cell.value) {
      sum += *cell.value;
      ++n;
    }
    if (cell.delta) {
      dsum += *cell.delta;
      ++dn;
    }
  }
  if (n > 0) c.value = sum / static_cast<double>(n);
  if (dn > 0) c.delta = dsum / static_cast<double>(dn);
  const auto own = group_seed_means(seeds, members);
  c.seeds = own.size();
  if (own.size() > 1) c.spread = mean_spread(own).stddev;
  if (baseline) c.test = welch_t_test(own, group_seed_means(*baseline, members), alpha);
  return c;
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

nlohmann::json cell_json(const ReportCell& c) {
  nlohmann::json j = {{"value", opt(c.value)}, {"delta", opt(c.delta)}, {"spread", c.spread}, {"seeds", c.seeds}};
  if (c.test) {
    if (c.test->applicable) {
      j["test"] = {{"t", std::isfinite(c.test->t) ? nlohmann::json(c.test->t) : nlohmann::json(nullptr)},
                   {"df", c.test->df},
                   {"p_value", c.test->p_value},
                   {"significant", c.test->significant}};
    } else {
      j["test"] = "n/a";
    }
  }
  return j;
}

ReportCell cell_from(const nlohmann::json& j) {
  ReportCell c;
  c.value = opt_from(j, "value");
  c.delta = opt_from(j, "delta");
  c.spread = j.value("spread", 0.0);
  c.seeds = j.value("seeds", std::size_t{0});
  if (j.contains("test")) {
    WelchTest t;
    if (j["test"].is_object()) {
      t.applicable = true;
      t.t = j["test"]["t"].is_null() ? 0.0 : j["test"]["t"].get<double>();
      t.df = j["test"].value("df", 0.0);
      t.p_value = j["test"].value("p_value", 1.0);
      t.significant = j["test"].value("significant", false);
    }
    c.test = t;
  }
  return c;
}

}  // namespace

EvaluationReport aggregate_report(const ScoreTable& table, const FamilyMap& families, double alpha) {
  EvaluationReport report;
  report.languages = table.languages;
  report.alpha = alpha;
  std::vector<std::string> ie;
  std::vector<std::string> non_ie;
  for (const auto& lang : table.languages) {
    auto it = families.find(lang);
    if (it == families.end()) throw ConfigError("language '" + lang + "' has no family assignment");
    (is_indo_european(it->second) ? ie : non_ie).push_back(lang);
  }

  for (const auto& [task, by_regime] : table.scores) {
    TaskReport tr;
    tr.task = task;
    const auto base_it = by_regime.find(Regime::InLang);
    const auto* baseline = base_it == by_regime.end() ? nullptr : &base_it->second;
    for (const auto& [regime, by_lang] : by_regime) {
      ReportRow row;
      row.regime = regime;
      for (const auto& lang : table.languages) {
        auto it = by_lang.find(lang);
        static const std::vector<double> none;
        const auto& seeds = it == by_lang.end() ? none : it->second;
        ReportCell cell = language_cell(seeds);
        report.seed_count = std::max(report.seed_count, seeds.size());
        if (baseline) {
          auto b = baseline->find(lang);
          const auto base_vals = b == baseline->end() ? std::vector<double>{} : finite(b->second);
          if (regime == Regime::InLang) {
            if (cell.value) cell.delta = 0.0;
          } else if (cell.value && !base_vals.empty()) {
            cell.delta = *cell.value - mean_spread(base_vals).mean;
          }
          if (regime != Regime::InLang) cell.test = welch_t_test(finite(seeds), base_vals, alpha);
        }
        row.languages.emplace(lang, cell);
      }
      const auto* base_for_groups = regime == Regime::InLang ? nullptr : baseline;
      row.indo_european = group_cell(row, ie, by_lang, base_for_groups, alpha);
      row.non_indo_european = group_cell(row, non_ie, by_lang, base_for_groups, alpha);
      row.all = group_cell(row, table.languages, by_lang, base_for_groups, alpha);
      tr.rows.push_back(std::move(row));
    }
    report.tasks.push_back(std::move(tr));
  }
  report.metadata = {{"spearman_aggregation", "mean over sentences, then over seeds"},
                     {"significance_test", "two-sided Welch t-test over seeds (toolkit convention)"},
                     {"alpha", alpha},
                     {"indo_european", ie},
                     {"non_indo_european", non_ie}};
  return report;
}

nlohmann::json to_json(const EvaluationReport& r) {
  using nlohmann::json;
  json tasks = json::array();
  for (const auto& t : r.tasks) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json langs = json::object();
      for (const auto& [lang, cell] : row.languages) langs[lang] = cell_json(cell);
      rows.push_back({{"regime", std::string(probe::to_string(row.regime))},
                      {"languages", langs},
                      {"indo_european", cell_json(row.indo_european)},
                      {"non_indo_european", cell_json(row.non_indo_european)},
                      {"all", cell_json(row.all)}});
    }
    tasks.push_back({{"task", std::string(probe::to_string(t.task))}, {"rows", rows}});
  }
  json parsing = json::array();
  for (const auto& p : r.parsing)
    parsing.push_back({{"language", p.language},
                       {"regime", p.regime},
                       {"fewshot", p.fewshot},
                       {"sentences", p.sentences},
                       {"uas", opt(p.uas)},
                       {"uuas", opt(p.uuas)}});
  json meta = r.metadata;
  meta["seed_count"] = r.seed_count;
  return {{"languages", r.languages}, {"seed_count", r.seed_count}, {"alpha", r.alpha},
          {"tasks", tasks},           {"parsing", parsing},        {"metadata", meta}};
}

EvaluationReport report_from_json(const nlohmann::json& j) {
  EvaluationReport r;
  try {
    r.languages = j.at("languages").get<std::vector<std::string>>();
    r.seed_count = j.value("seed_count", std::size_t{0});
    r.alpha = j.value("alpha", 0.05);
    r.metadata = j.value("metadata", nlohmann::json::object());
    for (const auto& t : j.at("tasks")) {
      TaskReport tr;
      tr.task = probe::parse_task(t.at("task").get<std::string>());
      for (const auto& row : t.at("rows")) {
        ReportRow rr;
        rr.regime = probe::parse_regime(row.at("regime").get<std::string>());
        for (const auto& [lang, cell] : row.at("languages").items()) rr.languages.emplace(lang, cell_from(cell));
        rr.indo_european = cell_from(row.at("indo_european"));
        rr.non_indo_european = cell_from(row.at("non_indo_european"));
        rr.all = cell_from(row.at("all"));
        tr.rows.push_back(std::move(rr));
      }
      r.tasks.push_back(std::move(tr));
    }
    if (j.contains("parsing")) {
      for (const auto& p : j["parsing"]) {
        ParsingRow pr;
        pr.language = p.at("language").get<std::string>();
        pr.regime = p.at("regime").get<std::string>();
        pr.fewshot = p.value("fewshot", std::size_t{0});
        pr.sentences = p.value("sentences", std::size_t{0});
        pr.uas = opt_from(p, "uas");
        pr.uuas = opt_from(p, "uuas");
        r.parsing.push_back(pr);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid report JSON: ") + e.what());
  }
  return r;
}

namespace {

std::string fmt_score(const std::optional<double>& v, bool signed_delta) {
  if (!v) return "n/a";
  char buf[32];
  double x = *v;
  if (signed_delta && std::abs(x) < 0.0005) x = 0.0;
  std::snprintf(buf, sizeof buf, signed_delta ? "%+.3f" : "%.3f", x);
  std::string s(buf);
  // ".812" style, as in published tables.
  for (const char* lead : {"0.", "+0.", "-0."}) {
    const std::string l(lead);
    if (s.rfind(l, 0) == 0) s = l.substr(0, l.size() - 2) + s.substr(l.size() - 1);
  }
  return s;
}

std::string mark(const ReportCell& c) {
  if (!c.test) return " ";
  if (!c.test->applicable) return "?";
  return c.test->significant ? "*" : " ";
}

}  // namespace

std::string render_table(const EvaluationReport& r) {
  std::ostringstream out;
  constexpr int kLabel = 14;
  constexpr int kCol = 8;
  auto pad = [](std::string s, int w) {
    if (static_cast<int>(s.size()) < w) s.insert(0, static_cast<std::size_t>(w) - s.size(), ' ');
    return s;
  };
  auto header = [&] {
    out << std::string(kLabel, ' ');
    for (const auto& l : r.languages) out << pad(l, kCol);
    out << pad("I-E", kCol) << pad("N-I-E", kCol) << pad("All", kCol) << '\n';
  };
  for (const auto& t : r.tasks) {
    out << "== " << probe::to_string(t.task) << " (Spearman) ==\n";
    header();
    const bool have_base = std::any_of(t.rows.begin(), t.rows.end(), [](const ReportRow& x) { return x.regime == Regime::InLang; });
    for (const auto& row : t.rows) {
      const bool as_delta = have_base && row.regime != Regime::InLang;
      std::string label = (as_delta ? "d " : "") + std::string(probe::to_string(row.regime));
      out << label << std::string(static_cast<std::size_t>(std::max(0, kLabel - static_cast<int>(label.size()))), ' ');
      auto cell = [&](const ReportCell& c) {
        out << pad(fmt_score(as_delta ? c.delta : c.value, as_delta) + (as_delta ? mark(c) : ""), kCol);
      };
      for (const auto& l : r.languages) cell(row.languages.at(l));
      cell(row.indo_european);
      cell(row.non_indo_european);
      cell(row.all);
      out << '\n';
    }
    out << '\n';
  }
  if (!r.parsing.empty()) {
    out << "== parsing (UAS / UUAS, punctuation excluded) ==\n";
    for (const auto& p : r.parsing) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%-8s %-12s N=%-5zu UAS %s  UUAS %s\n", p.language.c_str(), p.regime.c_str(),
                    p.fewshot, p.uas ? std::to_string(*p.uas * 100.0).substr(0, 5).c_str() : "n/a",
                    p.uuas ? std::to_string(*p.uuas * 100.0).substr(0, 5).c_str() : "n/a");
      out << buf;
    }
    out << '\n';
  }
  out << "seeds: " << r.seed_count << "; * = significant at alpha " << r.alpha
      << " (two-sided Welch t-test), ? = fewer than 2 seeds\n";
  return out.str();
}

}  // namespace orthoprobe::eval
