#pragma once

#include <fmt/format.h>

#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uilab/error.hpp"
#include "uilab/harness.hpp"
#include "uilab/joint.hpp"
#include "uilab/maxent.hpp"

namespace uilab {

enum class OutputFormat { Text, Csv, Json };

inline OutputFormat parse_format(std::string_view s) {
  if (s == "text") return OutputFormat::Text;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw InvalidArgument("unknown output format '" + std::string(s) + "'");
}

/// Shortest text that reads back to the same double.
inline std::string format_real(double v) { return fmt::format("{}", v); }

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const FitReport& r) {
  return {{"iterations", r.iterations}, {"max_residual", r.max_residual}, {"converged", r.converged}};
}

inline nlohmann::json to_json(const JointDistribution& d) {
  nlohmann::json atoms = nlohmann::json::array();
  for (double a : d.atoms()) atoms.push_back(a);
  return {{"props", d.space().names()}, {"atoms", std::move(atoms)}};
}

/// Reads {"props": [...], "atoms": [...]}; atoms are renormalized.
inline JointDistribution distribution_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("props") || !j.contains("atoms"))
    throw InvalidArgument("distribution JSON needs 'props' and 'atoms'");
  std::vector<std::string> props;
  for (const auto& p : j.at("props")) {
    if (!p.is_string()) throw InvalidArgument("'props' must hold strings");
    props.push_back(p.get<std::string>());
  }
  std::vector<double> atoms;
  for (const auto& a : j.at("atoms")) {
    if (!a.is_number()) throw InvalidArgument("'atoms' must hold numbers");
    atoms.push_back(a.get<double>());
  }
  PropositionSpace space(std::move(props));
  if (atoms.size() != space.atom_count()) throw InvalidArgument("atom count does not match 2^props");
  return JointDistribution::normalized(space, std::move(atoms));
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// One row per (uis, trial, query consequent).
inline std::string sweep_csv(const SweepOutcome& out) {
  std::string s = "uis,trial";
  for (const auto& l : out.leaves) s += "," + l;
  s += ",consequent,p0,p_u1,p_m1,delta_u,delta_m,zeta,error\n";
  for (std::size_t u = 0; u < out.reports.size(); ++u) {
    const std::string uis(to_string(out.reports[u].uis));
    for (const auto& t : out.trials[u]) {
      std::string head = fmt::format("{},{}", uis, t.index);
      for (double v : t.leaf_values) head += fmt::format(",{:.17g}", v);
      if (t.error) {
        std::string msg = *t.error;
        for (char& c : msg)
          if (c == ',' || c == '\n' || c == '"') c = ' ';
        s += head + ",,,,,,,," + msg + "\n";
        continue;
      }
      for (const auto& c : t.consequents)
        s += fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},\n", head, c.name, c.p0, c.p_u1,
                         c.p_m1, c.delta_u, c.delta_m, c.zeta);
    }
  }
  return s;
}

inline nlohmann::json to_json(const SweepReport& r) {
  nlohmann::json j = {{"case", r.case_name},
                      {"uis", std::string(to_string(r.uis))},
                      {"trial_count", r.trial_count},
                      {"failed_trials", r.failed_trials},
                      {"mean_zeta", r.mean_zeta},
                      {"seed", r.seed}};
  j["mean_zeta_mixed"] = r.mean_zeta_mixed ? nlohmann::json(*r.mean_zeta_mixed) : nlohmann::json(nullptr);
  if (r.regression) {
    j["regression"] = {{"slope", r.regression->slope},
                       {"intercept", r.regression->intercept},
                       {"r_squared", r.regression->r_squared}};
  } else {
    j["regression"] = nullptr;
  }
  return j;
}

inline nlohmann::json sweep_json(const SweepOutcome& out) {
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& r : out.reports) reports.push_back(to_json(r));
  return {{"leaves", out.leaves}, {"queries", out.queries}, {"reports", std::move(reports)}};
}

inline std::string sweep_text(const SweepOutcome& out) {
  std::string s = fmt::format("{:<5} {:>7} {:>7} {:>10} {:>10} {:>9} {:>10} {:>7}\n", "uis", "trials", "failed",
                              "mean_zeta", "mixed", "slope", "intercept", "r2");
  for (const auto& r : out.reports) {
    const std::string mixed = r.mean_zeta_mixed ? fmt::format("{:.4f}", *r.mean_zeta_mixed) : "-";
    std::string reg = fmt::format("{:>9} {:>10} {:>7}", "-", "-", "-");
    if (r.regression)
      reg = fmt::format("{:>9.4f} {:>10.4f} {:>7.4f}", r.regression->slope, r.regression->intercept,
                        r.regression->r_squared);
    s += fmt::format("{:<5} {:>7} {:>7} {:>10.4f} {:>10} {}\n", to_string(r.uis), r.trial_count, r.failed_trials,
                     r.mean_zeta, mixed, reg);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Generic tables
// ---------------------------------------------------------------------------

/// Header plus string cells, rendered as aligned text, CSV, or JSON.
struct Table {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline std::string render(const Table& t, OutputFormat f) {
  if (f == OutputFormat::Json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : t.rows) {
      nlohmann::json row = nlohmann::json::object();
      for (std::size_t i = 0; i < t.columns.size() && i < r.size(); ++i) {
        try {
          std::size_t used = 0;
          const double v = std::stod(r[i], &used);
          row[t.columns[i]] = used == r[i].size() ? nlohmann::json(v) : nlohmann::json(r[i]);
        } catch (const std::exception&) {
          row[t.columns[i]] = r[i];
        }
      }
      rows.push_back(std::move(row));
    }
    return nlohmann::json{{"title", t.title}, {"rows", std::move(rows)}}.dump(2) + "\n";
  }
  if (f == OutputFormat::Csv) {
    std::string s;
    for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
    s += "\n";
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
      s += "\n";
    }
    return s;
  }
  std::vector<std::size_t> width(t.columns.size());
  for (std::size_t i = 0; i < t.columns.size(); ++i) width[i] = t.columns[i].size();
  for (const auto& r : t.rows)
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
  std::string s = t.title.empty() ? "" : t.title + "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) s += fmt::format("{}{:>{}}", i ? "  " : "", cells[i], width[i]);
    s += "\n";
  };
  line(t.columns);
  for (const auto& r : t.rows) line(r);
  return s;
}

inline std::string signed_fixed(double v, int digits) {
  if (v == 0.0) v = 0.0;  // drop negative zero
  std::string s = fmt::format("{:+.{}f}", v, digits);
  return s;
}

}  // namespace uilab
