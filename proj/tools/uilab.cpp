#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "uilab/evaluate.hpp"
#include "uilab/families.hpp"
#include "uilab/harness.hpp"
#include "uilab/report.hpp"
#include "uilab/rulemodel.hpp"
#include "uilab/tables.hpp"

namespace {

using namespace uilab;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

struct Config {
  std::string rules;
  std::string prior;
  std::string uis = "myc,tsm,ci";
  std::string evidence;
  std::vector<std::string> queries;
  std::uint64_t seed = 0;
  std::optional<double> tol;
  std::size_t max_iters = 10000;
  std::string format = "text";
  std::string out;
  std::string levels;
  double jitter = 0.01;
  std::size_t threads = 1;
  std::string tsm_lower = "declared";
  std::string table;
  std::string check;
  std::string prior_name = "independent";
  std::string mode = "and";
  std::size_t samples = 100000;
  std::string family;
  std::string case_name;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const Config& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream o(cfg.out, std::ios::binary);
  if (!o) throw InputError("cannot write '" + cfg.out + "'");
  o << text;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

double parse_real(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError("bad number '" + s + "' in " + what);
}

std::vector<UISKind> parse_uis_list(const std::string& s) {
  std::vector<UISKind> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_uis(part));
  if (out.empty()) throw InputError("--uis needs at least one system");
  return out;
}

// "A1=0.9,A2=0.9"
std::vector<std::pair<std::string, double>> parse_evidence(const std::string& s) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& item : split(s, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("evidence item '" + item + "' is not NAME=prob");
    const double v = parse_real(item.substr(eq + 1), "evidence");
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("evidence probability for '" + item.substr(0, eq) + "' outside [0, 1]");
    out.emplace_back(item.substr(0, eq), v);
  }
  return out;
}

FitOptions fit_options(const Config& cfg, double default_tol = FitOptions{}.tolerance) {
  const double tol = cfg.tol.value_or(default_tol);
  if (!(tol > 0.0)) throw InputError("--tol must be positive");
  if (cfg.max_iters == 0) throw InputError("--max-iters must be positive");
  return {tol, cfg.max_iters};
}

// Priors written to disk are reused by later updates, so 'fit' defaults to a
// tighter residual than the per-trial updates.
constexpr double kFitCommandTolerance = 1e-12;

RuleSet load_rules(const Config& cfg) {
  if (cfg.rules.empty()) throw InputError("--rules is required");
  return parse_ruleset(read_file(cfg.rules));
}

JointDistribution load_prior(const Config& cfg) {
  if (!cfg.prior.empty()) {
    try {
      return distribution_from_json(nlohmann::json::parse(read_file(cfg.prior)));
    } catch (const nlohmann::json::exception& e) {
      throw InputError("cannot read prior '" + cfg.prior + "': " + e.what());
    }
  }
  if (!cfg.rules.empty()) return fit_prior(load_rules(cfg), fit_options(cfg)).distribution;
  throw InputError("--prior or --rules is required");
}

int cmd_fit(const Config& cfg) {
  const RuleSet rs = load_rules(cfg);
  const auto fitted = fit_prior(rs, fit_options(cfg, kFitCommandTolerance));
  const auto format = parse_format(cfg.format);
  if (format == OutputFormat::Text) {
    std::string s = fmt::format("converged after {} cycles ({} outer), max residual {:.3e}\n",
                                fitted.report.iterations, fitted.outer_iterations, fitted.report.max_residual);
    const auto& d = fitted.distribution;
    for (std::size_t k = 0; k < d.space().atom_count(); ++k) {
      std::string assignment;
      for (std::size_t i = 0; i < d.space().size(); ++i) assignment += (k >> i) & 1 ? '1' : '0';
      s += fmt::format("{}  {:.12f}\n", assignment, d.atom(k));
    }
    emit(cfg, s);
    return kExitOk;
  }
  nlohmann::json j = to_json(fitted.distribution);
  j["report"] = to_json(fitted.report);
  j["report"]["outer_iterations"] = fitted.outer_iterations;
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : fitted.constraints) cs.push_back({{"constraint", c.label()}, {"value", c.value}});
  j["constraints"] = std::move(cs);
  emit(cfg, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_update(const Config& cfg) {
  const JointDistribution prior = load_prior(cfg);
  std::vector<Constraint> evidence;
  for (const auto& [name, v] : parse_evidence(cfg.evidence)) {
    prior.space().index_of(name);
    evidence.push_back(Constraint::marginal(Formula::atom(name), v));
  }
  const auto post = evidence.empty() ? FitResult{prior, {0, 0.0, true}} : mxe_update(prior, evidence, fit_options(cfg));
  if (cfg.queries.empty()) throw InputError("--query is required");
  Table t{"", {"query", "prior", "posterior"}, {}};
  for (const auto& q : cfg.queries) {
    const Formula f = parse_formula(q);
    check_formula(prior.space(), f);
    t.rows.push_back({to_string(f), format_real(probability(prior, f)), format_real(probability(post.distribution, f))});
  }
  emit(cfg, render(t, parse_format(cfg.format)));
  return kExitOk;
}

int cmd_eval(const Config& cfg) {
  const RuleSet rs = load_rules(cfg);
  const auto fitted = fit_prior(rs, fit_options(cfg));
  const auto systems = parse_uis_list(cfg.uis);
  PosteriorMap leaves;
  std::vector<Constraint> evidence;
  for (const auto& l : rs.leaves()) leaves[l] = rs.leaf_prior(l);
  for (const auto& [name, v] : parse_evidence(cfg.evidence)) {
    if (rs.is_consequent(name) || !rs.space().contains(name))
      throw InputError("evidence '" + name + "' is not a leaf of the rule set");
    leaves[name] = v;
  }
  for (const auto& [name, v] : leaves) evidence.push_back(Constraint::marginal(Formula::atom(name), v));
  const auto mxe = mxe_update(fitted.distribution, evidence, fit_options(cfg)).distribution;
  EvaluateOptions eo;
  eo.tsm_lower_from_prior = cfg.tsm_lower == "prior";
  const auto model = InferenceModel::extract(rs, fitted.distribution);

  Table t{"", {"consequent", "p0", "mxe"}, {}};
  std::vector<PosteriorMap> results;
  for (auto u : systems) {
    t.columns.emplace_back(to_string(u));
    results.push_back(evaluate(u, model, leaves, eo));
  }
  for (const auto& c : rs.consequents()) {
    std::vector<std::string> row = {c, format_real(probability(fitted.distribution, Formula::atom(c))),
                                    format_real(probability(mxe, Formula::atom(c)))};
    for (const auto& r : results) row.push_back(format_real(r.at(c)));
    t.rows.push_back(std::move(row));
  }
  emit(cfg, render(t, parse_format(cfg.format)));
  return kExitOk;
}

std::string stem_of(const std::string& path) {
  auto slash = path.find_last_of('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

int cmd_sweep(const Config& cfg) {
  const RuleSet rs = load_rules(cfg);
  const auto systems = parse_uis_list(cfg.uis);
  SweepOptions so;
  so.fit = fit_options(cfg);
  so.threads = cfg.threads;
  so.case_name = cfg.case_name.empty() ? stem_of(cfg.rules) : cfg.case_name;
  so.evaluate.tsm_lower_from_prior = cfg.tsm_lower == "prior";
  if (!cfg.levels.empty()) {
    so.grid.levels.clear();
    for (const auto& l : split(cfg.levels, ',')) so.grid.levels.push_back(parse_real(l, "--levels"));
  }
  so.grid.jitter = cfg.jitter;
  const auto out = run_sweep(rs, systems, cfg.seed, so);
  switch (parse_format(cfg.format)) {
    case OutputFormat::Csv: emit(cfg, sweep_csv(out)); break;
    case OutputFormat::Json: emit(cfg, sweep_json(out).dump(2) + "\n"); break;
    case OutputFormat::Text: emit(cfg, "case " + so.case_name + "\n" + sweep_text(out)); break;
  }
  for (const auto& r : out.reports)
    if (r.failed_trials)
      std::cerr << fmt::format("warning: {} {} trials failed for {}\n", r.failed_trials, to_string(r.uis),
                               so.case_name);
  return kExitOk;
}

int cmd_tables(const Config& cfg) {
  const auto format = parse_format(cfg.format);
  const std::vector<std::string> ids =
      cfg.table.empty() || cfg.table == "all" ? std::vector<std::string>{"3-1", "3-2", "3-3", "3-4"}
                                              : std::vector<std::string>{cfg.table};
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i && format == OutputFormat::Text) s += "\n";
    s += render(named_table(ids[i], fit_options(cfg)), format);
  }
  emit(cfg, s);
  return kExitOk;
}

int cmd_diagnose(const Config& cfg) {
  const auto format = parse_format(cfg.format);
  const FitOptions fit = fit_options(cfg);
  if (cfg.check == "demorgan") {
    emit(cfg, render(demorgan_table(named_pair_prior(cfg.prior_name), fit), format));
  } else if (cfg.check == "one-datum") {
    BiasMode mode;
    if (cfg.mode == "and") {
      mode = BiasMode::And;
    } else if (cfg.mode == "or") {
      mode = BiasMode::Or;
    } else {
      throw InputError("--mode must be 'and' or 'or'");
    }
    emit(cfg, render(one_datum_table(named_pair_prior(cfg.prior_name), mode, fit), format));
  } else if (cfg.check == "rule-or") {
    emit(cfg, render(rule_or_check_table(cfg.samples, cfg.seed), format));
  } else {
    throw InputError("diagnose needs one of: demorgan, one-datum, rule-or");
  }
  return kExitOk;
}

int cmd_generate(const Config& cfg) {
  if (cfg.family == "list") {
    std::string s;
    for (const auto& c : family_cases()) s += c.name + "  " + c.group + "\n";
    emit(cfg, s);
    return kExitOk;
  }
  FamilyParams p;
  p.fit = fit_options(cfg);
  const RuleSet rs = generate_family(cfg.family, p);
  const std::string header = fmt::format(
      "# {}\n# generated: upper cf {}, lower cf {} (cnd-ind lower cf {}), leaf priors {}\n",
      detail::canonical_family(cfg.family), p.upper, p.lower, p.cnd_ind_lower, p.leaf_prior);
  emit(cfg, header + serialize(rs));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compare heuristic uncertain inference systems against maximum-entropy inference"};
  app.require_subcommand(1);
  Config cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--tol", cfg.tol, "IPFP residual tolerance (fit: 1e-12, otherwise 1e-9)");
    sub->add_option("--max-iters", cfg.max_iters, "IPFP cycle budget");
    sub->add_option("--format", cfg.format, "text, csv or json");
    sub->add_option("--out", cfg.out, "write output here instead of stdout");
  };

  auto* fit = app.add_subcommand("fit", "fit the maximum-entropy prior of a rule set");
  fit->add_option("--rules", cfg.rules, "rule-set file")->required();
  common(fit);

  auto* update = app.add_subcommand("update", "minimum cross-entropy update of a prior");
  update->add_option("--prior", cfg.prior, "prior JSON written by 'fit'");
  update->add_option("--rules", cfg.rules, "rule-set file to fit when no prior is given");
  update->add_option("--evidence", cfg.evidence, "NAME=prob,...");
  update->add_option("--query", cfg.queries, "formula to report (repeatable)");
  common(update);

  auto* eval = app.add_subcommand("eval", "run each inference system on one set of leaf posteriors");
  eval->add_option("--rules", cfg.rules, "rule-set file")->required();
  eval->add_option("--evidence", cfg.evidence, "LEAF=prob,... (others stay at their prior)");
  eval->add_option("--uis", cfg.uis, "comma list of myc, tsm, ci");
  eval->add_option("--tsm-lower", cfg.tsm_lower, "declared or prior")->check(CLI::IsMember({"declared", "prior"}));
  common(eval);

  auto* sweep = app.add_subcommand("sweep", "score inference systems over the input grid");
  sweep->add_option("--rules", cfg.rules, "rule-set file")->required();
  sweep->add_option("--uis", cfg.uis, "comma list of myc, tsm, ci");
  sweep->add_option("--seed", cfg.seed, "master seed")->required();
  sweep->add_option("--levels", cfg.levels, "comma list of grid levels");
  sweep->add_option("--jitter", cfg.jitter, "half-width of the uniform jitter around each level");
  sweep->add_option("--threads", cfg.threads, "worker threads");
  sweep->add_option("--case", cfg.case_name, "case name for reports");
  sweep->add_option("--tsm-lower", cfg.tsm_lower, "declared or prior")->check(CLI::IsMember({"declared", "prior"}));
  common(sweep);

  auto* tables = app.add_subcommand("tables", "print the two-proposition bias tables");
  tables->add_option("table", cfg.table, "3-1, 3-2, 3-3, 3-4 or all");
  common(tables);

  auto* diagnose = app.add_subcommand("diagnose", "DeMorgan, one-datum and rule-or checks");
  diagnose->add_option("check", cfg.check, "demorgan, one-datum or rule-or")->required();
  diagnose->add_option("--prior", cfg.prior_name, "negative, independent or positive");
  diagnose->add_option("--mode", cfg.mode, "and or or (one-datum)");
  diagnose->add_option("--samples", cfg.samples, "random tuples (rule-or)");
  diagnose->add_option("--seed", cfg.seed, "seed (rule-or)");
  common(diagnose);

  auto* generate = app.add_subcommand("generate", "write an experiment family case as a rule file");
  generate->add_option("family", cfg.family, "case name, or 'list'")->required();
  common(generate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*fit) return cmd_fit(cfg);
    if (*update) return cmd_update(cfg);
    if (*eval) return cmd_eval(cfg);
    if (*sweep) return cmd_sweep(cfg);
    if (*tables) return cmd_tables(cfg);
    if (*diagnose) return cmd_diagnose(cfg);
    if (*generate) return cmd_generate(cfg);
  } catch (const NotConverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << fmt::format("residual {:.6e} after {} cycles\n", e.report().max_residual, e.report().iterations);
    return kExitNumerical;
  } catch (const OuterLoopDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
