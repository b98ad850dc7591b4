#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>

#include "cosetnet/net.hpp"

namespace cosetnet {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum ExitCode { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2 };

/// Parameters of one run. `workers` and `out` do not influence results and
/// are left out of reports.
struct RunConfig {
  std::string group = "free:2";
  std::string subgroup = "1";
  int radius = 6;
  std::optional<int> k, D, C1;
  std::string out;
  int margin = 1;
  bool exhaustive = true;
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  int workers = 1;
  bool diagnostic = false;
  std::string which = "lambda";

  /// key=value lines in fixed key order.
  std::string canonical() const {
    std::ostringstream os;
    auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("auto"); };
    os << "C1=" << opt(C1) << '\n'
       << "D=" << opt(D) << '\n'
       << "diagnostic=" << (diagnostic ? "true" : "false") << '\n'
       << "group=" << group << '\n'
       << "k=" << opt(k) << '\n'
       << "margin=" << margin << '\n'
       << "mode=" << (exhaustive ? "exhaustive" : "sampled") << '\n'
       << "out=" << out << '\n'
       << "radius=" << radius << '\n'
       << "samples=" << samples << '\n'
       << "seed=" << seed << '\n'
       << "subgroup=" << subgroup << '\n'
       << "which=" << which << '\n'
       << "workers=" << workers << '\n';
    return os.str();
  }

  /// Applies one key=value setting.
  void set(const std::string& key, const std::string& value) {
    auto integer = [&](const std::string& v) {
      try {
        std::size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<int>(x);
      } catch (const std::exception&) {
        throw UsageError("config: '" + key + "' expects an integer, got '" + v + "'");
      }
    };
    auto opt = [&](const std::string& v) -> std::optional<int> {
      if (v == "auto") return std::nullopt;
      return integer(v);
    };
    auto boolean = [&](const std::string& v) {
      if (v == "true" || v == "1") return true;
      if (v == "false" || v == "0") return false;
      throw UsageError("config: '" + key + "' expects true/false");
    };
    if (key == "group") group = value;
    else if (key == "subgroup") subgroup = value;
    else if (key == "radius") radius = integer(value);
    else if (key == "k") k = opt(value);
    else if (key == "D") D = opt(value);
    else if (key == "C1") C1 = opt(value);
    else if (key == "out") out = value;
    else if (key == "margin") margin = integer(value);
    else if (key == "mode") {
      if (value != "exhaustive" && value != "sampled") throw UsageError("config: mode must be exhaustive or sampled");
      exhaustive = value == "exhaustive";
    } else if (key == "samples") samples = static_cast<std::size_t>(integer(value));
    else if (key == "seed") seed = static_cast<std::uint64_t>(integer(value));
    else if (key == "workers") workers = integer(value);
    else if (key == "diagnostic") diagnostic = boolean(value);
    else if (key == "which") which = value;
    else throw UsageError("config: unknown key '" + key + "'");
  }

  /// Reads key=value lines; '#' starts a comment.
  void apply_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      auto trim = [](std::string s) {
        const char* ws = " \t\r";
        s.erase(0, s.find_first_not_of(ws));
        s.erase(s.find_last_not_of(ws) + 1);
        return s;
      };
      line = trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) throw UsageError("config: expected key=value, got '" + line + "'");
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }

  static RunConfig parse(const std::string& text) {
    RunConfig c;
    c.apply_text(text);
    return c;
  }

  void validate() const {
    if (radius < 2) throw UsageError("radius must be >= 2");
    if (margin < 0) throw UsageError("margin must be >= 0");
    if (workers < 1) throw UsageError("workers must be >= 1");
    if (k && *k < 1) throw UsageError("k must be >= 1");
    if (D && *D < 1) throw UsageError("D must be >= 1");
    if (C1 && *C1 < 0) throw UsageError("C1 must be >= 0");
  }
};

inline std::filesystem::path artifact_dir(const RunConfig& c) {
  return std::filesystem::path(c.out) / c.group / c.subgroup / std::to_string(c.radius);
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

inline void export_automaton(const std::filesystem::path& dir, const std::string& name, const Automaton& a) {
  write_file(dir / (name + ".json"), to_json(a).dump(2) + "\n");
  write_file(dir / (name + ".dot"), to_dot(a, "M"));
}

struct ParsedSpecs {
  GroupOracle group;
  SubgroupSpec subgroup;
};

inline ParsedSpecs parse_specs(const RunConfig& c) {
  try {
    GroupOracle g = parse_group(c.group);
    SubgroupSpec h = parse_subgroup(g, c.subgroup);
    return {std::move(g), std::move(h)};
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

inline DeltaMode delta_mode(const RunConfig& c) {
  return c.exhaustive ? DeltaMode::exhaustive_scan(c.workers) : DeltaMode::sampled(c.samples, c.seed, c.workers);
}

inline nlohmann::json profile_json(const HyperbolicityProfile& p) {
  return {{"delta_thin2", p.delta_thin2},
          {"delta_four_point2", p.delta_four_point2},
          {"exhaustive", p.exhaustive},
          {"sample_size", p.sample_size}};
}

struct AnalyzeResult {
  nlohmann::json report;
  std::string csv;
  int exit_code = kExitOk;
  std::vector<std::string> failed;
};

/// ball -> delta, K -> cosets, slack check, C1 -> cone types, Lambda, L_n ->
/// S-language -> brute-force crosscheck -> section -> defect.
inline AnalyzeResult cmd_analyze(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  auto [g, h] = parse_specs(cfg);
  const int R = cfg.radius;
  AnalyzeResult res;
  nlohmann::json& rep = res.report;
  nlohmann::json checks = nlohmann::json::object();
  auto check = [&](const std::string& name, bool ok) {
    checks[name] = ok;
    if (!ok) res.failed.push_back(name);
  };

  rep["family"] = g.label();
  rep["subgroup"] = h.label;
  rep["R"] = R;
  rep["hyperbolic_family"] = g.hyperbolic();

  log << "ball B(" << R << ") for " << g.label() << "\n";
  Ball ball = build_ball(g, R);
  rep["ball_size"] = ball.size();

  auto prof = estimate_delta(ball, delta_mode(cfg));
  rep["delta"] = profile_json(prof);
  rep["delta"]["stable"] = delta_stable(ball, delta_mode(cfg), prof);

  SubgroupBall hb = subgroup_elements(g, h, 2 * R);
  check("subgroup_ball_exact", hb.exact);
  if (!hb.exact) {
    rep["checks"] = checks;
    res.exit_code = kExitCheckFailed;
    return res;
  }
  auto K = estimate_quasiconvexity(ball, hb, cfg.workers);
  rep["K"] = K.K;

  int C1 = cfg.C1 ? *cfg.C1 : 2 * prof.delta_thin2 + 2 * K.K + 8;
  rep["C1_estimate"] = C1;

  log << "coset table\n";
  CosetTable ct = build_coset_table(ball, hb, cfg.workers);
  const int lemma_radius = std::min(R, 6);
  Lemma5AReport lemma = check_lemma_5A(ct, lemma_radius);
  bool raised = false;
  if (!cfg.C1 && lemma.max_slack > C1) {
    C1 = lemma.max_slack;
    raised = true;
  }
  rep["C1"] = C1;
  rep["C1_raised"] = raised;
  rep["C1_override"] = cfg.C1.has_value();
  rep["lemma5A_radius"] = lemma_radius;
  rep["lemma5A_max_slack"] = lemma.max_slack;
  rep["lemma5A_pairs"] = lemma.pairs;
  rep["S_coset_diameter_max"] = lemma.max_S_diameter;
  check("lemma5A", lemma.max_slack <= C1 && lemma.max_S_diameter <= C1);

  std::vector<Element> section = build_section(ct);
  std::vector<Element> worst = build_section(ct, true);
  check("section_property", section_property_holds(ct, section, membership_for(g, h, 2 * R)));
  const int margin = std::min(cfg.margin, R - 1);
  const int defect = net_defect(ball, section_image(ball, section, R), margin, R);
  const int worst_defect = net_defect(ball, section_image(ball, worst, R), margin, R);
  std::size_t s_size = 0;
  for (const auto& s : ct.S) s_size += s.size();
  rep["coset_count"] = ct.count();
  rep["S_size"] = s_size;
  rep["section_size"] = section.size();
  rep["margin"] = margin;
  rep["certified_region"] = R - margin;
  rep["net_defect"] = defect;
  rep["net_defect_certified"] = defect <= margin;
  rep["net_defect_worst_section"] = worst_defect;

  auto rows = radius_table(ct, section, margin, lemma);
  res.csv = radius_csv(rows);
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : rows)
    table.push_back({{"R", r.R}, {"coset_count", r.coset_count}, {"S_size", r.S_size}, {"defect", r.defect},
                     {"lemma5A_max_slack", r.lemma5A_max_slack}});
  rep["radius_table"] = table;

  // Verdict from the last three radii of the defect table.
  std::string verdict = "UNDETERMINED";
  if (rows.size() >= 3) {
    const int a = rows[rows.size() - 3].defect, b2 = rows[rows.size() - 2].defect, c = rows.back().defect;
    if (a < b2 && b2 < c) verdict = "NOT-A-NET";
    else if (a == b2 && b2 == c && defect <= margin) verdict = "NET";
  }
  rep["verdict"] = verdict;
  if (g.hyperbolic()) check("net_verdict", verdict == "NET");
  if (verdict == "NOT-A-NET") log << "finding: defect grows with R, NOT-A-NET\n";

  auto act = action_displacement(ct, section, 2, C1);
  rep["action_check_max"] = act.max_displacement;
  rep["action_excess_max"] = act.max_excess;
  rep["action_cosets_checked"] = act.cosets_checked;
  check("action", act.max_excess <= 0);

  nlohmann::json automata = nlohmann::json::object();
  std::optional<Automaton> s_lang, lambda_h, lambda;
  if (!g.hyperbolic()) {
    automata["skipped"] = "family is not hyperbolic";
  } else {
    try {
      const int k = cfg.k ? *cfg.k : default_cone_radius(prof);
      if (k > R - 1) throw UsageError("radius too small for signature radius k=" + std::to_string(k));
      log << "cone types k=" << k << "\n";
      auto table_ct = compute_cone_types(ball, k, cfg.workers);
      PipelineOptions opt;
      if (cfg.D) opt.D = *cfg.D;
      ConePipeline pipe(ball, std::move(table_ct), prof.delta_thin2, opt);
      automata["k"] = k;
      automata["cone_classes"] = pipe.table().num_classes();
      automata["cone_classes_within"] = pipe.table().classes_within;
      automata["lambda_states"] = pipe.lambda().num_states();
      auto in_h = membership_for(g, h, 2 * R);
      auto lh = subgroup_geodesics(ball, pipe.lambda(), in_h, K.K, std::min(pipe.table().region, 6));
      automata["lambda_H_states"] = lh.automaton.num_states();
      automata["lambda_H_tracker_K"] = lh.K;
      log << "S-language C1=" << C1 << "\n";
      auto S = build_S_language(pipe, lh.automaton, C1, cfg.diagnostic);
      automata["D"] = pipe.difference_bound();
      automata["S_states"] = S.S.num_states();
      const int c3 = completion_distance(S.S);
      automata["completion_distance"] = c3;
      rep["completion_distance"] = c3;
      check("completion_distance", c3 <= static_cast<int>(S.S.num_states()));
      auto brute = compute_S_bruteforce(ball, hb, R, cfg.workers);
      auto cc = oracle_crosscheck(S.S, brute, ball, R);
      rep["oracle_agreement"] = cc.agree;
      rep["oracle_radius"] = R;
      if (!cc.agree) rep["oracle_discrepancy"] = {{"witness", cc.witness}, {"side", cc.witness_side}};
      check("oracle_agreement", cc.agree);
      if (cfg.diagnostic) {
        auto pc = oracle_crosscheck(S.union_form, brute, ball, R);
        nlohmann::json d = {{"union_form_equals_corrected", equivalent(S.union_form, S.S)},
                            {"union_form_agrees_with_bruteforce", pc.agree}};
        if (!pc.agree) d["union_form_witness"] = pc.witness;
        rep["diagnostic"] = d;
      }
      s_lang = std::move(S.S);
      lambda_h = std::move(lh.automaton);
      lambda = pipe.lambda();
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      automata["error"] = e.what();
      check("automata", false);
    }
  }
  rep["automata"] = automata;
  rep["checks"] = checks;
  rep["failed_checks"] = res.failed;
  res.exit_code = res.failed.empty() ? kExitOk : kExitCheckFailed;

  if (!cfg.out.empty()) {
    auto dir = artifact_dir(cfg);
    write_file(dir / "report.json", rep.dump(2) + "\n");
    write_file(dir / "radius_table.csv", res.csv);
    if (lambda) export_automaton(dir, "lambda", *lambda);
    if (lambda_h) export_automaton(dir, "lambda_H", *lambda_h);
    if (s_lang) export_automaton(dir, "S_C1-" + std::to_string(C1), *s_lang);
    log << "wrote " << dir.string() << "\n";
  }
  return res;
}

/// Builds one named object: lambda, Ln:n, S, P:c, R, Rc:c.
inline int cmd_automata(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  cfg.validate();
  auto [g, h] = parse_specs(cfg);
  if (!g.hyperbolic()) throw UsageError("automata need a hyperbolic family");
  const std::string& which = cfg.which;
  auto arg = [&](const std::string& prefix) -> std::optional<std::string> {
    if (which.rfind(prefix, 0) == 0) return which.substr(prefix.size());
    return std::nullopt;
  };
  auto letter = [&](const std::string& s) {
    if (s.size() != 1 || !g.alphabet().contains(s[0])) throw UsageError("unknown letter '" + s + "'");
    return g.alphabet().letter(s[0]);
  };
  Ball ball = build_ball(g, cfg.radius);
  auto prof = estimate_delta(ball, delta_mode(cfg));
  const int k = cfg.k ? *cfg.k : default_cone_radius(prof);
  if (k > cfg.radius - 1) throw UsageError("radius too small for signature radius k=" + std::to_string(k));
  PipelineOptions opt;
  if (cfg.D) opt.D = *cfg.D;
  ConePipeline pipe(ball, compute_cone_types(ball, k, cfg.workers), prof.delta_thin2, opt);
  Automaton result;
  std::string name;
  if (which == "lambda") {
    result = pipe.lambda();
    name = "lambda_k-" + std::to_string(k);
  } else if (auto n = arg("Ln:")) {
    int v = 0;
    try {
      v = std::stoi(*n);
    } catch (const std::exception&) {
      throw UsageError("bad L_n index '" + *n + "'");
    }
    if (v < 0) throw UsageError("L_n index must be >= 0");
    result = pipe.L(v);
    name = "L" + std::to_string(v) + "_k-" + std::to_string(k);
  } else if (auto c = arg("P:")) {
    Letter l = letter(*c);
    for (int i = 0; i < 3; ++i) {
      std::string nm = "P" + std::to_string(i) + "_" + *c + "_k-" + std::to_string(k);
      const Automaton& p = pipe.P(l)[static_cast<std::size_t>(i)];
      if (!cfg.out.empty()) export_automaton(artifact_dir(cfg), nm, p);
      out << nm << ": states=" << p.num_states() << "\n";
    }
    result = pipe.P(l)[2];
    name = "P2_" + *c + "_k-" + std::to_string(k);
  } else if (which == "R") {
    result = pipe.R();
    name = "R_k-" + std::to_string(k);
  } else if (auto c2 = arg("Rc:")) {
    result = pipe.R_c(letter(*c2));
    name = "Rc_" + *c2 + "_k-" + std::to_string(k);
  } else if (which == "S") {
    SubgroupBall hb = subgroup_elements(g, h, 2 * cfg.radius);
    auto K = estimate_quasiconvexity(ball, hb, cfg.workers);
    const int C1 = cfg.C1 ? *cfg.C1 : 2 * prof.delta_thin2 + 2 * K.K + 8;
    auto lh = subgroup_geodesics(ball, pipe.lambda(), membership_for(g, h, 2 * cfg.radius), K.K,
                                 std::min(pipe.table().region, 6));
    result = build_S_language(pipe, lh.automaton, C1).S;
    name = "S_C1-" + std::to_string(C1) + "_k-" + std::to_string(k);
    out << "completion_distance=" << completion_distance(result) << "\n";
  } else {
    throw UsageError("unknown automaton '" + which + "' (lambda, Ln:n, S, P:c, R, Rc:c)");
  }
  auto counts = count_by_length(result, 6);
  std::uint64_t total = 0;
  for (auto v : counts) total += v;
  out << name << ": states=" << result.num_states() << " tapes=" << result.tapes()
      << " accepted_upto_6=" << total << "\n";
  if (!cfg.out.empty()) {
    export_automaton(artifact_dir(cfg), name, result);
    log << "wrote " << (artifact_dir(cfg) / name).string() << ".{json,dot}\n";
  }
  return kExitOk;
}

/// Delta estimates, K, ray constant, growth and cone-type counts.
inline nlohmann::json cmd_geometry(const RunConfig& cfg) {
  cfg.validate();
  auto [g, h] = parse_specs(cfg);
  Ball ball = build_ball(g, cfg.radius);
  nlohmann::json rep;
  rep["family"] = g.label();
  rep["R"] = cfg.radius;
  auto prof = estimate_delta(ball, delta_mode(cfg));
  rep["delta"] = profile_json(prof);
  rep["delta"]["stable"] = delta_stable(ball, delta_mode(cfg), prof);
  rep["ray_constant"] = ray_extension_constant(ball);
  nlohmann::json growth = nlohmann::json::array();
  for (int n = 0; n <= cfg.radius; ++n) growth.push_back({{"n", n}, {"sphere", ball.sphere_size(n)}, {"ball", ball.count_within(n)}});
  rep["growth"] = growth;
  if (!h.trivial()) {
    rep["subgroup"] = h.label;
    SubgroupBall hb = subgroup_elements(g, h, cfg.radius);
    rep["K"] = estimate_quasiconvexity(ball, hb, cfg.workers).K;
    rep["subgroup_ball_exact"] = hb.exact;
  }
  nlohmann::json cones = nlohmann::json::array();
  const int kmax = cfg.k ? *cfg.k : std::min(cfg.radius - 1, default_cone_radius(prof));
  for (int k = 1; k <= std::min(kmax, cfg.radius - 1); ++k) {
    nlohmann::json row = {{"k", k}};
    try {
      auto t = compute_cone_types(ball, k, cfg.workers);
      row["classes"] = t.num_classes();
      row["classes_within"] = t.classes_within;
      row["acceptor_valid"] = !validate_acceptor(ball, minimize(geodesic_acceptor(t)), t.region).has_value();
    } catch (const ConeTypeError& e) {
      row["acceptor_valid"] = false;
      row["note"] = e.what();
    }
    cones.push_back(row);
  }
  rep["cone_types"] = cones;
  if (!cfg.out.empty()) write_file(artifact_dir(cfg) / "geometry.json", rep.dump(2) + "\n");
  return rep;
}

}  // namespace cosetnet
