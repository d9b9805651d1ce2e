#include "causal/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "causal/dsep.hpp"
#include "causal/error.hpp"
#include "causal/identify.hpp"
#include "causal/io.hpp"
#include "causal/mediation.hpp"
#include "causal/oracle.hpp"
#include "causal/pom.hpp"
#include "causal/scm.hpp"
#include "causal/stbn.hpp"

namespace causal {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot read file: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "X1=0.5,X2=1" -> ordered (name, value-text) pairs.
std::vector<std::pair<std::string, std::string>> split_assignments(
    const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& item : split_list(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw QueryError("expected name=value, got '" + item + "'");
    }
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

double to_real(const std::string& text, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw QueryError(what + " must be numeric, got '" + text + "'");
  }
}

std::string render_path(const Path& p) {
  std::string out = p.nodes.front();
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    out += p.steps[i] == Step::Along ? " -> " : " <- ";
    out += p.nodes[i + 1];
  }
  return out;
}

const Dag& graph_of(const ModelDocument& doc) {
  if (const auto* dag = std::get_if<Dag>(&doc)) return *dag;
  if (const auto* lin = std::get_if<LinearScm>(&doc)) return lin->graph();
  if (const auto* cpt = std::get_if<CptModel>(&doc)) return cpt->graph();
  throw QueryError(
      "this subcommand needs a model with a plain graph (dag, linear_scm or "
      "cpt_model)");
}

const char* kind_name(const ModelDocument& doc) {
  struct Visitor {
    const char* operator()(const Dag&) const { return "dag"; }
    const char* operator()(const LinearScm&) const { return "linear_scm"; }
    const char* operator()(const CptModel&) const { return "cpt_model"; }
    const char* operator()(const StbnTemplate&) const {
      return "stbn_template";
    }
    const char* operator()(const PomTable&) const { return "pom_table"; }
  };
  return std::visit(Visitor{}, doc);
}

json distribution_json(const std::map<std::string, double>& dist) {
  json out = json::object();
  for (const auto& [value, p] : dist) out[value] = round12(p);
  return out;
}

json violations_json(const std::vector<PositivityViolation>& violations) {
  json out = json::array();
  for (const auto& v : violations) {
    out.push_back(json{{"stratum", v.stratum},
                       {"n_treated", v.n_treated},
                       {"n_control", v.n_control},
                       {"singleton", v.singleton}});
  }
  return out;
}

void print_table(const json& j, std::ostream& out, const std::string& prefix) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.value().is_object() || it.value().is_array()) {
        out << prefix << it.key() << ":\n";
        print_table(it.value(), out, prefix + "  ");
      } else {
        out << prefix << it.key() << ": " << it.value().dump() << "\n";
      }
    }
  } else if (j.is_array()) {
    for (const auto& item : j) {
      if (item.is_object() || item.is_array()) {
        out << prefix << "-\n";
        print_table(item, out, prefix + "  ");
      } else {
        out << prefix << "- " << item.dump() << "\n";
      }
    }
  } else {
    out << prefix << j.dump() << "\n";
  }
}

struct Options {
  std::string model_path;
  std::uint64_t seed = 0;
  std::string output = "json";
};

void emit(const json& result, const Options& opt, std::ostream& out) {
  if (opt.output == "table") {
    print_table(result, out, "");
  } else {
    out << result.dump(2) << "\n";
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"causal inference engine over directed acyclic graphical "
               "models"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--model", opt.model_path, "path to a model document");
  app.add_option("--seed", opt.seed, "random seed for sampling commands");
  app.add_option("--output", opt.output, "output format: json or table")
      ->check(CLI::IsMember({"json", "table"}));

  auto* validate = app.add_subcommand("validate", "parse and check a model");

  auto* dsep = app.add_subcommand("dsep", "d-separation query");
  std::string dsep_x, dsep_y, dsep_given;
  dsep->add_option("--x", dsep_x, "comma-separated node set")->required();
  dsep->add_option("--y", dsep_y, "comma-separated node set")->required();
  dsep->add_option("--given", dsep_given, "comma-separated conditioning set");

  auto* backdoor = app.add_subcommand("backdoor", "back-door paths and "
                                      "criterion");
  std::string bd_t, bd_y, bd_w;
  backdoor->add_option("--t", bd_t, "treatment node(s)")->required();
  backdoor->add_option("--y", bd_y, "outcome node")->required();
  CLI::Option* bd_w_opt =
      backdoor->add_option("--w", bd_w, "candidate adjustment set");

  auto* identify = app.add_subcommand(
      "identify", "symbolic interventional identification");
  std::string id_do, id_target;
  identify->add_option("--do", id_do, "intervention sources")->required();
  identify->add_option("--target", id_target, "target node")->required();

  auto* do_cmd = app.add_subcommand(
      "do", "numeric interventional distribution (cpt_model)");
  std::string do_assignments, do_target;
  do_cmd->add_option("--do", do_assignments, "interventions, e.g. T=1")
      ->required();
  do_cmd->add_option("--target", do_target, "target node")->required();

  auto* counterfactual = app.add_subcommand(
      "counterfactual", "abduction-action-prediction (linear_scm)");
  std::string cf_observe, cf_do, cf_target;
  counterfactual->add_option("--observe", cf_observe, "full observation")
      ->required();
  counterfactual->add_option("--do", cf_do, "interventions")->required();
  counterfactual->add_option("--target", cf_target, "report only this node");

  auto* simulate = app.add_subcommand("simulate", "draw samples from a model");
  std::size_t sim_n = 0;
  simulate->add_option("--n", sim_n, "number of rows")->required();

  auto* unroll_cmd =
      app.add_subcommand("unroll", "expand an stbn_template to a dag");
  int unroll_horizon = 0;
  unroll_cmd->add_option("--horizon", unroll_horizon, "number of timestamps")
      ->required();

  auto* stbn_q = app.add_subcommand(
      "stbn-query", "interventional query on an unrolled STBN");
  std::string stbn_cpts, stbn_target, stbn_do;
  stbn_q->add_option("--cpts", stbn_cpts, "cpt_model over the unrolled nodes")
      ->required();
  stbn_q->add_option("--target", stbn_target, "composite target, e.g. X@2")
      ->required();
  stbn_q->add_option("--do", stbn_do, "schedule, e.g. X@0=1,Y@1=0");

  auto* match = app.add_subcommand("match", "counterfactual imputation by "
                                   "matching (pom_table)");
  std::string match_method = "exact";
  double match_radius = 0.0;
  match->add_option("--method", match_method, "exact or caliper")
      ->check(CLI::IsMember({"exact", "caliper"}));
  match->add_option("--radius", match_radius, "caliper radius");

  auto* ate_cmd =
      app.add_subcommand("ate", "stratified treatment-effect estimate");

  auto* mediate = app.add_subcommand("mediate", "mediation analysis on t,m,y "
                                     "data");
  std::string med_data;
  double med_alpha = 0.05;
  mediate->add_option("--data", med_data, "CSV file with header t,m,y")
      ->required();
  mediate->add_option("--alpha", med_alpha, "significance level");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    auto load_model = [&opt]() -> ModelDocument {
      if (opt.model_path.empty()) {
        throw QueryError("--model is required for this subcommand");
      }
      // A .csv model is a pom_table with header unit,treatment,outcome,...
      if (opt.model_path.size() > 4 &&
          opt.model_path.substr(opt.model_path.size() - 4) == ".csv") {
        return pom_from_csv(read_file(opt.model_path));
      }
      return parse_model(read_file(opt.model_path));
    };

    json result;
    if (validate->parsed()) {
      const ModelDocument doc = load_model();
      result = json{{"kind", kind_name(doc)}, {"valid", true}};
    } else if (dsep->parsed()) {
      const ModelDocument doc = load_model();
      const bool separated =
          d_separated(graph_of(doc), split_list(dsep_x), split_list(dsep_y),
                      split_list(dsep_given));
      result = json{{"d_separated", separated}};
    } else if (backdoor->parsed()) {
      const ModelDocument doc = load_model();
      const Dag& g = graph_of(doc);
      const auto treatments = split_list(bd_t);
      json paths = json::object();
      for (const auto& t : treatments) {
        json list = json::array();
        for (const auto& p : backdoor_paths(g, t, bd_y)) {
          list.push_back(render_path(p));
        }
        paths[t] = std::move(list);
      }
      result = json{{"backdoor_paths", std::move(paths)}};
      if (bd_w_opt->count() > 0) {
        result["check_backdoor"] =
            check_backdoor(g, treatments, bd_y, split_list(bd_w));
      }
      try {
        result["default_adjustment_set"] =
            default_adjustment_set(g, treatments, bd_y);
      } catch (const QueryError& e) {
        result["default_adjustment_set"] = nullptr;
        result["default_adjustment_set_error"] = e.what();
      }
    } else if (identify->parsed()) {
      const ModelDocument doc = load_model();
      const Dag& g = graph_of(doc);
      QuerySpec q;
      q.target = id_target;
      q.sources = split_list(id_do);
      std::vector<std::string> warnings;
      const ExprPtr expr = fci(g, q, &warnings);
      std::string query_text = "P(" + q.target + "|";
      for (std::size_t i = 0; i < q.sources.size(); ++i) {
        if (i) query_text += ",";
        query_text += "do(" + q.sources[i] + ")";
      }
      query_text += ")";
      result = json{{"query", query_text},
                    {"expression", render_expression(expr)},
                    {"tree", expression_to_json(*expr)},
                    {"warnings", warnings}};
    } else if (do_cmd->parsed()) {
      const ModelDocument doc = load_model();
      const auto* cpt = std::get_if<CptModel>(&doc);
      if (!cpt) {
        throw QueryError("subcommand 'do' needs a cpt_model document");
      }
      QuerySpec q;
      q.target = do_target;
      DiscreteIntervention bindings;
      for (const auto& [node, value] : split_assignments(do_assignments)) {
        q.sources.push_back(node);
        bindings[node] = value;
      }
      std::vector<std::string> warnings;
      const ExprPtr expr = fci(cpt->graph(), q, &warnings);
      result = json{
          {"expression", render_expression(expr)},
          {"distribution",
           distribution_json(evaluate_expression(expr, *cpt, bindings))},
          {"warnings", warnings}};
    } else if (counterfactual->parsed()) {
      const ModelDocument doc = load_model();
      const auto* lin = std::get_if<LinearScm>(&doc);
      if (!lin) {
        if (std::holds_alternative<CptModel>(doc)) {
          std::get<CptModel>(doc).counterfactual({}, {});
        }
        throw QueryError(
            "subcommand 'counterfactual' needs a linear_scm document");
      }
      Assignment observed;
      for (const auto& [node, value] : split_assignments(cf_observe)) {
        observed[node] = to_real(value, "observation for " + node);
      }
      LinearIntervention forced;
      for (const auto& [node, value] : split_assignments(cf_do)) {
        forced[node] = to_real(value, "intervention for " + node);
      }
      const Assignment world = lin->counterfactual(observed, forced);
      result = json::object();
      if (!cf_target.empty()) {
        auto it = world.find(cf_target);
        if (it == world.end()) {
          throw QueryError("unknown target node: " + cf_target);
        }
        result[cf_target] = round12(it->second);
      } else {
        for (const auto& [node, value] : world) {
          result[node] = round12(value);
        }
      }
    } else if (simulate->parsed()) {
      const ModelDocument doc = load_model();
      json rows = json::array();
      if (const auto* lin = std::get_if<LinearScm>(&doc)) {
        for (const auto& row : lin->simulate(sim_n, opt.seed)) {
          json r = json::object();
          for (const auto& [node, value] : row) r[node] = round12(value);
          rows.push_back(std::move(r));
        }
      } else if (const auto* cpt = std::get_if<CptModel>(&doc)) {
        for (const auto& row : cpt->simulate(sim_n, opt.seed)) {
          json r = json::object();
          for (const auto& [node, value] : row) r[node] = value;
          rows.push_back(std::move(r));
        }
      } else {
        throw QueryError(
            "subcommand 'simulate' needs a linear_scm or cpt_model document");
      }
      result = json{{"n", sim_n}, {"seed", opt.seed}, {"rows", std::move(rows)}};
    } else if (unroll_cmd->parsed()) {
      const ModelDocument doc = load_model();
      const auto* tmpl = std::get_if<StbnTemplate>(&doc);
      if (!tmpl) {
        throw QueryError("subcommand 'unroll' needs an stbn_template document");
      }
      result = serialize(unroll(*tmpl, unroll_horizon).dag);
    } else if (stbn_q->parsed()) {
      const ModelDocument doc = load_model();
      const auto* tmpl = std::get_if<StbnTemplate>(&doc);
      if (!tmpl) {
        throw QueryError(
            "subcommand 'stbn-query' needs an stbn_template document");
      }
      const ModelDocument cpt_doc = parse_model(read_file(stbn_cpts));
      const auto* cpt = std::get_if<CptModel>(&cpt_doc);
      if (!cpt) {
        throw QueryError("--cpts must point to a cpt_model document");
      }
      DiscreteIntervention schedule;
      for (const auto& [node, value] : split_assignments(stbn_do)) {
        schedule[node] = value;
      }
      std::vector<std::string> warnings;
      result = json{{"target", stbn_target},
                    {"distribution", distribution_json(stbn_query(
                                         *tmpl, *cpt, stbn_target, schedule,
                                         &warnings))},
                    {"warnings", warnings}};
    } else if (match->parsed()) {
      const ModelDocument doc = load_model();
      const auto* table = std::get_if<PomTable>(&doc);
      if (!table) {
        throw QueryError("subcommand 'match' needs a pom_table document");
      }
      const ImputationReport report =
          match_method == "exact"
              ? exact_match_impute(*table)
              : caliper_match_impute(*table, match_radius);
      json units = json::array();
      for (const auto& u : report.units) {
        json ju{{"unit", u.unit}, {"match_count", u.match_count}};
        ju["imputed"] = u.imputed ? json(round12(*u.imputed)) : json(nullptr);
        units.push_back(std::move(ju));
      }
      result = json{{"method", report.method},
                    {"units", std::move(units)},
                    {"dropped_dimensions", report.dropped_dimensions}};
      if (report.caliper) result["caliper"] = round12(*report.caliper);
      result["positivity_violations"] =
          table->all_categorical() ? violations_json(check_positivity(*table))
                                   : json::array();
    } else if (ate_cmd->parsed()) {
      const ModelDocument doc = load_model();
      const auto* table = std::get_if<PomTable>(&doc);
      if (!table) {
        throw QueryError("subcommand 'ate' needs a pom_table document");
      }
      const AteResult r = ate(*table);
      result = json{{"e_y1", round12(r.e_y1)},
                    {"e_y0", round12(r.e_y0)},
                    {"ate", round12(r.ate)},
                    {"se_y1", round12(r.se_y1)},
                    {"se_y0", round12(r.se_y0)},
                    {"excluded", violations_json(r.excluded)},
                    {"excluded_weight", round12(r.excluded_weight)}};
    } else if (mediate->parsed()) {
      const auto data = mediation_from_csv(read_file(med_data));
      const MediationFit fit = fit_mediation(data);
      const CausalStepsDecision steps = causal_steps(fit, med_alpha);
      const MediationTest sobel = sobel_test(fit);
      const MediationTest diff = difference_test(fit);
      result = json{
          {"fit",
           json{{"a", round12(fit.a)},
                {"b", round12(fit.b)},
                {"c", round12(fit.c)},
                {"b_total", round12(fit.b_total)},
                {"se_a", round12(fit.se_a)},
                {"se_b", round12(fit.se_b)},
                {"se_c", round12(fit.se_c)},
                {"se_b_total", round12(fit.se_b_total)},
                {"n", fit.n}}},
          {"causal_steps",
           json{{"a_significant", steps.a_significant},
                {"b_significant", steps.b_significant},
                {"c_significant", steps.c_significant},
                {"effect_shrinks", steps.effect_shrinks},
                {"detected", steps.detected},
                {"alpha", round12(steps.alpha)}}},
          {"sobel", json{{"statistic", round12(sobel.statistic)},
                         {"p", round12(sobel.p)},
                         {"degenerate", sobel.degenerate}}},
          {"difference", json{{"statistic", round12(diff.statistic)},
                              {"p", round12(diff.p)},
                              {"degenerate", diff.degenerate}}}};
    } else {
      err << "error: no subcommand given\n";
      return 1;
    }
    emit(result, opt, out);
    return 0;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace causal
