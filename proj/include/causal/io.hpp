#ifndef CAUSAL_IO_HPP
#define CAUSAL_IO_HPP

#include <string>
#include <variant>

#include <json.hpp>

#include "causal/graph.hpp"
#include "causal/identify.hpp"
#include "causal/mediation.hpp"
#include "causal/pom.hpp"
#include "causal/scm.hpp"
#include "causal/stbn.hpp"

namespace causal {

using ModelDocument =
    std::variant<Dag, LinearScm, CptModel, StbnTemplate, PomTable>;

// Parses the single JSON envelope {"kind": ..., "version": 1, "payload":
// ...}. Schema violations report the offending field path; module
// invariants (cycles, CPT row sums, ...) surface with their own
// diagnostics. Recognised kinds: "dag", "linear_scm", "cpt_model",
// "stbn_template", "pom_table".
ModelDocument parse_model(const std::string& text);

nlohmann::json serialize(const Dag& g);
nlohmann::json serialize(const LinearScm& m);
nlohmann::json serialize(const CptModel& m);
nlohmann::json serialize(const StbnTemplate& t);
nlohmann::json serialize(const PomTable& t);
nlohmann::json serialize(const ModelDocument& doc);

// Structured form of an expression tree, stable across versions.
nlohmann::json expression_to_json(const Expression& e);

// pom_table ingestion from CSV with header unit,treatment,outcome,x_1..x_k.
// A covariate column whose every value parses as a number becomes real,
// otherwise categorical. No quoting; fields are comma-separated.
PomTable pom_from_csv(const std::string& text);

// Mediation triples from CSV with header t,m,y.
std::vector<MediationSample> mediation_from_csv(const std::string& text);

// Doubles rounded to 12 significant digits before JSON emission, keeping
// printed output stable across runs and platforms.
double round12(double v);
std::string format12(double v);

}  // namespace causal

#endif  // CAUSAL_IO_HPP
