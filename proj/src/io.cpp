#include "causal/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

#include "causal/error.hpp"

namespace causal {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ParseError(path + ": " + message);
}

const json& member(const json& j, const std::string& path,
                   const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) fail(path, "missing required field '" + key + "'");
  return *it;
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(path + "." + it.key(), "unknown field");
  }
}

const json& expect(const json& j, const std::string& path,
                   json::value_t type, const char* what) {
  const bool numeric_ok =
      type == json::value_t::number_float &&
      (j.is_number_float() || j.is_number_integer() ||
       j.is_number_unsigned());
  if (j.type() != type && !numeric_ok) fail(path, std::string("expected ") + what);
  return j;
}

std::string get_string(const json& j, const std::string& path) {
  expect(j, path, json::value_t::string, "a string");
  return j.get<std::string>();
}

double get_number(const json& j, const std::string& path) {
  expect(j, path, json::value_t::number_float, "a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    fail(path, "expected an integer");
  }
  return j.get<int>();
}

const json& get_array(const json& j, const std::string& path) {
  return expect(j, path, json::value_t::array, "an array");
}

const json& get_object(const json& j, const std::string& path) {
  return expect(j, path, json::value_t::object, "an object");
}

std::vector<std::string> string_list(const json& j, const std::string& path) {
  get_array(j, path);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(get_string(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Dag parse_dag_payload(const json& payload, const std::string& path) {
  get_object(payload, path);
  check_keys(payload, path, {"nodes", "edges"});
  auto nodes = string_list(member(payload, path, "nodes"), path + ".nodes");
  const json& edges = get_array(member(payload, path, "edges"), path + ".edges");
  std::vector<std::pair<std::string, std::string>> edge_list;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string epath = path + ".edges[" + std::to_string(i) + "]";
    get_array(edges[i], epath);
    if (edges[i].size() != 2) fail(epath, "expected a [from, to] pair");
    edge_list.emplace_back(get_string(edges[i][0], epath + "[0]"),
                           get_string(edges[i][1], epath + "[1]"));
  }
  return Dag(std::move(nodes), std::move(edge_list));
}

LinearScm parse_linear_payload(const json& payload, const std::string& path) {
  get_object(payload, path);
  check_keys(payload, path, {"nodes", "edges", "noise", "forced"});
  auto nodes = string_list(member(payload, path, "nodes"), path + ".nodes");
  const json& edges = get_array(member(payload, path, "edges"), path + ".edges");
  std::vector<std::pair<std::string, std::string>> edge_list;
  LinearScm::CoeffMap coeff;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string epath = path + ".edges[" + std::to_string(i) + "]";
    get_object(edges[i], epath);
    check_keys(edges[i], epath, {"from", "to", "coeff"});
    auto from = get_string(member(edges[i], epath, "from"), epath + ".from");
    auto to = get_string(member(edges[i], epath, "to"), epath + ".to");
    double w = get_number(member(edges[i], epath, "coeff"), epath + ".coeff");
    edge_list.emplace_back(from, to);
    coeff[{from, to}] = w;
  }
  std::map<std::string, NoiseSpec> noise;
  if (payload.contains("noise")) {
    const json& jn = get_object(payload["noise"], path + ".noise");
    for (auto it = jn.begin(); it != jn.end(); ++it) {
      const std::string npath = path + ".noise." + it.key();
      get_object(it.value(), npath);
      check_keys(it.value(), npath, {"name", "mean", "stddev"});
      NoiseSpec spec;
      if (it.value().contains("name")) {
        spec.name = get_string(it.value()["name"], npath + ".name");
      }
      if (it.value().contains("mean")) {
        spec.mean = get_number(it.value()["mean"], npath + ".mean");
      }
      if (it.value().contains("stddev")) {
        spec.stddev = get_number(it.value()["stddev"], npath + ".stddev");
      }
      noise[it.key()] = spec;
    }
  }
  LinearScm model(Dag(std::move(nodes), std::move(edge_list)),
                  std::move(coeff), std::move(noise));
  if (payload.contains("forced")) {
    const json& jf = get_object(payload["forced"], path + ".forced");
    LinearIntervention forced;
    for (auto it = jf.begin(); it != jf.end(); ++it) {
      forced[it.key()] = get_number(it.value(), path + ".forced." + it.key());
    }
    if (!forced.empty()) model = model.intervene(forced);
  }
  return model;
}

CptModel parse_cpt_payload(const json& payload, const std::string& path) {
  get_object(payload, path);
  check_keys(payload, path, {"nodes", "edges"});
  const json& jnodes = get_array(member(payload, path, "nodes"), path + ".nodes");
  std::vector<std::string> names;
  std::map<std::string, std::vector<std::string>> domains;
  std::map<std::string, std::vector<CptRow>> tables;
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    const std::string npath = path + ".nodes[" + std::to_string(i) + "]";
    get_object(jnodes[i], npath);
    check_keys(jnodes[i], npath, {"name", "domain", "cpt"});
    auto name = get_string(member(jnodes[i], npath, "name"), npath + ".name");
    names.push_back(name);
    domains[name] =
        string_list(member(jnodes[i], npath, "domain"), npath + ".domain");
    const json& jcpt = get_array(member(jnodes[i], npath, "cpt"), npath + ".cpt");
    std::vector<CptRow> rows;
    for (std::size_t r = 0; r < jcpt.size(); ++r) {
      const std::string rpath = npath + ".cpt[" + std::to_string(r) + "]";
      get_object(jcpt[r], rpath);
      check_keys(jcpt[r], rpath, {"given", "p"});
      CptRow row;
      const json& given = get_object(member(jcpt[r], rpath, "given"),
                                     rpath + ".given");
      for (auto it = given.begin(); it != given.end(); ++it) {
        row.given[it.key()] =
            get_string(it.value(), rpath + ".given." + it.key());
      }
      const json& jp = get_array(member(jcpt[r], rpath, "p"), rpath + ".p");
      for (std::size_t k = 0; k < jp.size(); ++k) {
        row.probs.push_back(
            get_number(jp[k], rpath + ".p[" + std::to_string(k) + "]"));
      }
      rows.push_back(std::move(row));
    }
    tables[name] = std::move(rows);
  }
  const json& jedges = get_array(member(payload, path, "edges"), path + ".edges");
  std::vector<std::pair<std::string, std::string>> edge_list;
  for (std::size_t i = 0; i < jedges.size(); ++i) {
    const std::string epath = path + ".edges[" + std::to_string(i) + "]";
    get_array(jedges[i], epath);
    if (jedges[i].size() != 2) fail(epath, "expected a [from, to] pair");
    edge_list.emplace_back(get_string(jedges[i][0], epath + "[0]"),
                           get_string(jedges[i][1], epath + "[1]"));
  }
  return CptModel(Dag(std::move(names), std::move(edge_list)),
                  std::move(domains), std::move(tables));
}

StbnTemplate parse_stbn_payload(const json& payload, const std::string& path) {
  get_object(payload, path);
  check_keys(payload, path, {"variables", "max_lag", "edges"});
  auto variables =
      string_list(member(payload, path, "variables"), path + ".variables");
  int max_lag = get_int(member(payload, path, "max_lag"), path + ".max_lag");
  const json& jedges = get_array(member(payload, path, "edges"), path + ".edges");
  std::vector<LaggedEdge> edges;
  for (std::size_t i = 0; i < jedges.size(); ++i) {
    const std::string epath = path + ".edges[" + std::to_string(i) + "]";
    get_object(jedges[i], epath);
    check_keys(jedges[i], epath, {"from", "lag", "to"});
    edges.push_back(LaggedEdge{
        get_string(member(jedges[i], epath, "from"), epath + ".from"),
        get_int(member(jedges[i], epath, "lag"), epath + ".lag"),
        get_string(member(jedges[i], epath, "to"), epath + ".to")});
  }
  return StbnTemplate(std::move(variables), max_lag, std::move(edges));
}

PomTable parse_pom_payload(const json& payload, const std::string& path) {
  get_object(payload, path);
  check_keys(payload, path, {"schema", "rows"});
  const json& jschema =
      get_array(member(payload, path, "schema"), path + ".schema");
  std::vector<CovariateSchema> schema;
  for (std::size_t i = 0; i < jschema.size(); ++i) {
    const std::string spath = path + ".schema[" + std::to_string(i) + "]";
    get_object(jschema[i], spath);
    check_keys(jschema[i], spath, {"name", "kind"});
    CovariateSchema c;
    c.name = get_string(member(jschema[i], spath, "name"), spath + ".name");
    auto kind = get_string(member(jschema[i], spath, "kind"), spath + ".kind");
    if (kind == "categorical") {
      c.kind = CovariateKind::Categorical;
    } else if (kind == "real") {
      c.kind = CovariateKind::Real;
    } else {
      fail(spath + ".kind", "expected 'categorical' or 'real'");
    }
    schema.push_back(std::move(c));
  }
  const json& jrows = get_array(member(payload, path, "rows"), path + ".rows");
  std::vector<PomRow> rows;
  for (std::size_t i = 0; i < jrows.size(); ++i) {
    const std::string rpath = path + ".rows[" + std::to_string(i) + "]";
    get_object(jrows[i], rpath);
    check_keys(jrows[i], rpath, {"unit", "treatment", "outcome", "covariates"});
    PomRow row;
    row.unit = get_string(member(jrows[i], rpath, "unit"), rpath + ".unit");
    row.treatment =
        get_int(member(jrows[i], rpath, "treatment"), rpath + ".treatment");
    row.outcome =
        get_number(member(jrows[i], rpath, "outcome"), rpath + ".outcome");
    const json& jc = get_array(member(jrows[i], rpath, "covariates"),
                               rpath + ".covariates");
    for (std::size_t k = 0; k < jc.size(); ++k) {
      const std::string cpath = rpath + ".covariates[" + std::to_string(k) + "]";
      if (jc[k].is_string()) {
        row.covariates.emplace_back(jc[k].get<std::string>());
      } else if (jc[k].is_number()) {
        row.covariates.emplace_back(jc[k].get<double>());
      } else {
        fail(cpath, "expected a string or a number");
      }
    }
    rows.push_back(std::move(row));
  }
  return PomTable(std::move(schema), std::move(rows));
}

}  // namespace

ModelDocument parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  get_object(doc, "$");
  check_keys(doc, "$", {"kind", "version", "payload"});
  const auto kind = get_string(member(doc, "$", "kind"), "$.kind");
  const int version = get_int(member(doc, "$", "version"), "$.version");
  if (version != 1) {
    fail("$.version", "unsupported version " + std::to_string(version));
  }
  const json& payload = member(doc, "$", "payload");
  if (kind == "dag") return parse_dag_payload(payload, "$.payload");
  if (kind == "linear_scm") return parse_linear_payload(payload, "$.payload");
  if (kind == "cpt_model") return parse_cpt_payload(payload, "$.payload");
  if (kind == "stbn_template") return parse_stbn_payload(payload, "$.payload");
  if (kind == "pom_table") return parse_pom_payload(payload, "$.payload");
  fail("$.kind", "unknown kind '" + kind + "'");
}

double round12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

std::string format12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

json envelope(const char* kind, json payload) {
  return json{{"kind", kind}, {"version", 1}, {"payload", std::move(payload)}};
}

json edges_json(const Dag& g) {
  json edges = json::array();
  for (const auto& [from, to] : g.edges()) {
    edges.push_back(json::array({from, to}));
  }
  return edges;
}

}  // namespace

nlohmann::json serialize(const Dag& g) {
  return envelope("dag", json{{"nodes", g.nodes()}, {"edges", edges_json(g)}});
}

nlohmann::json serialize(const LinearScm& m) {
  const Dag& g = m.graph();
  json edges = json::array();
  for (const auto& [from, to] : g.edges()) {
    edges.push_back(
        json{{"from", from}, {"to", to}, {"coeff", round12(m.coeff(from, to))}});
  }
  json noise = json::object();
  for (const auto& node : g.nodes()) {
    const NoiseSpec& spec = m.noise(node);
    noise[node] = json{{"name", spec.name},
                       {"mean", round12(spec.mean)},
                       {"stddev", round12(spec.stddev)}};
  }
  json payload{{"nodes", g.nodes()}, {"edges", std::move(edges)},
               {"noise", std::move(noise)}};
  if (!m.forced().empty()) {
    json forced = json::object();
    for (const auto& [node, value] : m.forced()) {
      forced[node] = round12(value);
    }
    payload["forced"] = std::move(forced);
  }
  return envelope("linear_scm", std::move(payload));
}

nlohmann::json serialize(const CptModel& m) {
  const Dag& g = m.graph();
  json nodes = json::array();
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    const auto& name = g.nodes()[v];
    const auto& domain = m.domain(name);
    const auto& parents = m.parent_indices(v);
    const auto& flat = m.table(name);
    const std::size_t dsize = domain.size();
    const std::size_t nrows = flat.size() / dsize;

    json cpt = json::array();
    for (std::size_t r = 0; r < nrows; ++r) {
      json given = json::object();
      std::size_t rem = r;
      // Mixed radix decode, first parent most significant.
      for (std::size_t j = parents.size(); j-- > 0;) {
        const std::size_t psize = m.domain_size(parents[j]);
        const std::size_t value = rem % psize;
        rem /= psize;
        given[g.nodes()[parents[j]]] =
            m.domain(g.nodes()[parents[j]])[value];
      }
      json p = json::array();
      for (std::size_t k = 0; k < dsize; ++k) {
        p.push_back(round12(flat[r * dsize + k]));
      }
      cpt.push_back(json{{"given", std::move(given)}, {"p", std::move(p)}});
    }
    nodes.push_back(
        json{{"name", name}, {"domain", domain}, {"cpt", std::move(cpt)}});
  }
  return envelope("cpt_model",
                  json{{"nodes", std::move(nodes)}, {"edges", edges_json(g)}});
}

nlohmann::json serialize(const StbnTemplate& t) {
  json edges = json::array();
  for (const auto& e : t.edges()) {
    edges.push_back(json{{"from", e.from}, {"lag", e.lag}, {"to", e.to}});
  }
  return envelope("stbn_template", json{{"variables", t.variables()},
                                        {"max_lag", t.max_lag()},
                                        {"edges", std::move(edges)}});
}

nlohmann::json serialize(const PomTable& t) {
  json schema = json::array();
  for (const auto& c : t.schema()) {
    schema.push_back(json{
        {"name", c.name},
        {"kind", c.kind == CovariateKind::Categorical ? "categorical" : "real"}});
  }
  json rows = json::array();
  for (const auto& row : t.rows()) {
    json covariates = json::array();
    for (const auto& c : row.covariates) {
      if (std::holds_alternative<std::string>(c)) {
        covariates.push_back(std::get<std::string>(c));
      } else {
        covariates.push_back(round12(std::get<double>(c)));
      }
    }
    rows.push_back(json{{"unit", row.unit},
                        {"treatment", row.treatment},
                        {"outcome", round12(row.outcome)},
                        {"covariates", std::move(covariates)}});
  }
  return envelope("pom_table",
                  json{{"schema", std::move(schema)}, {"rows", std::move(rows)}});
}

nlohmann::json serialize(const ModelDocument& doc) {
  return std::visit([](const auto& m) { return serialize(m); }, doc);
}

nlohmann::json expression_to_json(const Expression& e) {
  auto slot = [](const Slot& s) {
    return json{{"node", s.node}, {"bound", s.bound}};
  };
  switch (e.kind()) {
    case Expression::Kind::Conditional: {
      json given = json::array();
      for (const auto& s : e.given()) given.push_back(slot(s));
      return json{{"kind", "conditional"},
                  {"target", slot(e.target())},
                  {"given", std::move(given)}};
    }
    case Expression::Kind::Marginal: {
      json event = json::array();
      for (const auto& s : e.event()) event.push_back(slot(s));
      return json{{"kind", "marginal"}, {"event", std::move(event)}};
    }
    case Expression::Kind::SumOver:
      return json{{"kind", "sum"},
                  {"var", e.bound_var()},
                  {"body", expression_to_json(*e.body())}};
    case Expression::Kind::Product: {
      json factors = json::array();
      for (const auto& f : e.factors()) {
        factors.push_back(expression_to_json(*f));
      }
      return json{{"kind", "product"}, {"factors", std::move(factors)}};
    }
  }
  throw InternalError("unreachable expression kind");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // Trim surrounding whitespace and stray carriage returns.
    const auto begin = field.find_first_not_of(" \t\r");
    const auto end = field.find_last_not_of(" \t\r");
    out.push_back(begin == std::string::npos
                      ? std::string()
                      : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) {
    throw ParseError("CSV document is empty");
  }
  return rows;
}

bool parses_as_number(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  if (out) *out = v;
  return true;
}

}  // namespace

PomTable pom_from_csv(const std::string& text) {
  auto rows = read_csv(text);
  const auto& header = rows.front();
  if (header.size() < 3 || header[0] != "unit" || header[1] != "treatment" ||
      header[2] != "outcome") {
    throw ParseError(
        "CSV header must start with unit,treatment,outcome followed by "
        "covariate columns");
  }
  const std::size_t k = header.size() - 3;

  // Column type inference: a covariate column is real iff every value in it
  // parses as a number.
  std::vector<bool> is_real(k, true);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != header.size()) {
      throw ParseError("CSV row " + std::to_string(i) + " has " +
                       std::to_string(rows[i].size()) + " fields, header has " +
                       std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (!parses_as_number(rows[i][3 + c], nullptr)) is_real[c] = false;
    }
  }

  std::vector<CovariateSchema> schema;
  for (std::size_t c = 0; c < k; ++c) {
    schema.push_back(CovariateSchema{
        header[3 + c],
        is_real[c] ? CovariateKind::Real : CovariateKind::Categorical});
  }
  std::vector<PomRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    PomRow row;
    row.unit = rows[i][0];
    double tv = 0.0;
    if (!parses_as_number(rows[i][1], &tv) || (tv != 0.0 && tv != 1.0)) {
      throw ParseError("CSV row " + std::to_string(i) +
                       ": treatment must be 0 or 1, got '" + rows[i][1] + "'");
    }
    row.treatment = static_cast<int>(tv);
    if (!parses_as_number(rows[i][2], &row.outcome)) {
      throw ParseError("CSV row " + std::to_string(i) +
                       ": outcome must be numeric, got '" + rows[i][2] + "'");
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (is_real[c]) {
        double v = 0.0;
        parses_as_number(rows[i][3 + c], &v);
        row.covariates.emplace_back(v);
      } else {
        row.covariates.emplace_back(rows[i][3 + c]);
      }
    }
    out.push_back(std::move(row));
  }
  return PomTable(std::move(schema), std::move(out));
}

std::vector<MediationSample> mediation_from_csv(const std::string& text) {
  auto rows = read_csv(text);
  const auto& header = rows.front();
  if (header.size() != 3 || header[0] != "t" || header[1] != "m" ||
      header[2] != "y") {
    throw ParseError("CSV header must be t,m,y");
  }
  std::vector<MediationSample> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3) {
      throw ParseError("CSV row " + std::to_string(i) + " must have 3 fields");
    }
    MediationSample s;
    if (!parses_as_number(rows[i][0], &s.t) ||
        !parses_as_number(rows[i][1], &s.m) ||
        !parses_as_number(rows[i][2], &s.y)) {
      throw ParseError("CSV row " + std::to_string(i) +
                       ": all fields must be numeric");
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace causal
