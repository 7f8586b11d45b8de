#include "dbp/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dbp/errors.hpp"

namespace dbp {

namespace {

using nlohmann::json;

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw ModelError(std::string("model file: missing field \"") + name + "\"");
  }
  return j.at(name);
}

template <class T>
T get(const json& j, const char* name) {
  try {
    return field(j, name).get<T>();
  } catch (const json::exception& e) {
    throw ModelError(std::string("model file: field \"") + name + "\": " + e.what());
  }
}

std::size_t get_count(const json& j, const char* name) {
  const long v = get<long>(j, name);
  if (v < 0) throw ModelError(std::string("model file: \"") + name + "\" must be nonnegative");
  return static_cast<std::size_t>(v);
}

OffspringLaw parse_law(const json& j, std::size_t types) {
  try {
    if (j.contains("atoms")) {
      std::vector<Atom> atoms;
      for (const json& a : j.at("atoms")) {
        Atom atom{a.at("counts").get<std::vector<int>>(), a.at("prob").get<double>()};
        if (atom.counts.size() != types) {
          throw ModelError("model file: atom count vector has length " +
                           std::to_string(atom.counts.size()) + ", expected " +
                           std::to_string(types));
        }
        atoms.push_back(std::move(atom));
      }
      return OffspringLaw(types, std::move(atoms));
    }
    if (j.contains("marginals")) {
      const auto marginals =
          j.at("marginals").get<std::vector<std::vector<std::pair<int, double>>>>();
      if (marginals.size() != types) {
        throw ModelError("model file: marginals list has the wrong number of types");
      }
      return OffspringLaw::product(marginals);
    }
  } catch (const json::exception& e) {
    throw ModelError(std::string("model file: malformed law: ") + e.what());
  }
  throw ModelError("model file: a law needs \"atoms\" or \"marginals\"");
}

std::vector<OffspringLaw> parse_laws(const json& j, const char* name, std::size_t types) {
  const json& laws = field(j, name);
  if (!laws.is_array() || laws.size() != types) {
    throw ModelError(std::string("model file: \"") + name + "\" must list one law per type");
  }
  std::vector<OffspringLaw> out;
  for (const json& law : laws) out.push_back(parse_law(law, types));
  return out;
}

Matrix parse_matrix(const json& j, const char* name, std::size_t n) {
  const auto rows = get<std::vector<std::vector<double>>>(j, name);
  if (rows.size() != n) throw ModelError(std::string("model file: \"") + name + "\" has the wrong size");
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != n) throw ModelError(std::string("model file: \"") + name + "\" is not square");
    for (std::size_t c = 0; c < n; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

std::size_t declared_types(const json& j, std::size_t fallback) {
  if (!j.contains("types")) return fallback;
  const std::size_t t = get_count(j, "types");
  if (t != fallback) throw ModelError("model file: \"types\" does not match the model");
  return t;
}

json law_json(const OffspringLaw& law) {
  json atoms = json::array();
  for (const Atom& a : law.atoms()) atoms.push_back({{"counts", a.counts}, {"prob", a.prob}});
  return {{"atoms", atoms}};
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

Model parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError(std::string("model file: invalid JSON: ") + e.what());
  }
  const std::string variant = get<std::string>(j, "variant");

  if (variant == "sdcbp") {
    SdcbpModel m;
    m.rates = get<std::vector<double>>(j, "rates");
    const std::size_t n = declared_types(j, m.rates.size());
    m.laws = parse_laws(j, "laws", n);
    return m;
  }
  if (variant == "vdcbp") {
    VdcbpModel m;
    m.class1 = get_count(j, "class1");
    m.class2 = get_count(j, "class2");
    m.rates = get<std::vector<double>>(j, "rates");
    const std::size_t n = declared_types(j, m.class1 + m.class2);
    if (m.rates.size() != n) throw ModelError("model file: one rate per type required");
    m.laws = parse_laws(j, "laws", n);
    return m;
  }
  if (variant == "tcvdbp") {
    TcvdbpModel m;
    m.mixed = get_count(j, "mixed");
    m.exclusive = get_count(j, "exclusive");
    m.theta = get<double>(j, "theta");
    m.lambdaV = get<double>(j, "lambdaV");
    const std::size_t n = declared_types(j, m.mixed + m.exclusive);
    m.typeChangeMixed = parse_matrix(j, "typeChangeMixed", m.mixed);
    m.typeChangeExclusive = parse_matrix(j, "typeChangeExclusive", m.exclusive);
    m.shareLaws = parse_laws(j, j.contains("shareLaws") ? "shareLaws" : "laws", n);
    return m;
  }
  if (variant == "social") {
    const json& s = field(j, "social");
    SocialNetworkParams p;
    p.eta1 = get<double>(s, "eta1");
    p.eta2 = get<double>(s, "eta2");
    p.deltaAtt = get<double>(s, "deltaAtt");
    p.theta = get<double>(s, "theta");
    p.lambdaV = get<double>(s, "lambdaV");
    p.meanFriends = get<double>(s, "meanFriends");
    p.readProbs = get<std::vector<double>>(s, "readProbs");
    p.levelProbs = get<std::vector<double>>(s, "levelProbs");
    p.p = get<double>(s, "p");
    p.N = get<int>(s, "N");
    const int target = j.contains("targetPost") ? get<int>(j, "targetPost") : 1;
    if (const auto v = validate(p); !v.empty()) {
      throw ModelError("model file: " + v.front().invariant + " at " + v.front().location);
    }
    try {
      return build_social_network_model(p, target);
    } catch (const ArgumentError& e) {
      throw ModelError(std::string("model file: ") + e.what());
    }
  }
  throw ModelError("model file: unknown variant \"" + variant + "\"");
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string model_to_json(const Model& model) {
  json j = std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        json out;
        json laws = json::array();
        if constexpr (std::is_same_v<T, TcvdbpModel>) {
          for (const auto& law : m.shareLaws) laws.push_back(law_json(law));
          out = {{"variant", "tcvdbp"},
                 {"mixed", m.mixed},
                 {"exclusive", m.exclusive},
                 {"theta", m.theta},
                 {"lambdaV", m.lambdaV},
                 {"typeChangeMixed", matrix_json(m.typeChangeMixed)},
                 {"typeChangeExclusive", matrix_json(m.typeChangeExclusive)},
                 {"shareLaws", laws}};
        } else {
          for (const auto& law : m.laws) laws.push_back(law_json(law));
          out = {{"rates", m.rates}, {"laws", laws}};
          if constexpr (std::is_same_v<T, VdcbpModel>) {
            out["variant"] = "vdcbp";
            out["class1"] = m.class1;
            out["class2"] = m.class2;
          } else {
            out["variant"] = "sdcbp";
          }
        }
        out["types"] = m.types();
        return out;
      },
      model);
  return j.dump(2);
}

}  // namespace dbp
