#pragma once

#include "pricekit/model/instance.hpp"
#include "pricekit/model/profit.hpp"

#include "json.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

namespace pricekit::io {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

[[noreturn]] inline void parse_error(const std::string& what) { throw Error(ErrorCode::Parse, what); }

inline const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) parse_error(where + " must be an object");
  const auto it = obj.find(key);
  if (it == obj.end()) parse_error(where + " lacks '" + key + "'");
  return *it;
}

/// Infinite bounds travel as null: -inf for lower bounds, +inf for upper bounds.
inline Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      a.push_back(v[i]);
    } else {
      a.push_back(nullptr);
    }
  }
  return a;
}

inline Vector vector_from_json(const Json& a, const std::string& where, double null_value = std::nan("")) {
  if (!a.is_array()) parse_error(where + " must be an array");
  Vector v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_null()) {
      if (std::isnan(null_value)) parse_error(where + "[" + std::to_string(i) + "] is null");
      v[static_cast<Index>(i)] = null_value;
    } else if (a[i].is_number()) {
      v[static_cast<Index>(i)] = a[i].get<double>();
    } else {
      parse_error(where + "[" + std::to_string(i) + "] is not a number");
    }
  }
  return v;
}

inline Json csr_to_json(const SparseMatrix& m) {
  SparseMatrix c = m;
  c.makeCompressed();
  Json indptr = Json::array();
  Json indices = Json::array();
  Json data = Json::array();
  for (Index r = 0; r <= c.rows(); ++r) indptr.push_back(c.outerIndexPtr()[r]);
  for (Index k = 0; k < c.nonZeros(); ++k) {
    indices.push_back(c.innerIndexPtr()[k]);
    data.push_back(c.valuePtr()[k]);
  }
  return Json{{"format", "csr"}, {"rows", c.rows()}, {"cols", c.cols()},
              {"indptr", indptr}, {"indices", indices}, {"data", data}};
}

inline Json dense_to_json(const SparseMatrix& m) {
  const DenseMatrix d(m);
  Json data = Json::array();
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index j = 0; j < d.cols(); ++j) data.push_back(d(i, j));
  }
  return Json{{"format", "dense"}, {"rows", d.rows()}, {"cols", d.cols()}, {"data", data}};
}

/// Dense row-major layout when at least half of the entries are nonzero, CSR otherwise.
inline Json matrix_to_json(const SparseMatrix& m) {
  const double cells = static_cast<double>(m.rows()) * static_cast<double>(m.cols());
  return cells > 0 && static_cast<double>(m.nonZeros()) >= 0.5 * cells ? dense_to_json(m) : csr_to_json(m);
}

inline Index get_index(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) parse_error(where + " must be an integer");
  const auto v = j.get<long long>();
  if (v < 0) parse_error(where + " must be nonnegative");
  return static_cast<Index>(v);
}

/// Parses a matrix object. `rows`/`cols` may be omitted for CSR when defaults are given.
inline SparseMatrix matrix_from_json(const Json& j, const std::string& where, Index default_rows = -1,
                                     Index default_cols = -1) {
  if (!j.is_object()) parse_error(where + " must be a matrix object");
  const std::string format = j.value("format", std::string("csr"));
  auto dim = [&](const char* key, Index fallback) {
    if (j.contains(key)) return get_index(j[key], where + "." + key);
    if (fallback < 0) parse_error(where + " lacks '" + key + "'");
    return fallback;
  };
  if (format == "dense") {
    const Index rows = dim("rows", default_rows);
    const Index cols = dim("cols", default_cols);
    const Vector data = vector_from_json(field(j, "data", where), where + ".data");
    if (data.size() != rows * cols) parse_error(where + ".data has the wrong length");
    std::vector<Triplet> t;
    for (Index i = 0; i < rows; ++i) {
      for (Index k = 0; k < cols; ++k) {
        const double v = data[i * cols + k];
        if (v != 0.0) t.emplace_back(i, k, v);
      }
    }
    SparseMatrix m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    return m;
  }
  if (format != "csr") parse_error(where + " has unknown format '" + format + "'");
  const Json& indptr = field(j, "indptr", where);
  const Json& indices = field(j, "indices", where);
  const Vector data = vector_from_json(field(j, "data", where), where + ".data");
  if (!indptr.is_array() || !indices.is_array()) parse_error(where + " indptr/indices must be arrays");
  const Index rows = dim("rows", default_rows >= 0 ? default_rows : static_cast<Index>(indptr.size()) - 1);
  const Index cols = dim("cols", default_cols);
  if (static_cast<Index>(indptr.size()) != rows + 1) parse_error(where + ".indptr must have rows + 1 entries");
  if (static_cast<Index>(indices.size()) != data.size()) parse_error(where + " indices and data lengths differ");
  std::vector<Triplet> t;
  Index prev = 0;
  for (Index r = 0; r < rows; ++r) {
    const Index lo = get_index(indptr[static_cast<std::size_t>(r)], where + ".indptr");
    const Index hi = get_index(indptr[static_cast<std::size_t>(r + 1)], where + ".indptr");
    if (lo != prev || hi < lo || hi > data.size()) parse_error(where + ".indptr is not a valid row pointer");
    for (Index k = lo; k < hi; ++k) {
      const Index c = get_index(indices[static_cast<std::size_t>(k)], where + ".indices");
      if (c >= cols) parse_error(where + ".indices has a column out of range");
      t.emplace_back(r, c, data[k]);
    }
    prev = hi;
  }
  if (prev != data.size()) parse_error(where + ".indptr does not cover the data");
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

inline Json polyhedron_to_json(const Polyhedron& p) {
  Json j = Json::object();
  if (p.A.rows() > 0) {
    j["A"] = matrix_to_json(p.A);
    j["b"] = vector_to_json(p.b);
  }
  if (p.F.rows() > 0) {
    j["F"] = matrix_to_json(p.F);
    j["g"] = vector_to_json(p.g);
  }
  return j;
}

inline void polyhedron_rows_from_json(const Json& j, Polyhedron& p, Index dim, const std::string& where) {
  if (j.contains("A") != j.contains("b")) parse_error(where + " needs both A and b");
  if (j.contains("F") != j.contains("g")) parse_error(where + " needs both F and g");
  if (j.contains("A")) {
    p.A = matrix_from_json(j["A"], where + ".A", -1, dim);
    p.b = vector_from_json(j["b"], where + ".b");
    if (p.A.rows() != p.b.size()) parse_error(where + " A and b disagree");
  }
  if (j.contains("F")) {
    p.F = matrix_from_json(j["F"], where + ".F", -1, dim);
    p.g = vector_from_json(j["g"], where + ".g");
    if (p.F.rows() != p.g.size()) parse_error(where + " F and g disagree");
  }
}

}  // namespace detail

inline Json instance_to_json(const PricingInstance& inst) {
  Json j;
  j["version"] = kSchemaVersion;
  j["n"] = inst.n();
  j["r_nom"] = detail::vector_to_json(inst.r_nom);
  j["kappa_nom"] = detail::vector_to_json(inst.kappa_nom);
  Json e = detail::csr_to_json(inst.E.entries());
  j["elasticity"] = e;
  Json c = detail::polyhedron_to_json(inst.constraints);
  c["pi_min"] = detail::vector_to_json(inst.constraints.pi_min());
  c["pi_max"] = detail::vector_to_json(inst.constraints.pi_max());
  j["constraints"] = c;
  if (inst.policy) {
    Json p;
    p["C"] = detail::matrix_to_json(inst.policy->C);
    const Polyhedron& th = inst.policy->theta_constraints;
    if (!th.empty()) {
      Json t = detail::polyhedron_to_json(th);
      if (th.has_box()) {
        t["lower"] = detail::vector_to_json(th.lower);
        t["upper"] = detail::vector_to_json(th.upper);
      }
      p["theta_constraints"] = t;
    }
    j["policy"] = p;
  }
  return j;
}

/// Accepts either r_nom/kappa_nom or a raw block {p_nom, d_nom, c}, converted with
/// r = p_nom d_nom and kappa = d_nom c.
inline PricingInstance instance_from_json(const Json& j) {
  if (!j.is_object()) detail::parse_error("instance document must be a JSON object");
  const Json& version = detail::field(j, "version", "instance");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    detail::parse_error("unsupported instance version (expected " + std::to_string(kSchemaVersion) + ")");
  }
  const Index n = detail::get_index(detail::field(j, "n", "instance"), "n");
  PricingInstance inst;
  if (j.contains("raw")) {
    if (j.contains("r_nom") || j.contains("kappa_nom")) detail::parse_error("give either raw or r_nom/kappa_nom, not both");
    const Json& raw = j["raw"];
    const Vector p = detail::vector_from_json(detail::field(raw, "p_nom", "raw"), "raw.p_nom");
    const Vector d = detail::vector_from_json(detail::field(raw, "d_nom", "raw"), "raw.d_nom");
    const Vector c = detail::vector_from_json(detail::field(raw, "c", "raw"), "raw.c");
    if (p.size() != n || d.size() != n || c.size() != n) detail::parse_error("raw vectors must have n entries");
    inst.r_nom = p.cwiseProduct(d);
    inst.kappa_nom = d.cwiseProduct(c);
  } else {
    inst.r_nom = detail::vector_from_json(detail::field(j, "r_nom", "instance"), "r_nom");
    inst.kappa_nom = detail::vector_from_json(detail::field(j, "kappa_nom", "instance"), "kappa_nom");
  }
  if (inst.r_nom.size() != n || inst.kappa_nom.size() != n) detail::parse_error("r_nom and kappa_nom must have n entries");
  const SparseMatrix e = detail::matrix_from_json(detail::field(j, "elasticity", "instance"), "elasticity", n, n);
  if (e.rows() != n || e.cols() != n) detail::parse_error("elasticity must be n x n");
  try {
    inst.E = ElasticityMatrix(e);
  } catch (const Error& err) {
    detail::parse_error(err.what());
  }
  const Json& c = detail::field(j, "constraints", "instance");
  const Vector lo = detail::vector_from_json(detail::field(c, "pi_min", "constraints"), "constraints.pi_min", -kInf);
  const Vector hi = detail::vector_from_json(detail::field(c, "pi_max", "constraints"), "constraints.pi_max", kInf);
  if (lo.size() != n || hi.size() != n) detail::parse_error("price bounds must have n entries");
  inst.constraints = PriceConstraintSet::box(lo, hi);
  detail::polyhedron_rows_from_json(c, inst.constraints, n, "constraints");
  if (j.contains("policy")) {
    const Json& p = j["policy"];
    PricingPolicy pol;
    pol.C = detail::matrix_from_json(detail::field(p, "C", "policy"), "policy.C", n);
    if (pol.C.rows() != n) detail::parse_error("policy.C must have n rows");
    const Index m = pol.C.cols();
    pol.theta_constraints = Polyhedron::unconstrained(m);
    if (p.contains("theta_constraints")) {
      const Json& t = p["theta_constraints"];
      detail::polyhedron_rows_from_json(t, pol.theta_constraints, m, "policy.theta_constraints");
      if (t.contains("lower") || t.contains("upper")) {
        pol.theta_constraints.lower = detail::vector_from_json(detail::field(t, "lower", "theta_constraints"), "theta_constraints.lower", -kInf);
        pol.theta_constraints.upper = detail::vector_from_json(detail::field(t, "upper", "theta_constraints"), "theta_constraints.upper", kInf);
        if (pol.theta_constraints.lower.size() != m || pol.theta_constraints.upper.size() != m) {
          detail::parse_error("theta bounds must have m entries");
        }
      }
    }
    inst.policy = std::move(pol);
  }
  return inst;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << contents;
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
}

inline Json parse_json(const std::string& text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Parse, where + ": " + e.what());
  }
}

inline PricingInstance load_instance(const std::string& path) { return instance_from_json(parse_json(read_file(path), path)); }

inline void save_instance(const std::string& path, const PricingInstance& inst) { write_file(path, dump(instance_to_json(inst))); }

inline Json result_to_json(const SolveResult& r) {
  Json j;
  j["version"] = kSchemaVersion;
  j["method"] = r.method;
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["wall_time_s"] = r.wall_time;
  j["profit_trajectory"] = r.profit_trajectory;
  j["final_profit"] = r.final_profit();
  j["pi_star"] = detail::vector_to_json(r.pi_star);
  j["delta_star"] = detail::vector_to_json(r.delta_star);
  if (r.theta_star) j["theta_star"] = detail::vector_to_json(*r.theta_star);
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

inline SolveStatus status_from_string(const std::string& s) {
  for (SolveStatus st : {SolveStatus::Converged, SolveStatus::MaxIterations, SolveStatus::SubsolverFailure,
                         SolveStatus::Infeasible}) {
    if (s == to_string(st)) return st;
  }
  detail::parse_error("unknown status '" + s + "'");
}

inline SolveResult result_from_json(const Json& j) {
  SolveResult r;
  try {
    r.method = detail::field(j, "method", "result").get<std::string>();
    r.status = status_from_string(detail::field(j, "status", "result").get<std::string>());
    r.iterations = detail::field(j, "iterations", "result").get<int>();
    r.wall_time = j.value("wall_time_s", 0.0);
    r.profit_trajectory = detail::field(j, "profit_trajectory", "result").get<std::vector<double>>();
    r.message = j.value("message", std::string());
  } catch (const Json::exception& e) {
    detail::parse_error(std::string("result: ") + e.what());
  }
  r.pi_star = detail::vector_from_json(detail::field(j, "pi_star", "result"), "pi_star");
  r.delta_star = detail::vector_from_json(detail::field(j, "delta_star", "result"), "delta_star");
  if (j.contains("theta_star")) r.theta_star = detail::vector_from_json(j["theta_star"], "theta_star");
  return r;
}

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// One row per product: index, pi, exp(pi), delta, exp(delta), product profit.
inline std::string per_product_csv(const PricingInstance& inst, const SolveResult& r) {
  std::string out = "index,pi,exp_pi,delta,exp_delta,profit\n";
  const Vector per = product_profits(inst, r.pi_star);
  const Vector delta = demand_change(inst.E, r.pi_star);
  for (Index i = 0; i < inst.n(); ++i) {
    out += std::to_string(i) + "," + format_double(r.pi_star[i]) + "," + format_double(std::exp(r.pi_star[i])) + "," +
           format_double(delta[i]) + "," + format_double(std::exp(delta[i])) + "," + format_double(per[i]) + "\n";
  }
  return out;
}

}  // namespace pricekit::io
