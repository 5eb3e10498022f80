// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qmet/bounds.hpp"
#include "qmet/channel.hpp"
#include "qmet/constraints.hpp"
#include "qmet/memory.hpp"
#include "qmet/optimizer.hpp"

namespace qmet::io {

using nlohmann::json;

// Doubles in CSV are printed with %.17g so they round-trip exactly; JSON
// round-tripping is handled by the JSON library itself.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline json complex_to_json(const Cx& v) { return json::array({v.real(), v.imag()}); }

inline Cx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ShapeMismatch("complex values must be [re, im] number pairs");
  return Cx(j[0].get<double>(), j[1].get<double>());
}

inline json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ShapeMismatch("matrix must be a non-empty array of rows");
  const auto rows = j.size();
  const auto cols = j[0].size();
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw ShapeMismatch("ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = complex_from_json(j[i][c]);
  }
  return m;
}

// --- channels -------------------------------------------------------------------

// { "n": int, "dc": int, "c": [p][k][l][m] of [re, im] }
inline json channel_to_json(const ChannelSpec& ch) {
  json cs = json::array();
  for (int p = 0; p < ch.n; ++p) {
    json jp = json::array();
    for (int k = 0; k < ch.n; ++k) {
      json jk = json::array();
      for (int l = 0; l < ch.n; ++l) {
        json jl = json::array();
        for (int m = 0; m < ch.dc; ++m) jl.push_back(complex_to_json(ch.at0(p, k, l, m)));
        jk.push_back(std::move(jl));
      }
      jp.push_back(std::move(jk));
    }
    cs.push_back(std::move(jp));
  }
  return json{{"n", ch.n}, {"dc", ch.dc}, {"c", std::move(cs)}};
}

inline ChannelSpec channel_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("dc") || !j.contains("c"))
    throw ShapeMismatch("channel JSON needs fields n, dc, c");
  const int n = j["n"].get<int>();
  const int dc = j["dc"].get<int>();
  ChannelSpec ch = ChannelSpec::zeros(n, dc);
  const json& cs = j["c"];
  if (!cs.is_array() || static_cast<int>(cs.size()) != n)
    throw ShapeMismatch("channel amplitude array must have n source blocks");
  for (int p = 0; p < n; ++p) {
    if (!cs[p].is_array() || static_cast<int>(cs[p].size()) != n)
      throw ShapeMismatch("channel amplitude block has wrong shape");
    for (int k = 0; k < n; ++k) {
      if (!cs[p][k].is_array() || static_cast<int>(cs[p][k].size()) != n)
        throw ShapeMismatch("channel amplitude block has wrong shape");
      for (int l = 0; l < n; ++l) {
        if (!cs[p][k][l].is_array() || static_cast<int>(cs[p][k][l].size()) != dc)
          throw ShapeMismatch("channel amplitude block has wrong shape");
        for (int m = 0; m < dc; ++m) ch.at0(p, k, l, m) = complex_from_json(cs[p][k][l][m]);
      }
    }
  }
  return ch;
}

// --- constraints ----------------------------------------------------------------

// { "kind": string, "params": { "n": int, ... } }
inline json constraint_to_json(const TransferConstraint& tc) {
  json params{{"n", tc.n}};
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, DiagonalIdeal>) {
          params["a"] = k.a;
        } else if constexpr (std::is_same_v<T, DiagonalNonIdeal>) {
          json pairs = json::array();
          for (const auto& [u, eps] : k.pairs) pairs.push_back(json::array({u, eps}));
          params["pairs"] = std::move(pairs);
        } else if constexpr (std::is_same_v<T, NondiagonalIdeal>) {
          params["a"] = k.a;
          params["b"] = k.b;
        } else if constexpr (std::is_same_v<T, NondiagonalNonIdeal>) {
          params["a"] = k.a;
          params["b"] = k.b;
          params["eps"] = k.eps;
        } else if constexpr (std::is_same_v<T, RealPartIdeal>) {
          params["a"] = k.a;
          params["b"] = k.b;
        } else {
          params["rho"] = matrix_to_json(k.rho.mat);
          params["chi"] = matrix_to_json(k.chi.mat);
          params["a"] = k.a;
        }
      },
      tc.kind);
  return json{{"kind", kind_name(tc.kind)}, {"params", std::move(params)}};
}

inline TransferConstraint constraint_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("params"))
    throw ShapeMismatch("constraint JSON needs fields kind, params");
  const std::string kind = j["kind"].get<std::string>();
  const json& p = j["params"];
  const int n = p.at("n").get<int>();
  if (kind == "diag-ideal") return make_constraint(n, DiagonalIdeal{p.at("a").get<int>()});
  if (kind == "diag-nonideal") {
    DiagonalNonIdeal k;
    for (const auto& pr : p.at("pairs"))
      k.pairs.emplace_back(pr.at(0).get<int>(), pr.at(1).get<double>());
    return make_constraint(n, std::move(k));
  }
  if (kind == "nondiag-ideal")
    return make_constraint(n, NondiagonalIdeal{p.at("a").get<int>(), p.at("b").get<int>()});
  if (kind == "nondiag-nonideal")
    return make_constraint(n, NondiagonalNonIdeal{p.at("a").get<int>(), p.at("b").get<int>(),
                                                  p.at("eps").get<double>()});
  if (kind == "realpart-ideal")
    return make_constraint(n, RealPartIdeal{p.at("a").get<int>(), p.at("b").get<int>()});
  if (kind == "two-state-diag")
    return make_constraint(
        n, TwoStateDiagonal{DensityMatrix{matrix_from_json(p.at("rho"))},
                            DensityMatrix{matrix_from_json(p.at("chi"))}, p.at("a").get<int>()});
  throw ShapeMismatch("unknown constraint kind '" + kind + "'");
}

// --- memory table ----------------------------------------------------------------

// CSV columns: a,c,norm,kind with kind in {diag, offdiag, diag_diff}.
inline std::string memory_table_to_csv(const MemoryTable& mt) {
  std::ostringstream os;
  os << "a,c,norm,kind\n";
  for (int a = 1; a <= mt.n; ++a)
    for (int c = 1; c <= mt.n; ++c)
      os << a << ',' << c << ',' << fmt_double(mt.entry(a, c)) << ','
         << (a == c ? "diag" : "offdiag") << '\n';
  for (int a = 1; a <= mt.n; ++a)
    for (int b = a + 1; b <= mt.n; ++b)
      os << a << ',' << b << ',' << fmt_double(mt.diag_difference(a, b)) << ",diag_diff\n";
  return os.str();
}

inline json memory_table_to_json(const MemoryTable& mt) {
  json entries = json::array();
  for (int a = 1; a <= mt.n; ++a)
    for (int c = 1; c <= mt.n; ++c)
      entries.push_back(json{{"a", a},
                             {"c", c},
                             {"norm", mt.entry(a, c)},
                             {"kind", a == c ? "diag" : "offdiag"}});
  for (int a = 1; a <= mt.n; ++a)
    for (int b = a + 1; b <= mt.n; ++b)
      entries.push_back(
          json{{"a", a}, {"c", b}, {"norm", mt.diag_difference(a, b)}, {"kind", "diag_diff"}});
  return json{{"n", mt.n}, {"entries", std::move(entries)}};
}

// --- bound and sweep tables --------------------------------------------------------

inline std::string bound_reports_to_csv(const std::vector<BoundReport>& rows) {
  std::ostringstream os;
  os << "a,c,theoretical,achieved,slack\n";
  for (const auto& r : rows)
    os << r.a << ',' << r.c << ',' << fmt_double(r.theoretical) << ',' << fmt_double(r.achieved)
       << ',' << fmt_double(r.slack) << '\n';
  return os.str();
}

inline json bound_reports_to_json(const std::vector<BoundReport>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back(json{{"a", r.a},
                       {"c", r.c},
                       {"theoretical", r.theoretical},
                       {"achieved", r.achieved},
                       {"slack", r.slack}});
  return out;
}

inline std::string sweep_to_csv(const SweepResult& sr) {
  std::ostringstream os;
  os << "eps,achieved,bound,slack,constraint_residual,isometry_residual,best_restart\n";
  for (const auto& r : sr.rows) {
    os << fmt_double(r.eps) << ',' << fmt_double(r.achieved) << ','
       << (r.bound ? fmt_double(*r.bound) : std::string()) << ',' << fmt_double(r.slack) << ','
       << fmt_double(r.constraint_residual) << ',' << fmt_double(r.isometry_residual) << ','
       << r.best_restart << '\n';
  }
  return os.str();
}

inline json sweep_to_json(const SweepResult& sr) {
  json rows = json::array();
  for (const auto& r : sr.rows) {
    json row{{"eps", r.eps},
             {"achieved", r.achieved},
             {"slack", r.slack},
             {"constraint_residual", r.constraint_residual},
             {"isometry_residual", r.isometry_residual},
             {"best_restart", r.best_restart}};
    if (r.bound) row["bound"] = *r.bound;
    rows.push_back(std::move(row));
  }
  return json{{"rows", std::move(rows)}, {"monotone_nonincreasing", sr.monotone_nonincreasing}};
}

// --- files and digests ---------------------------------------------------------------

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file '" + path + "'");
  out << content;
}

// FNV-1a, enough to pin input identity in reports.
inline std::string fnv1a_digest(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ShapeMismatch("malformed JSON in " + origin);
  return j;
}

inline json load_json(const std::string& path) { return parse_json_text(read_file(path), path); }

struct LoadedChannel {
  ChannelSpec channel;
  IsometryReport isometry;
  std::string digest;
};

// Loads, shape-validates and measures; does not reject non-isometric data so
// that `check` can report the residuals.  require_valid() is the hard gate.
inline LoadedChannel load_channel(const std::string& path) {
  const std::string text = read_file(path);
  LoadedChannel lc{channel_from_json(parse_json_text(text, path)), {}, fnv1a_digest(text)};
  lc.isometry = check_isometry(lc.channel);
  return lc;
}

inline const ChannelSpec& require_valid(const LoadedChannel& lc, double tol = kIsometryTol) {
  if (!lc.isometry.ok(tol))
    throw InvalidChannel("channel is not an isometry (residual = " +
                         std::to_string(lc.isometry.residual()) + ")");
  return lc.channel;
}

// --- experiment report -----------------------------------------------------------------

// Every CLI invocation emits one of these as JSON: enough to re-run the exact
// experiment (command, full effective config, seeds) and to pin the inputs
// (digests).  Wall time is informative only.
struct ExperimentReport {
  std::string command;
  json config = json::object();
  json results = json::object();
  std::map<std::string, std::string> input_digests;
  double wall_time_s = 0.0;
};

inline json report_to_json(const ExperimentReport& rep) {
  return json{{"command", rep.command},
          {"version", kVersion},
          {"config", rep.config},
          {"results", rep.results},
          {"inputs", rep.input_digests},
          {"wall_time_s", rep.wall_time_s}};
}

}  // namespace qmet::io
