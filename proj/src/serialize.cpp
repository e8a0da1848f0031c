#include "qfactory/serialize.hpp"

#include <stdexcept>

namespace qf {

namespace {

u64 parse_u64(const json& j) {
  if (!j.is_string()) throw std::invalid_argument("expected a decimal string");
  const std::string s = j.get<std::string>();
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) throw std::invalid_argument("bad decimal: " + s);
  std::size_t used = 0;
  const unsigned long long v = std::stoull(s, &used);
  return static_cast<u64>(v);
}

void require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw std::invalid_argument(std::string("missing field: ") + key);
}

json complex_to_json(cplx c) { return json::array({c.real(), c.imag()}); }

cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex entries are [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

json zq_to_json(const ZqVector& v) {
  json a = json::array();
  for (auto x : v) a.push_back(std::to_string(x));
  return a;
}

json zq_to_json(const ZqMatrix& A) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) rows.push_back(zq_to_json(ZqVector(A.row(i).transpose())));
  return rows;
}

ZqVector zq_vector_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array");
  ZqVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_u64(j[i]);
  return v;
}

ZqMatrix zq_matrix_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  ZqMatrix A(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const ZqVector r = zq_vector_from_json(j[static_cast<std::size_t>(i)]);
    if (r.size() != cols) throw std::invalid_argument("ragged matrix");
    A.row(i) = r.transpose();
  }
  return A;
}

json noise_to_json(const NoiseVector& e) {
  json a = json::array();
  for (auto x : e) a.push_back(x);
  return a;
}

NoiseVector noise_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array");
  NoiseVector e(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) e(static_cast<Eigen::Index>(i)) = j[i].get<i64>();
  return e;
}

std::string bits_to_string(const Bits& b) {
  std::string s;
  s.reserve(b.size());
  for (auto x : b) s.push_back(x ? '1' : '0');
  return s;
}

Bits bits_from_string(const std::string& s) {
  Bits b;
  b.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') throw std::invalid_argument("bit-strings contain only 0 and 1");
    b.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return b;
}

json params_to_json(const ParamSet& p) {
  return {{"n", p.n},   {"q", std::to_string(p.q)}, {"m", p.m},         {"mu", p.mu},
          {"mu_prime", p.mu_prime}, {"ell_q", p.ell_q},      {"ell_e", p.ell_e}, {"profile", to_string(p.profile)}};
}

ParamSet params_from_json(const json& j) {
  for (auto key : {"n", "q", "m", "mu", "mu_prime", "ell_q", "ell_e", "profile"}) require(j, key);
  ParamSet p;
  p.n = j["n"].get<int>();
  p.q = parse_u64(j["q"]);
  p.m = j["m"].get<int>();
  p.mu = j["mu"].get<i64>();
  p.mu_prime = j["mu_prime"].get<i64>();
  p.ell_q = j["ell_q"].get<int>();
  p.ell_e = j["ell_e"].get<int>();
  p.profile = profile_from_string(j["profile"].get<std::string>());
  validate(p);
  return p;
}

json element_to_json(const DomainElement& x) {
  return {{"s", zq_to_json(x.s)}, {"e", noise_to_json(x.e)}, {"d", x.d}, {"c", x.c}};
}

DomainElement element_from_json(const json& j) {
  for (auto key : {"s", "e", "d"}) require(j, key);
  DomainElement x;
  x.s = zq_vector_from_json(j["s"]);
  x.e = noise_from_json(j["e"]);
  x.d = j["d"].get<int>();
  x.c = j.value("c", 0);
  return x;
}

json public_key_to_json(const PublicKey& pk) {
  return {{"K", zq_to_json(pk.K)}, {"y0", zq_to_json(pk.y0)}, {"params", params_to_json(pk.params)}};
}

PublicKey public_key_from_json(const json& j) {
  for (auto key : {"K", "y0", "params"}) require(j, key);
  PublicKey pk;
  pk.params = params_from_json(j["params"]);
  pk.K = zq_matrix_from_json(j["K"]);
  pk.y0 = zq_vector_from_json(j["y0"]);
  const ParamSet& p = pk.params;
  if (pk.K.rows() != p.m || pk.K.cols() != p.n || pk.y0.size() != p.m) throw std::invalid_argument("public key shape does not match params");
  if ((pk.K.array() >= p.q).any() || (pk.y0.array() >= p.q).any()) throw std::invalid_argument("public key entries not reduced mod q");
  return pk;
}

json trapdoor_to_json(const Trapdoor& td) {
  const GadgetTrapdoor& g = td.gadget;
  json gadget = {{"top_rows", g.top_rows}, {"shifts", g.shifts}, {"noise_bound", g.noise_bound},
                 {"R", zq_to_json(g.R)},   {"U", zq_to_json(g.U)}, {"U_inv", zq_to_json(g.U_inv)}};
  return {{"gadget", gadget}, {"z0", element_to_json(td.z0)}, {"d0", td.d0}};
}

Trapdoor trapdoor_from_json(const json& j) {
  for (auto key : {"gadget", "z0", "d0"}) require(j, key);
  const json& g = j["gadget"];
  for (auto key : {"top_rows", "shifts", "noise_bound", "R", "U", "U_inv"}) require(g, key);
  Trapdoor td;
  td.gadget.top_rows = g["top_rows"].get<int>();
  td.gadget.shifts = g["shifts"].get<std::vector<int>>();
  td.gadget.noise_bound = g["noise_bound"].get<i64>();
  td.gadget.R = zq_matrix_from_json(g["R"]);
  td.gadget.U = zq_matrix_from_json(g["U"]);
  td.gadget.U_inv = zq_matrix_from_json(g["U_inv"]);
  td.z0 = element_from_json(j["z0"]);
  td.d0 = j["d0"].get<int>();
  return td;
}

json keypair_to_json(const KeyPair& kp) {
  return {{"version", kFormatVersion}, {"k", public_key_to_json(kp.pk)}, {"t", trapdoor_to_json(kp.td)}};
}

KeyPair keypair_from_json(const json& j) {
  require(j, "version");
  if (j["version"].get<int>() != kFormatVersion) throw std::invalid_argument("unsupported key format version");
  require(j, "k");
  require(j, "t");
  KeyPair kp;
  kp.pk = public_key_from_json(j["k"]);
  kp.td = trapdoor_from_json(j["t"]);
  return kp;
}

json strategy_to_json(const Strategy& s) {
  json states = json::array(), obs = json::array();
  for (int L = 0; L < 8; ++L) {
    json v = json::array();
    for (auto c : s.states[static_cast<std::size_t>(L)]) v.push_back(complex_to_json(c));
    states.push_back(v);
    const CMatrix& O = s.observables[static_cast<std::size_t>(L)];
    json rows = json::array();
    for (Eigen::Index i = 0; i < O.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < O.cols(); ++k) row.push_back(complex_to_json(O(i, k)));
      rows.push_back(row);
    }
    obs.push_back(rows);
  }
  return {{"version", kFormatVersion}, {"name", s.name}, {"dim", s.dim}, {"states", states}, {"observables", obs}};
}

Strategy strategy_from_json(const json& j) {
  for (auto key : {"dim", "states", "observables"}) require(j, key);
  Strategy s;
  s.name = j.value("name", std::string("file"));
  s.dim = j["dim"].get<int>();
  if (s.dim < 1 || s.dim > 64) throw std::invalid_argument("strategy: dim out of range");
  const json& st = j["states"];
  const json& ob = j["observables"];
  if (!st.is_array() || st.size() != 8 || !ob.is_array() || ob.size() != 8) throw std::invalid_argument("strategy: need 8 states and 8 observables");
  for (std::size_t L = 0; L < 8; ++L) {
    if (st[L].size() != static_cast<std::size_t>(s.dim)) throw std::invalid_argument("strategy: state length != dim");
    CVector v(s.dim);
    for (int i = 0; i < s.dim; ++i) v(i) = complex_from_json(st[L][static_cast<std::size_t>(i)]);
    s.states[L] = v;
    if (ob[L].size() != static_cast<std::size_t>(s.dim)) throw std::invalid_argument("strategy: observable rows != dim");
    CMatrix O(s.dim, s.dim);
    for (int r = 0; r < s.dim; ++r) {
      const json& row = ob[L][static_cast<std::size_t>(r)];
      if (row.size() != static_cast<std::size_t>(s.dim)) throw std::invalid_argument("strategy: observable cols != dim");
      for (int c = 0; c < s.dim; ++c) O(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
    }
    s.observables[L] = O;
  }
  validate(s);
  return s;
}

}  // namespace qf
