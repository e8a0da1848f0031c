#pragma once

#include "qfactory/lwe.hpp"
#include "qfactory/qsim.hpp"
#include "qfactory/rng.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qf {

// rotated: the server finishes with the public Clifford H*S on its output qubit, turning
// H^{B1} X^{B2}|0> into R(pi/2)^{B1} Z^{B1 xor B2}|+>.
enum class Variant { plain, rotated };
enum class Backend { statevector, two_branch };
enum class Acceptance { two_preimages, single_preimage, no_preimage };

std::string to_string(Variant v);
std::string to_string(Backend b);
std::string to_string(Acceptance a);
Variant variant_from_string(const std::string& s);
Backend backend_from_string(const std::string& s);

struct KeyMessage {
  PublicKey pk;
  Variant variant = Variant::plain;
  std::string predicate = "d-bit";  // h(s, e, d) = d
};

struct ClientState4 {
  PublicKey pk;
  Trapdoor td;
  Variant variant = Variant::plain;
  u64 seed = 0;
};

struct Transcript4 {
  ZqVector y;
  Bits b;
};

struct OutputIndex4 {
  int B1 = 0;
  int B2 = 0;
  Acceptance accepted = Acceptance::no_preimage;
};

struct ServerOutput {
  Transcript4 msg;
  std::optional<QubitDescription> qubit;
};

using PreimageOracle = std::function<std::vector<DomainElement>(const ZqVector&)>;
using ServerStrategy = std::function<ServerOutput(const KeyMessage&, Rng&)>;

std::pair<ClientState4, KeyMessage> client_init(const ParamSet& p, Variant variant, u64 seed);

// Statevector runs the full circuit (toy only). Two-branch samples x uniformly and needs a
// preimage oracle; without one it enumerates the domain (toy only).
ServerOutput server_honest(const KeyMessage& key, Backend backend, Rng& rng, const PreimageOracle& oracle = {});
ServerStrategy honest_strategy(Backend backend, PreimageOracle oracle = {});

// Index formulas for two preimages x = (z, 0), x' = (z', 1) and measurement outcome b.
std::pair<int, int> bb84_indices(const ParamSet& p, const DomainElement& x, const DomainElement& xp, const Bits& b);

OutputIndex4 client_finalize(const ClientState4& c, const ZqVector& y, const Bits& b);
OutputIndex4 client_finalize_rotated(const ClientState4& c, const ZqVector& y, const Bits& b);
OutputIndex4 finalize(const ClientState4& c, const ZqVector& y, const Bits& b);
// On no_preimage, draws (B1, B2) uniformly from rng.
OutputIndex4 finalize_always(const ClientState4& c, const ZqVector& y, const Bits& b, Rng& rng);

// Description the client attaches to its indices.
QubitDescription described_state(Variant v, const OutputIndex4& out);

Qubit apply_rotation_clifford(const Qubit& v);

struct Result4 {
  ClientState4 client;
  KeyMessage key;
  Transcript4 transcript;
  OutputIndex4 out;
  std::optional<QubitDescription> qubit;
};

Result4 run_protocol4(const ParamSet& p, Variant variant, u64 client_seed, u64 server_seed, const ServerStrategy& strategy);
// Honest server; the two-branch backend is given the client's trapdoor as its simulation oracle.
Result4 run_protocol4(const ParamSet& p, Variant variant, u64 client_seed, u64 server_seed, Backend backend);

}  // namespace qf
