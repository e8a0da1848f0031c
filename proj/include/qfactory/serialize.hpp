#pragma once

#include "qfactory/lwe.hpp"
#include "qfactory/selftest.hpp"

#include <json.hpp>

#include <string>

namespace qf {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

// Z_q values travel as decimal strings because q may exceed 2^53.
json zq_to_json(const ZqVector& v);
json zq_to_json(const ZqMatrix& A);
ZqVector zq_vector_from_json(const json& j);
ZqMatrix zq_matrix_from_json(const json& j);

json noise_to_json(const NoiseVector& e);
NoiseVector noise_from_json(const json& j);

std::string bits_to_string(const Bits& b);
Bits bits_from_string(const std::string& s);

json params_to_json(const ParamSet& p);
ParamSet params_from_json(const json& j);

json element_to_json(const DomainElement& x);
DomainElement element_from_json(const json& j);

// {"K", "y0", "params"}
json public_key_to_json(const PublicKey& pk);
PublicKey public_key_from_json(const json& j);

// {"gadget", "z0", "d0"}
json trapdoor_to_json(const Trapdoor& td);
Trapdoor trapdoor_from_json(const json& j);

// {"version", "k": {...}, "t": {...}}
json keypair_to_json(const KeyPair& kp);
KeyPair keypair_from_json(const json& j);

// {"dim", "states": 8 x dim [re, im], "observables": 8 x dim x dim [re, im]}
json strategy_to_json(const Strategy& s);
Strategy strategy_from_json(const json& j);

}  // namespace qf
