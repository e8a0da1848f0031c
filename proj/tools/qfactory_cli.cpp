// qfactory_cli: key generation, protocol runs, statistics drivers, client/server and replay.
#include "qfactory/estimators.hpp"
#include "qfactory/experiments.hpp"
#include "qfactory/session.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

using namespace qf;

namespace {

struct Common {
  std::string params = "toy";
  int paper_n = 64;
  u64 seed = 1;
  std::string backend = "twobranch";
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--params", c.params, "parameter profile")->check(CLI::IsMember({"toy", "paper"}));
  cmd->add_option("--n", c.paper_n, "secret dimension for the full-size profile");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--backend", c.backend, "simulation backend")->check(CLI::IsMember({"sv", "twobranch"}));
  cmd->add_option("--out", c.out, "output file");
}

ParamSet params_of(const Common& c) { return c.params == "toy" ? default_toy() : paper_params(c.paper_n); }

Backend backend_of(const Common& c) {
  const Backend b = backend_from_string(c.backend);
  if (b == Backend::statevector && c.params != "toy") throw std::invalid_argument("the statevector backend needs --params toy");
  return b;
}

void emit(const json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << j.dump(2) << '\n';
}

// Writes records to a chained transcript; prints the summaries.
void emit_runs(const std::vector<ClientOutcome>& runs, const std::string& path) {
  json summaries = json::array();
  for (const auto& r : runs) summaries.push_back(r.summary);
  if (!path.empty()) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    TranscriptWriter w(f);
    for (const auto& r : runs)
      for (const auto& rec : r.records) w.append(rec);
    w.finish();
  }
  std::cout << json({{"version", kFormatVersion}, {"runs", summaries}}).dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QFactory simulation harness"};
  app.require_subcommand(1);

  Common keygen_c;
  auto* keygen = app.add_subcommand("keygen", "generate a key pair");
  add_common(keygen, keygen_c);

  Common run4_c;
  std::string variant = "plain";
  u64 server_seed = 0;
  int runs = 1;
  auto* run4 = app.add_subcommand("run4", "4-state protocol runs");
  add_common(run4, run4_c);
  run4->add_option("--variant", variant)->check(CLI::IsMember({"plain", "rotated"}));
  run4->add_option("--server-seed", server_seed);
  run4->add_option("--runs", runs)->check(CLI::PositiveNumber);

  Common run8_c;
  auto* run8 = app.add_subcommand("run8", "8-state protocol runs");
  add_common(run8, run8_c);
  run8->add_option("--server-seed", server_seed);
  run8->add_option("--runs", runs)->check(CLI::PositiveNumber);

  Common abort_c;
  int n_c = 4, t_c = 8, trials = 200;
  std::string p_a = "4/5", p_c = "13/20";
  auto* run_abort_cmd = app.add_subcommand("run-abort", "chunked runs combined by the XOR gadget");
  add_common(run_abort_cmd, abort_c);
  run_abort_cmd->add_option("--n_c", n_c, "number of chunks")->check(CLI::PositiveNumber);
  run_abort_cmd->add_option("--t_c", t_c, "runs per chunk")->check(CLI::PositiveNumber);
  run_abort_cmd->add_option("--p_a", p_a, "expected two-preimage rate (a/b or decimal)");
  run_abort_cmd->add_option("--p_c", p_c, "per-chunk acceptance threshold");
  run_abort_cmd->add_option("--trials", trials, "independent repetitions")->check(CLI::PositiveNumber);

  Common ver_c;
  i64 N = 64, min_count = 30;
  double f = 0.5, eps1 = 0.01, eps2 = 0.05;
  int shift = 0;
  auto* verifiable = app.add_subcommand("run-verifiable", "N 8-state runs with a statistical test phase");
  add_common(verifiable, ver_c);
  verifiable->add_option("--N", N)->check(CLI::PositiveNumber);
  verifiable->add_option("--f", f);
  verifiable->add_option("--eps2", eps2);
  verifiable->add_option("--min-count", min_count);
  verifiable->add_option("--shift", shift, "server measures tests at M + shift");
  verifiable->add_option("--server-seed", server_seed);

  Common st_c;
  std::string strategy_file, builtin = "honest";
  auto* selftest = app.add_subcommand("selftest", "i.i.d. blind self-test of a strategy");
  add_common(selftest, st_c);
  selftest->add_option("--strategy", strategy_file, "strategy JSON file");
  selftest->add_option("--builtin", builtin)->check(CLI::IsMember({"honest", "phi", "conjugated", "shifted", "junk", "leaky"}));
  selftest->add_option("--N", N)->check(CLI::PositiveNumber);
  selftest->add_option("--eps1", eps1);
  selftest->add_option("--eps2", eps2);
  selftest->add_option("--min-count", min_count);

  Common oc_c;
  int keys = 5;
  i64 samples = 10000;
  auto* oracle = app.add_subcommand("oracle-check", "cross-check invert, backends and index formulas");
  add_common(oracle, oc_c);
  oracle->add_option("--keys", keys)->check(CLI::PositiveNumber);
  oracle->add_option("--samples", samples);

  Common serve_c;
  std::string endpoint = ":7878";
  int sessions = -1;
  auto* serve = app.add_subcommand("serve", "run the honest server");
  add_common(serve, serve_c);
  serve->add_option("--endpoint", endpoint, "host:port (QFACTORY_ENDPOINT overrides)");
  serve->add_option("--sessions", sessions, "stop after this many sessions");
  serve->add_option("--shift", shift);

  Common conn_c;
  std::string protocol = "p4", run_id = "run-0";
  std::string conn_endpoint = "127.0.0.1:7878";
  auto* connect = app.add_subcommand("connect", "run the client against a server");
  add_common(connect, conn_c);
  connect->add_option("--endpoint", conn_endpoint, "host:port (QFACTORY_ENDPOINT overrides)");
  connect->add_option("--protocol", protocol)->check(CLI::IsMember({"p4", "p4-rotated", "p8", "verifiable"}));
  connect->add_option("--run-id", run_id);
  connect->add_option("--N", N)->check(CLI::PositiveNumber);
  connect->add_option("--f", f);
  connect->add_option("--eps2", eps2);

  std::string transcript;
  auto* replay_cmd = app.add_subcommand("replay", "verify a transcript file");
  replay_cmd->add_option("file", transcript)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*keygen) {
      const KeyPair kp = gen(params_of(keygen_c), keygen_c.seed);
      emit(keypair_to_json(kp), keygen_c.out);
    } else if (*run4 || *run8) {
      const Common& c = *run4 ? run4_c : run8_c;
      RunConfig cfg;
      cfg.params = params_of(c);
      cfg.protocol = *run8 ? Protocol::p8 : (variant == "plain" ? Protocol::p4 : Protocol::p4_rotated);
      ServerConfig srv{backend_of(c), server_seed, 0};
      std::vector<ClientOutcome> outs;
      for (int i = 0; i < runs; ++i) {
        cfg.client_seed = derive_seed(c.seed, "cli-run", static_cast<u64>(i));
        cfg.run_id = (*run8 ? "run8-" : "run4-") + std::to_string(i);
        outs.push_back(run_local(cfg, srv));
      }
      emit_runs(outs, c.out);
    } else if (*run_abort_cmd) {
      ChunkConfig cfg{t_c, n_c, Rational::parse(p_a), Rational::parse(p_c)};
      validate(cfg);
      const ParamSet p = params_of(abort_c);
      const Backend backend = backend_of(abort_c);
      i64 accepted = 0, b1 = 0, runs_total = 0, runs_two = 0;
      for (int i = 0; i < trials; ++i) {
        const AbortResult r = run_abort(p, cfg, derive_seed(abort_c.seed, "abort-client", static_cast<u64>(i)),
                                        derive_seed(abort_c.seed, "abort-server", static_cast<u64>(i)), backend);
        accepted += r.combined.accepted;
        b1 += r.combined.B1;
        for (const auto& rec : r.records) runs_two += rec.a, ++runs_total;
      }
      const Estimate acc = wilson(accepted, trials), pa = wilson(runs_two, runs_total), bias = wilson(b1, trials);
      const double chunk = chernoff_success_bound(pa.value, cfg.p_c.value(), cfg.t_c);
      emit({{"version", kFormatVersion},
            {"config", {{"n_c", n_c}, {"t_c", t_c}, {"p_a", cfg.p_a.str()}, {"p_c", cfg.p_c.str()}}},
            {"accept_rate", to_json(acc)},
            {"p_a_measured", to_json(pa)},
            {"empirical_bound", std::pow(chunk, n_c)},
            {"B1_bias", {{"value", bias.value - 0.5}, {"n", trials}, {"sigma", bias.sigma}}}},
           abort_c.out);
    } else if (*verifiable) {
      const ParamSet p = params_of(ver_c);
      const Backend backend = backend_of(ver_c);
      const VerifiableResult r = run_verifiable(p, N, f, eps2, backend, ver_c.seed, server_seed, shift, min_count);
      emit({{"version", kFormatVersion},
            {"accepted", r.accepted},
            {"N", N},
            {"tested", r.plan.T.size()},
            {"unmeasured", r.unmeasured.size()},
            {"min_unmeasured_fidelity", r.min_unmeasured_fidelity},
            {"stats", to_json(r.check)}},
           ver_c.out);
    } else if (*selftest) {
      Strategy s;
      if (!strategy_file.empty()) {
        std::ifstream in(strategy_file);
        s = strategy_from_json(json::parse(in));
      } else if (builtin == "honest") {
        s = honest_strategy();
      } else if (builtin == "phi") {
        s = phi_family_strategy(1.0);
      } else if (builtin == "conjugated") {
        s = conjugated_strategy(4, st_c.seed);
      } else if (builtin == "shifted") {
        s = shifted_strategy(kPi / 8);
      } else if (builtin == "junk") {
        s = junk_replaced_strategy();
      } else {
        s = leaky_strategy();
      }
      const SelftestResult r = selftest_iid(s, N, eps1, eps2, st_c.seed, min_count);
      json j = {{"version", kFormatVersion},
                {"strategy", s.name},
                {"accepted", r.accepted},
                {"stats", to_json(r.check)},
                {"blindness", {{"pass", r.blindness.pass}, {"max_distance", r.blindness.max_distance}}}};
      if (r.isometry) j["isometry"] = to_json(*r.isometry);
      emit(j, st_c.out);
    } else if (*oracle) {
      if (oc_c.params != "toy") throw std::invalid_argument("oracle-check needs --params toy");
      const OracleCheck r = oracle_check(params_of(oc_c), keys, samples, oc_c.seed);
      json j = r.to_json();
      j["version"] = kFormatVersion;
      emit(j, oc_c.out);
      return j["ok"].get<bool>() ? 0 : 1;
    } else if (*serve) {
      TcpServer server(endpoint_from_env(endpoint), {backend_of(serve_c), serve_c.seed, shift});
      std::cerr << "listening on port " << server.port() << '\n';
      server.serve(sessions);
      return server.failed_sessions() ? 1 : 0;
    } else if (*connect) {
      RunConfig cfg;
      cfg.protocol = protocol_from_string(protocol);
      cfg.params = params_of(conn_c);
      cfg.client_seed = conn_c.seed;
      cfg.run_id = run_id;
      cfg.N = N;
      cfg.f = f;
      cfg.eps2 = eps2;
      auto ch = connect_tcp(endpoint_from_env(conn_endpoint));
      emit_runs({run_client(*ch, cfg)}, conn_c.out);
    } else if (*replay_cmd) {
      std::ifstream in(transcript);
      const ReplayReport r = replay(in);
      std::cout << r.to_json().dump(2) << '\n';
      return r.ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
