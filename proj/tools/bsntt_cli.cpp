#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "bsntt/bsntt.hpp"

namespace {

using namespace bsntt;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitDetected = 2;

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PolyFormat parse_format(const std::string& s) {
  if (s == "json") return PolyFormat::Json;
  if (s == "binary") return PolyFormat::Binary;
  throw usage_error("unknown format '" + s + "' (expected json or binary)");
}

void emit(const std::string& path, const std::string& data) {
  if (path.empty() || path == "-") {
    std::fwrite(data.data(), 1, data.size(), stdout);
    return;
  }
  write_file_atomic(path, data);
}

/// `text` is inline JSON or `@path`.
nlohmann::json json_argument(const std::string& text) {
  const std::string body = !text.empty() && text[0] == '@' ? read_file(text.substr(1)) : text;
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("malformed JSON: ") + e.what());
  }
}

struct NttArgs {
  std::string input;
  std::string output;
  std::string format = "json";
  std::string fault;
  bool inverse = false;
  bool prot = false;
};

int cmd_ntt(const NttArgs& a) {
  const Poly in = load_poly(a.input);
  const Engine& engine = Engine::shared();
  Poly out{};
  bool detected = false;
  if (!a.fault.empty()) {
    const FaultSpec spec = fault_spec_from_json(json_argument(a.fault));
    const FaultSimulator sim(engine, a.inverse ? Target::Intt : Target::Ntt, {in, Poly{}}, a.prot);
    const FaultOutcome o = sim.run(spec);
    out = o.output;
    detected = o.detected_flag;
    std::cerr << "fault outcome: " << classification_name(o.classification) << "\n";
  } else if (a.prot) {
    const ProtectedResult r = a.inverse ? engine.protected_intt256(in) : engine.protected_ntt256(in);
    out = r.value;
    detected = r.fault_detected;
  } else {
    out = a.inverse ? engine.intt256(in) : engine.ntt256(in);
  }
  emit(a.output, serialize_poly(out, parse_format(a.format)));
  if (a.prot && detected) {
    std::cerr << "fault detected\n";
    return kExitDetected;
  }
  return kExitOk;
}

struct PolymulArgs {
  std::string a;
  std::string b;
  std::string output;
  std::string format = "json";
  bool prot = false;
};

int cmd_polymul(const PolymulArgs& a) {
  const Poly x = load_poly(a.a);
  const Poly y = load_poly(a.b);
  const Engine& engine = Engine::shared();
  if (a.prot) {
    const ProtectedResult r = engine.protected_poly_mul(x, y);
    emit(a.output, serialize_poly(r.value, parse_format(a.format)));
    if (r.fault_detected) {
      std::cerr << "fault detected\n";
      return kExitDetected;
    }
    return kExitOk;
  }
  emit(a.output, serialize_poly(engine.poly_mul(x, y), parse_format(a.format)));
  return kExitOk;
}

struct GencodeArgs {
  std::string circuit;
  std::string output;
  std::string histogram;
};

int cmd_gencode(const GencodeArgs& a) {
  static const std::map<std::string, Netlist (*)()> builders = {
      {"butterfly", build_butterfly},
      {"modmul", build_mod_multiplier},
      {"modadd", build_mod_adder},
      {"modsub", build_mod_subtractor},
      {"pointwise", build_pointwise_multiplier},
      {"accumulator", build_pointwise_accumulator},
  };
  const auto it = builders.find(a.circuit);
  if (it == builders.end()) throw usage_error("unknown circuit '" + a.circuit + "'");
  const Netlist nl = it->second();
  emit(a.output, emit_program(nl));
  if (!a.histogram.empty()) {
    const GateHistogram h = gate_histogram(nl);
    nlohmann::ordered_json j;
    j["circuit"] = a.circuit;
    j["AND2"] = h.and2;
    j["OR2"] = h.or2;
    j["XOR2"] = h.xor2;
    j["NOT1"] = h.not1;
    j["total"] = h.total();
    write_file_atomic(a.histogram, j.dump(2) + "\n");
  }
  return kExitOk;
}

struct CampaignArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::string output;
  std::string csv;
  unsigned threads = 1;
};

int cmd_campaign(const CampaignArgs& a) {
  CampaignConfig cfg = campaign_config_from_json(json_argument("@" + a.config));
  cfg.seed = a.seed;
  const CampaignReport rep = run_campaign(cfg, a.threads);
  emit(a.output, rep.to_json().dump(2) + "\n");
  if (!a.csv.empty()) write_file_atomic(a.csv, rep.to_csv());
  std::cerr << "trials " << rep.trials << ": no_effect " << rep.count(Classification::NoEffect)
            << ", fault_detected " << rep.count(Classification::FaultDetected) << ", fault_not_detected "
            << rep.count(Classification::FaultNotDetected) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bit-sliced redundant NTT toolkit"};
  app.require_subcommand(1);

  NttArgs ntt;
  auto* c_ntt = app.add_subcommand("ntt", "Forward or inverse 256-point transform");
  c_ntt->add_option("input", ntt.input, "Input polynomial (JSON array or 1024-byte binary)")->required();
  c_ntt->add_option("-o,--output", ntt.output, "Output file (stdout if omitted)");
  c_ntt->add_flag("--inverse", ntt.inverse, "Inverse transform");
  c_ntt->add_flag("--protected", ntt.prot, "Redundant layout with fault detection (exit 2 on detection)");
  c_ntt->add_option("--format", ntt.format, "Output format: json or binary");
  c_ntt->add_option("--fault", ntt.fault, "Fault to inject, as JSON or @file");

  PolymulArgs pm;
  auto* c_pm = app.add_subcommand("polymul", "Negacyclic product of two polynomials");
  c_pm->add_option("a", pm.a, "First polynomial")->required();
  c_pm->add_option("b", pm.b, "Second polynomial")->required();
  c_pm->add_option("-o,--output", pm.output, "Output file (stdout if omitted)");
  c_pm->add_flag("--protected", pm.prot, "Redundant layout with fault detection (exit 2 on detection)");
  c_pm->add_option("--format", pm.format, "Output format: json or binary");

  GencodeArgs gc;
  auto* c_gc = app.add_subcommand("gencode", "Emit a circuit as straight-line program text");
  c_gc->add_option("--circuit", gc.circuit, "butterfly|modmul|modadd|modsub|pointwise|accumulator")->required();
  c_gc->add_option("-o,--output", gc.output, "Program text file (stdout if omitted)");
  c_gc->add_option("--histogram", gc.histogram, "Gate histogram JSON file");

  CampaignArgs cp;
  auto* c_cp = app.add_subcommand("campaign", "Run a fault-injection campaign");
  c_cp->add_option("--config", cp.config, "Campaign config JSON")->required();
  c_cp->add_option("--seed", cp.seed, "RNG seed")->required();
  c_cp->add_option("--out", cp.output, "Report JSON file (stdout if omitted)");
  c_cp->add_option("--csv", cp.csv, "Per-trial CSV file");
  c_cp->add_option("--threads", cp.threads, "Worker threads")->check(CLI::Range(1u, 256u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }

  try {
    if (*c_ntt) return cmd_ntt(ntt);
    if (*c_pm) return cmd_polymul(pm);
    if (*c_gc) return cmd_gencode(gc);
    if (*c_cp) return cmd_campaign(cp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
