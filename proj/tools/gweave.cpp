// gweave: command-line front end for the weaving toolkit.
//
// Exit codes: 0 success / woven / certificate valid, 1 not woven,
// 2 parse or usage error, 3 numeric failure, 4 sampled search inconclusive,
// 5 budget exceeded, 6 hypothesis fails.

#include "gweave/genlab.hpp"
#include "gweave/io.hpp"
#include "gweave/perturb.hpp"
#include "gweave/riesz.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace gweave;

enum Exit : int {
  kOk = 0,
  kNotWoven = 1,
  kParse = 2,
  kNumeric = 3,
  kInconclusive = 4,
  kBudget = 5,
  kHypothesis = 6,
};

struct Common {
  std::string json_out;
  Tolerance tol;
};

void emit(const Common& c, const Json& report, const std::string& text) {
  if (c.json_out == "-") {
    std::cout << dump(report);
  } else {
    std::cout << text;
    if (!c.json_out.empty()) write_json_file(c.json_out, report);
  }
}

Json wrap(const Common& c, const char* command, std::optional<std::uint64_t> seed, Json body) {
  Json j = report_header(c.tol, seed);
  j["command"] = command;
  j["report"] = std::move(body);
  return j;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string labels(const Partition& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.labels.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(p.labels[i] + 1);
  }
  return s + ")";
}

// A FrameFile, or the first member of a FamilyFile.
GFrame load_frame_or_first(const std::string& path) {
  const Json j = read_json_file(path);
  try {
    if (j.is_object() && j.contains("frames")) {
      const Json& frames = j.at("frames");
      if (!frames.is_array() || frames.empty()) throw ParseError("$.frames: expected a nonempty array");
      return frame_from_json(frames[0]);
    }
    return frame_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

int cmd_analyze(const Common& c, const std::string& path) {
  const GFrame f = load_frame(path);
  const FrameBounds fb = frame_bounds(f, c.tol);
  const RieszBounds rb = riesz_bounds(f, c.tol);
  const bool complete = rank(analysis_matrix(f), c.tol) == f.ambient_dim();
  const bool orthonormal = is_g_orthonormal(f, c.tol);
  const bool parseval = fb.is_frame() && std::abs(fb.lower - 1.0) <= c.tol.eq_atol &&
                        std::abs(fb.upper - 1.0) <= c.tol.eq_atol;
  const bool tight = fb.is_frame() && fb.upper - fb.lower <= c.tol.eq_atol * std::max(1.0, fb.upper);

  Json body{{"ambient_dim", f.ambient_dim()},
            {"block_dims", f.block_dims()},
            {"frame_bounds", to_json(fb)},
            {"riesz_bounds", to_json(rb)},
            {"complete", complete},
            {"tight", tight},
            {"parseval", parseval},
            {"g_orthonormal", orthonormal},
            {"dual_available", fb.is_frame()}};
  std::string text = "frame bounds: (" + fmt(fb.lower) + ", " + fmt(fb.upper) + ") " +
                     std::string(to_string(fb.classification)) + "\n";
  text += "riesz bounds: (" + fmt(rb.lower) + ", " + fmt(rb.upper) + ")" +
          (rb.is_basis ? " g-Riesz basis" : rb.is_sequence(c.tol) ? " g-Riesz sequence" : "") + "\n";
  text += std::string("complete: ") + (complete ? "yes" : "no") + "\n";
  if (parseval) text += "parseval\n";
  if (orthonormal) text += "g-orthonormal basis\n";
  text += std::string("canonical dual: ") + (fb.is_frame() ? "available" : "unavailable") + "\n";
  emit(c, wrap(c, "analyze", std::nullopt, std::move(body)), text);
  return kOk;
}

struct WeaveArgs {
  std::string path;
  std::string mode = "exhaustive";
  std::optional<std::uint64_t> budget;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

int cmd_weave(const Common& c, const WeaveArgs& a) {
  const GFrameFamily fam = load_family(a.path, c.tol);
  SearchOptions opts;
  opts.mode = a.mode == "sampled" ? SearchMode::Sampled : SearchMode::Exhaustive;
  opts.budget = a.budget.value_or(default_budget());
  opts.seed = a.seed;
  opts.threads = a.threads;
  const WeavingReport r = certify_woven(fam, opts, c.tol);

  std::string text = std::string(to_string(r.status)) + "\n";
  text += "universal bounds: (" + fmt(r.universal_lower) + ", " + fmt(r.universal_upper) + ")\n";
  text += "lower witness: " + labels(r.witness_lower) + "\n";
  text += "upper witness: " + labels(r.witness_upper) + "\n";
  text += "partitions checked: " + std::to_string(r.partitions_checked) + " (" +
          std::string(to_string(r.mode)) + ")\n";
  emit(c, wrap(c, "weave", r.seed, to_json(r)), text);
  switch (r.status) {
    case WeaveStatus::Woven: return kOk;
    case WeaveStatus::NotWoven: return kNotWoven;
    case WeaveStatus::SampledNoCounterexample: return kInconclusive;
  }
  return kNotWoven;
}

struct CertifyArgs {
  std::string path;
  std::string theorem;
  std::size_t base = 1;
  std::vector<double> lambdas;
  std::vector<double> etas;
  std::vector<double> mus;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> budget;
  std::optional<double> scale;
  std::string ops_path;
  bool cross_check = false;
};

std::vector<double> or_zeros(const std::vector<double>& v, std::size_t n) {
  return v.empty() ? std::vector<double>(n, 0.0) : v;
}

bool all_zero(const std::vector<double>& v) {
  for (double x : v) {
    if (x != 0.0) return false;
  }
  return true;
}

std::vector<Matrix> load_operators(const std::string& path, std::size_t n) {
  const Json j = read_json_file(path);
  if (!j.is_object() || !j.contains("operators") || !j["operators"].is_array()) {
    throw ParseError(path + ": $: missing array \"operators\"");
  }
  // Each operator is read as a one-block frame file body with rows = n.
  std::vector<Matrix> out;
  const Json& ops = j["operators"];
  for (std::size_t k = 0; k < ops.size(); ++k) {
    Json frame{{"ambient_dim", n},
               {"field", j.value("field", "real")},
               {"blocks", Json::array({Json{{"rows", n}, {"entries", ops[k]}}})}};
    try {
      out.push_back(frame_from_json(frame).block(0));
    } catch (const ParseError& e) {
      throw ParseError(path + ": operators[" + std::to_string(k) + "]: " + e.what());
    }
  }
  return out;
}

int cmd_certify(const Common& c, const CertifyArgs& a) {
  const std::uint64_t budget = a.budget.value_or(default_budget());
  Json body;
  std::string text;
  int code = kOk;
  std::optional<std::uint64_t> seed;
  std::optional<GFrameFamily> cross_family;

  if (a.theorem == "k") {
    GFrameFamily fam = load_family(a.path, c.tol);
    const KCertificate k = minimal_k(fam, budget, c.tol);
    body = to_json(k);
    text = k.feasible ? "K = " + fmt(k.k) + "\npredicted bounds: (" + fmt(k.predicted_lower) +
                            ", " + fmt(k.predicted_upper) + ")\n"
                      : std::string("K condition infeasible\n");
    code = k.feasible ? kOk : kHypothesis;
    cross_family.emplace(std::move(fam));
  } else if (a.theorem == "pw" || a.theorem == "pw-chain") {
    GFrameFamily fam = load_family(a.path, c.tol);
    const bool chained = a.theorem == "pw-chain";
    const std::size_t slots = chained ? fam.members() - 1 : fam.members();
    if (!chained && (a.base == 0 || a.base > fam.members())) {
      throw InvalidArgument("--base must lie in 1.." + std::to_string(fam.members()));
    }
    PerturbationScalars s;
    s.lambdas = !a.lambdas.empty() ? a.lambdas
                : chained          ? fit_chain_lambdas(fam)
                                   : fit_lambdas(fam, a.base - 1);
    s.etas = or_zeros(a.etas, slots);
    s.mus = or_zeros(a.mus, slots);
    const VerificationMode mode = all_zero(s.etas) && all_zero(s.mus)
                                      ? VerificationMode::ExactLambdaOnly
                                      : VerificationMode::SampledFalsification;
    const PerturbationCertificate cert =
        chained ? chained_certificate(fam, s, mode, a.trials, a.seed, c.tol)
                : perturbation_certificate(fam, a.base - 1, s, mode, a.trials, a.seed, c.tol);
    seed = cert.seed;
    body = to_json(cert);
    text = std::string(to_string(cert.status)) + " (" + std::string(to_string(cert.mode)) + ")\n";
    text += "predicted bounds: (" + fmt(cert.predicted_lower) + ", " + fmt(cert.predicted_upper) + ")\n";
    switch (cert.status) {
      case CertificateStatus::Valid: code = kOk; break;
      case CertificateStatus::NotFalsified: code = kInconclusive; break;
      default: code = kHypothesis;
    }
    cross_family.emplace(std::move(fam));
  } else if (a.theorem == "op-perturb") {
    const GFrame f = load_frame_or_first(a.path);
    const auto n = static_cast<Eigen::Index>(f.ambient_dim());
    std::vector<Matrix> ops;
    if (!a.ops_path.empty()) {
      ops = load_operators(a.ops_path, f.ambient_dim());
    } else if (a.scale) {
      ops.assign(f.size(), *a.scale * Matrix::Identity(n, n));
    } else {
      throw InvalidArgument("op-perturb needs --ops or --scale");
    }
    const OperatorPerturbationReport r = operator_perturbation(f, ops, c.tol, budget);
    body = to_json(r);
    text = std::string("condition max ||I - T_i||^2 < A/B: ") + (r.condition_holds ? "holds" : "fails") + "\n";
    text += "stated lower: " + fmt(r.stated_lower) + "\ntriangle lower: " + fmt(r.triangle_lower) + "\n";
    if (r.exhaustive) {
      text += "exhaustive bounds: (" + fmt(r.exhaustive->universal_lower) + ", " +
              fmt(r.exhaustive->universal_upper) + ")\n";
    }
    code = r.condition_holds ? kOk : kHypothesis;
  } else if (a.theorem == "scaled-dual") {
    const GFrame f = load_frame_or_first(a.path);
    const ScaledDualReport r = scaled_dual_weave(f, c.tol, budget);
    body = to_json(r);
    text = "B/A = " + fmt(r.ratio) + "\n";
    text += r.hypothesis_holds ? std::string("certified woven with its scaled canonical dual: ") +
                                     (r.certified_woven ? "yes" : "no") + "\n"
                               : std::string("hypothesis B/A < 2 fails\n");
    code = r.hypothesis_holds && r.certified_woven ? kOk : kHypothesis;
  } else {
    throw InvalidArgument("unknown theorem '" + a.theorem + "'");
  }

  if (a.cross_check) {
    if (cross_family) {
      SearchOptions opts;
      opts.budget = budget;
      const WeavingReport w = certify_woven(*cross_family, opts, c.tol);
      body["cross_check"] = to_json(w);
      text += "cross-check exhaustive bounds: (" + fmt(w.universal_lower) + ", " +
              fmt(w.universal_upper) + ")\n";
    } else {
      // op-perturb and scaled-dual already run the exhaustive check.
      body["cross_check"] = nullptr;
    }
  }
  emit(c, wrap(c, "certify", seed, std::move(body)), text);
  return code;
}

struct RieszArgs {
  std::string path;
  std::vector<std::size_t> permutation;
  std::optional<std::uint64_t> budget;
};

int cmd_riesz(const Common& c, const RieszArgs& a) {
  const Json j = read_json_file(a.path);
  const std::uint64_t budget = a.budget.value_or(default_budget());
  Json body;
  std::string text;
  int code = kOk;
  if (j.is_object() && j.contains("frames")) {
    const GFrameFamily fam = [&] {
      try {
        return family_from_json(j, c.tol);
      } catch (const ParseError& e) {
        throw ParseError(a.path + ": " + e.what());
      }
    }();
    const WeavingRieszReport r = weaving_riesz_check(fam, c.tol, budget);
    const EquivalenceConstants k = equivalence_constants(fam, c.tol, budget);
    body = Json{{"weaving", to_json(r)}, {"equivalence", to_json(k)}};
    text = std::string("woven as g-Riesz bases: ") + (r.woven() ? "yes" : "no") + "\n";
    text += "common riesz bounds: (" + fmt(r.common_lower) + ", " + fmt(r.common_upper) + ")\n";
    text += "a2 = " + fmt(k.a2) + ", d3 = " + fmt(k.d3) + ", e4 = " + fmt(k.e4) + "\n";
    code = r.woven() ? kOk : kNotWoven;
  } else {
    const GFrame f = [&] {
      try {
        return frame_from_json(j);
      } catch (const ParseError& e) {
        throw ParseError(a.path + ": " + e.what());
      }
    }();
    const RieszBounds rb = riesz_bounds(f, c.tol);
    body = Json{{"riesz_bounds", to_json(rb)}};
    text = "riesz bounds: (" + fmt(rb.lower) + ", " + fmt(rb.upper) + ")\n";
    if (!a.permutation.empty()) {
      std::vector<std::size_t> pi;
      for (std::size_t x : a.permutation) {
        if (x == 0) throw InvalidArgument("--permutation entries are 1-based");
        pi.push_back(x - 1);
      }
      const PermutationWeaveReport r = permutation_weave(f, pi, c.tol);
      body["permutation"] = to_json(r);
      text += std::string("woven with its permutation: ") + (r.woven ? "yes" : "no") + "\n";
      if (r.witness) text += "witness: " + labels(*r.witness) + "\n";
      code = r.woven ? kOk : kNotWoven;
    }
  }
  emit(c, wrap(c, "riesz", std::nullopt, std::move(body)), text);
  return code;
}

struct GenerateArgs {
  GenSpec spec;
  std::string kind = "parseval";
  std::string out;
};

int cmd_generate(const Common& c, GenerateArgs a) {
  a.spec.kind = gen_kind_from_string(a.kind);
  const Generated g = generate(a.spec);
  const Json file = std::holds_alternative<GFrame>(g) ? frame_to_json(std::get<GFrame>(g))
                                                      : family_to_json(std::get<GFrameFamily>(g));
  if (a.out.empty() || a.out == "-") {
    std::cout << dump(file);
  } else {
    write_json_file(a.out, file);
  }
  if (!c.json_out.empty() && c.json_out != "-") {
    write_json_file(c.json_out, wrap(c, "generate", a.spec.seed, to_json(a.spec)));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"g-frame weaving toolkit", "gweave"};
  app.set_version_flag("--version", std::string(gweave::version()));
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--json", common.json_out, "Write the JSON report to a path ('-' for stdout)");
    sub->add_option("--rank-rtol", common.tol.rank_rtol, "Relative rank cutoff");
    sub->add_option("--frame-rtol", common.tol.frame_rtol, "Frame classification threshold");
    sub->add_option("--eq-atol", common.tol.eq_atol, "Absolute comparison slack");
  };
  const auto mode_check = CLI::IsMember({"exhaustive", "sampled"});

  std::string analyze_path;
  auto* analyze = app.add_subcommand("analyze", "Frame bounds, Riesz bounds and structure of a frame file");
  analyze->add_option("frame", analyze_path, "FrameFile")->required();
  add_common(analyze);

  WeaveArgs wa;
  auto* weave = app.add_subcommand("weave", "Certify a family as woven");
  weave->add_option("family", wa.path, "FamilyFile")->required();
  weave->add_option("--mode", wa.mode, "exhaustive or sampled")->check(mode_check);
  weave->add_option("--budget", wa.budget, "Partition budget (default GWEAVE_BUDGET or 1000000)");
  weave->add_option("--seed", wa.seed, "Sampling seed");
  weave->add_option("--threads", wa.threads, "Worker threads (0 = all cores)");
  add_common(weave);

  CertifyArgs ca;
  auto* certify = app.add_subcommand("certify", "Check a sufficient condition for weaving");
  certify->add_option("family", ca.path, "FamilyFile (FrameFile for op-perturb and scaled-dual)")
      ->required();
  certify->add_option("--theorem", ca.theorem, "k, pw, pw-chain, op-perturb or scaled-dual")
      ->required()
      ->check(CLI::IsMember({"k", "pw", "pw-chain", "op-perturb", "scaled-dual"}));
  certify->add_option("--base", ca.base, "Base member for pw (1-based)");
  certify->add_option("--lambdas", ca.lambdas, "lambda_j (default: fitted synthesis distances)")
      ->delimiter(',');
  certify->add_option("--etas", ca.etas, "eta_j (default 0)")->delimiter(',');
  certify->add_option("--mus", ca.mus, "mu_j (default 0)")->delimiter(',');
  certify->add_option("--trials", ca.trials, "Falsification trials per pair");
  certify->add_option("--seed", ca.seed, "Falsification seed");
  certify->add_option("--budget", ca.budget, "Subset/partition budget");
  certify->add_option("--scale", ca.scale, "op-perturb: T_i = scale * I");
  certify->add_option("--ops", ca.ops_path, "op-perturb: JSON file with one n x n operator per index");
  certify->add_flag("--cross-check", ca.cross_check, "Also report exhaustive universal bounds");
  add_common(certify);

  RieszArgs ra;
  auto* riesz = app.add_subcommand("riesz", "Riesz bounds, Riesz weaving and permutation weaving");
  riesz->add_option("input", ra.path, "FrameFile or two-member FamilyFile")->required();
  riesz->add_option("--permutation", ra.permutation, "1-based permutation of the indices")
      ->delimiter(',');
  riesz->add_option("--budget", ra.budget, "Partition budget");
  add_common(riesz);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Write a seeded random frame or family");
  gen->add_option("--kind", ga.kind, "parseval, prescribed-spectrum, riesz-basis, g-orthonormal, perturbed")
      ->check(CLI::IsMember({"parseval", "prescribed-spectrum", "riesz-basis", "g-orthonormal", "perturbed"}));
  gen->add_option("-n,--ambient-dim", ga.spec.ambient_dim, "Ambient dimension")->required();
  gen->add_option("--dims", ga.spec.block_dims, "Block dimensions")->required()->delimiter(',');
  gen->add_option("--spectrum", ga.spec.spectrum, "Frame operator eigenvalues")->delimiter(',');
  gen->add_option("--seed", ga.spec.seed, "Seed");
  gen->add_option("--base-seed", ga.spec.base_seed, "perturbed: seed of the base frame");
  gen->add_option("--noise", ga.spec.noise_scale, "perturbed: noise Frobenius norm per block");
  gen->add_option("--members", ga.spec.members, "perturbed: family size");
  gen->add_flag("--complex", ga.spec.complex, "Complex entries");
  gen->add_option("--out", ga.out, "Output path ('-' or omitted for stdout)");
  add_common(gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }

  try {
    common.tol.validate();
    if (*analyze) return cmd_analyze(common, analyze_path);
    if (*weave) return cmd_weave(common, wa);
    if (*certify) return cmd_certify(common, ca);
    if (*riesz) return cmd_riesz(common, ra);
    if (*gen) return cmd_generate(common, ga);
  } catch (const gweave::BudgetExceeded& e) {
    std::cerr << "gweave: " << e.what() << "\n";
    return kBudget;
  } catch (const gweave::NumericFailure& e) {
    std::cerr << "gweave: numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const gweave::InvalidArgument& e) {
    std::cerr << "gweave: " << e.what() << "\n";
    return kParse;
  } catch (const std::exception& e) {
    std::cerr << "gweave: " << e.what() << "\n";
    return kNumeric;
  }
  return kParse;
}
