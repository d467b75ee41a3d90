#include "gweave/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace gweave {

std::string_view version() noexcept { return GWEAVE_VERSION_STRING; }

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

std::size_t positive_int(const Json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
    fail(where, "expected a positive integer");
  }
  return v.get<std::size_t>();
}

double finite_number(const Json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(where, "non-finite value");
  return x;
}

bool is_complex_field(const Json& obj, const std::string& where) {
  const Json& f = field(obj, "field", where);
  if (f == "real") return false;
  if (f == "complex") return true;
  fail(where + ".field", "expected \"real\" or \"complex\"");
}

GFrame frame_at(const Json& j, const std::string& where) {
  const std::size_t n = positive_int(field(j, "ambient_dim", where), where + ".ambient_dim");
  const bool cplx = is_complex_field(j, where);
  const Json& blocks = field(j, "blocks", where);
  if (!blocks.is_array() || blocks.empty()) fail(where + ".blocks", "expected a nonempty array");
  std::vector<Matrix> out;
  out.reserve(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::string bw = where + ".blocks[" + std::to_string(b) + "]";
    const std::size_t rows = positive_int(field(blocks[b], "rows", bw), bw + ".rows");
    const Json& entries = field(blocks[b], "entries", bw);
    if (!entries.is_array() || entries.size() != rows) {
      fail(bw + ".entries", "expected " + std::to_string(rows) + " rows");
    }
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < rows; ++r) {
      const std::string rw = bw + ".entries[" + std::to_string(r) + "]";
      const Json& row = entries[r];
      if (!row.is_array() || row.size() != n) {
        fail(rw, "expected " + std::to_string(n) + " entries");
      }
      for (std::size_t c = 0; c < n; ++c) {
        const std::string cw = rw + "[" + std::to_string(c) + "]";
        const Json& v = row[c];
        Complex z;
        if (cplx) {
          if (!v.is_array() || v.size() != 2) fail(cw, "expected a [re, im] pair");
          z = Complex(finite_number(v[0], cw + "[0]"), finite_number(v[1], cw + "[1]"));
        } else {
          z = Complex(finite_number(v, cw), 0.0);
        }
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = z;
      }
    }
    out.push_back(std::move(m));
  }
  try {
    return GFrame(n, std::move(out));
  } catch (const InvalidArgument& e) {
    fail(where, e.what());
  }
}

Json frame_body(const GFrame& frame, bool cplx) {
  Json blocks = Json::array();
  for (const Matrix& b : frame.blocks()) {
    Json entries = Json::array();
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < b.cols(); ++c) {
        if (cplx) {
          row.push_back(Json::array({b(r, c).real(), b(r, c).imag()}));
        } else {
          row.push_back(b(r, c).real());
        }
      }
      entries.push_back(std::move(row));
    }
    blocks.push_back(Json{{"rows", b.rows()}, {"entries", std::move(entries)}});
  }
  return Json{{"ambient_dim", frame.ambient_dim()},
              {"field", cplx ? "complex" : "real"},
              {"blocks", std::move(blocks)}};
}

bool has_imaginary(const GFrame& frame) {
  for (const Matrix& b : frame.blocks()) {
    if (b.imag().cwiseAbs().maxCoeff() != 0.0) return true;
  }
  return false;
}

Json indices(const std::vector<std::size_t>& v) {
  Json out = Json::array();
  for (std::size_t i : v) out.push_back(i + 1);
  return out;
}

Json numbers(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

Json optional_partition(const std::optional<Partition>& p) {
  return p ? to_json(*p) : Json(nullptr);
}

}  // namespace

GFrame frame_from_json(const Json& j) { return frame_at(j, "$"); }

Json frame_to_json(const GFrame& frame) { return frame_body(frame, has_imaginary(frame)); }

GFrameFamily family_from_json(const Json& j, const Tolerance& tol) {
  const Json& frames = field(j, "frames", "$");
  if (!frames.is_array() || frames.size() < 2) {
    fail("$.frames", "expected an array of at least 2 frames");
  }
  std::vector<GFrame> out;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    out.push_back(frame_at(frames[k], "$.frames[" + std::to_string(k) + "]"));
  }
  try {
    return GFrameFamily(std::move(out), tol);
  } catch (const NumericFailure&) {
    throw;
  } catch (const InvalidArgument& e) {
    fail("$.frames", e.what());
  }
}

Json family_to_json(const GFrameFamily& family) {
  bool cplx = false;
  for (const auto& f : family.frames()) cplx = cplx || has_imaginary(f);
  Json frames = Json::array();
  for (const auto& f : family.frames()) frames.push_back(frame_body(f, cplx));
  return Json{{"frames", std::move(frames)}};
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Translate the byte offset into line and column.
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << source << ":" << line << ":" << col << ": invalid JSON";
    throw ParseError(os.str());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path.string());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument(path.string() + ": cannot open for writing");
  out << dump(j);
  if (!out) throw InvalidArgument(path.string() + ": write failed");
}

GFrame load_frame(const std::filesystem::path& path) {
  try {
    return frame_from_json(read_json_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

GFrameFamily load_family(const std::filesystem::path& path, const Tolerance& tol) {
  try {
    return family_from_json(read_json_file(path), tol);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Json report_header(const Tolerance& tol, std::optional<std::uint64_t> seed) {
  return Json{{"tool", "gweave"},
              {"version", version()},
              {"tolerances",
               {{"rank_rtol", tol.rank_rtol}, {"frame_rtol", tol.frame_rtol}, {"eq_atol", tol.eq_atol}}},
              {"seed", seed ? Json(*seed) : Json(nullptr)}};
}

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json to_json(const Partition& p) { return indices(p.labels); }

std::optional<Partition> partition_from_json(const Json& j, std::size_t n_indices, std::size_t m) {
  if (!j.is_array() || j.size() != n_indices) return std::nullopt;
  Partition p;
  for (const Json& v : j) {
    if (!v.is_number_integer()) return std::nullopt;
    const auto x = v.get<std::int64_t>();
    if (x < 1 || static_cast<std::size_t>(x) > m) return std::nullopt;
    p.labels.push_back(static_cast<std::size_t>(x - 1));
  }
  return p;
}

Json to_json(const FrameBounds& b) {
  return Json{{"lower", number(b.lower)},
              {"upper", number(b.upper)},
              {"classification", to_string(b.classification)}};
}

Json to_json(const RieszBounds& b) {
  return Json{{"lower", number(b.lower)},
              {"upper", number(b.upper)},
              {"complete", b.complete},
              {"riesz_sequence", b.is_sequence()},
              {"riesz_basis", b.is_basis}};
}

Json to_json(const WeavingReport& r) {
  return Json{{"status", to_string(r.status)},
              {"universal_lower", number(r.universal_lower)},
              {"universal_upper", number(r.universal_upper)},
              {"witness_lower", to_json(r.witness_lower)},
              {"witness_upper", to_json(r.witness_upper)},
              {"partitions_checked", r.partitions_checked},
              {"mode", to_string(r.mode)},
              {"seed", r.seed ? Json(*r.seed) : Json(nullptr)}};
}

Json to_json(const KCertificate& c) {
  return Json{{"theorem", "k"},
              {"feasible", c.feasible},
              {"k", number(c.k)},
              {"predicted_lower", number(c.predicted_lower)},
              {"predicted_upper", number(c.predicted_upper)},
              {"worst_subset", indices(c.worst_subset)},
              {"worst_member", c.worst_member + 1},
              {"worst_partner", c.worst_partner + 1},
              {"subsets_checked", c.subsets_checked}};
}

Json to_json(const PerturbationCertificate& c) {
  Json j{{"theorem", c.chained ? "pw-chain" : "pw"}};
  if (!c.chained) j["base"] = c.base_index + 1;
  j["lambdas"] = numbers(c.scalars.lambdas);
  j["etas"] = numbers(c.scalars.etas);
  j["mus"] = numbers(c.scalars.mus);
  j["member_lower"] = numbers(c.member_lower);
  j["member_upper"] = numbers(c.member_upper);
  j["difference_norms"] = numbers(c.difference_norms);
  j["predicted_lower"] = number(c.predicted_lower);
  j["predicted_upper"] = number(c.predicted_upper);
  j["verification"] = to_string(c.mode);
  j["status"] = to_string(c.status);
  j["trials"] = c.trials;
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  if (c.witness) {
    j["witness"] = Json{{"member", c.witness->member + 1},
                        {"partner", c.witness->partner + 1},
                        {"subset", indices(c.witness->subset)},
                        {"lhs", number(c.witness->lhs)},
                        {"rhs", number(c.witness->rhs)}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

Json to_json(const OperatorPerturbationReport& r) {
  return Json{{"theorem", "op-perturb"},
              {"lower", number(r.lower)},
              {"upper", number(r.upper)},
              {"max_defect_sq", number(r.max_defect_sq)},
              {"condition_holds", r.condition_holds},
              {"uniform", r.uniform},
              {"stated_lower", number(r.stated_lower)},
              {"triangle_lower", number(r.triangle_lower)},
              {"exhaustive", r.exhaustive ? to_json(*r.exhaustive) : Json(nullptr)}};
}

Json to_json(const ScaledDualReport& r) {
  return Json{{"theorem", "scaled-dual"},
              {"lower", number(r.lower)},
              {"upper", number(r.upper)},
              {"ratio", number(r.ratio)},
              {"hypothesis_holds", r.hypothesis_holds},
              {"factor", number(r.factor)},
              {"defect_norm", number(r.defect_norm)},
              {"spectral_bound", number(r.spectral_bound)},
              {"spectral_containment", r.spectral_containment},
              {"perturbation", r.perturbation ? to_json(*r.perturbation) : Json(nullptr)},
              {"certified_woven", r.certified_woven}};
}

Json to_json(const WeavingRieszReport& r) {
  Json per = Json::array();
  for (const auto& b : r.per_partition) per.push_back(to_json(b));
  return Json{{"common_lower", number(r.common_lower)},
              {"common_upper", number(r.common_upper)},
              {"all_riesz_sequences", r.all_riesz_sequences},
              {"all_riesz_bases", r.all_riesz_bases},
              {"woven", r.woven()},
              {"first_failure", optional_partition(r.first_failure)},
              {"per_partition", std::move(per)}};
}

Json to_json(const PermutationWeaveReport& r) {
  return Json{{"lower", number(r.lower)},
              {"upper", number(r.upper)},
              {"identity", r.identity},
              {"woven", r.woven},
              {"span_lower_min", number(r.span_lower_min)},
              {"span_upper_max", number(r.span_upper_max)},
              {"span_bounds_hold", r.span_bounds_hold},
              {"witness", optional_partition(r.witness)},
              {"witness_fails_to_span", r.witness_fails_to_span},
              {"certification", to_json(r.certification)}};
}

Json to_json(const EquivalenceConstants& c) {
  Json degenerate = Json::array();
  for (const auto& p : c.degenerate_partitions) degenerate.push_back(to_json(p));
  return Json{{"riesz_low", number(c.riesz_low)},
              {"riesz_up", number(c.riesz_up)},
              {"a2", number(c.a2)},
              {"d3", number(c.d3)},
              {"e4", number(c.e4)},
              {"all_positive", c.all_positive()},
              {"degenerate_partitions", std::move(degenerate)}};
}

Json to_json(const GenSpec& s) {
  Json j{{"ambient_dim", s.ambient_dim},
         {"block_dims", s.block_dims},
         {"kind", to_string(s.kind)},
         {"seed", s.seed},
         {"complex", s.complex}};
  if (s.kind == GenKind::PrescribedSpectrum || !s.spectrum.empty()) j["spectrum"] = numbers(s.spectrum);
  if (s.kind == GenKind::Perturbed) {
    j["base_seed"] = s.base_seed;
    j["noise_scale"] = s.noise_scale;
    j["members"] = s.members;
  }
  return j;
}

}  // namespace gweave
