#pragma once

// JSON interchange: frame and family files, and report serialization.
// Schemas are described in docs/formats.md.

#include "gweave/genlab.hpp"
#include "gweave/perturb.hpp"
#include "gweave/riesz.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace gweave {

using Json = nlohmann::ordered_json;

std::string_view version() noexcept;

/// Malformed input; the message names the offending field or position.
class ParseError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

GFrame frame_from_json(const Json& j);
/// "field" is "complex" when any entry has a nonzero imaginary part.
Json frame_to_json(const GFrame& frame);
GFrameFamily family_from_json(const Json& j, const Tolerance& tol = {});
Json family_to_json(const GFrameFamily& family);

/// Parses text; syntax errors become ParseError with line and column.
Json parse_json(const std::string& text, const std::string& source);
Json read_json_file(const std::filesystem::path& path);
/// Two-space indented dump with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);
std::string dump(const Json& j);

GFrame load_frame(const std::filesystem::path& path);
GFrameFamily load_family(const std::filesystem::path& path, const Tolerance& tol = {});

/// Tool name, version, tolerance settings and seed (null when absent).
Json report_header(const Tolerance& tol, std::optional<std::uint64_t> seed);

/// Finite doubles as numbers, infinities and NaN as null.
Json number(double x);
/// 1-based labels.
Json to_json(const Partition& p);
std::optional<Partition> partition_from_json(const Json& j, std::size_t n_indices, std::size_t m);

Json to_json(const FrameBounds& b);
Json to_json(const RieszBounds& b);
Json to_json(const WeavingReport& r);
Json to_json(const KCertificate& c);
Json to_json(const PerturbationCertificate& c);
Json to_json(const OperatorPerturbationReport& r);
Json to_json(const ScaledDualReport& r);
Json to_json(const WeavingRieszReport& r);
Json to_json(const PermutationWeaveReport& r);
Json to_json(const EquivalenceConstants& c);
Json to_json(const GenSpec& s);

}  // namespace gweave
