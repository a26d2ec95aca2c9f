#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "magspec/eigensolve.hpp"
#include "magspec/sweep.hpp"

namespace magspec {

using ojson = nlohmann::ordered_json;

/// Identification embedded in every artifact.
struct ArtifactMeta {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_hash;
};

ojson meta_json(const ArtifactMeta& meta);

/// Shortest round-trip decimal form ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double v);

/// RFC 4180 field: quoted when it contains a comma, quote, CR or LF.
std::string csv_field(const std::string& s);
std::string csv_line(const std::vector<std::string>& fields);

ojson spectral_json(const SpectralResult& r, const ArtifactMeta& meta);
std::string spectral_csv(const SpectralResult& r, const ArtifactMeta& meta);

ojson sweep_json(const SweepReport& rep, const ArtifactMeta& meta);
/// One row per center: x1..xn, distance, one column per quantity, error, then seed/config_hash/version.
std::string sweep_csv(const SweepReport& rep, const ArtifactMeta& meta);
/// Value against |center|, one polyline per quantity, labelled axes.
std::string sweep_svg(const SweepReport& rep, const ArtifactMeta& meta);

}  // namespace magspec
