#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "semiwave/helmholtz1d.hpp"
#include "semiwave/observable.hpp"
#include "semiwave/potential.hpp"
#include "semiwave/raymeasure.hpp"
#include "semiwave/source.hpp"

namespace semiwave {

/// INI-style experiment configuration. Every key has an embedded default; files and
/// --set overrides may only touch known keys.
class Config {
 public:
  Config();

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);
  /// Text of the embedded defaults (what --print-defaults shows).
  static std::string defaults_text();

  /// "section.key=value"; throws ConfigError for unknown keys.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  [[nodiscard]] std::string get(const std::string& key) const;
  [[nodiscard]] double number(const std::string& key) const;
  [[nodiscard]] int integer(const std::string& key) const;
  [[nodiscard]] bool flag(const std::string& key) const;
  /// Whitespace or comma separated list of numbers.
  [[nodiscard]] std::vector<double> numbers(const std::string& key) const;
  [[nodiscard]] std::vector<std::string> words(const std::string& key) const;

  /// Canonical text: sections and keys in default order.
  [[nodiscard]] std::string serialize() const;
  /// FNV-1a of serialize() with run.threads and run.output_dir blanked, as 16 hex digits.
  [[nodiscard]] std::string hash() const;

  bool operator==(const Config& other) const { return serialize() == other.serialize(); }

 private:
  void merge(const boost::property_tree::ptree& tree);
  boost::property_tree::ptree tree_;
};

std::uint64_t fnv1a(const std::string& data);

PotentialSpec potential_from(const Config& cfg);
/// Validated against the potential (H3, H6).
EnergySpec energy_from(const Config& cfg, const PotentialSpec& pot);
SourceProfile source_from(const Config& cfg, int dimension);
Vec source_base(const Config& cfg, int dimension);
/// Observable described by a section ("observable" or "counterexample").
Observable observable_from(const Config& cfg, const std::string& section, int dimension,
                           const PotentialSpec& pot, double E0);
RayQuadrature rays_from(const Config& cfg);
GridOptions grid_from(const Config& cfg);
WignerOptions wigner_from(const Config& cfg);

}  // namespace semiwave
