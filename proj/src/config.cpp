#include "semiwave/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include "semiwave/errors.hpp"

namespace semiwave {

namespace pt = boost::property_tree;

namespace {

constexpr const char* kDefaults = R"ini(; semiwave experiment configuration
; lists are whitespace or comma separated

[run]
id = default
output_dir = out
threads = 0
seed = 0

[potential]
; zero | gaussian-bump | barrier-1d | harmonic-test | double-well | ramp-1d | tabulated
family = zero
dimension = 1
; empty: family defaults
params =
decay_rate = 0
; tabulated: CSV with columns x, V
file =

[energy]
E0 = 0.5
E1_re = 0
E1_im = 1
h_list = 0.04 0.02 0.01

[source]
; gaussian | tabulated
family = gaussian
width = 1
amplitude = 1
; raw | unit-fourier-peak
normalization = unit-fourier-peak
file =
base = 0

[observable]
; bump | weighted (bump times (p - E0)^2) | plateau
kind = bump
x_center = 1.5
x_half = 0.5
xi_center = 1
xi_half = 0.5
ramp = 0.25

[flow]
x = 0
xi = 1
t_end = 10
tol = 1e-10
sample_dt = 0.05
energy_tol = 1e-9

[hypothesis]
check = H2 H5
n_dirs = 16
n_radii = 8
escape_radius = 0
T_max = 0
; counting | null-singletons
convention = counting
second_source = 5

[rays]
rtol = 1e-11
atol = 1e-13
damping_cutoff = 1e-12
n_dirs = 64
T_max = 0

[grid]
half_width = 6
layer_width = 3
gamma_max = 1
points_per_wavelength = 40

[wigner]
lag_factor = 320
max_lags = 1048576

[solve]
h = 0.01
eps = 0.1 0.05 0.025
write_field = true

[mu1]
kind = plateau
x_center = 0
x_half = 0.5
xi_center = 0
xi_half = 5
ramp = 0.5
h = 0.01

[wkb]
region = 0.5 1.5
t_lo = 1e-3
t_hi = 12
through_caustics = true

[counterexample]
kind = bump
x_center = -1.5
x_half = 1
xi_center = -1
xi_half = 0.5
ramp = 0.25
inv_h_min = 85
inv_h_max = 100
samples = 40
subsequence = 3
h_max = 0.0118
)ini";

pt::ptree parse_ini(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return tree;
}

const pt::ptree& default_tree() {
  static const pt::ptree tree = parse_ini(kDefaults);
  return tree;
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(" \t,"), boost::token_compress_on);
  parts.erase(std::remove_if(parts.begin(), parts.end(), [](const auto& p) { return p.empty(); }),
              parts.end());
  return parts;
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

Vec sized(const Config& cfg, const std::string& key, int dimension) {
  const auto v = cfg.numbers(key);
  if (v.size() == 1 && dimension > 1) return Vec::Constant(dimension, v[0]);
  if (static_cast<int>(v.size()) != dimension) {
    throw ConfigError(key + ": expected " + std::to_string(dimension) + " values");
  }
  return to_vec(v);
}

}  // namespace

Config::Config() : tree_(default_tree()) {}

Config Config::from_string(const std::string& text) {
  Config cfg;
  cfg.merge(parse_ini(text));
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

std::string Config::defaults_text() { return kDefaults; }

void Config::merge(const pt::ptree& tree) {
  std::vector<std::string> unknown;
  for (const auto& [section, keys] : tree) {
    const auto known = tree_.get_child_optional(pt::ptree::path_type(section, '\0'));
    if (!known || keys.empty()) {
      if (keys.empty()) unknown.push_back(section);
      for (const auto& kv : keys) unknown.push_back(section + "." + kv.first);
      continue;
    }
    for (const auto& [key, value] : keys) {
      if (!known->get_child_optional(pt::ptree::path_type(key, '\0'))) {
        unknown.push_back(section + "." + key);
      }
    }
  }
  if (!unknown.empty()) {
    throw ConfigError("unknown config keys: " + boost::join(unknown, ", "));
  }
  for (const auto& [section, keys] : tree) {
    for (const auto& [key, value] : keys) set(section + "." + key, value.data());
  }
}

void Config::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  set(boost::trim_copy(assignment.substr(0, eq)), boost::trim_copy(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
  auto node = tree_.get_child_optional(key);
  if (!node || !node->empty()) throw ConfigError("unknown config keys: " + key);
  node->put_value(value);
}

std::string Config::get(const std::string& key) const {
  const auto v = tree_.get_optional<std::string>(key);
  if (!v) throw ConfigError("unknown config keys: " + key);
  return boost::trim_copy(*v);
}

double Config::number(const std::string& key) const {
  const std::string s = get(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + s + "' is not a number");
  }
}

int Config::integer(const std::string& key) const {
  const double v = number(key);
  if (v != std::floor(v)) throw ConfigError(key + ": '" + get(key) + "' is not an integer");
  return static_cast<int>(v);
}

bool Config::flag(const std::string& key) const {
  const std::string s = boost::to_lower_copy(get(key));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": '" + s + "' is not a boolean");
}

std::vector<double> Config::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& w : split_words(get(key))) {
    try {
      out.push_back(std::stod(w));
    } catch (const std::exception&) {
      throw ConfigError(key + ": '" + w + "' is not a number");
    }
  }
  return out;
}

std::vector<std::string> Config::words(const std::string& key) const {
  return split_words(get(key));
}

std::string Config::serialize() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, keys] : tree_) {
    if (!first) out << "\n";
    first = false;
    out << "[" << section << "]\n";
    for (const auto& [key, value] : keys) out << key << " = " << value.data() << "\n";
  }
  return out.str();
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string Config::hash() const {
  // where and how fast a run executes does not change its results
  Config canonical = *this;
  canonical.tree_.put(pt::ptree::path_type("run.threads", '.'), "0");
  canonical.tree_.put(pt::ptree::path_type("run.output_dir", '.'), "");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical.serialize())));
  return buf;
}

PotentialSpec potential_from(const Config& cfg) {
  const PotentialFamily family = parse_potential_family(cfg.get("potential.family"));
  const int dim = cfg.integer("potential.dimension");
  const std::string file = cfg.get("potential.file");
  if (family == PotentialFamily::tabulated) {
    if (file.empty()) throw ConfigError("potential.file is required for the tabulated family");
    return PotentialSpec::tabulated_csv(file);
  }
  const auto params = cfg.numbers("potential.params");
  if (!params.empty()) return PotentialSpec(family, dim, params, cfg.number("potential.decay_rate"));
  switch (family) {
    case PotentialFamily::zero:
      return PotentialSpec::zero(dim);
    case PotentialFamily::gaussian_bump:
      return PotentialSpec::gaussian_bump(dim, 1.0, 1.0, Vec::Zero(dim));
    case PotentialFamily::barrier_1d:
      return PotentialSpec::barrier_1d();
    case PotentialFamily::harmonic_test:
      return PotentialSpec::harmonic_test(dim);
    case PotentialFamily::double_well:
      return PotentialSpec::double_well();
    case PotentialFamily::ramp_1d:
      return PotentialSpec::ramp_1d();
    default:
      break;
  }
  throw ConfigError("potential.params required for family " + to_string(family));
}

EnergySpec energy_from(const Config& cfg, const PotentialSpec& pot) {
  EnergySpec e;
  e.E0 = cfg.number("energy.E0");
  e.E1 = Complex(cfg.number("energy.E1_re"), cfg.number("energy.E1_im"));
  e.h_grid = cfg.numbers("energy.h_list");
  for (double h : e.h_grid) {
    if (!(h > 0.0)) throw ConfigError("energy.h_list entries must be positive");
  }
  e.validate(pot);
  return e;
}

SourceProfile source_from(const Config& cfg, int dimension) {
  const ProfileFamily family = parse_profile_family(cfg.get("source.family"));
  if (family == ProfileFamily::tabulated) {
    const std::string file = cfg.get("source.file");
    if (file.empty()) throw ConfigError("source.file is required for a tabulated profile");
    return SourceProfile::tabulated_csv(file);
  }
  const double width = cfg.number("source.width");
  if (!(width > 0.0)) throw ConfigError("source.width must be positive");
  return SourceProfile::gaussian(dimension, width, cfg.number("source.amplitude"),
                                 parse_profile_normalization(cfg.get("source.normalization")));
}

Vec source_base(const Config& cfg, int dimension) { return sized(cfg, "source.base", dimension); }

Observable observable_from(const Config& cfg, const std::string& section, int dimension,
                           const PotentialSpec& pot, double E0) {
  const std::string kind = cfg.get(section + ".kind");
  const Vec xc = sized(cfg, section + ".x_center", dimension);
  const Vec xh = sized(cfg, section + ".x_half", dimension);
  const Vec kc = sized(cfg, section + ".xi_center", dimension);
  const Vec kh = sized(cfg, section + ".xi_half", dimension);
  if ((xh.array() <= 0.0).any() || (kh.array() <= 0.0).any()) {
    throw ConfigError(section + ": half widths must be positive");
  }
  if (kind == "bump") return Observable::bump(section, xc, xh, kc, kh);
  if (kind == "weighted") {
    return Observable::shell_weighted(Observable::bump(section, xc, xh, kc, kh), pot, E0);
  }
  if (kind == "plateau") {
    if (dimension != 1) throw ConfigError(section + ": plateau observables are 1D");
    const double ramp = cfg.number(section + ".ramp");
    return Observable::product_1d(
        section, plateau_profile(xc(0) - xh(0), xc(0) + xh(0), ramp),
        plateau_profile(kc(0) - kh(0), kc(0) + kh(0), ramp));
  }
  throw ConfigError(section + ".kind: unknown observable kind '" + kind + "'");
}

RayQuadrature rays_from(const Config& cfg) {
  RayQuadrature q;
  q.rtol = cfg.number("rays.rtol");
  q.atol = cfg.number("rays.atol");
  q.damping_cutoff = cfg.number("rays.damping_cutoff");
  q.n_dirs = cfg.integer("rays.n_dirs");
  q.T_max = cfg.number("rays.T_max");
  if (!(q.rtol > 0.0) || !(q.atol > 0.0) || !(q.damping_cutoff > 0.0) || q.n_dirs < 2) {
    throw ConfigError("rays: tolerances must be positive and n_dirs >= 2");
  }
  return q;
}

GridOptions grid_from(const Config& cfg) {
  GridOptions g;
  g.half_width = cfg.number("grid.half_width");
  g.layer_width = cfg.number("grid.layer_width");
  g.gamma_max = cfg.number("grid.gamma_max");
  g.points_per_wavelength = cfg.number("grid.points_per_wavelength");
  if (!(g.half_width > 0.0) || !(g.layer_width > 0.0) || !(g.gamma_max > 0.0) ||
      !(g.points_per_wavelength > 0.0)) {
    throw ConfigError("grid: all entries must be positive");
  }
  return g;
}

WignerOptions wigner_from(const Config& cfg) {
  WignerOptions w;
  w.lag_factor = cfg.number("wigner.lag_factor");
  w.max_lags = static_cast<long>(cfg.number("wigner.max_lags"));
  if (!(w.lag_factor > 0.0) || w.max_lags < 16) throw ConfigError("wigner: invalid lag settings");
  return w;
}

}  // namespace semiwave
