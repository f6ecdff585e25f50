#include "brwre/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "brwre/errors.hpp"
#include "brwre/format.hpp"
#include "brwre/parallel.hpp"

namespace brwre::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

template <class T>
T parse_number(const std::string& text, const std::string& what) {
  const std::string s = trim(text);
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    throw ConfigError("cannot read " + what + " from '" + text + "'");
  return v;
}

// "name(args)" -> {name, args}
std::pair<std::string, std::string> call_form(const std::string& text) {
  const std::string s = trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') throw ConfigError("expected name(...) in '" + text + "'");
  return {trim(s.substr(0, open)), s.substr(open + 1, s.size() - open - 2)};
}

std::vector<double> parse_reals(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ',')) out.push_back(parse_number<double>(part, what));
  return out;
}

std::vector<int> parse_ints(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_number<int>(part, what));
  return out;
}

template <class Fn>
auto rethrow_as_config(const std::string& text, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("invalid '" + text + "': " + e.what());
  }
}

std::string join(const auto& xs, auto&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + fmt(xs[i]);
  return out;
}

const std::map<std::string, std::set<std::string>> kKeys{
    {"model", {"dimension", "offspring", "eta", "beta"}},
    {"run", {"seed", "horizons", "replicas", "workers", "confidence"}},
    {"budget", {"max_cells", "max_atoms"}},
    {"moments", {"pair_dp_max_T"}},
    {"clt", {"function", "epsilons"}},
    {"extinction", {"horizon", "sw_samples"}},
    {"dpre", {"slope_route", "coupling_max_T"}},
};

}  // namespace

OffspringLaw parse_offspring_law(const std::string& text) {
  return rethrow_as_config(text, [&] {
    const auto [name, args] = call_form(text);
    if (name == "delta") return OffspringLaw::point_mass(parse_number<int>(args, "delta atom"));
    if (name == "poisson") return OffspringLaw::poisson(parse_number<double>(args, "poisson mean"));
    if (name == "finite") {
      std::vector<double> probs;
      for (const auto& item : split(args, ',')) {
        const auto kv = split(item, ':');
        if (kv.size() != 2) throw ConfigError("finite law entries are k:p, got '" + item + "'");
        const int k = parse_number<int>(kv[0], "offspring count");
        if (k < 0 || k > 100000) throw ConfigError("offspring count out of range in '" + item + "'");
        if (probs.size() <= static_cast<std::size_t>(k)) probs.resize(static_cast<std::size_t>(k) + 1, 0.0);
        probs[static_cast<std::size_t>(k)] += parse_number<double>(kv[1], "probability");
      }
      return OffspringLaw::finite(std::move(probs));
    }
    throw ConfigError("unknown offspring law '" + name + "'");
  });
}

EnvironmentModel parse_mixture(const std::string& text) {
  return rethrow_as_config(text, [&] {
    std::vector<MixtureComponent> comps;
    for (const auto& part : split(text, ';')) {
      const auto star = part.find('*');
      if (star == std::string::npos)
        comps.push_back({parse_offspring_law(part), 1.0});
      else
        comps.push_back({parse_offspring_law(part.substr(star + 1)),
                         parse_number<double>(part.substr(0, star), "mixture weight")});
    }
    return EnvironmentModel::mixture(std::move(comps));
  });
}

EtaLaw parse_eta_law(const std::string& text) {
  return rethrow_as_config(text, [&] {
    const auto [name, args] = call_form(text);
    if (name == "gaussian") return EtaLaw::gaussian(parse_number<double>(args, "gaussian scale"));
    if (name == "finite") {
      std::vector<double> values, weights;
      for (const auto& item : split(args, ',')) {
        const auto kv = split(item, ':');
        if (kv.size() != 2) throw ConfigError("finite eta entries are value:weight, got '" + item + "'");
        values.push_back(parse_number<double>(kv[0], "eta value"));
        weights.push_back(parse_number<double>(kv[1], "eta weight"));
      }
      return EtaLaw::finite(std::move(values), std::move(weights));
    }
    throw ConfigError("unknown eta law '" + name + "'");
  });
}

TestFunction parse_test_function(const std::string& text) {
  return rethrow_as_config(text, [&] {
    const auto [name, args] = call_form(text);
    if (name == "constant") return TestFunction::constant(parse_number<double>(args, "constant"));
    if (name == "cosine") return TestFunction::cosine(parse_reals(args, "cosine frequency"));
    if (name == "gaussian_bump") return TestFunction::gaussian_bump(parse_number<double>(args, "bump rate"));
    if (name == "clipped_polynomial") return TestFunction::clipped_polynomial(parse_number<double>(args, "cap"));
    throw ConfigError("unknown test function '" + name + "'");
  });
}

EnvironmentModel ExperimentConfig::model() const {
  if (!eta.empty()) return EnvironmentModel::coupled(parse_eta_law(eta), beta);
  if (offspring.empty()) throw ConfigError("[model] needs offspring or eta");
  return parse_mixture(offspring);
}

std::optional<EtaLaw> ExperimentConfig::eta_law() const {
  if (eta.empty()) return std::nullopt;
  return parse_eta_law(eta);
}

TestFunction ExperimentConfig::test_function() const { return parse_test_function(function); }

unsigned ExperimentConfig::resolved_workers() const { return workers == 0 ? default_workers() : workers; }

int ExperimentConfig::max_horizon() const { return *std::max_element(horizons.begin(), horizons.end()); }

ExperimentConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto known = kKeys.find(section);
    if (known == kKeys.end()) throw ConfigError("unknown config section [" + section + "]");
    if (!body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, _] : body)
      if (!known->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
  }
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(path)) return trim(*v);
    return std::nullopt;
  };

  ExperimentConfig c;
  if (auto v = get("model.dimension")) c.dimension = parse_number<int>(*v, "dimension");
  if (auto v = get("model.offspring")) c.offspring = *v;
  if (auto v = get("model.eta")) c.eta = *v;
  if (auto v = get("model.beta")) c.beta = parse_number<double>(*v, "beta");
  if (auto v = get("run.seed")) c.seed = parse_number<std::uint64_t>(*v, "seed");
  if (auto v = get("run.horizons")) c.horizons = parse_ints(*v, "horizons");
  if (auto v = get("run.replicas")) c.replicas = parse_number<std::size_t>(*v, "replicas");
  if (auto v = get("run.workers")) c.workers = parse_number<unsigned>(*v, "workers");
  if (auto v = get("run.confidence")) c.confidence = parse_number<double>(*v, "confidence");
  if (auto v = get("budget.max_cells")) c.max_cells = parse_number<std::size_t>(*v, "max_cells");
  if (auto v = get("budget.max_atoms")) c.max_atoms = parse_number<std::uint64_t>(*v, "max_atoms");
  if (auto v = get("moments.pair_dp_max_T")) c.pair_dp_max_T = parse_number<int>(*v, "pair_dp_max_T");
  if (auto v = get("clt.function")) c.function = *v;
  if (auto v = get("clt.epsilons")) c.epsilons = parse_reals(*v, "epsilons");
  if (auto v = get("extinction.horizon")) c.extinction_horizon = parse_number<int>(*v, "extinction horizon");
  if (auto v = get("extinction.sw_samples")) c.sw_samples = parse_number<std::uint64_t>(*v, "sw_samples");
  if (auto v = get("dpre.slope_route")) c.slope_route = *v;
  if (auto v = get("dpre.coupling_max_T")) c.coupling_max_T = parse_number<int>(*v, "coupling_max_T");

  if (c.dimension < 1 || c.dimension > 4) throw ConfigError("dimension must be in 1..4");
  if (c.horizons.empty() || *std::min_element(c.horizons.begin(), c.horizons.end()) < 1)
    throw ConfigError("horizons must be >= 1");
  if (c.replicas < 1) throw ConfigError("replicas must be >= 1");
  if (!(c.confidence > 0.0 && c.confidence < 1.0)) throw ConfigError("confidence must be in (0, 1)");
  if (c.max_cells < 1 || c.max_atoms < 1) throw ConfigError("budgets must be positive");
  if (c.extinction_horizon < 1) throw ConfigError("extinction horizon must be >= 1");
  if (c.slope_route != "polymer" && c.slope_route != "branching")
    throw ConfigError("slope_route must be polymer or branching");
  if (c.eta.empty() && c.offspring.empty()) throw ConfigError("[model] needs offspring or eta");
  if (!c.eta.empty() && !c.offspring.empty()) throw ConfigError("[model] takes offspring or eta, not both");
  // Canonical forms; also validates the laws.
  if (!c.offspring.empty()) c.offspring = parse_mixture(c.offspring).describe();
  if (!c.eta.empty()) c.eta = parse_eta_law(c.eta).describe();
  {
    const auto f = parse_test_function(c.function);
    if (f.kind() == TestFunction::Kind::cosine && f.theta().size() != static_cast<std::size_t>(c.dimension))
      throw ConfigError("cosine needs one frequency per dimension");
    c.function = f.describe();
  }
  rethrow_as_config("model", [&] { return env_moments(c.model()); });
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  auto real = [](double v) { return format_real(v); };
  auto integer = [](int v) { return std::to_string(v); };
  std::ostringstream os;
  os << "[model]\n"
     << "dimension = " << c.dimension << "\n";
  if (!c.offspring.empty()) os << "offspring = " << c.offspring << "\n";
  if (!c.eta.empty()) os << "eta = " << c.eta << "\nbeta = " << format_real(c.beta) << "\n";
  os << "\n[run]\n"
     << "seed = " << c.seed << "\n"
     << "horizons = " << join(c.horizons, integer) << "\n"
     << "replicas = " << c.replicas << "\n"
     << "workers = " << c.workers << "\n"
     << "confidence = " << format_real(c.confidence) << "\n"
     << "\n[budget]\n"
     << "max_cells = " << c.max_cells << "\n"
     << "max_atoms = " << c.max_atoms << "\n"
     << "\n[moments]\n"
     << "pair_dp_max_T = " << c.pair_dp_max_T << "\n"
     << "\n[clt]\n"
     << "function = " << c.function << "\n";
  if (!c.epsilons.empty()) os << "epsilons = " << join(c.epsilons, real) << "\n";
  os << "\n[extinction]\n"
     << "horizon = " << c.extinction_horizon << "\n"
     << "sw_samples = " << c.sw_samples << "\n"
     << "\n[dpre]\n"
     << "slope_route = " << c.slope_route << "\n"
     << "coupling_max_T = " << c.coupling_max_T << "\n";
  return os.str();
}

}  // namespace brwre::cli
