#include "cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace regbid::cli {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"battery",
       {"power_mw", "energy_mwh", "soc_max", "soc_min", "efficiency",
        "replacement_cost_per_mwh", "stress_k", "stress_alpha"}},
      {"market",
       {"delta", "performance_mode", "rho_min", "xi", "interval_seconds",
        "settlement_hours", "mu_lambda_source", "mu_lambda", "trailing_window", "mu_r",
        "shelf_life_months"}},
      {"corpus",
       {"source", "path", "kind", "seed", "periods", "step_sigma", "reversion", "scale",
        "debias"}},
      {"calibration",
       {"source", "path", "kind", "seed", "periods", "step_sigma", "reversion", "scale",
        "debias"}},
      {"prices", {"source", "path", "seed", "mean", "volatility", "persistence"}},
      {"uhat", {"cases", "energy_mwh"}},
      {"experiment",
       {"capacity_mw", "capacities", "segments", "gamma_grid", "policy", "bidding",
        "simulate_periods", "gamma_curve"}},
  };
  return keys;
}

double to_number(const std::string& field, const std::string& text) {
  std::string trimmed = text;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) {
    trimmed.pop_back();
  }
  std::size_t start = 0;
  while (start < trimmed.size() && std::isspace(static_cast<unsigned char>(trimmed[start]))) {
    ++start;
  }
  double value = 0.0;
  const char* first = trimmed.data() + start;
  const char* last = trimmed.data() + trimmed.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (first == last || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw ConfigError(field, "expected a number, got '" + text + "'");
  }
  return value;
}

std::size_t to_count(const std::string& field, const std::string& text) {
  const double v = to_number(field, text);
  if (v < 0.0 || v != std::floor(v)) {
    throw ConfigError(field, "expected a nonnegative integer, got '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& field, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(field, "expected true or false, got '" + text + "'");
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto value = sec->get_optional<std::string>(key);
    if (!value) return std::nullopt;
    return *value;
  }

  void number(const std::string& section, const std::string& key, double& out) const {
    if (auto v = get(section, key)) out = to_number(section + "." + key, *v);
  }

 private:
  const pt::ptree& tree_;
};

std::vector<double> parse_grid(const std::string& field, const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_number_list(field, text);
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(to_number(field, item));
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw ConfigError(field, "expected start:stop:step with step > 0");
  }
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) {
    grid.push_back(parts[0] + static_cast<double>(i) * parts[2]);
  }
  return grid;
}

void read_corpus(const Reader& r, const std::string& section, CorpusConfig& c) {
  if (auto v = r.get(section, "source")) {
    if (*v != "synthetic" && *v != "csv") {
      throw ConfigError(section + ".source", "expected synthetic or csv");
    }
    c.source = *v;
  }
  if (auto v = r.get(section, "path")) c.path = *v;
  if (auto v = r.get(section, "kind")) {
    try {
      c.kind = parse_signal_kind(*v);
    } catch (const Error& e) {
      throw ConfigError(section + ".kind", e.what());
    }
  }
  if (auto v = r.get(section, "seed")) c.seed = to_count(section + ".seed", *v);
  if (auto v = r.get(section, "periods")) c.periods = to_count(section + ".periods", *v);
  r.number(section, "step_sigma", c.params.step_sigma);
  r.number(section, "reversion", c.params.reversion);
  r.number(section, "scale", c.params.scale);
  if (auto v = r.get(section, "debias")) c.debias = to_bool(section + ".debias", *v);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string CorpusConfig::id() const {
  std::ostringstream os;
  if (source == "csv") {
    os << "csv:" << path.filename().string();
  } else {
    os << to_string(kind) << ":seed=" << seed << ":periods=" << periods;
  }
  return os.str();
}

std::vector<double> parse_number_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_number(field, item));
  return out;
}

RunConfig default_config() {
  RunConfig c;
  c.market.performance.delta = 2.0 / 3.0;
  c.market.performance.rho_min = 0.7;
  c.market.settlement_h = 1.0;
  c.market.mu_lambda = 25.0;
  c.corpus.seed = 1;
  c.corpus.periods = 8760;
  c.corpus.params.step_sigma = 0.07;
  c.corpus.params.reversion = 0.01;
  c.calibration = c.corpus;
  c.calibration.seed = 2;
  c.calibration.periods = 400;
  c.uhat_cases = {{50.0, 1.0, 100}, {100.0, 1.0, 100}, {200.0, 1.0, 100},
                  {50.0, 0.92, 100}, {50.0, 0.92, 200}};
  c.capacities = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  c.segments = std::vector<double>(10, 1.0);
  for (int i = 0; i <= 60; ++i) c.gamma_grid.push_back(0.01 * i);
  return c;
}

RunConfig parse_config(std::istream& in) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig c = default_config();
  c.source_text = buffer.str();

  // Inline comments: a ';' or '#' preceded by whitespace ends the line.
  std::string stripped;
  {
    std::istringstream lines(c.source_text);
    std::string line;
    while (std::getline(lines, line)) {
      for (std::size_t i = 1; i < line.size(); ++i) {
        if ((line[i] == ';' || line[i] == '#') &&
            std::isspace(static_cast<unsigned char>(line[i - 1]))) {
          line.erase(i);
          break;
        }
      }
      stripped += line;
      stripped += '\n';
    }
  }

  pt::ptree tree;
  try {
    std::istringstream text(stripped);
    pt::read_ini(text, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", std::string("line ") + std::to_string(e.line()) + ": " +
                                    e.message());
  }
  const auto& keys = known_keys();
  for (const auto& [section, child] : tree) {
    const auto it = keys.find(section);
    if (it == keys.end()) throw ConfigError(section, "unknown section");
    if (child.empty() && !child.data().empty()) {
      throw ConfigError(section, "top-level keys are not allowed; use a [section]");
    }
    for (const auto& [key, value] : child) {
      if (!it->second.count(key)) throw ConfigError(section + "." + key, "unknown key");
    }
  }

  const Reader r(tree);
  auto& b = c.battery;
  r.number("battery", "power_mw", b.power_mw);
  r.number("battery", "energy_mwh", b.energy_mwh);
  double soc_max = b.e_max_mwh / reference_battery().energy_mwh;
  double soc_min = b.e_min_mwh / reference_battery().energy_mwh;
  r.number("battery", "soc_max", soc_max);
  r.number("battery", "soc_min", soc_min);
  b.e_max_mwh = soc_max * b.energy_mwh;
  b.e_min_mwh = soc_min * b.energy_mwh;
  r.number("battery", "efficiency", b.efficiency);
  r.number("battery", "replacement_cost_per_mwh", b.replacement_cost_per_mwh);
  r.number("battery", "stress_k", b.stress_k);
  r.number("battery", "stress_alpha", b.stress_alpha);

  auto& m = c.market;
  r.number("market", "delta", m.performance.delta);
  if (auto v = r.get("market", "performance_mode")) {
    if (*v == "linear") {
      m.performance.mode = IndexMode::kLinear;
    } else if (*v == "pjm_approx") {
      m.performance.mode = IndexMode::kPjmApprox;
      m.performance.delta = 2.0 / 3.0;
    } else {
      throw ConfigError("market.performance_mode", "expected linear or pjm_approx");
    }
  }
  r.number("market", "rho_min", m.performance.rho_min);
  r.number("market", "xi", c.xi);
  if (auto v = r.get("market", "interval_seconds")) {
    c.interval_h = to_number("market.interval_seconds", *v) / 3600.0;
  }
  r.number("market", "settlement_hours", m.settlement_h);
  if (auto v = r.get("market", "mu_lambda_source")) {
    if (*v == "fixed") {
      m.forecast = PriceForecast::kFixed;
    } else if (*v == "trailing") {
      m.forecast = PriceForecast::kTrailingMean;
    } else {
      throw ConfigError("market.mu_lambda_source", "expected fixed or trailing");
    }
  }
  r.number("market", "mu_lambda", m.mu_lambda);
  if (auto v = r.get("market", "trailing_window")) {
    m.trailing_window = to_count("market.trailing_window", *v);
  }
  if (auto v = r.get("market", "mu_r")) c.mu_r = to_number("market.mu_r", *v);
  r.number("market", "shelf_life_months", m.shelf_life_months);

  read_corpus(r, "corpus", c.corpus);
  read_corpus(r, "calibration", c.calibration);

  if (auto v = r.get("prices", "source")) {
    if (*v != "synthetic" && *v != "csv") {
      throw ConfigError("prices.source", "expected synthetic or csv");
    }
    c.prices.source = *v;
  }
  if (auto v = r.get("prices", "path")) c.prices.path = *v;
  if (auto v = r.get("prices", "seed")) c.prices.seed = to_count("prices.seed", *v);
  r.number("prices", "mean", c.prices.mean);
  r.number("prices", "volatility", c.prices.volatility);
  r.number("prices", "persistence", c.prices.persistence);

  if (auto v = r.get("uhat", "cases")) {
    c.uhat_cases.clear();
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::vector<double> parts;
      std::stringstream cs(item);
      std::string part;
      while (std::getline(cs, part, ':')) parts.push_back(to_number("uhat.cases", part));
      if (parts.size() != 3) {
        throw ConfigError("uhat.cases", "each case is price:efficiency:steps");
      }
      c.uhat_cases.push_back(
          UhatCase{parts[0], parts[1], static_cast<std::size_t>(parts[2])});
    }
  }
  r.number("uhat", "energy_mwh", c.uhat_energy_mwh);

  // Capacity defaults follow the power rating: B itself and a 10% grid up to B.
  c.capacity_mw = b.power_mw;
  r.number("experiment", "capacity_mw", c.capacity_mw);
  if (auto v = r.get("experiment", "capacities")) {
    c.capacities = parse_number_list("experiment.capacities", *v);
  } else {
    c.capacities.clear();
    for (int i = 1; i <= 10; ++i) c.capacities.push_back(b.power_mw * i / 10.0);
  }
  if (auto v = r.get("experiment", "segments")) {
    c.segments = parse_number_list("experiment.segments", *v);
  }
  if (auto v = r.get("experiment", "gamma_grid")) {
    c.gamma_grid = parse_grid("experiment.gamma_grid", *v);
  }
  if (auto v = r.get("experiment", "policy")) {
    if (*v == "proposed") {
      c.policy = PolicyKind::kProposed;
    } else if (*v == "simple") {
      c.policy = PolicyKind::kSimple;
    } else {
      throw ConfigError("experiment.policy", "expected proposed or simple");
    }
  }
  if (auto v = r.get("experiment", "bidding")) {
    if (*v == "fixed") {
      c.bidding = BiddingMode::kFixedCapacity;
    } else if (*v == "bid-curve") {
      c.bidding = BiddingMode::kBidCurve;
    } else {
      throw ConfigError("experiment.bidding", "expected fixed or bid-curve");
    }
  }
  if (auto v = r.get("experiment", "simulate_periods")) {
    c.simulate_periods = to_count("experiment.simulate_periods", *v);
  }
  if (auto v = r.get("experiment", "gamma_curve")) c.gamma_curve_path = *v;

  c.corpus.params.interval_h = c.interval_h;
  c.calibration.params.interval_h = c.interval_h;
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  auto config = parse_config(in);
  // Relative data paths are relative to the config file.
  const auto base = path.parent_path();
  for (auto* p : {&config.corpus.path, &config.calibration.path, &config.prices.path,
                  &config.gamma_curve_path}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
  return config;
}

void RunConfig::validate() const {
  try {
    battery.validate();
  } catch (const Error& e) {
    throw ConfigError("battery", e.what());
  }
  const double delta = market.performance.effective_delta();
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw ConfigError("market.delta", "must lie in (0, 1]");
  }
  if (!(market.performance.rho_min > 1.0 - delta && market.performance.rho_min < 1.0)) {
    throw ConfigError("market.rho_min", "must lie in (1 - delta, 1)");
  }
  if (!(xi > 0.0 && xi < 1.0)) throw ConfigError("market.xi", "must lie in (0, 1)");
  if (!(interval_h > 0.0)) throw ConfigError("market.interval_seconds", "must be > 0");
  if (!(market.settlement_h > 0.0)) {
    throw ConfigError("market.settlement_hours", "must be > 0");
  }
  const double per_period = market.settlement_h / interval_h;
  if (std::abs(per_period - std::round(per_period)) > 1e-6) {
    throw ConfigError("market.settlement_hours",
                      "must be a whole number of dispatch intervals");
  }
  if (mu_r && !(*mu_r > 0.0)) throw ConfigError("market.mu_r", "must be > 0");
  if (!(market.mu_lambda >= 0.0)) throw ConfigError("market.mu_lambda", "must be >= 0");
  if (market.forecast == PriceForecast::kTrailingMean && market.trailing_window == 0) {
    throw ConfigError("market.trailing_window", "must be > 0");
  }
  for (const auto* corpus : {&this->corpus, &calibration}) {
    const std::string name = corpus == &this->corpus ? "corpus" : "calibration";
    if (corpus->source == "csv" && corpus->path.empty()) {
      throw ConfigError(name + ".path", "required when source = csv");
    }
    if (corpus->source == "synthetic" && corpus->periods == 0) {
      throw ConfigError(name + ".periods", "must be > 0");
    }
    if (corpus->source == "synthetic" && corpus->kind == SignalKind::kScaledReplay &&
        corpus->path.empty()) {
      throw ConfigError(name + ".path", "scaled-replay needs a source signal path");
    }
  }
  if (prices.source == "csv" && prices.path.empty()) {
    throw ConfigError("prices.path", "required when source = csv");
  }
  if (!(prices.mean >= 0.0)) throw ConfigError("prices.mean", "must be >= 0");
  if (!(prices.volatility >= 0.0)) throw ConfigError("prices.volatility", "must be >= 0");
  if (!(prices.persistence >= 0.0 && prices.persistence < 1.0)) {
    throw ConfigError("prices.persistence", "must lie in [0, 1)");
  }
  for (const auto& u : uhat_cases) {
    if (!(u.penalty_price >= 0.0) || !(u.efficiency > 0.0 && u.efficiency <= 1.0)) {
      throw ConfigError("uhat.cases", "price must be >= 0 and efficiency in (0, 1]");
    }
  }
  if (!(uhat_energy_mwh > 0.0)) throw ConfigError("uhat.energy_mwh", "must be > 0");
  if (!(capacity_mw >= 0.0 && capacity_mw <= battery.power_mw)) {
    throw ConfigError("experiment.capacity_mw", "must lie in [0, power_mw]");
  }
  for (double cap : capacities) {
    if (!(cap >= 0.0 && cap <= battery.power_mw)) {
      throw ConfigError("experiment.capacities", "each must lie in [0, power_mw]");
    }
  }
  for (double s : segments) {
    if (!(s > 0.0)) throw ConfigError("experiment.segments", "each must be > 0");
  }
  if (gamma_grid.empty()) throw ConfigError("experiment.gamma_grid", "must not be empty");
  for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
    if (!(gamma_grid[i] >= 0.0) || (i > 0 && !(gamma_grid[i] > gamma_grid[i - 1]))) {
      throw ConfigError("experiment.gamma_grid",
                        "must be nonnegative and strictly increasing");
    }
  }
}

void RunConfig::apply_seed(std::uint64_t seed) {
  corpus.seed = seed;
  calibration.seed = seed + 1;
  prices.seed = seed + 2;
}

std::string RunConfig::hash() const {
  // FNV-1a over the config text plus the effective seeds.
  std::ostringstream os;
  os << source_text << "\n#seeds " << corpus.seed << ' ' << calibration.seed << ' '
     << prices.seed;
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return hex64(h);
}

}  // namespace regbid::cli
