#include "cli/commands.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace regbid::cli {
namespace {

std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::size_t samples_per_period(const RunConfig& c) {
  return static_cast<std::size_t>(std::llround(c.market.settlement_h / c.interval_h));
}

std::ofstream open_output(const Context& ctx, const std::string& name) {
  std::filesystem::create_directories(ctx.out_dir);
  const auto path = ctx.out_dir / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cli: cannot write " + path.string());
  f << header_line(ctx.config) << '\n';
  return f;
}

void finish(std::ofstream& f, const std::filesystem::path& path) {
  f.flush();
  if (!f) throw Error(ErrorCode::kIoError, "cli: write failed for " + path.string());
}

void write_manifest(const Context& ctx, const std::string& name, const CorpusConfig& corpus,
                    std::size_t periods) {
  auto f = open_output(ctx, name);
  f << "id=" << corpus.id() << '\n' << "source=" << corpus.source << '\n';
  if (corpus.source == "csv") {
    f << "path=" << corpus.path.string() << '\n';
  } else {
    f << "kind=" << to_string(corpus.kind) << '\n'
      << "seed=" << corpus.seed << '\n'
      << "step_sigma=" << num(corpus.params.step_sigma) << '\n'
      << "reversion=" << num(corpus.params.reversion) << '\n'
      << "scale=" << num(corpus.params.scale) << '\n'
      << "debias=" << (corpus.debias ? "true" : "false") << '\n';
    if (!corpus.path.empty()) f << "replay_path=" << corpus.path.string() << '\n';
  }
  f << "interval_seconds=" << num(ctx.config.interval_h * 3600.0) << '\n'
    << "settlement_hours=" << num(ctx.config.market.settlement_h) << '\n'
    << "periods=" << periods << '\n';
  finish(f, ctx.out_dir / name);
}

BiddingConfig bidding_config(const RunConfig& c, double mu_r) {
  BiddingConfig b;
  b.delta = c.market.performance.effective_delta();
  b.mu_r = mu_r;
  b.interval_h = c.interval_h;
  b.rho_min = c.market.performance.rho_min;
  b.xi = c.xi;
  return b;
}

MarketConfig market_config(const RunConfig& c, double mu_r) {
  MarketConfig m = c.market;
  m.mu_r = mu_r;
  return m;
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidSpec:
    case ErrorCode::kBadParams:
    case ErrorCode::kNonMonotoneStress:
      return kExitConfig;
    case ErrorCode::kCapExceeded:
    case ErrorCode::kNonInvertible:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kInstanceTooLarge:
    case ErrorCode::kZeroCapacity:
      return kExitInfeasible;
    default:
      return kExitData;
  }
}

std::string header_line(const RunConfig& config) {
  return std::string("# regbid ") + kVersion + " config=" + config.hash();
}

std::vector<RegulationSignal> load_corpus(const CorpusConfig& corpus, const RunConfig& config,
                                          std::ostream* log) {
  if (corpus.source == "csv") {
    auto loaded = load_csv(corpus.path, config.interval_h, config.market.settlement_h);
    if (loaded.clipped > 0 && log) {
      *log << "warning: clipped " << loaded.clipped << " samples outside [-1, 1] in "
           << corpus.path.string() << '\n';
    }
    if (loaded.signals.empty()) {
      throw Error(ErrorCode::kInsufficientData, "cli: no signals in " + corpus.path.string());
    }
    return std::move(loaded.signals);
  }
  SynthParams params = corpus.params;
  params.interval_h = config.interval_h;
  if (corpus.kind == SignalKind::kScaledReplay) {
    auto loaded = load_csv(corpus.path, config.interval_h, config.market.settlement_h);
    for (const auto& s : loaded.signals) {
      params.replay_source.insert(params.replay_source.end(), s.samples.begin(),
                                  s.samples.end());
    }
  }
  return synthesize_corpus(corpus.kind, corpus.seed, corpus.periods, samples_per_period(config),
                           params, corpus.debias, config.battery.efficiency);
}

std::vector<double> load_prices(const RunConfig& config, std::size_t count) {
  const auto& p = config.prices;
  if (p.source == "synthetic") {
    return synthesize_prices(p.seed, count, p.mean, p.volatility, p.persistence);
  }
  std::ifstream in(p.path);
  if (!in) throw Error(ErrorCode::kIoError, "cli: cannot open " + p.path.string());
  std::vector<double> prices;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != "period_id,lambda") {
        throw Error(ErrorCode::kParseError, "cli: " + p.path.string() + " line " +
                                                std::to_string(line_no) +
                                                ": expected header 'period_id,lambda'");
      }
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    double value = 0.0;
    const char* first = comma == std::string::npos ? nullptr : line.data() + comma + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = first ? std::from_chars(first, last, value)
                           : std::from_chars_result{nullptr, std::errc::invalid_argument};
    if (!first || ec != std::errc{} || ptr != last || !(value >= 0.0)) {
      throw Error(ErrorCode::kParseError, "cli: " + p.path.string() + " line " +
                                              std::to_string(line_no) + ": bad price");
    }
    prices.push_back(value);
  }
  if (prices.size() < count) {
    throw Error(ErrorCode::kLengthMismatch,
                "cli: " + std::to_string(prices.size()) + " prices for " +
                    std::to_string(count) + " periods");
  }
  prices.resize(count);
  return prices;
}

double resolve_mu_r(const RunConfig& config, std::ostream* log) {
  if (config.mu_r) return *config.mu_r;
  const auto signals = load_corpus(config.calibration, config, log);
  return mu_r(signals);
}

GammaCurve resolve_gamma_curve(const RunConfig& config, std::ostream* log) {
  if (!config.gamma_curve_path.empty()) {
    std::ifstream in(config.gamma_curve_path);
    if (!in) {
      throw Error(ErrorCode::kIoError, "cli: cannot open " + config.gamma_curve_path.string());
    }
    auto curve = read_gamma_curve_csv(in);
    return curve;
  }
  const auto signals = load_corpus(config.calibration, config, log);
  auto curve = calibrate_gamma_curve(signals, config.xi,
                                     config.market.performance.effective_delta(),
                                     config.gamma_grid, config.battery.efficiency,
                                     config.calibration.id());
  if (curve.undersampled() && log) {
    *log << "warning: " << curve.periods << " calibration periods is few for xi="
         << num(curve.xi) << '\n';
  }
  return curve;
}

int cmd_uhat(const Context& ctx) {
  const auto& c = ctx.config;
  BatterySpec spec = c.battery;
  const double scale = c.uhat_energy_mwh / spec.energy_mwh;
  spec.energy_mwh = c.uhat_energy_mwh;
  spec.e_max_mwh *= scale;
  spec.e_min_mwh *= scale;
  const auto stress = StressFunction::from_spec(spec);

  auto f = open_output(ctx, "uhat.csv");
  f << "case,penalty_price,efficiency,steps,u_hat,v_hat,w_hat,epsilon\n";
  auto& out = *ctx.out;
  out << "case  pi[$/MWh]  eta   T     u_hat[%]  eps[$]\n";
  for (std::size_t i = 0; i < c.uhat_cases.size(); ++i) {
    const auto& u = c.uhat_cases[i];
    spec.efficiency = u.efficiency;
    spec.validate();
    const auto bound = regret_bound(u.penalty_price, spec, stress);
    f << i + 1 << ',' << num(u.penalty_price) << ',' << num(u.efficiency) << ',' << u.steps
      << ',' << num(bound.u_hat) << ',' << num(bound.v_hat) << ',' << num(bound.w_hat) << ','
      << num(bound.epsilon) << '\n';
    std::ostringstream row;
    row << std::setw(4) << i + 1 << "  " << std::setw(9) << std::fixed << std::setprecision(0)
        << u.penalty_price << "  " << std::setprecision(2) << std::setw(4) << u.efficiency
        << "  " << std::setw(4) << u.steps << "  " << std::setw(8) << std::setprecision(1)
        << 100.0 * bound.u_hat << "  " << std::setw(6) << std::setprecision(2)
        << bound.epsilon;
    out << row.str() << '\n';
  }
  finish(f, ctx.out_dir / "uhat.csv");
  return kExitOk;
}

int cmd_simulate(const Context& ctx) {
  auto c = ctx.config;
  const double mu = resolve_mu_r(c, ctx.log);
  c.corpus.periods = std::min(c.corpus.periods, c.simulate_periods);
  auto signals = load_corpus(c.corpus, c, ctx.log);
  if (signals.size() > c.simulate_periods) signals.resize(c.simulate_periods);
  write_manifest(ctx, "corpus_manifest.txt", c.corpus, signals.size());

  const auto market = market_config(c, mu);
  const auto penalty = market.penalty(market.mu_lambda, c.interval_h);
  RunOptions options;
  options.policy = c.policy;
  options.performance = c.market.performance;

  auto summary = open_output(ctx, "simulate_summary.csv");
  summary << "period,u_hat,mismatch_mwh,penalty_cost,aging_cost,objective,perf_index\n";
  double e0 = c.battery.midpoint_mwh();
  for (std::size_t k = 0; k < signals.size(); ++k) {
    const auto traj = run_policy(signals[k], c.capacity_mw, c.battery, penalty, e0, options);
    e0 = traj.final_energy();
    std::ostringstream name;
    name << "trajectory_" << std::setw(4) << std::setfill('0') << k << ".csv";
    auto f = open_output(ctx, name.str());
    write_trajectory_csv(f, traj, c.battery);
    finish(f, ctx.out_dir / name.str());
    summary << k << ',' << num(traj.u_hat) << ',' << num(traj.mismatch_mwh) << ','
            << num(traj.penalty_cost) << ',' << num(traj.aging_cost) << ','
            << num(traj.objective) << ',' << num(traj.perf_index) << '\n';
    *ctx.out << "period " << k << ": u_hat=" << num(traj.u_hat)
             << " objective=" << num(traj.objective) << " perf_index=" << num(traj.perf_index)
             << '\n';
  }
  finish(summary, ctx.out_dir / "simulate_summary.csv");
  return kExitOk;
}

int cmd_calibrate(const Context& ctx) {
  const auto& c = ctx.config;
  const auto signals = load_corpus(c.calibration, c, ctx.log);
  write_manifest(ctx, "calibration_manifest.txt", c.calibration, signals.size());
  const auto curve =
      calibrate_gamma_curve(signals, c.xi, c.market.performance.effective_delta(),
                            c.gamma_grid, c.battery.efficiency, c.calibration.id());
  if (curve.undersampled()) {
    *ctx.log << "warning: " << curve.periods << " calibration periods is few for xi="
             << num(curve.xi) << '\n';
  }
  auto f = open_output(ctx, "gamma_curve.csv");
  write_gamma_curve_csv(f, curve);
  finish(f, ctx.out_dir / "gamma_curve.csv");
  *ctx.out << "mu_r=" << num(mu_r(signals)) << '\n'
           << "max_quantile=" << num(curve.max_quantile()) << '\n';
  return kExitOk;
}

int cmd_bid(const Context& ctx) {
  const auto& c = ctx.config;
  const double mu = resolve_mu_r(c, ctx.log);
  const auto curve = resolve_gamma_curve(c, ctx.log);
  const auto bids = build_bid_curve(c.segments, c.battery, bidding_config(c, mu), curve);
  auto f = open_output(ctx, "bid_curve.csv");
  write_bid_curve_csv(f, bids);
  finish(f, ctx.out_dir / "bid_curve.csv");
  for (std::size_t i = 0; i < bids.segments.size(); ++i) {
    *ctx.out << "segment " << i + 1 << ": " << num(bids.segments[i].capacity_mw) << " MW at $"
             << num(bids.segments[i].price_per_mw) << "/MW\n";
  }
  *ctx.out << "total_capacity_mw=" << num(bids.total_capacity()) << '\n';
  return kExitOk;
}

int cmd_backtest(const Context& ctx) {
  const auto& c = ctx.config;
  const double mu = resolve_mu_r(c, ctx.log);
  auto signals = load_corpus(c.corpus, c, ctx.log);
  write_manifest(ctx, "corpus_manifest.txt", c.corpus, signals.size());
  const auto prices = load_prices(c, signals.size());
  const auto periods = make_periods(std::move(signals), prices);

  Strategy strategy;
  strategy.policy = c.policy;
  strategy.bidding = c.bidding;
  strategy.capacity_mw = c.capacity_mw;
  if (c.bidding == BiddingMode::kBidCurve) {
    const auto curve = resolve_gamma_curve(c, ctx.log);
    strategy.bid_curve = build_bid_curve(c.segments, c.battery, bidding_config(c, mu), curve);
  }
  const auto report = backtest(periods, strategy, c.battery, market_config(c, mu));

  auto f = open_output(ctx, "report.csv");
  write_report_csv(f, report);
  finish(f, ctx.out_dir / "report.csv");

  const auto summary = nlohmann::ordered_json::parse(summary_json(report.summary));
  nlohmann::ordered_json doc;
  doc["generator"] = header_line(c).substr(2);
  for (const auto& [key, value] : summary.items()) doc[key] = value;
  std::ofstream j(ctx.out_dir / "summary.json", std::ios::binary);
  j << doc.dump(2) << '\n';
  finish(j, ctx.out_dir / "summary.json");

  for (const auto& [key, value] : summary.items()) {
    *ctx.out << key << '=' << (value.is_number_float() ? num(value.get<double>())
                                                       : value.dump())
             << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const Context& ctx) {
  const auto& c = ctx.config;
  const double mu = resolve_mu_r(c, ctx.log);
  auto signals = load_corpus(c.corpus, c, ctx.log);
  write_manifest(ctx, "corpus_manifest.txt", c.corpus, signals.size());
  const auto prices = load_prices(c, signals.size());
  const auto periods = make_periods(std::move(signals), prices);
  const auto rows = capacity_sweep(periods, c.capacities, c.battery, market_config(c, mu));
  auto f = open_output(ctx, "sweep.csv");
  write_sweep_csv(f, rows);
  finish(f, ctx.out_dir / "sweep.csv");
  for (const auto& r : rows) {
    *ctx.out << to_string(r.policy) << " C=" << num(r.capacity_mw)
             << " profit=" << num(r.profit) << '\n';
  }
  return kExitOk;
}

}  // namespace regbid::cli
