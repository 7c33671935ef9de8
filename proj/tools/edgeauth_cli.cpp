// Command-line front end: single runs, sweeps, mobility campaigns,
// threshold/peer-count calibration and the centralized baseline.

#include "edgeauth/config.hpp"
#include "edgeauth/experiments.hpp"
#include "edgeauth/results.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace edgeauth;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  std::optional<int> trials;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Scenario file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Override scenario.seed");
  cmd->add_option("--out", c.out, "Output file (default: stdout)");
  cmd->add_option("--format", c.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_option("--trials", c.trials, "Runs, seeds or Monte-Carlo trials")->check(CLI::PositiveNumber);
}

ScenarioConfig load(const Common& c) {
  ScenarioConfig s = load_scenario(c.config);
  if (c.seed) s.seed = *c.seed;
  return s;
}

void emit(const Common& c, const Table& t) {
  const Format f = format_from_string(c.format);
  if (c.out.empty())
    write_table(std::cout, t, f);
  else
    emit_results(t, f, c.out);
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
  std::vector<T> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "inf") {
      if constexpr (std::is_floating_point_v<T>) {
        out.push_back(std::numeric_limits<T>::infinity());
        continue;
      }
    }
    std::istringstream in(item);
    T v{};
    if (!(in >> v) || !in.eof()) throw ValidationError("bad " + what + " value \"" + item + "\"");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError(what + " list is empty");
  return out;
}

void write_messages(const std::string& path, const std::vector<Message>& messages) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_message_log(out, messages);
  if (!out) throw Error("write to " + path + " failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative physical-layer authentication simulator"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, campaign_opts, calibrate_opts, baseline_opts;

  auto* run = app.add_subcommand("run", "Authenticate once per stream and emit run records");
  add_common(run, run_opts);
  std::string presence = "legitimate", trace_path, messages_path;
  run->add_option("--presence", presence, "Who transmits")->check(CLI::IsMember({"legitimate", "attacker"}));
  run->add_option("--trace", trace_path, "Write the per-iteration estimates of stream 0 here (csv)");
  run->add_option("--messages", messages_path, "Write the message log of stream 0 here");

  auto* sweep = app.add_subcommand("sweep", "Parameter sweeps over peer counts");
  add_common(sweep, sweep_opts);
  std::string sweep_name, sweep_values, sweep_peers = "3,4,5";
  sweep->add_option("name", sweep_name, "error_bound, threshold_fa or snr")
      ->required()
      ->check(CLI::IsMember({"error_bound", "threshold_fa", "snr"}));
  sweep->add_option("--values", sweep_values, "Comma-separated bounds, thresholds or SNRs")->required();
  sweep->add_option("--peers", sweep_peers, "Comma-separated peer counts");

  auto* campaign = app.add_subcommand("campaign", "Mobility campaign with secure-group updates");
  add_common(campaign, campaign_opts);
  std::optional<int> epochs;
  std::string campaign_messages;
  campaign->add_option("--epochs", epochs, "Override scenario.epochs")->check(CLI::PositiveNumber);
  campaign->add_option("--messages", campaign_messages, "Write the full message log here");

  auto* calibrate = app.add_subcommand("calibrate", "Threshold and peer-count calibration");
  add_common(calibrate, calibrate_opts);

  auto* baseline = app.add_subcommand("baseline", "Distributed run next to the centralized fit");
  add_common(baseline, baseline_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      const auto s = load(run_opts);
      const Presence who = presence == "attacker" ? Presence::Attacker : Presence::Legitimate;
      const int n = run_opts.trials.value_or(1);
      std::vector<RunRecord> records;
      for (int i = 0; i < n; ++i) {
        auto r = who == Presence::Attacker ? experiment_localization(s, static_cast<std::uint64_t>(i))
                                           : experiment_run(s, who, static_cast<std::uint64_t>(i));
        r.record.epoch = i;
        if (i == 0) {
          if (!trace_path.empty() && r.consensus) emit_results(trajectory_table(*r.consensus), Format::Csv, trace_path);
          write_messages(messages_path, r.messages);
        }
        records.push_back(std::move(r.record));
      }
      emit(run_opts, to_table(records));
    } else if (*sweep) {
      const auto s = load(sweep_opts);
      const auto values = parse_list<double>(sweep_values, "sweep");
      const auto peers = parse_list<int>(sweep_peers, "peer count");
      if (sweep_name == "error_bound") {
        emit(sweep_opts, to_table(sweep_error_bound(s, values, peers, sweep_opts.trials.value_or(30))));
      } else if (sweep_name == "threshold_fa") {
        emit(sweep_opts, to_table(sweep_threshold_fa(s, values, peers, sweep_opts.trials.value_or(10000))));
      } else {
        emit(sweep_opts, to_table(sweep_snr(s, values, peers, sweep_opts.trials.value_or(100))));
      }
    } else if (*campaign) {
      const auto s = load(campaign_opts);
      MessageBus bus(!campaign_messages.empty());
      const auto records = run_campaign(s, epochs.value_or(s.epochs), bus);
      write_messages(campaign_messages, bus.log());
      emit(campaign_opts, to_table(records));
    } else if (*calibrate) {
      const auto s = load(calibrate_opts);
      const auto& tp = s.threshold_params;
      CostParams cost = s.cost_params;
      if (cost.n_available == 0) cost.n_available = static_cast<int>(s.full_pool().nodes.size());
      const double nu_opt = optimal_threshold(tp);
      const double nu = threshold(tp);
      Table t;
      t.columns = {"nu_opt", "nu_ini", "nu", "md_at_nu_opt", "md_at_nu", "tau", "k_ave", "n_available", "n_opt",
                   "peer_count"};
      t.add_row({nu_opt, tp.iota0 + tp.iota, nu, md_rate_closed_form(nu_opt, tp),
                 nu > 0.0 ? md_rate_closed_form(nu, tp) : 0.0, cost.tau, cost.k_ave,
                 static_cast<std::int64_t>(cost.n_available),
                 static_cast<std::int64_t>(optimal_peer_count(cost.tau, cost.k_ave)),
                 static_cast<std::int64_t>(peer_count(cost))});
      emit(calibrate_opts, t);
    } else if (*baseline) {
      const auto s = load(baseline_opts);
      const int n = baseline_opts.trials.value_or(1);
      Table t;
      t.columns = {"stream", "scheme", "verdict", "x0_1", "x0_2", "x0_3", "detection_error_m", "iterations",
                   "message_count", "converged"};
      const auto add = [&](int i, const std::string& scheme, const RunRecord& r, bool converged) {
        std::vector<Cell> row{static_cast<std::int64_t>(i), scheme,
                              r.verdict ? Cell{to_string(*r.verdict)} : Cell{}};
        for (int c = 0; c < 3; ++c) row.push_back(r.x0.observable() ? Cell{r.x0[c]} : Cell{});
        row.push_back(r.detection_error_m ? Cell{*r.detection_error_m} : Cell{});
        row.push_back(static_cast<std::int64_t>(r.iterations));
        row.push_back(static_cast<std::int64_t>(r.message_count));
        row.push_back(std::string(converged ? "true" : "false"));
        t.add_row(std::move(row));
      };
      for (int i = 0; i < n; ++i) {
        const auto d = experiment_run(s, Presence::Legitimate, static_cast<std::uint64_t>(i));
        add(i, "distributed", d.record, d.consensus && d.consensus->converged);
        const auto c = baseline_centralized(s, static_cast<std::uint64_t>(i));
        add(i, "centralized", c.record, c.converged);
      }
      emit(baseline_opts, t);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
