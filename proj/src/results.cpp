#include "edgeauth/results.hpp"

#include <json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace edgeauth {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw Error("table row has " + std::to_string(row.size()) + " cells, expected " + std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

Format format_from_string(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "jsonl" || s == "json-lines") return Format::JsonLines;
  throw ValidationError("unknown output format \"" + s + "\" (expected csv or jsonl)");
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct CsvCell {
  std::string operator()(std::monostate) const { return ""; }
  std::string operator()(std::int64_t v) const { return std::to_string(v); }
  std::string operator()(double v) const { return format_double(v); }
  std::string operator()(const std::string& s) const { return csv_field(s); }
};

struct JsonCell {
  std::string operator()(std::monostate) const { return "null"; }
  std::string operator()(std::int64_t v) const { return std::to_string(v); }
  std::string operator()(double v) const { return std::isfinite(v) ? format_double(v) : "null"; }
  std::string operator()(const std::string& s) const { return nlohmann::json(s).dump(); }
};

Cell opt(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }
Cell count(std::size_t v) { return Cell{static_cast<std::int64_t>(v)}; }
Cell integer(int v) { return Cell{static_cast<std::int64_t>(v)}; }

std::string join(const std::vector<DeviceId>& ids) {
  std::string s;
  for (const auto& id : ids) s += (s.empty() ? "" : ";") + id.str();
  return s;
}

void append_position(std::vector<Cell>& row, const Position& p) {
  for (int i = 0; i < 3; ++i) row.push_back(p.observable() ? Cell{p[i]} : Cell{});
}

}  // namespace

void write_table(std::ostream& out, const Table& table, Format format) {
  if (format == Format::Csv) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << csv_field(table.columns[c]);
    out << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << std::visit(CsvCell{}, row[c]);
      out << '\n';
    }
    return;
  }
  for (const auto& row : table.rows) {
    out << '{';
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << nlohmann::json(table.columns[c]).dump() << ':' << std::visit(JsonCell{}, row[c]);
    out << "}\n";
  }
}

void emit_results(const Table& table, Format format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing: " + std::generic_category().message(errno));
  write_table(out, table, format);
  out.flush();
  if (!out) throw Error("write to " + path.string() + " failed");
}

Table to_table(std::span<const RunRecord> records) {
  Table t;
  t.columns = {"epoch", "verdict", "x0_1", "x0_2", "x0_3", "detection_error_m", "iterations", "message_count",
               "group_members", "error"};
  for (const auto& r : records) {
    std::vector<Cell> row{integer(r.epoch), r.verdict ? Cell{to_string(*r.verdict)} : Cell{}};
    append_position(row, r.x0);
    row.push_back(opt(r.detection_error_m));
    row.push_back(integer(r.iterations));
    row.push_back(count(r.message_count));
    row.push_back(join(r.group_members));
    row.push_back(r.error);
    t.add_row(std::move(row));
  }
  return t;
}

Table to_table(std::span<const EpochRecord> records) {
  Table t;
  t.columns = {"epoch",     "user_1",     "user_2",        "user_3",   "verdict",  "x0_1",    "x0_2",
               "x0_3",      "converged", "detection_error_m", "iterations", "message_count", "target_peers", "members",
               "departed",  "joined",     "added",         "dropped",  "error"};
  for (const auto& r : records) {
    std::vector<Cell> row{integer(r.epoch)};
    append_position(row, r.user_pos);
    row.push_back(r.verdict ? Cell{to_string(*r.verdict)} : Cell{});
    append_position(row, r.x0);
    row.push_back(integer(r.converged ? 1 : 0));
    row.push_back(opt(r.detection_error));
    row.push_back(integer(r.iterations));
    row.push_back(count(r.message_count));
    row.push_back(integer(r.target_peers));
    row.push_back(join(r.members));
    row.push_back(join(r.departed));
    row.push_back(join(r.joined));
    row.push_back(join(r.added));
    row.push_back(join(r.dropped));
    row.push_back(r.error);
    t.add_row(std::move(row));
  }
  return t;
}

Table to_table(std::span<const ErrorBoundRow> rows) {
  Table t;
  t.columns = {"peers", "bound", "mean_iterations", "mean_messages", "seeds"};
  for (const auto& r : rows)
    t.add_row({integer(r.peers), r.bound, r.mean_iterations, r.mean_messages, integer(r.seeds)});
  return t;
}

Table to_table(std::span<const ThresholdRow> rows) {
  Table t;
  t.columns = {"peers", "nu", "fa", "fa_std_error", "trials", "md_closed_form", "md", "md_std_error"};
  for (const auto& r : rows)
    t.add_row({integer(r.peers), r.nu, r.fa, r.fa_std_error, integer(r.trials), r.md_closed_form, opt(r.md),
               opt(r.md_std_error)});
  return t;
}

Table to_table(std::span<const SnrRow> rows) {
  Table t;
  t.columns = {"peers", "snr_db", "mean_error_m", "std_error_m", "samples", "not_converged"};
  for (const auto& r : rows)
    t.add_row({integer(r.peers), r.snr_db, r.error.mean, r.error.std_error, integer(r.error.samples),
               integer(r.error.not_converged)});
  return t;
}

Table trajectory_table(const ConsensusResult& result) {
  Table t;
  t.columns = {"iteration", "peer", "x1", "x2", "x3", "residual"};
  for (std::size_t k = 0; k < result.trajectory.size(); ++k) {
    const double residual = k < result.residual_trace.size() ? result.residual_trace[k] : 0.0;
    for (std::size_t n = 0; n < result.trajectory[k].size(); ++n) {
      const Vector3& x = result.trajectory[k][n];
      const std::string peer = n < result.peers.size() ? result.peers[n].peer.str() : std::to_string(n);
      t.add_row({count(k + 1), peer, x[0], x[1], x[2], residual});
    }
  }
  return t;
}

}  // namespace edgeauth
