#pragma once

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hba/common.hpp"
#include "hba/episode.hpp"
#include "hba/game.hpp"
#include "hba/trace.hpp"

namespace hba {

// Doubles are printed with %.12g everywhere so outputs are byte-stable.
inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// Episode log: t,state,joint_action,sampled_types,reward. Compound cells
// join entries with ';'; the controlled player's type slot prints '*'.
inline void write_episode_csv(std::ostream& out, const GameSpec& spec,
                              const EpisodeLog& log) {
  out << "t,state,joint_action,sampled_types,reward\n";
  for (const EpisodeStep& step : log.steps) {
    out << step.t << "," << spec.state_names[step.state] << ",";
    for (PlayerId p = 0; p < spec.num_players; ++p) {
      if (p) out << ";";
      out << spec.action_names[p][step.action[p]];
    }
    out << ",";
    for (PlayerId p = 0; p < spec.num_players; ++p) {
      if (p) out << ";";
      if (p == spec.controlled_player)
        out << "*";
      else
        out << spec.latent_types[p][step.sampled_types[p]]->id();
    }
    out << "," << format_double(step.reward) << "\n";
  }
}

// Posterior trace: t, likelihood kind, one posterior column per user type,
// error, ao, as, degenerate flag.
inline void write_trace_csv(std::ostream& out, const TraceResult& trace) {
  out << "t,kind";
  for (const std::string& id : trace.type_ids) out << ",post_" << id;
  out << ",error,ao,as,degenerate\n";
  for (const TraceRow& row : trace.rows) {
    out << row.t << "," << to_string(trace.kind);
    for (double p : row.posterior) out << "," << format_double(p);
    out << "," << format_double(row.error) << "," << format_double(row.ao) << ","
        << format_double(row.as) << "," << (row.degenerate ? 1 : 0) << "\n";
  }
}

// Per-step plan dump: t, action, expected payoff, membership in the
// maximiser set.
inline void write_plan_header(std::ostream& out) {
  out << "t,action,value,in_argmax\n";
}

inline void write_plan_rows(std::ostream& out, const GameSpec& spec, int t,
                            const std::vector<double>& values,
                            const std::vector<ActionId>& argmax) {
  for (std::size_t a = 0; a < values.size(); ++a) {
    bool chosen = std::find(argmax.begin(), argmax.end(),
                            static_cast<ActionId>(a)) != argmax.end();
    out << t << "," << spec.action_names[spec.controlled_player][a] << ","
        << format_double(values[a]) << "," << (chosen ? 1 : 0) << "\n";
  }
}

// Downsamples a posterior-trace CSV into gnuplot-friendly "t error" columns.
// Keeps every stride-th row. Malformed traces are rejected.
inline void emit_plot_data(std::istream& in, std::ostream& out, int stride = 1) {
  detail::require(stride >= 1, "emit_plot_data: stride must be >= 1");
  std::string header;
  detail::require(static_cast<bool>(std::getline(in, header)),
                  "emit_plot_data: empty input");

  std::vector<std::string> columns;
  {
    std::istringstream hs(header);
    std::string cell;
    while (std::getline(hs, cell, ',')) columns.push_back(cell);
  }
  int t_col = -1, err_col = -1;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == "t") t_col = static_cast<int>(c);
    if (columns[c] == "error") err_col = static_cast<int>(c);
  }
  detail::require(t_col >= 0 && err_col >= 0,
                  "emit_plot_data: trace must have 't' and 'error' columns");

  out << "# t error\n";
  std::string line;
  long long row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row++ % stride != 0) continue;
    std::istringstream ls(line);
    std::string cell;
    std::string t_val, e_val;
    for (int c = 0; std::getline(ls, cell, ','); ++c) {
      if (c == t_col) t_val = cell;
      if (c == err_col) e_val = cell;
    }
    detail::require(!t_val.empty() && !e_val.empty(),
                    "emit_plot_data: malformed row: " + line);
    out << t_val << " " << e_val << "\n";
  }
}

}  // namespace hba
