#pragma once

// Player-game panel: persons, games with three-referee crews, player-game
// rows. Loaded from three CSVs, validated for referential integrity, and
// indexed by player-year and by game. Immutable after load.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "tonepanel/common.hpp"
#include "tonepanel/csv.hpp"

namespace tonepanel::panel {

enum class Role { player, referee, coach };
enum class Race { black, nonblack };
enum class Gender { woman, man };

struct Person {
  std::string id;
  Role role = Role::player;
  std::optional<Race> race_fairface;
  std::optional<Race> race_human;
  std::optional<double> l_star;
  std::optional<Gender> gender;
};

struct RefereeCrew {
  std::array<std::string, 3> referee_ids;
};

struct GameRecord {
  std::string id;
  int season = 0;
  std::string date;
  RefereeCrew crew;
  std::optional<double> attendance;  // in thousands
  std::optional<bool> home_win;
};

struct PlayerGameRow {
  std::string player_id;
  std::string game_id;
  std::string team_id;
  int season = 0;
  double minutes = 0;
  int fouls = 0;
  bool starter = false;
  bool home = false;
  std::string coach_id;
};

struct LoadOptions {
  double max_minutes = 48.0;  // hard cap, overtime allowance included
  int max_fouls = 6;
  int season_min = 1997;
  int season_max = 2100;
};

struct LoadReport {
  std::size_t rows_loaded = 0;
  std::size_t rows_rejected = 0;
  std::vector<std::string> rejections;  // one line per dropped row
};

class Panel {
 public:
  std::vector<Person> persons;
  std::vector<GameRecord> games;
  std::vector<PlayerGameRow> rows;

  const Person* find_person(const std::string& id) const {
    auto it = person_index_.find(id);
    return it == person_index_.end() ? nullptr : &persons[it->second];
  }
  const Person& person(const std::string& id) const {
    const Person* p = find_person(id);
    if (!p) throw Error("unknown person id '" + id + "'");
    return *p;
  }
  const GameRecord* find_game(const std::string& id) const {
    auto it = game_index_.find(id);
    return it == game_index_.end() ? nullptr : &games[it->second];
  }
  const GameRecord& game(const std::string& id) const {
    const GameRecord* g = find_game(id);
    if (!g) throw Error("unknown game id '" + id + "'");
    return *g;
  }

  const std::map<std::pair<std::string, int>, std::vector<std::size_t>>& player_year_index() const {
    return player_year_index_;
  }
  const std::map<std::string, std::vector<std::size_t>>& rows_by_game() const { return rows_by_game_; }

  /// Validates referential integrity and (player, game) uniqueness, then
  /// builds the indexes. Row order is preserved.
  static Panel build(std::vector<Person> persons, std::vector<GameRecord> games,
                     std::vector<PlayerGameRow> rows, const LoadOptions& opts = {}) {
    Panel p;
    p.persons = std::move(persons);
    p.games = std::move(games);
    p.rows = std::move(rows);

    for (std::size_t i = 0; i < p.persons.size(); ++i) {
      if (!p.person_index_.emplace(p.persons[i].id, i).second)
        throw Error("duplicate person id '" + p.persons[i].id + "'");
    }
    for (std::size_t i = 0; i < p.games.size(); ++i) {
      const GameRecord& g = p.games[i];
      if (!p.game_index_.emplace(g.id, i).second) throw Error("duplicate game id '" + g.id + "'");
      if (g.season < opts.season_min || g.season > opts.season_max)
        throw Error("game '" + g.id + "': season " + std::to_string(g.season) + " out of range");
      std::set<std::string> distinct(g.crew.referee_ids.begin(), g.crew.referee_ids.end());
      if (distinct.size() != 3) throw Error("game '" + g.id + "': crew referees not distinct");
      for (const auto& rid : g.crew.referee_ids) {
        const Person* ref = p.find_person(rid);
        if (!ref) throw Error("game '" + g.id + "': unknown referee id '" + rid + "'");
        if (ref->role != Role::referee)
          throw Error("game '" + g.id + "': person '" + rid + "' is not a referee");
      }
    }
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
      const PlayerGameRow& r = p.rows[i];
      if (!p.find_person(r.player_id)) throw Error("row " + std::to_string(i + 1) + ": unknown player id '" + r.player_id + "'");
      if (!p.find_game(r.game_id)) throw Error("row " + std::to_string(i + 1) + ": unknown game id '" + r.game_id + "'");
      if (!p.find_person(r.coach_id)) throw Error("row " + std::to_string(i + 1) + ": unknown coach id '" + r.coach_id + "'");
      if (!seen.emplace(r.player_id, r.game_id).second)
        throw Error("duplicate (player, game) pair ('" + r.player_id + "', '" + r.game_id + "')");
      if (r.season != p.game(r.game_id).season)
        throw Error("row " + std::to_string(i + 1) + ": season does not match game '" + r.game_id + "'");
      p.player_year_index_[{r.player_id, r.season}].push_back(i);
      p.rows_by_game_[r.game_id].push_back(i);
    }
    return p;
  }

 private:
  std::unordered_map<std::string, std::size_t> person_index_;
  std::unordered_map<std::string, std::size_t> game_index_;
  std::map<std::pair<std::string, int>, std::vector<std::size_t>> player_year_index_;
  std::map<std::string, std::vector<std::size_t>> rows_by_game_;
};

// ---------------------------------------------------------------------------
// CSV schemas
// ---------------------------------------------------------------------------
// persons.csv:      person_id,role,race_fairface,race_human,l_star,gender
// games.csv:        game_id,season,date,ref1,ref2,ref3,attendance,home_win
// player_games.csv: player_id,game_id,team_id,season,minutes,fouls,starter,home,coach_id
// Optional fields are empty strings, never defaulted.

namespace detail {

inline double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(where + ": not a number: '" + s + "'");
  }
}

inline int parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(where + ": not an integer: '" + s + "'");
  }
}

inline bool parse_bool(const std::string& s, const std::string& where) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw Error(where + ": not a boolean (0/1): '" + s + "'");
}

inline Race parse_race(const std::string& s, const std::string& where) {
  if (s == "black") return Race::black;
  if (s == "nonblack") return Race::nonblack;
  throw Error(where + ": race must be black|nonblack, got '" + s + "'");
}

inline int require_column(const csv::Table& t, const std::string& file, const std::string& name) {
  int c = t.column(name);
  if (c < 0) throw Error(file + ": missing column '" + name + "'");
  return c;
}

}  // namespace detail

inline Panel load_panel(const std::string& persons_csv, const std::string& games_csv,
                        const std::string& rows_csv, const LoadOptions& opts = {},
                        LoadReport* report = nullptr) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_int;
  using detail::parse_race;
  using detail::require_column;

  LoadReport local;
  LoadReport& rep = report ? *report : local;

  csv::Table pt = csv::read_file(persons_csv);
  const int p_id = require_column(pt, persons_csv, "person_id");
  const int p_role = require_column(pt, persons_csv, "role");
  const int p_ff = require_column(pt, persons_csv, "race_fairface");
  const int p_hr = require_column(pt, persons_csv, "race_human");
  const int p_l = require_column(pt, persons_csv, "l_star");
  const int p_g = require_column(pt, persons_csv, "gender");

  std::vector<Person> persons;
  for (std::size_t i = 0; i < pt.rows.size(); ++i) {
    const auto& f = pt.rows[i];
    const std::string where = persons_csv + " line " + std::to_string(pt.line_numbers[i]);
    Person p;
    p.id = f[p_id];
    if (p.id.empty()) throw Error(where + ": empty person_id");
    const std::string& role = f[p_role];
    if (role == "player")
      p.role = Role::player;
    else if (role == "referee")
      p.role = Role::referee;
    else if (role == "coach")
      p.role = Role::coach;
    else
      throw Error(where + ": role must be player|referee|coach, got '" + role + "'");
    if (!f[p_ff].empty()) p.race_fairface = parse_race(f[p_ff], where);
    if (!f[p_hr].empty()) p.race_human = parse_race(f[p_hr], where);
    if (!f[p_l].empty()) {
      double l = parse_double(f[p_l], where);
      if (l < 0 || l > 100) throw Error(where + ": l_star out of [0,100]: " + f[p_l]);
      p.l_star = l;
    }
    if (!f[p_g].empty()) {
      if (f[p_g] == "woman")
        p.gender = Gender::woman;
      else if (f[p_g] == "man")
        p.gender = Gender::man;
      else
        throw Error(where + ": gender must be woman|man, got '" + f[p_g] + "'");
    }
    persons.push_back(std::move(p));
  }

  csv::Table gt = csv::read_file(games_csv);
  const int g_id = require_column(gt, games_csv, "game_id");
  const int g_season = require_column(gt, games_csv, "season");
  const int g_date = require_column(gt, games_csv, "date");
  const int g_r1 = require_column(gt, games_csv, "ref1");
  const int g_r2 = require_column(gt, games_csv, "ref2");
  const int g_r3 = require_column(gt, games_csv, "ref3");
  const int g_att = require_column(gt, games_csv, "attendance");
  const int g_hw = gt.column("home_win");  // optional column

  std::vector<GameRecord> games;
  for (std::size_t i = 0; i < gt.rows.size(); ++i) {
    const auto& f = gt.rows[i];
    const std::string where = games_csv + " line " + std::to_string(gt.line_numbers[i]);
    GameRecord g;
    g.id = f[g_id];
    if (g.id.empty()) throw Error(where + ": empty game_id");
    g.season = parse_int(f[g_season], where);
    g.date = f[g_date];
    g.crew.referee_ids = {f[g_r1], f[g_r2], f[g_r3]};
    if (!f[g_att].empty()) g.attendance = parse_double(f[g_att], where);
    if (g_hw >= 0 && !f[g_hw].empty()) g.home_win = parse_bool(f[g_hw], where);
    games.push_back(std::move(g));
  }

  csv::Table rt = csv::read_file(rows_csv);
  const int r_pid = require_column(rt, rows_csv, "player_id");
  const int r_gid = require_column(rt, rows_csv, "game_id");
  const int r_tid = require_column(rt, rows_csv, "team_id");
  const int r_season = require_column(rt, rows_csv, "season");
  const int r_min = require_column(rt, rows_csv, "minutes");
  const int r_fouls = require_column(rt, rows_csv, "fouls");
  const int r_starter = require_column(rt, rows_csv, "starter");
  const int r_home = require_column(rt, rows_csv, "home");
  const int r_coach = require_column(rt, rows_csv, "coach_id");

  std::vector<PlayerGameRow> rows;
  for (std::size_t i = 0; i < rt.rows.size(); ++i) {
    const auto& f = rt.rows[i];
    const std::string where = rows_csv + " line " + std::to_string(rt.line_numbers[i]);
    PlayerGameRow r;
    r.player_id = f[r_pid];
    r.game_id = f[r_gid];
    r.team_id = f[r_tid];
    r.season = parse_int(f[r_season], where);
    r.minutes = parse_double(f[r_min], where);
    r.fouls = parse_int(f[r_fouls], where);
    r.starter = parse_bool(f[r_starter], where);
    r.home = parse_bool(f[r_home], where);
    r.coach_id = f[r_coach];
    if (r.minutes <= 0) {
      // zero-minute rows carry no information for a minutes-weighted rate
      ++rep.rows_rejected;
      rep.rejections.push_back(where + ": rejected, minutes <= 0");
      continue;
    }
    if (r.minutes > opts.max_minutes)
      throw Error(where + ": minutes " + f[r_min] + " above cap " +
                  detail::format_double(opts.max_minutes));
    if (r.fouls < 0 || r.fouls > opts.max_fouls)
      throw Error(where + ": fouls " + f[r_fouls] + " out of [0," + std::to_string(opts.max_fouls) + "]");
    rows.push_back(std::move(r));
  }
  rep.rows_loaded = rows.size();

  return Panel::build(std::move(persons), std::move(games), std::move(rows), opts);
}

inline void save_panel(const Panel& p, const std::string& persons_csv, const std::string& games_csv,
                       const std::string& rows_csv) {
  using detail::format_double;
  csv::Writer pw(persons_csv);
  pw.row({"person_id", "role", "race_fairface", "race_human", "l_star", "gender"});
  auto race_str = [](const std::optional<Race>& r) {
    return !r ? std::string{} : (*r == Race::black ? "black" : "nonblack");
  };
  for (const auto& person : p.persons) {
    const char* role = person.role == Role::player ? "player"
                       : person.role == Role::referee ? "referee"
                                                      : "coach";
    pw.row({person.id, role, race_str(person.race_fairface), race_str(person.race_human),
            person.l_star ? format_double(*person.l_star) : "",
            !person.gender ? "" : (*person.gender == Gender::woman ? "woman" : "man")});
  }

  csv::Writer gw(games_csv);
  gw.row({"game_id", "season", "date", "ref1", "ref2", "ref3", "attendance", "home_win"});
  for (const auto& g : p.games)
    gw.row({g.id, std::to_string(g.season), g.date, g.crew.referee_ids[0], g.crew.referee_ids[1],
            g.crew.referee_ids[2], g.attendance ? format_double(*g.attendance) : "",
            !g.home_win ? "" : (*g.home_win ? "1" : "0")});

  csv::Writer rw(rows_csv);
  rw.row({"player_id", "game_id", "team_id", "season", "minutes", "fouls", "starter", "home", "coach_id"});
  for (const auto& r : p.rows)
    rw.row({r.player_id, r.game_id, r.team_id, std::to_string(r.season), format_double(r.minutes),
            std::to_string(r.fouls), r.starter ? "1" : "0", r.home ? "1" : "0", r.coach_id});
}

// ---------------------------------------------------------------------------
// Diagnostics report (sample-size layout)
// ---------------------------------------------------------------------------

struct GroupStats {
  std::size_t count = 0;
  double l_mean = 0, l_sd = 0, l_min = 0, l_max = 0;
};

struct PanelSummary {
  std::size_t n_players = 0, n_referees = 0, n_coaches = 0;
  std::size_t n_games = 0, n_player_games = 0;
  double player_minutes = 0;
  std::size_t n_unique_crews = 0;
  // crew skin-tone spread, over rows where player and crew tones are present
  std::size_t n_crew_distances = 0;
  double crew_distance_mean = 0, crew_distance_sd = 0;
};

inline PanelSummary validate_panel(const Panel& p) {
  PanelSummary s;
  for (const auto& person : p.persons) {
    if (person.role == Role::player)
      ++s.n_players;
    else if (person.role == Role::referee)
      ++s.n_referees;
    else
      ++s.n_coaches;
  }
  s.n_games = p.games.size();
  s.n_player_games = p.rows.size();
  for (const auto& r : p.rows) s.player_minutes += r.minutes;

  std::set<std::array<std::string, 3>> crews;
  for (const auto& g : p.games) {
    auto ids = g.crew.referee_ids;
    std::sort(ids.begin(), ids.end());
    crews.insert(ids);
  }
  s.n_unique_crews = crews.size();

  double sum = 0, sumsq = 0;
  for (const auto& r : p.rows) {
    const Person& player = p.person(r.player_id);
    if (!player.l_star) continue;
    const GameRecord& g = p.game(r.game_id);
    double acc = 0;
    bool ok = true;
    for (const auto& rid : g.crew.referee_ids) {
      const Person& ref = p.person(rid);
      if (!ref.l_star) {
        ok = false;
        break;
      }
      acc += std::abs(*player.l_star - *ref.l_star);
    }
    if (!ok) continue;
    const double d = acc / 3.0;
    ++s.n_crew_distances;
    sum += d;
    sumsq += d * d;
  }
  if (s.n_crew_distances > 0) {
    s.crew_distance_mean = sum / s.n_crew_distances;
    const double var = sumsq / s.n_crew_distances - s.crew_distance_mean * s.crew_distance_mean;
    s.crew_distance_sd = var > 0 ? std::sqrt(var) : 0.0;
  }
  return s;
}

inline std::string format_summary(const PanelSummary& s) {
  std::string out;
  auto line = [&out](const std::string& k, const std::string& v) {
    out += k;
    out.append(k.size() < 24 ? 24 - k.size() : 1, ' ');
    out += v;
    out += '\n';
  };
  line("No. of players", std::to_string(s.n_players));
  line("No. of referees", std::to_string(s.n_referees));
  line("No. of coaches", std::to_string(s.n_coaches));
  line("No. of games", std::to_string(s.n_games));
  line("No. of player-games", std::to_string(s.n_player_games));
  line("Player-minutes", detail::format_double(s.player_minutes));
  line("No. of unique crews", std::to_string(s.n_unique_crews));
  if (s.n_crew_distances > 0) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f (%.2f)", s.crew_distance_mean, s.crew_distance_sd);
    line("Mean abs. L* diff.", buf);
  }
  return out;
}

}  // namespace tonepanel::panel
