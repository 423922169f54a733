//! CSV ingestion and emission.
//!
//! File formats (all with a header row):
//!
//! * `teams.csv` — `team_id,name,conference,division,pre_wins,
//!   pre_home_played,pre_away_played`; ids must be exactly `0..n-1`.
//! * `remaining.csv` — `game_id,day,host_id,guest_id,match_index[,prob]`;
//!   the optional `prob` column carries host-win probabilities inline.
//! * `probs.csv` — `game_id,prob`; overrides any inline probabilities.
//! * `targets.csv` — `team_id,home_target,away_target`; the explicit
//!   alternative to deriving targets from the shortened season length.
//! * `outcomes.csv` — `game_id,host_won`; realized results for backtests.
//! * `features.csv` — `game_id,label,<feature columns...>`; predictor input.
//! * `schedule.csv` — `game_id,selected`; a solver's selection.
//!
//! Malformed input is reported as [`Error::Ingest`] with the file path and
//! 1-based line number. Emission is the exact inverse of ingestion:
//! [`emit`] followed by [`ingest`] reconstructs the league state.

use crate::error::{Error, Result};
use crate::league::{Game, LeagueState, Scenario, Schedule, Team, PROB_CLAMP};
use crate::predictor::FeatureDataset;
use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

/// Where per-team selection targets come from.
#[derive(Debug, Clone, Copy)]
pub enum TargetsSource<'a> {
    /// Derive from the shortened season length: each team plays `m/2` home
    /// and `m/2` away games in total, so the targets are what is left of
    /// each half. Requires an even `m`.
    Auto,
    /// Read explicit per-team targets from a `targets.csv` file.
    Explicit(&'a Path),
}

/// Input files and settings for [`ingest`].
#[derive(Debug, Clone, Copy)]
pub struct IngestSpec<'a> {
    pub teams: &'a Path,
    pub remaining: &'a Path,
    /// Shortened season length `m` (games per team including those already
    /// played).
    pub m: u32,
    pub targets: TargetsSource<'a>,
    /// Optional `probs.csv`; takes precedence over inline probabilities.
    pub probs: Option<&'a Path>,
    /// Nudge win probabilities of exactly 0 or 1 to the representable
    /// clamp range instead of rejecting them.
    pub clamp_probs: bool,
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

/// A CSV file opened for row-by-row reading with header-name lookup.
struct Table {
    path: String,
    headers: Vec<String>,
    rows: Vec<(usize, csv::StringRecord)>,
}

impl Table {
    fn open(path: &Path) -> Result<Table> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::ingest(path_str(path), 0, e.to_string()))?;
        let headers = reader
            .headers()
            .map_err(|e| Error::ingest(path_str(path), 1, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                Error::ingest(path_str(path), line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            rows.push((line, record));
        }
        Ok(Table {
            path: path_str(path),
            headers,
            rows,
        })
    }

    /// Index of a required column.
    fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| {
                Error::ingest(
                    self.path.clone(),
                    1,
                    format!("missing required column '{name}' (found: {})", self.headers.join(", ")),
                )
            })
    }

    fn column_opt(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn field<'r>(&self, line: usize, record: &'r csv::StringRecord, col: usize, name: &str) -> Result<&'r str> {
        record.get(col).ok_or_else(|| {
            Error::ingest(self.path.clone(), line, format!("missing value for '{name}'"))
        })
    }

    fn parse<T: FromStr>(&self, line: usize, record: &csv::StringRecord, col: usize, name: &str) -> Result<T>
    where
        T::Err: Display,
    {
        let raw = self.field(line, record, col, name)?;
        raw.parse().map_err(|e| {
            Error::ingest(
                self.path.clone(),
                line,
                format!("bad value '{raw}' for '{name}': {e}"),
            )
        })
    }

    fn parse_bool(&self, line: usize, record: &csv::StringRecord, col: usize, name: &str) -> Result<bool> {
        match self.field(line, record, col, name)? {
            "1" | "true" | "TRUE" | "True" => Ok(true),
            "0" | "false" | "FALSE" | "False" => Ok(false),
            raw => Err(Error::ingest(
                self.path.clone(),
                line,
                format!("bad value '{raw}' for '{name}': expected 0/1 or true/false"),
            )),
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::ingest(self.path.clone(), line, message)
    }
}

/// Builds a per-id map from rows keyed by an id column, rejecting ids that
/// are out of range or repeated.
fn keyed_rows(
    table: &Table,
    id_col: usize,
    id_name: &str,
    known: usize,
) -> Result<HashMap<u32, (usize, csv::StringRecord)>> {
    let mut map = HashMap::new();
    for (line, record) in &table.rows {
        let id: u32 = table.parse(*line, record, id_col, id_name)?;
        if (id as usize) >= known {
            return Err(table.err(*line, format!("unknown {id_name} {id}")));
        }
        if map.insert(id, (*line, record.clone())).is_some() {
            return Err(table.err(*line, format!("duplicate {id_name} {id}")));
        }
    }
    Ok(map)
}

/// Reads the league input files into a validated [`LeagueState`].
///
/// The full season length is derived from the data: for every team,
/// pre-suspension games plus remaining appearances must come to the same
/// total, the counterfactual season in which everything left is played.
pub fn ingest(spec: &IngestSpec<'_>) -> Result<LeagueState> {
    // Teams, addressed by dense id.
    let table = Table::open(spec.teams)?;
    let cols = [
        table.column("team_id")?,
        table.column("name")?,
        table.column("conference")?,
        table.column("division")?,
        table.column("pre_wins")?,
        table.column("pre_home_played")?,
        table.column("pre_away_played")?,
    ];
    let n = table.rows.len();
    let mut teams: Vec<Option<Team>> = vec![None; n];
    let mut team_lines = vec![0usize; n];
    for (line, record) in &table.rows {
        let id: u32 = table.parse(*line, record, cols[0], "team_id")?;
        if id as usize >= n {
            return Err(table.err(
                *line,
                format!("team_id {id} out of range: ids must be 0..{}", n - 1),
            ));
        }
        if teams[id as usize].is_some() {
            return Err(table.err(*line, format!("duplicate team_id {id}")));
        }
        team_lines[id as usize] = *line;
        teams[id as usize] = Some(Team {
            id,
            name: table.field(*line, record, cols[1], "name")?.to_string(),
            conference: table.field(*line, record, cols[2], "conference")?.to_string(),
            division: table.field(*line, record, cols[3], "division")?.to_string(),
            pre_wins: table.parse(*line, record, cols[4], "pre_wins")?,
            pre_home_played: table.parse(*line, record, cols[5], "pre_home_played")?,
            pre_away_played: table.parse(*line, record, cols[6], "pre_away_played")?,
            home_target: 0,
            away_target: 0,
        });
    }
    let mut teams: Vec<Team> = teams
        .into_iter()
        .enumerate()
        .map(|(i, t)| t.ok_or_else(|| table.err(0, format!("no row for team_id {i}"))))
        .collect::<Result<_>>()?;
    let teams_table = table;

    // Remaining games, in file order.
    let table = Table::open(spec.remaining)?;
    let id_col = table.column("game_id")?;
    let day_col = table.column("day")?;
    let host_col = table.column("host_id")?;
    let guest_col = table.column("guest_id")?;
    let match_col = table.column("match_index")?;
    let prob_col = table.column_opt("prob");
    let mut games = Vec::with_capacity(table.rows.len());
    let mut game_lines = Vec::with_capacity(table.rows.len());
    let mut inline_probs: Vec<Option<f64>> = Vec::with_capacity(table.rows.len());
    let mut seen_ids = HashMap::new();
    for (line, record) in &table.rows {
        let id: u32 = table.parse(*line, record, id_col, "game_id")?;
        if seen_ids.insert(id, *line).is_some() {
            return Err(table.err(*line, format!("duplicate game_id {id}")));
        }
        let host: u32 = table.parse(*line, record, host_col, "host_id")?;
        let guest: u32 = table.parse(*line, record, guest_col, "guest_id")?;
        for (label, value) in [("host_id", host), ("guest_id", guest)] {
            if value as usize >= n {
                return Err(table.err(*line, format!("unknown {label} {value}")));
            }
        }
        if host == guest {
            return Err(table.err(*line, format!("game {id} has identical host and guest {host}")));
        }
        let inline = match prob_col {
            Some(col) if !table.field(*line, record, col, "prob")?.is_empty() => {
                Some(table.parse::<f64>(*line, record, col, "prob")?)
            }
            _ => None,
        };
        inline_probs.push(inline);
        game_lines.push(*line);
        games.push(Game {
            id,
            host: host as usize,
            guest: guest as usize,
            match_index: table.parse(*line, record, match_col, "match_index")?,
            day: table.parse(*line, record, day_col, "day")?,
            win_prob: 0.5, // placeholder until probabilities resolve below
        });
    }
    let games_table = table;

    // Win probabilities: probs.csv beats the inline column.
    let mut resolved: Vec<Option<(f64, &str, usize)>> = inline_probs
        .iter()
        .zip(&game_lines)
        .map(|(p, line)| p.map(|p| (p, games_table.path.as_str(), *line)))
        .collect();
    let probs_table = match spec.probs {
        Some(path) => Some(Table::open(path)?),
        None => None,
    };
    if let Some(table) = &probs_table {
        let id_col = table.column("game_id")?;
        let prob_col = table.column("prob")?;
        let index_of: HashMap<u32, usize> =
            games.iter().enumerate().map(|(g, game)| (game.id, g)).collect();
        let mut seen = HashMap::new();
        for (line, record) in &table.rows {
            let id: u32 = table.parse(*line, record, id_col, "game_id")?;
            let Some(&g) = index_of.get(&id) else {
                return Err(table.err(*line, format!("unknown game_id {id}")));
            };
            if seen.insert(id, ()).is_some() {
                return Err(table.err(*line, format!("duplicate game_id {id}")));
            }
            let p: f64 = table.parse(*line, record, prob_col, "prob")?;
            resolved[g] = Some((p, table.path.as_str(), *line));
        }
    }
    for (g, slot) in resolved.iter().enumerate() {
        let Some((p, path, line)) = slot else {
            return Err(games_table.err(
                game_lines[g],
                format!(
                    "game {} has no win probability: add a prob column or supply probs.csv",
                    games[g].id
                ),
            ));
        };
        if !p.is_finite() || !(0.0..=1.0).contains(p) {
            return Err(Error::ingest(
                *path,
                *line,
                format!("win probability {p} outside [0, 1]"),
            ));
        }
        games[g].win_prob = if *p <= PROB_CLAMP.0 || *p >= PROB_CLAMP.1 {
            if spec.clamp_probs {
                p.clamp(PROB_CLAMP.0, PROB_CLAMP.1)
            } else {
                return Err(Error::ingest(
                    *path,
                    *line,
                    format!("win probability {p} is degenerate; enable probability clamping to accept it"),
                ));
            }
        } else {
            *p
        };
    }

    // Selection targets.
    match spec.targets {
        TargetsSource::Auto => {
            if spec.m % 2 != 0 {
                return Err(Error::Config(format!(
                    "short season length m={} is odd: an even home/away split is impossible, supply explicit targets",
                    spec.m
                )));
            }
            let half = spec.m / 2;
            for (i, team) in teams.iter_mut().enumerate() {
                let name = team.name.clone();
                for (label, played, slot) in [
                    ("home", team.pre_home_played, &mut team.home_target),
                    ("away", team.pre_away_played, &mut team.away_target),
                ] {
                    *slot = half.checked_sub(played).ok_or_else(|| {
                        teams_table.err(
                            team_lines[i],
                            format!(
                                "team {i} ({name}) has already played {played} {label} games, more than m/2 = {half}"
                            ),
                        )
                    })?;
                }
            }
        }
        TargetsSource::Explicit(path) => {
            let table = Table::open(path)?;
            let id_col = table.column("team_id")?;
            let home_col = table.column("home_target")?;
            let away_col = table.column("away_target")?;
            let by_id = keyed_rows(&table, id_col, "team_id", n)?;
            for (i, team) in teams.iter_mut().enumerate() {
                let Some((line, record)) = by_id.get(&(i as u32)) else {
                    return Err(table.err(0, format!("no targets for team_id {i}")));
                };
                team.home_target = table.parse(*line, record, home_col, "home_target")?;
                team.away_target = table.parse(*line, record, away_col, "away_target")?;
            }
        }
    }

    // Full season length, derived: play everything that remains.
    let mut appearances = vec![0u32; n];
    for game in &games {
        appearances[game.host] += 1;
        appearances[game.guest] += 1;
    }
    let m_hat = teams[0].pre_games() + appearances[0];
    for (i, team) in teams.iter().enumerate().skip(1) {
        let own = team.pre_games() + appearances[i];
        if own != m_hat {
            return Err(Error::Config(format!(
                "inconsistent full season length: team 0 ({}) implies {m_hat} games, team {i} ({}) implies {own}",
                teams[0].name, team.name
            )));
        }
    }

    LeagueState::new(teams, games, spec.m, m_hat)
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::WriterBuilder::new()
        .from_path(path)
        .map_err(|e| Error::ingest(path_str(path), 0, e.to_string()))
}

/// Writes a league state back to its three input files (`teams.csv` with
/// records, `remaining.csv` with inline probabilities, explicit
/// `targets.csv`). [`ingest`] on the result reconstructs the state.
pub fn emit(state: &LeagueState, teams: &Path, remaining: &Path, targets: &Path) -> Result<()> {
    let mut w = writer(teams)?;
    w.write_record([
        "team_id",
        "name",
        "conference",
        "division",
        "pre_wins",
        "pre_home_played",
        "pre_away_played",
    ])?;
    for team in state.teams() {
        w.write_record([
            team.id.to_string(),
            team.name.clone(),
            team.conference.clone(),
            team.division.clone(),
            team.pre_wins.to_string(),
            team.pre_home_played.to_string(),
            team.pre_away_played.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = writer(remaining)?;
    w.write_record(["game_id", "day", "host_id", "guest_id", "match_index", "prob"])?;
    for game in state.games() {
        w.write_record([
            game.id.to_string(),
            game.day.to_string(),
            game.host.to_string(),
            game.guest.to_string(),
            game.match_index.to_string(),
            game.win_prob.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = writer(targets)?;
    w.write_record(["team_id", "home_target", "away_target"])?;
    for team in state.teams() {
        w.write_record([
            team.id.to_string(),
            team.home_target.to_string(),
            team.away_target.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `game_id,prob` file as (id, probability) pairs in file order.
/// Range validation happens where the values are used.
pub fn read_probs_csv(path: &Path) -> Result<Vec<(u32, f64)>> {
    let table = Table::open(path)?;
    let id_col = table.column("game_id")?;
    let prob_col = table.column("prob")?;
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, record) in &table.rows {
        out.push((
            table.parse(*line, record, id_col, "game_id")?,
            table.parse(*line, record, prob_col, "prob")?,
        ));
    }
    Ok(out)
}

/// Reads just the game ids of a remaining-games file, in file order.
pub fn remaining_game_ids(path: &Path) -> Result<Vec<u32>> {
    let table = Table::open(path)?;
    let id_col = table.column("game_id")?;
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, record) in &table.rows {
        out.push(table.parse(*line, record, id_col, "game_id")?);
    }
    Ok(out)
}

/// Writes a `game_id,prob` file.
pub fn write_probs_csv(path: &Path, rows: &[(u32, f64)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["game_id", "prob"])?;
    for (id, p) in rows {
        w.write_record([id.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Resolves a per-game column keyed by `game_id` against a league's games:
/// every game must appear exactly once.
fn per_game_column<T>(
    table: &Table,
    state: &LeagueState,
    parse: impl Fn(usize, &csv::StringRecord) -> Result<T>,
) -> Result<Vec<T>> {
    let id_col = table.column("game_id")?;
    let index_of: HashMap<u32, usize> = state
        .games()
        .iter()
        .enumerate()
        .map(|(g, game)| (game.id, g))
        .collect();
    let mut out: Vec<Option<T>> = std::iter::repeat_with(|| None)
        .take(state.n_games())
        .collect();
    for (line, record) in &table.rows {
        let id: u32 = table.parse(*line, record, id_col, "game_id")?;
        let Some(&g) = index_of.get(&id) else {
            return Err(table.err(*line, format!("unknown game_id {id}")));
        };
        if out[g].is_some() {
            return Err(table.err(*line, format!("duplicate game_id {id}")));
        }
        out[g] = Some(parse(*line, record)?);
    }
    out.into_iter()
        .enumerate()
        .map(|(g, v)| {
            v.ok_or_else(|| table.err(0, format!("no row for game_id {}", state.games()[g].id)))
        })
        .collect()
}

/// Reads realized `game_id,host_won` outcomes into a scenario aligned with
/// the league's game order.
pub fn read_outcomes_csv(path: &Path, state: &LeagueState) -> Result<Scenario> {
    let table = Table::open(path)?;
    let col = table.column("host_won")?;
    let outcomes = per_game_column(&table, state, |line, record| {
        table.parse_bool(line, record, col, "host_won")
    })?;
    Ok(Scenario::binary(outcomes))
}

/// Reads a `game_id,selected` schedule aligned with the league's game order.
pub fn read_schedule_csv(path: &Path, state: &LeagueState) -> Result<Schedule> {
    let table = Table::open(path)?;
    let col = table.column("selected")?;
    let selected = per_game_column(&table, state, |line, record| {
        table.parse_bool(line, record, col, "selected")
    })?;
    Ok(Schedule::integral(selected))
}

/// Writes a `game_id,selected` schedule file in game order.
pub fn write_schedule_csv(path: &Path, state: &LeagueState, schedule: &Schedule) -> Result<()> {
    if schedule.len() != state.n_games() {
        return Err(Error::Dimension {
            expected: state.n_games(),
            got: schedule.len(),
        });
    }
    let mut w = writer(path)?;
    w.write_record(["game_id", "selected"])?;
    for (g, game) in state.games().iter().enumerate() {
        w.write_record([
            game.id.to_string(),
            if schedule.selected()[g] { "1" } else { "0" }.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a labeled feature table: `game_id,label,<one or more feature
/// columns>`. Column names beyond the first two are free-form.
pub fn read_features_csv(path: &Path) -> Result<FeatureDataset> {
    let table = Table::open(path)?;
    let id_col = table.column("game_id")?;
    let label_col = table.column("label")?;
    let feature_cols: Vec<usize> = (0..table.headers.len())
        .filter(|c| *c != id_col && *c != label_col)
        .collect();
    if feature_cols.is_empty() {
        return Err(table.err(1, "no feature columns besides game_id and label".to_string()));
    }
    let mut rows = Vec::with_capacity(table.rows.len());
    let mut labels = Vec::with_capacity(table.rows.len());
    let mut game_ids = Vec::with_capacity(table.rows.len());
    for (line, record) in &table.rows {
        game_ids.push(table.parse(*line, record, id_col, "game_id")?);
        labels.push(table.parse_bool(*line, record, label_col, "label")?);
        let mut row = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            let value: f64 = table.parse(*line, record, c, &table.headers[c])?;
            if !value.is_finite() {
                return Err(table.err(
                    *line,
                    format!("non-finite value for '{}'", table.headers[c]),
                ));
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(table.err(0, "no data rows".to_string()));
    }
    FeatureDataset::new(rows, labels, game_ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use std::fs;
    use std::path::PathBuf;

    fn dir() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    /// Emits a state and ingests it back with explicit targets and inline
    /// probabilities.
    fn round_trip(state: &LeagueState) -> LeagueState {
        let tmp = dir();
        let teams = tmp.path().join("teams.csv");
        let remaining = tmp.path().join("remaining.csv");
        let targets = tmp.path().join("targets.csv");
        emit(state, &teams, &remaining, &targets).unwrap();
        ingest(&IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: state.m(),
            targets: TargetsSource::Explicit(&targets),
            probs: None,
            clamp_probs: false,
        })
        .unwrap()
    }

    #[test]
    fn emit_then_ingest_reconstructs_the_state() {
        let tiny = synth::four_team_league(
            [3, 2, 1, 0],
            [(1, 1), (1, 1), (1, 1), (1, 1)],
            6,
            8,
            &[0.31, 0.62, 0.45, 0.5, 0.87, 0.13, 0.5, 0.99999],
        )
        .unwrap();
        let big = synth::league(&synth::SynthConfig::day100_analogue(71)).unwrap();
        for state in [tiny, big] {
            let back = round_trip(&state);
            assert_eq!(back.teams(), state.teams());
            assert_eq!(back.games(), state.games());
            assert_eq!(back.m(), state.m());
            assert_eq!(back.m_hat(), state.m_hat());
        }
    }

    /// Two-team fixture with played home/away splits (33, 31) and (31, 33),
    /// 4 + 6 remaining cross games.
    fn two_team_files(tmp: &Path) -> (PathBuf, PathBuf) {
        let teams = tmp.join("teams.csv");
        fs::write(
            &teams,
            "team_id,name,conference,division,pre_wins,pre_home_played,pre_away_played\n\
             0,Hawks,East,D1,40,33,31\n\
             1,Bulls,East,D1,24,31,33\n",
        )
        .unwrap();
        let remaining = tmp.join("remaining.csv");
        let mut rows = String::from("game_id,day,host_id,guest_id,match_index,prob\n");
        for k in 0..4 {
            rows.push_str(&format!("{},{},0,1,{},0.6\n", k, k + 1, k + 1));
        }
        for k in 0..6 {
            rows.push_str(&format!("{},{},1,0,{},0.5\n", 4 + k, 5 + k, k + 1));
        }
        fs::write(&remaining, rows).unwrap();
        (teams, remaining)
    }

    #[test]
    fn auto_targets_leave_half_a_season_per_side() {
        let tmp = dir();
        let (teams, remaining) = two_team_files(tmp.path());
        let state = ingest(&IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: 72,
            targets: TargetsSource::Auto,
            probs: None,
            clamp_probs: false,
        })
        .unwrap();
        // 72/2 - 33 = 3 home, 72/2 - 31 = 5 away; mirrored for the other.
        assert_eq!(state.teams()[0].home_target, 3);
        assert_eq!(state.teams()[0].away_target, 5);
        assert_eq!(state.teams()[1].home_target, 5);
        assert_eq!(state.teams()[1].away_target, 3);
        assert_eq!(state.m_hat(), 74);

        let odd = ingest(&IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: 71,
            targets: TargetsSource::Explicit(Path::new("/nonexistent")),
            probs: None,
            clamp_probs: false,
        });
        assert!(odd.is_err());
        let odd_auto = ingest(&IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: 71,
            targets: TargetsSource::Auto,
            probs: None,
            clamp_probs: false,
        });
        assert!(matches!(odd_auto, Err(Error::Config(_))));
    }

    #[test]
    fn overplayed_sides_are_rejected_with_their_row() {
        let tmp = dir();
        let (teams, remaining) = two_team_files(tmp.path());
        // m = 64 means 32 per side, but team 0 already hosted 33 times.
        let err = ingest(&IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: 64,
            targets: TargetsSource::Auto,
            probs: None,
            clamp_probs: false,
        })
        .unwrap_err();
        match err {
            Error::Ingest { path, row, message } => {
                assert!(path.ends_with("teams.csv"));
                assert_eq!(row, 2);
                assert!(message.contains("home"), "{message}");
            }
            other => panic!("expected ingest error, got {other:?}"),
        }
    }

    #[test]
    fn explicit_targets_override_the_derivation() {
        let tmp = dir();
        let (teams, remaining) = two_team_files(tmp.path());
        let targets = tmp.path().join("targets.csv");
        fs::write(&targets, "team_id,home_target,away_target\n0,2,4\n1,4,2\n").unwrap();
        let state = ingest(&IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: 70,
            targets: TargetsSource::Explicit(&targets),
            probs: None,
            clamp_probs: false,
        })
        .unwrap();
        assert_eq!(state.teams()[0].home_target, 2);
        assert_eq!(state.teams()[1].away_target, 2);

        // A missing team is a file-level problem.
        fs::write(&targets, "team_id,home_target,away_target\n0,2,4\n").unwrap();
        let err = ingest(&IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: 70,
            targets: TargetsSource::Explicit(&targets),
            probs: None,
            clamp_probs: false,
        })
        .unwrap_err();
        assert!(matches!(err, Error::Ingest { .. }), "{err:?}");

        // Unknown team ids are rejected at their row.
        fs::write(
            &targets,
            "team_id,home_target,away_target\n0,2,4\n1,4,2\n7,1,1\n",
        )
        .unwrap();
        let err = ingest(&IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: 70,
            targets: TargetsSource::Explicit(&targets),
            probs: None,
            clamp_probs: false,
        })
        .unwrap_err();
        match err {
            Error::Ingest { row, message, .. } => {
                assert_eq!(row, 4);
                assert!(message.contains("unknown team_id 7"), "{message}");
            }
            other => panic!("expected ingest error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_games_are_rejected_with_their_row() {
        let tmp = dir();
        let (teams, _) = two_team_files(tmp.path());
        let remaining = tmp.path().join("remaining.csv");

        // Duplicate game id.
        fs::write(
            &remaining,
            "game_id,day,host_id,guest_id,match_index,prob\n\
             0,1,0,1,1,0.6\n0,2,1,0,1,0.5\n",
        )
        .unwrap();
        fn spec<'a>(teams: &'a Path, remaining: &'a Path) -> IngestSpec<'a> {
            IngestSpec {
                teams,
                remaining,
                m: 66,
                targets: TargetsSource::Auto,
                probs: None,
                clamp_probs: false,
            }
        }
        let err = ingest(&spec(&teams, &remaining)).unwrap_err();
        match err {
            Error::Ingest { row, message, .. } => {
                assert_eq!(row, 3);
                assert!(message.contains("duplicate game_id 0"), "{message}");
            }
            other => panic!("{other:?}"),
        }

        // Unknown team reference.
        fs::write(
            &remaining,
            "game_id,day,host_id,guest_id,match_index,prob\n0,1,0,9,1,0.6\n",
        )
        .unwrap();
        let err = ingest(&spec(&teams, &remaining)).unwrap_err();
        assert!(err.to_string().contains("unknown guest_id 9"), "{err}");

        // Self-play.
        fs::write(
            &remaining,
            "game_id,day,host_id,guest_id,match_index,prob\n0,1,1,1,1,0.6\n",
        )
        .unwrap();
        let err = ingest(&spec(&teams, &remaining)).unwrap_err();
        assert!(err.to_string().contains("identical host and guest"), "{err}");

        // Unparseable day.
        fs::write(
            &remaining,
            "game_id,day,host_id,guest_id,match_index,prob\n0,soon,0,1,1,0.6\n",
        )
        .unwrap();
        let err = ingest(&spec(&teams, &remaining)).unwrap_err();
        assert!(err.to_string().contains("bad value 'soon' for 'day'"), "{err}");

        // Missing probability (no prob column, no probs.csv).
        fs::write(
            &remaining,
            "game_id,day,host_id,guest_id,match_index\n0,1,0,1,1\n",
        )
        .unwrap();
        let err = ingest(&spec(&teams, &remaining)).unwrap_err();
        assert!(err.to_string().contains("no win probability"), "{err}");
    }

    #[test]
    fn probability_files_override_and_validate() {
        let tmp = dir();
        let (teams, remaining) = two_team_files(tmp.path());
        let probs = tmp.path().join("probs.csv");
        let mut rows = String::from("game_id,prob\n");
        for id in 0..10 {
            rows.push_str(&format!("{id},0.7\n"));
        }
        fs::write(&probs, rows).unwrap();
        let state = ingest(&IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: 72,
            targets: TargetsSource::Auto,
            probs: Some(&probs),
            clamp_probs: false,
        })
        .unwrap();
        assert!(state.win_probs().iter().all(|&p| p == 0.7));

        // Out-of-range probability named at its row in probs.csv.
        fs::write(&probs, "game_id,prob\n0,1.2\n").unwrap();
        let err = ingest(&IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: 72,
            targets: TargetsSource::Auto,
            probs: Some(&probs),
            clamp_probs: false,
        })
        .unwrap_err();
        match err {
            Error::Ingest { path, row, message } => {
                assert!(path.ends_with("probs.csv"));
                assert_eq!(row, 2);
                assert!(message.contains("outside [0, 1]"), "{message}");
            }
            other => panic!("{other:?}"),
        }

        // Unknown game id.
        fs::write(&probs, "game_id,prob\n55,0.5\n").unwrap();
        let err = ingest(&IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: 72,
            targets: TargetsSource::Auto,
            probs: Some(&probs),
            clamp_probs: false,
        })
        .unwrap_err();
        assert!(err.to_string().contains("unknown game_id 55"), "{err}");
    }

    #[test]
    fn degenerate_probabilities_need_the_clamp() {
        let tmp = dir();
        let (teams, _) = two_team_files(tmp.path());
        let remaining = tmp.path().join("remaining.csv");
        let mut rows = String::from("game_id,day,host_id,guest_id,match_index,prob\n");
        for k in 0..4 {
            rows.push_str(&format!("{},{},0,1,{},1.0\n", k, k + 1, k + 1));
        }
        for k in 0..6 {
            rows.push_str(&format!("{},{},1,0,{},0.5\n", 4 + k, 5 + k, k + 1));
        }
        fs::write(&remaining, rows).unwrap();
        let rejected = ingest(&IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: 72,
            targets: TargetsSource::Auto,
            probs: None,
            clamp_probs: false,
        });
        assert!(rejected.unwrap_err().to_string().contains("degenerate"));

        let clamped = ingest(&IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: 72,
            targets: TargetsSource::Auto,
            probs: None,
            clamp_probs: true,
        })
        .unwrap();
        assert_eq!(clamped.games()[0].win_prob, PROB_CLAMP.1);
        assert_eq!(clamped.games()[4].win_prob, 0.5);
    }

    #[test]
    fn schedules_round_trip_and_validate_completeness() {
        let state = synth::four_team_league(
            [3, 2, 1, 0],
            [(1, 1), (1, 1), (1, 1), (1, 1)],
            6,
            8,
            &[0.5; 8],
        )
        .unwrap();
        let schedule = Schedule::integral(vec![
            true, true, true, true, false, false, false, false,
        ]);
        let tmp = dir();
        let path = tmp.path().join("schedule.csv");
        write_schedule_csv(&path, &state, &schedule).unwrap();
        let back = read_schedule_csv(&path, &state).unwrap();
        assert_eq!(back.selected(), schedule.selected());

        // Dropping a row is an error naming the absent game.
        let text = fs::read_to_string(&path).unwrap();
        let truncated: Vec<&str> = text.lines().take(8).collect();
        fs::write(&path, truncated.join("\n")).unwrap();
        let err = read_schedule_csv(&path, &state).unwrap_err();
        assert!(err.to_string().contains("no row for game_id 7"), "{err}");
    }

    #[test]
    fn outcomes_become_aligned_scenarios() {
        let state = synth::four_team_league(
            [3, 2, 1, 0],
            [(1, 1), (1, 1), (1, 1), (1, 1)],
            6,
            8,
            &[0.5; 8],
        )
        .unwrap();
        let tmp = dir();
        let path = tmp.path().join("outcomes.csv");
        // Rows deliberately out of game order: alignment is by id.
        let mut rows = String::from("game_id,host_won\n");
        for id in (0..8).rev() {
            rows.push_str(&format!("{},{}\n", id, if id % 2 == 0 { 1 } else { 0 }));
        }
        fs::write(&path, rows).unwrap();
        let scenario = read_outcomes_csv(&path, &state).unwrap();
        for g in 0..8 {
            assert_eq!(scenario.outcome(g), if g % 2 == 0 { 1.0 } else { 0.0 });
        }

        fs::write(&path, "game_id,host_won\n0,maybe\n").unwrap();
        let err = read_outcomes_csv(&path, &state).unwrap_err();
        assert!(err.to_string().contains("expected 0/1"), "{err}");
    }

    #[test]
    fn feature_tables_parse_into_datasets() {
        let tmp = dir();
        let path = tmp.path().join("features.csv");
        fs::write(
            &path,
            "game_id,label,elo_diff,rest_days,home_streak\n\
             10,1,0.25,-1.5,3\n\
             11,0,-0.75,2.0,0\n\
             12,1,0.5,0.0,1\n",
        )
        .unwrap();
        let data = read_features_csv(&path).unwrap();
        assert_eq!(data.n_rows(), 3);
        assert_eq!(data.n_features(), 3);
        assert_eq!(data.game_ids(), &[10, 11, 12]);
        assert_eq!(data.labels(), &[true, false, true]);
        assert_eq!(data.rows()[1], vec![-0.75, 2.0, 0.0]);

        fs::write(&path, "game_id,label\n10,1\n").unwrap();
        let err = read_features_csv(&path).unwrap_err();
        assert!(err.to_string().contains("no feature columns"), "{err}");

        fs::write(&path, "game_id,label,f1\n10,1,NaN\n").unwrap();
        let err = read_features_csv(&path).unwrap_err();
        assert!(err.to_string().contains("non-finite"), "{err}");
    }

    #[test]
    fn team_files_need_dense_ids() {
        let tmp = dir();
        let teams = tmp.path().join("teams.csv");
        let remaining = tmp.path().join("remaining.csv");
        fs::write(
            &remaining,
            "game_id,day,host_id,guest_id,match_index,prob\n0,1,0,1,1,0.5\n",
        )
        .unwrap();
        let spec = IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: 2,
            targets: TargetsSource::Auto,
            probs: None,
            clamp_probs: false,
        };
        fs::write(
            &teams,
            "team_id,name,conference,division,pre_wins,pre_home_played,pre_away_played\n\
             0,A,East,D,1,1,0\n0,B,East,D,1,0,1\n",
        )
        .unwrap();
        assert!(ingest(&spec).unwrap_err().to_string().contains("duplicate team_id 0"));
        fs::write(
            &teams,
            "team_id,name,conference,division,pre_wins,pre_home_played,pre_away_played\n\
             0,A,East,D,1,1,0\n5,B,East,D,1,0,1\n",
        )
        .unwrap();
        assert!(ingest(&spec).unwrap_err().to_string().contains("out of range"));
    }

    #[test]
    fn mismatched_full_season_lengths_are_rejected() {
        let tmp = dir();
        let teams = tmp.path().join("teams.csv");
        let remaining = tmp.path().join("remaining.csv");
        fs::write(
            &teams,
            "team_id,name,conference,division,pre_wins,pre_home_played,pre_away_played\n\
             0,A,East,D,1,1,0\n1,B,East,D,0,0,1\n2,C,East,D,1,1,0\n",
        )
        .unwrap();
        // Appearances imply full-season totals 4, 3, and 2 respectively.
        fs::write(
            &remaining,
            "game_id,day,host_id,guest_id,match_index,prob\n\
             0,1,0,1,1,0.5\n1,2,1,0,1,0.5\n2,3,2,0,1,0.5\n",
        )
        .unwrap();
        let err = ingest(&IngestSpec {
            teams: &teams,
            remaining: &remaining,
            m: 2,
            targets: TargetsSource::Auto,
            probs: None,
            clamp_probs: false,
        })
        .unwrap_err();
        assert!(
            err.to_string().contains("inconsistent full season length"),
            "{err}"
        );
    }
}
