//! CSV with `#` header lines, and JSON documents.
//!
//! Every CSV starts with the tool version, free-form notes and a
//! `# config: <json>` line that reparses to the exact scenario.

use std::io::Write;
use std::path::Path;

use ptkerr::{Complex64, MomentSet, TimeSeries};
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::engine::SeriesRun;
use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const CONFIG_TAG: &str = "# config: ";

pub const SERIES_COLUMNS: [&str; 7] = ["t", "re_a", "im_a", "re_b", "im_b", "n_a", "n_b"];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn header_lines(config: &ScenarioConfig, notes: &[String]) -> Vec<String> {
    let mut h = vec![format!("# ptkerr {VERSION}")];
    for n in notes {
        h.push(format!("# {n}"));
    }
    h.push(format!("{CONFIG_TAG}{}", config.to_json()));
    h
}

pub fn write_table<W: Write>(mut w: W, header: &[String], table: &Table) -> CliResult<()> {
    for line in header {
        writeln!(w, "{line}")?;
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(&table.columns)?;
    for row in &table.rows {
        csv.write_record(row.iter().map(Cell::render))?;
    }
    csv.flush()?;
    Ok(())
}

pub fn series_table(series: &TimeSeries) -> Table {
    let mut t = Table::new(&SERIES_COLUMNS);
    for (x, m) in series.t.iter().zip(&series.moments) {
        t.push(vec![
            (*x).into(),
            m.mean_a.re.into(),
            m.mean_a.im.into(),
            m.mean_b.re.into(),
            m.mean_b.im.into(),
            m.n_a.into(),
            m.n_b.into(),
        ]);
    }
    t
}

/// Scenario found in a `# config:` header line.
pub fn parse_config_header(text: &str) -> CliResult<ScenarioConfig> {
    let line = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix(CONFIG_TAG))
        .ok_or_else(|| CliError::Config("no config header".into()))?;
    ScenarioConfig::from_json(line)
}

/// Time series from a CSV written by [`series_table`]; moments the file does
/// not carry are NaN.
pub fn read_series_csv(text: &str) -> CliResult<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let cols: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let idx = |name: &str| -> CliResult<usize> {
        cols.iter().position(|c| c == name).ok_or_else(|| CliError::Config(format!("missing column {name}")))
    };
    let ix: Vec<usize> = SERIES_COLUMNS.iter().map(|c| idx(c)).collect::<CliResult<_>>()?;
    let mut series = TimeSeries::new();
    for rec in rdr.records() {
        let rec = rec?;
        let v: Vec<f64> = ix
            .iter()
            .map(|&i| rec[i].parse::<f64>().map_err(|e| CliError::Config(format!("bad number {}: {e}", &rec[i]))))
            .collect::<CliResult<_>>()?;
        let mut m = MomentSet::nan();
        m.mean_a = Complex64::new(v[1], v[2]);
        m.mean_b = Complex64::new(v[3], v[4]);
        m.n_a = v[5];
        m.n_b = v[6];
        series.push(v[0], m);
    }
    Ok(series)
}

#[derive(Debug, Serialize)]
pub struct JsonDocument<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a ScenarioConfig,
    pub notes: &'a [String],
    pub data: &'a T,
}

pub fn write_json<W: Write, T: Serialize>(w: W, config: &ScenarioConfig, notes: &[String], data: &T) -> CliResult<()> {
    let doc = JsonDocument { tool: "ptkerr", version: VERSION, config, notes, data };
    serde_json::to_writer_pretty(w, &doc).map_err(|e| CliError::Io(e.into()))
}

/// Writes a series as CSV (plus a `.json` sidecar next to a file path) or as
/// a single JSON document, according to the output block.
pub fn emit_series(config: &ScenarioConfig, run: &SeriesRun, notes: &[String]) -> CliResult<()> {
    use crate::config::OutputFormat;
    let header = header_lines(config, notes);
    match (&config.output.path, config.output.format) {
        (None, OutputFormat::Csv) => write_table(std::io::stdout().lock(), &header, &series_table(&run.series)),
        (None, OutputFormat::Json) => write_json(std::io::stdout().lock(), config, notes, run),
        (Some(p), OutputFormat::Csv) => {
            write_table(create(p)?, &header, &series_table(&run.series))?;
            write_json(create(&p.with_extension("json"))?, config, notes, run)
        }
        (Some(p), OutputFormat::Json) => write_json(create(p)?, config, notes, run),
    }
}

pub fn create(path: &Path) -> CliResult<std::io::BufWriter<std::fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}
