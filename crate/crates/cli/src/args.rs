use std::net::SocketAddr;
use std::path::PathBuf;

use chronoquery_core::{Criterion, Paint, ThresholdSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "chronoquery",
    version,
    about = "Which-and-when queries over collections of time series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one query and emit the organized result
    Query(QueryArgs),
    /// Write a derived series (rank, change, variance) for every case
    Export(ExportArgs),
    /// Run the HTTP service
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Wide CSV: id[,category],t0,t1,...
    #[arg(long)]
    pub data: PathBuf,

    /// Whether the second column holds categories; `auto` treats it as one
    /// when it contains a non-numeric cell
    #[arg(long, value_enum, default_value_t = CategoryColumn::Auto)]
    pub category_column: CategoryColumn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CategoryColumn {
    Auto,
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionKind {
    Value,
    Rank,
    NetChange,
    PctChange,
    Variance,
}

#[derive(Debug, Args)]
pub struct CriterionArgs {
    #[arg(long, value_enum, default_value_t = CriterionKind::Value)]
    pub criterion: CriterionKind,

    /// Lag in timesteps for net-change and pct-change
    #[arg(long)]
    pub delta: Option<usize>,

    /// Odd window width for variance
    #[arg(long)]
    pub window: Option<usize>,
}

impl CriterionArgs {
    pub fn criterion(&self) -> Result<Criterion, String> {
        let need = |v: Option<usize>, flag: &str| {
            v.ok_or_else(|| format!("--criterion {} requires --{flag}", self.kind_name()))
        };
        Ok(match self.criterion {
            CriterionKind::Value => Criterion::Value,
            CriterionKind::Rank => Criterion::Rank,
            CriterionKind::NetChange => Criterion::NetChange {
                delta: need(self.delta, "delta")?,
            },
            CriterionKind::PctChange => Criterion::PctChange {
                delta: need(self.delta, "delta")?,
            },
            CriterionKind::Variance => Criterion::Variance {
                window: need(self.window, "window")?,
            },
        })
    }

    fn kind_name(&self) -> String {
        self.criterion
            .to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub criterion: CriterionArgs,

    /// Split into Low (≤ threshold) and High
    #[arg(long, conflicts_with = "three_range")]
    pub two_range: bool,

    /// Split into Low (≤ lower), Mid and High (≥ upper)
    #[arg(long)]
    pub three_range: bool,

    /// Threshold for --two-range: a number, `avg±N` or `ego:ID±N`
    #[arg(long, value_parser = parse_threshold, allow_hyphen_values = true)]
    pub threshold: Option<ThresholdSpec>,

    /// Lower threshold for --three-range
    #[arg(long, value_parser = parse_threshold, allow_hyphen_values = true)]
    pub lower: Option<ThresholdSpec>,

    /// Upper threshold for --three-range
    #[arg(long, value_parser = parse_threshold, allow_hyphen_values = true)]
    pub upper: Option<ThresholdSpec>,

    /// Paint for a range, e.g. `low=green`, `mid=context`, `high=hidden`
    #[arg(long = "color", value_parser = parse_color)]
    pub colors: Vec<(RangeName, Paint)>,

    /// Color whose coverage orders the cases
    #[arg(long)]
    pub sort: Option<String>,

    /// Restrict the sort key to `START:END` (time labels, inclusive)
    #[arg(long)]
    pub time_window: Option<String>,

    /// Group cases by category
    #[arg(long)]
    pub group: bool,

    /// Drop cases without any colored timestep
    #[arg(long)]
    pub hide_uncolored: bool,

    /// Demote colored segments shorter than this to context
    #[arg(long)]
    pub min_len: Option<usize>,

    /// Demote colored segments longer than this to context
    #[arg(long)]
    pub max_len: Option<usize>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write to this file instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub criterion: CriterionArgs,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Listen address
    #[arg(long, env = "CHRONOQUERY_ADDR", default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,

    /// Override the port of --addr; 0 picks a free one
    #[arg(long)]
    pub port: Option<u16>,

    /// Preload a dataset, registered under its file stem (repeatable)
    #[arg(long)]
    pub data: Vec<PathBuf>,

    #[arg(long, value_enum, default_value_t = CategoryColumn::Auto)]
    pub category_column: CategoryColumn,

    /// Persist uploads here and reload them on start
    #[arg(long, env = "CHRONOQUERY_SNAPSHOT_DIR")]
    pub snapshot_dir: Option<PathBuf>,

    /// Maximum upload size in bytes
    #[arg(long, default_value_t = chronoquery_service::DEFAULT_BODY_LIMIT)]
    pub max_body_bytes: usize,

    /// Serve the web UI's built assets from this directory
    #[arg(long, env = "CHRONOQUERY_UI_DIR")]
    pub ui_dir: Option<PathBuf>,

    /// Print the URL to open in a browser
    #[arg(long)]
    pub open: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeName {
    Low,
    Mid,
    High,
}

fn parse_color(s: &str) -> Result<(RangeName, Paint), String> {
    let (range, paint) = s
        .split_once('=')
        .ok_or_else(|| format!("expected RANGE=PAINT, got {s:?}"))?;
    let range = match range.trim().to_ascii_lowercase().as_str() {
        "low" => RangeName::Low,
        "mid" => RangeName::Mid,
        "high" => RangeName::High,
        other => {
            return Err(format!(
                "unknown range {other:?}, expected low, mid or high"
            ))
        }
    };
    let paint = paint.trim();
    if paint.is_empty() {
        return Err("empty paint".into());
    }
    Ok((range, Paint::from(paint.to_string())))
}

/// `50`, `-3.5`, `avg`, `avg+5`, `avg-2.5`, `ego:IRL`, `ego:IRL-1`.
///
/// An ego offset is the longest trailing `+N`/`-N` that parses as a number,
/// so ids containing hyphens (`ego:Guinea-Bissau+1`) still work.
pub fn parse_threshold(s: &str) -> Result<ThresholdSpec, String> {
    let s = s.trim();
    let finite = |v: f64| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("threshold {s:?} is not finite"))
        }
    };
    if let Some(rest) = s.strip_prefix("avg") {
        let offset = if rest.is_empty() {
            0.0
        } else {
            parse_offset(rest).ok_or_else(|| bad(s))?
        };
        return Ok(ThresholdSpec::AggregateOffset {
            offset: finite(offset)?,
        });
    }
    if let Some(rest) = s.strip_prefix("ego:") {
        let split = rest
            .char_indices()
            .filter(|(i, c)| *i > 0 && matches!(c, '+' | '-'))
            .find_map(|(i, _)| parse_offset(&rest[i..]).map(|o| (i, o)));
        let (ego_id, offset) = match split {
            Some((i, o)) => (&rest[..i], o),
            None => (rest, 0.0),
        };
        if ego_id.is_empty() {
            return Err(bad(s));
        }
        return Ok(ThresholdSpec::EgoOffset {
            ego_id: ego_id.to_string(),
            offset: finite(offset)?,
        });
    }
    let value: f64 = s.parse().map_err(|_| bad(s))?;
    Ok(ThresholdSpec::constant(finite(value)?))
}

fn parse_offset(s: &str) -> Option<f64> {
    let digits = s.strip_prefix(['+', '-'])?;
    if digits.is_empty() || !digits.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        return None;
    }
    s.parse().ok()
}

fn bad(s: &str) -> String {
    format!("invalid threshold {s:?}: expected a number, avg±N or ego:ID±N")
}
