//! `chronoquery`: batch queries, derived-series export and the HTTP service.
//!
//! Exit codes: 0 success, 1 invalid arguments, data or query, 2 I/O or bind
//! failure.

mod args;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use chronoquery_core::{
    derive, parse_wide_csv, to_wide_csv, ColorAssignment, DataCase, Dataset, IngestError,
    IngestOptions, QueryMode, SegmentFilter, SortSpec, TimeWindow,
};
use chronoquery_service::api::{SeriesDto, SeriesResponse};
use chronoquery_service::{router_with_limit, run_query, with_static_dir, QueryRequest, Registry};
use clap::Parser;

use args::{CategoryColumn, Cli, Command, ExportArgs, Format, QueryArgs, RangeName, ServeArgs};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| {
                tracing_subscriber::EnvFilter::new("warn,chronoquery_service=info")
            }),
        )
        .init();

    let result = match cli.command {
        Command::Query(args) => query(&args),
        Command::Export(args) => export(&args),
        Command::Serve(args) => serve(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 when any cause is an I/O error, 1 otherwise.
fn exit_code(e: &anyhow::Error) -> u8 {
    if e.chain().any(|c| c.is::<std::io::Error>()) {
        2
    } else {
        1
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(path: &Path, category_column: CategoryColumn) -> Result<Dataset> {
    let bytes = read_file(path)?;
    let id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .unwrap_or("dataset");
    parse_dataset(&bytes, id, category_column)
        .with_context(|| format!("cannot load {}", path.display()))
}

fn parse_dataset(
    bytes: &[u8],
    id: &str,
    category_column: CategoryColumn,
) -> Result<Dataset, IngestError> {
    let options = |cats| IngestOptions::default().with_categories(cats).with_id(id);
    let parsed = match category_column {
        CategoryColumn::Yes => parse_wide_csv(bytes, &options(true)),
        CategoryColumn::No => parse_wide_csv(bytes, &options(false)),
        CategoryColumn::Auto => match parse_wide_csv(bytes, &options(false)) {
            // a text cell in the first time column means it is really a category column
            Err(IngestError::NonNumericCell { column, .. })
                if first_header_label(bytes).as_deref() == Some(column.as_str()) =>
            {
                parse_wide_csv(bytes, &options(true))
            }
            other => other,
        },
    };
    parsed.map(|(d, _)| d)
}

fn first_header_label(bytes: &[u8]) -> Option<String> {
    let bytes = bytes.strip_prefix("\u{feff}".as_bytes()).unwrap_or(bytes);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let header = reader.records().next()?.ok()?;
    header.get(1).map(|f| f.trim().to_string())
}

fn emit(bytes: &[u8], output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            let written = out
                .write_all(bytes)
                .and_then(|()| {
                    if bytes.ends_with(b"\n") {
                        Ok(())
                    } else {
                        out.write_all(b"\n")
                    }
                })
                .and_then(|()| out.flush());
            match written {
                // reader went away, e.g. piped into `head`
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => Ok(other?),
            }
        }
    }
}

fn build_request(args: &QueryArgs, dataset: &Dataset) -> Result<QueryRequest> {
    let criterion = args.criterion.criterion().map_err(|e| anyhow!(e))?;
    let three =
        args.three_range || (!args.two_range && args.threshold.is_none() && args.lower.is_some());
    let mode = if three {
        if args.threshold.is_some() {
            bail!("--threshold applies to --two-range; use --lower and --upper");
        }
        QueryMode::ThreeRange {
            lower: args
                .lower
                .clone()
                .ok_or_else(|| anyhow!("--three-range requires --lower"))?,
            upper: args
                .upper
                .clone()
                .ok_or_else(|| anyhow!("--three-range requires --upper"))?,
        }
    } else {
        if args.lower.is_some() || args.upper.is_some() {
            bail!("--lower and --upper apply to --three-range");
        }
        QueryMode::TwoRange {
            threshold: args
                .threshold
                .clone()
                .ok_or_else(|| anyhow!("--two-range requires --threshold"))?,
        }
    };

    let mut colors = ColorAssignment::default();
    for (range, paint) in &args.colors {
        let slot = match range {
            RangeName::Low => &mut colors.low,
            RangeName::Mid => &mut colors.mid,
            RangeName::High => &mut colors.high,
        };
        *slot = paint.clone();
    }

    let window = args
        .time_window
        .as_deref()
        .map(|w| {
            let (a, b) = w
                .split_once(':')
                .ok_or_else(|| anyhow!("--time-window expects START:END, got {w:?}"))?;
            let axis = dataset.axis();
            Ok::<_, anyhow::Error>(TimeWindow::new(
                axis.time_index_of(a.trim())?,
                axis.time_index_of(b.trim())?,
            ))
        })
        .transpose()?;

    Ok(QueryRequest {
        criterion,
        mode,
        colors,
        filter: SegmentFilter {
            min_len: args.min_len,
            max_len: args.max_len,
        },
        sort: SortSpec {
            color: args.sort.clone(),
            window,
            group_mode: args.group,
            hide_uncolored: args.hide_uncolored,
        },
    })
}

fn query(args: &QueryArgs) -> Result<()> {
    let dataset = load(&args.data.data, args.data.category_column)?;
    let request = build_request(args, &dataset)?;
    let response = run_query(&dataset, &request)?;
    let bytes = match args.format {
        Format::Json => serde_json::to_vec(&response)?,
        Format::Csv => {
            let labels = dataset.axis().labels();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["case_id", "start_label", "end_label", "color"])?;
            for case in &response.cases {
                for s in &case.segments {
                    let color = s.color.to_string();
                    w.write_record([case.id.as_str(), &labels[s.start], &labels[s.end], &color])?;
                }
            }
            w.into_inner().map_err(|e| anyhow!("{e}"))?
        }
    };
    emit(&bytes, args.output.as_deref())
}

fn export(args: &ExportArgs) -> Result<()> {
    let dataset = load(&args.data.data, args.data.category_column)?;
    let criterion = args.criterion.criterion().map_err(|e| anyhow!(e))?;
    let derived = derive(&dataset, criterion)?;
    let bytes = match args.format {
        Format::Json => serde_json::to_vec(&SeriesResponse {
            dataset_id: dataset.id().to_string(),
            series: dataset
                .cases()
                .iter()
                .zip(&derived.values)
                .map(|(c, values)| SeriesDto {
                    id: c.id.clone(),
                    values: values.clone(),
                })
                .collect(),
        })?,
        Format::Csv => {
            let cases = dataset
                .cases()
                .iter()
                .zip(derived.values)
                .map(|(c, values)| DataCase {
                    values,
                    ..c.clone()
                })
                .collect();
            let out = Dataset::new(dataset.id(), dataset.axis().clone(), cases)?;
            let has_categories = dataset.cases().iter().any(|c| c.category.is_some());
            to_wide_csv(&out, has_categories).into_bytes()
        }
    };
    emit(&bytes, args.output.as_deref())
}

fn serve(args: ServeArgs) -> Result<()> {
    let registry = match &args.snapshot_dir {
        Some(dir) => Registry::with_snapshot_dir(dir)
            .with_context(|| format!("cannot open snapshot directory {}", dir.display()))?,
        None => Registry::new(),
    };
    for path in &args.data {
        let dataset = load(path, args.category_column)?;
        // a snapshot of the same file from an earlier run is already loaded
        if registry.get(dataset.id()).is_some_and(|d| *d == dataset) {
            continue;
        }
        let name = dataset.id().to_string();
        let id = registry.insert_named(dataset, Some(&name))?;
        tracing::info!(%id, path = %path.display(), "dataset preloaded");
    }
    let mut app = router_with_limit(Arc::new(registry), args.max_body_bytes);
    if let Some(dir) = &args.ui_dir {
        if !dir.is_dir() {
            let err = std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory");
            return Err(
                anyhow::Error::new(err).context(format!("cannot serve UI from {}", dir.display()))
            );
        }
        app = with_static_dir(app, dir);
    }

    let mut addr = args.addr;
    if let Some(port) = args.port {
        addr.set_port(port);
    }
    let runtime = tokio::runtime::Runtime::new().context("cannot start runtime")?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("cannot bind {addr}"))?;
        let bound = listener.local_addr()?;
        println!("listening on http://{bound}");
        if args.open {
            println!("open http://{bound}/ in a browser");
        }
        std::io::stdout().flush()?;
        chronoquery_service::serve(listener, app, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_detects_category_column() {
        let with = b"id,region,2000,2001\nA,North,1,2\nB,South,3,\n";
        let d = parse_dataset(with, "x", CategoryColumn::Auto).unwrap();
        assert_eq!(d.case("A").unwrap().category.as_deref(), Some("North"));
        assert_eq!(d.len_t(), 2);

        let without = b"id,2000,2001\nA,1,2\n";
        let d = parse_dataset(without, "x", CategoryColumn::Auto).unwrap();
        assert_eq!(d.case("A").unwrap().category, None);
        assert_eq!(d.len_t(), 2);
    }

    #[test]
    fn auto_still_reports_bad_cells_elsewhere() {
        let bad = b"id,2000,2001\nA,1,x\n";
        let err = parse_dataset(bad, "x", CategoryColumn::Auto).unwrap_err();
        assert_eq!(err.code(), "non-numeric-cell");
    }

    #[test]
    fn io_errors_map_to_exit_2() {
        let e = read_file(Path::new("/nonexistent/file.csv")).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        assert_eq!(exit_code(&anyhow!("bad threshold")), 1);
    }
}
