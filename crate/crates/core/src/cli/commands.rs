use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::output::emit;
use super::{
    Cli, CliError, Command, DimensionArgs, ExitKind, Format, GasketArgs, IndicesArgs, IrboxArgs,
    LayerName, MethodArg, ModeArg, PanelArgs, ProbArgs, SimulateArgs,
};
use crate::dimension::{
    box_count_triangles, default_window, fit_dimension_with, fit_filled_square, fit_samples,
    BoxCountFit, CellConvention, DimensionError, SIERPINSKI_DIMENSION,
};
use crate::economy::{optimize_firm, welfare, EconomyError, EconomyParams};
use crate::gasket::{
    closed_form_area_removed, closed_form_perimeter, cumulative_perimeter_series, ratio_string,
    read_triangles, write_triangles, GasketError, GasketState,
};
use crate::indices::{compute_indices, summarize, IndexError};
use crate::ingest::{read_records, IngestError};
use crate::irbox::{
    build_irbox, classify_point, insolvency_probability, GeometryError, IsoclineKind, Point,
    ProbabilityMethod,
};
use crate::model::{build_panel, Panel, PanelError, PanelMode};
use crate::render::{render_gasket, render_irbox, Layer, RenderError, RenderSpec};

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        let kind = if e.is_schema() {
            ExitKind::Input
        } else {
            ExitKind::Validation
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<PanelError> for CliError {
    fn from(e: PanelError) -> Self {
        CliError::new(ExitKind::Validation, e.to_string())
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        CliError::new(ExitKind::Validation, e.to_string())
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        let kind = match e {
            GeometryError::OutOfRange { .. } => ExitKind::Input,
            _ => ExitKind::Validation,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<GasketError> for CliError {
    fn from(e: GasketError) -> Self {
        CliError::new(ExitKind::Limit, e.to_string())
    }
}

impl From<DimensionError> for CliError {
    fn from(e: DimensionError) -> Self {
        let kind = match e {
            DimensionError::ScaleTooLarge(_) => ExitKind::Limit,
            _ => ExitKind::Input,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<EconomyError> for CliError {
    fn from(e: EconomyError) -> Self {
        CliError::new(ExitKind::Validation, e.to_string())
    }
}

impl From<RenderError> for CliError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::Geometry(g) => g.into(),
            RenderError::Gasket(g) => g.into(),
            other => CliError::new(ExitKind::Input, other.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::new(ExitKind::Input, format!("{}: {e}", path.display()))
}

fn write_to(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    emit(path, bytes).map_err(|e| match path {
        Some(p) => io_error(p, e),
        None => CliError::new(ExitKind::Input, format!("stdout: {e}")),
    })
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report serializes");
    out.push(b'\n');
    out
}

/// Runs one parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Indices(args) => cmd_indices(cli, args),
        Command::Irbox(args) => cmd_irbox(cli, args),
        Command::Gasket(args) => cmd_gasket(cli, args),
        Command::Dimension(args) => cmd_dimension(cli, args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Prob(args) => cmd_prob(cli, args),
    }
}

fn load_panel(path: &Path, mode: ModeArg, distress: bool, tol: f64) -> Result<Panel, CliError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let records = read_records(BufReader::new(file), tol, distress)?;
    let mode = match mode {
        ModeArg::TimeSeries => PanelMode::TimeSeries,
        ModeArg::CrossSection => PanelMode::CrossSection,
        ModeArg::Auto => PanelMode::infer(&records).ok_or_else(|| {
            CliError::new(
                ExitKind::Validation,
                "records mix several firms and several periods; pass --mode",
            )
        })?,
    };
    Ok(build_panel(records, mode, distress, tol)?)
}

fn panel_from(cli: &Cli, args: &PanelArgs) -> Result<Panel, CliError> {
    load_panel(&args.csv, args.mode, args.distress, cli.tolerance)
}

const INDEX_COLUMNS: [&str; 15] = [
    "firm_id",
    "period",
    "debt",
    "equity",
    "assets",
    "assets_synthesized",
    "region",
    "tr",
    "nr",
    "aco",
    "firi",
    "firi_h",
    "firi_v",
    "gear",
    "pi",
];

fn cmd_indices(cli: &Cli, args: &IndicesArgs) -> Result<(), CliError> {
    let panel = panel_from(cli, &args.panel)?;
    let mut rows = Vec::with_capacity(panel.len());
    for rec in panel.records() {
        rows.push((rec, classify_point(rec), compute_indices(rec)?));
    }
    let summary = summarize(rows.iter().map(|r| &r.2));

    let bytes = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::new(ExitKind::Input, e.to_string());
            w.write_record(INDEX_COLUMNS).map_err(io)?;
            for (rec, region, s) in &rows {
                w.write_record([
                    rec.firm_id().to_string(),
                    rec.period().to_string(),
                    rec.debt_decimal().to_string(),
                    rec.equity_decimal().to_string(),
                    rec.assets_decimal().to_string(),
                    rec.assets_synthesized().to_string(),
                    region.name().to_string(),
                    s.tr.to_string(),
                    s.nr.to_string(),
                    s.aco.to_string(),
                    s.firi.to_string(),
                    s.firi_h.to_string(),
                    s.firi_v.to_string(),
                    s.gear.to_string(),
                    s.pi.to_string(),
                ])
                .map_err(io)?;
            }
            if let Some(s) = summary {
                eprintln!(
                    "firi over {} records: min {} max {} mean {}",
                    s.count, s.min, s.max, s.mean
                );
            }
            w.into_inner()
                .map_err(|e| CliError::new(ExitKind::Input, e.to_string()))?
        }
        Format::Json => {
            let records: Vec<Value> = rows
                .iter()
                .map(|(rec, region, s)| {
                    json!({
                        "firm_id": rec.firm_id(),
                        "period": rec.period(),
                        "debt": rec.debt_decimal().to_string(),
                        "equity": rec.equity_decimal().to_string(),
                        "assets": rec.assets_decimal().to_string(),
                        "assets_synthesized": rec.assets_synthesized(),
                        "region": region,
                        "indices": s,
                    })
                })
                .collect();
            json_bytes(&json!({
                "mode": panel.mode(),
                "distress_mode": panel.distress_mode(),
                "records": records,
                "summary": summary,
            }))
        }
    };
    write_to(args.out.as_deref(), &bytes)
}

fn levels_or(given: &[f64], default: impl FnOnce() -> Vec<f64>) -> Vec<f64> {
    if given.is_empty() {
        default()
    } else {
        given.to_vec()
    }
}

fn cmd_irbox(cli: &Cli, args: &IrboxArgs) -> Result<(), CliError> {
    let panel = panel_from(cli, &args.panel)?;
    let bx = build_irbox(&panel);
    let side = bx.side;
    let mut layers = Vec::new();
    for name in &args.layers {
        layers.push(match name {
            LayerName::Points => Layer::Points,
            LayerName::Unity => Layer::UnityLine,
            LayerName::Gasket => Layer::Gasket {
                depth: args.gasket_depth,
            },
            LayerName::Tr => Layer::Isoclines {
                kind: IsoclineKind::TotalRisk,
                levels: levels_or(&args.tr_levels, || vec![0.5 * side, side, 1.5 * side]),
            },
            LayerName::Nr => Layer::Isoclines {
                kind: IsoclineKind::NetRisk,
                levels: levels_or(&args.nr_levels, || vec![0.25 * side, 0.5 * side]),
            },
            LayerName::Aco => Layer::Isoclines {
                kind: IsoclineKind::AssetCapitalOverlap,
                levels: levels_or(&args.aco_levels, || vec![0.5 * side, side]),
            },
            LayerName::Firi => Layer::Isoclines {
                kind: IsoclineKind::FiriRay,
                levels: levels_or(&args.firi_levels, || vec![0.25, 0.5, 0.75]),
            },
        });
    }
    let spec = RenderSpec {
        width: args.width,
        height: args.height,
        layers,
    };
    let points: Vec<_> = panel
        .records()
        .iter()
        .map(|r| (Point::of(r), classify_point(r)))
        .collect();
    let svg = render_irbox(&bx, &points, &spec, cli.depth_cap)?;
    write_to(args.out.as_deref(), svg.as_bytes())
}

fn cmd_gasket(cli: &Cli, args: &GasketArgs) -> Result<(), CliError> {
    let state = GasketState::at_depth(args.depth, cli.depth_cap)?;
    let k = state.depth();
    let area_removed = state.area_removed().clone();
    let perimeter = state.perimeter_total();
    let stats = json!({
        "depth": k,
        "remaining_count": state.triangles().len(),
        "removed_count_total": state.removed_count_total(),
        "area_removed": ratio_string(&area_removed),
        "area_remaining": ratio_string(&state.remaining_area()),
        "area_matches_closed_form": area_removed == closed_form_area_removed(k),
        "perimeter_coefficient": ratio_string(&perimeter.coefficient),
        "perimeter": perimeter.to_f64(),
        "perimeter_matches_closed_form": perimeter == closed_form_perimeter(k),
        "cumulative_series_coefficient": ratio_string(&cumulative_perimeter_series(k)),
    });

    if let Some(path) = &args.svg {
        let svg = render_gasket(&state, args.width, args.height)?;
        write_to(Some(path), svg.as_bytes())?;
    }
    if let Some(path) = &args.triangles {
        let mut buf = Vec::with_capacity(20 + 32 * state.triangles().len());
        write_triangles(&mut buf, k, state.triangles()).map_err(|e| io_error(path, e))?;
        write_to(Some(path), &buf)?;
    }
    write_to(args.stats.as_deref(), &json_bytes(&stats))
}

fn fit_json(fit: &BoxCountFit, source: &str, depth: Option<u32>) -> Value {
    let samples: Vec<Value> = fit
        .samples
        .iter()
        .map(|&(m, n)| json!({ "m": m, "n": n }))
        .collect();
    json!({
        "source": source,
        "depth": depth,
        "convention": fit.convention,
        "window": [fit.scale_window.0, fit.scale_window.1],
        "dimension": fit.dimension,
        "fit_quality": fit.fit_quality,
        "reference_dimension": if source == "square" { 2.0 } else { SIERPINSKI_DIMENSION },
        "samples": samples,
    })
}

fn cmd_dimension(cli: &Cli, args: &DimensionArgs) -> Result<(), CliError> {
    let conv = if args.closed_cells {
        CellConvention::Closed
    } else {
        CellConvention::Interior
    };
    let (fit, source, depth) = if args.square {
        let window = args.window.map_or((1, 4), |w| (w.0, w.1));
        (fit_filled_square(window)?, "square", None)
    } else if let Some(path) = &args.triangles {
        let file = File::open(path).map_err(|e| io_error(path, e))?;
        let (depth, triangles) =
            read_triangles(BufReader::new(file)).map_err(|e| io_error(path, e))?;
        let window = match args.window {
            Some(w) => (w.0, w.1),
            None => default_window(depth)?,
        };
        if window.1 > depth {
            return Err(DimensionError::ScaleFinerThanDepth { m: window.1, depth }.into());
        }
        if window.1 < window.0 || window.1 - window.0 < 2 {
            return Err(DimensionError::InsufficientScales {
                m_min: window.0,
                m_max: window.1,
            }
            .into());
        }
        let samples = (window.0..=window.1)
            .map(|m| box_count_triangles(&triangles, m, conv).map(|n| (m, n)))
            .collect::<Result<Vec<_>, _>>()?;
        (fit_samples(samples, conv)?, "triangles", Some(depth))
    } else {
        let window = match args.window {
            Some(w) => (w.0, w.1),
            None => default_window(args.depth)?,
        };
        // reject a bad window before paying for the gasket
        if window.1 < window.0 || window.1 - window.0 < 2 {
            return Err(DimensionError::InsufficientScales {
                m_min: window.0,
                m_max: window.1,
            }
            .into());
        }
        let state = GasketState::at_depth(args.depth, cli.depth_cap)?;
        (
            fit_dimension_with(&state, window, conv)?,
            "gasket",
            Some(args.depth),
        )
    };

    let mut table = String::from("m,n\n");
    for (m, n) in &fit.samples {
        table.push_str(&format!("{m},{n}\n"));
    }
    if let Some(path) = &args.table {
        write_to(Some(path), table.as_bytes())?;
    }
    let report = json_bytes(&fit_json(&fit, source, depth));
    match (cli.format, &args.out) {
        (Some(Format::Csv), None) => write_to(None, table.as_bytes()),
        (_, out) => write_to(out.as_deref(), &report),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Scenario {
    params: EconomyParams,
    firms: Vec<ScenarioFirm>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFirm {
    #[serde(default)]
    id: Option<String>,
    d: f64,
    e: f64,
    x: f64,
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let path = &args.scenario;
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let scenario: Scenario = serde_json::from_reader(BufReader::new(file)).map_err(|e| {
        CliError::new(
            ExitKind::Input,
            format!("{}: invalid scenario: {e}", path.display()),
        )
    })?;
    let mut firms = Vec::with_capacity(scenario.firms.len());
    let mut choices = Vec::with_capacity(scenario.firms.len());
    for (i, f) in scenario.firms.iter().enumerate() {
        let id = f.id.clone().unwrap_or_else(|| format!("firm-{i}"));
        let decision = optimize_firm(f.d, f.e, f.x, &scenario.params)
            .map_err(|e| CliError::new(ExitKind::Validation, format!("{id}: {e}")))?;
        choices.push(decision.choice);
        firms.push(json!({ "id": id, "decision": decision }));
    }
    let report = welfare(&choices, &scenario.params)?;
    let out = json!({
        "params": scenario.params,
        "firms": firms,
        "welfare": report,
    });
    write_to(args.out.as_deref(), &json_bytes(&out))
}

fn cmd_prob(cli: &Cli, args: &ProbArgs) -> Result<(), CliError> {
    let panel = load_panel(&args.csv, args.mode, true, cli.tolerance)?;
    let method = match args.method {
        MethodArg::Empirical => ProbabilityMethod::Empirical,
        MethodArg::Geometric => ProbabilityMethod::UniformGeometric,
    };
    let estimate = insolvency_probability(&panel, method)?;
    let measure = match method {
        ProbabilityMethod::Empirical => "observed share of d > 0 records with e <= 0",
        ProbabilityMethod::UniformGeometric => "uniform over [e_min, side] x (0, side]",
    };
    let out = json!({
        "estimate": estimate,
        "measure": measure,
        "records": panel.len(),
    });
    write_to(args.out.as_deref(), &json_bytes(&out))
}
