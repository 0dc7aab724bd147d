//! Command-line front end.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::bounds::BoundReport;
use crate::certify::DEFAULT_DENSITY;
use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::mesh::uniform_mesh;
use crate::pipeline::{compute_bounds, default_degree, BoundsConfig, Certify};

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "CLBOUND_THREADS";

/// Angles of the published tables, as `pi * p / q`.
pub const TABLE_THETAS: [(u32, u32); 7] = [(1, 6), (1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (5, 6)];

#[derive(Debug, Parser)]
#[command(name = "clbound", version, about = "Two-sided bounds for the Lagrange interpolation constant C^L(K)")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bounds for a single triangle K_{alpha,theta,h}.
    Bounds(BoundsArgs),
    /// lambda_hB and its two lower bounds for the tabulated angles.
    Table1(TableArgs),
    /// Lower and upper bounds of C^L for the tabulated angles.
    Table2(TableArgs),
    /// Upper bounds over a grid of apex positions p3 = (x, y) with p1 = (0,0), p2 = (1,0).
    Contour(ContourArgs),
    /// Bounds for one shape over several mesh sizes.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Print full double precision instead of 5 significant figures.
    #[arg(long)]
    pub full_precision: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Degree of the fitted polynomial (default depends on theta).
    #[arg(long, short, value_parser = clap::value_parser!(u32).range(1..))]
    pub degree: Option<u32>,
    /// Skip the polynomial lower bound.
    #[arg(long, conflicts_with = "degree")]
    pub no_lower: bool,
    /// Sample points per side for the sup-norm of the fitted polynomial.
    #[arg(long, default_value_t = DEFAULT_DENSITY as u32, value_parser = clap::value_parser!(u32).range(1..))]
    pub density: u32,
}

impl FitArgs {
    fn certify(&self) -> Certify {
        match (self.no_lower, self.degree) {
            (true, _) => Certify::Off,
            (false, Some(d)) => Certify::Degree(d as usize),
            (false, None) => Certify::Auto,
        }
    }
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value = "1", value_parser = parse_positive)]
    pub alpha: f64,
    /// Angle at p1: radians or a multiple of pi such as "pi/6", "2pi/3", "0.5pi".
    #[arg(long, value_parser = parse_theta)]
    pub theta: f64,
    #[arg(long, default_value = "1", value_parser = parse_positive)]
    pub h: f64,
    /// Subdivisions per side.
    #[arg(long = "N", short = 'n', default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Include the minimizer coefficients in the report.
    #[arg(long)]
    pub with_minimizer: bool,
    /// Write vertices.csv and elements.csv of the mesh into this directory.
    #[arg(long)]
    pub dump_mesh: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Mesh sizes.
    #[arg(long = "N", short = 'n', value_delimiter = ',', default_values_t = [32u32, 64], value_parser = clap::value_parser!(u32).range(1..))]
    pub n: Vec<u32>,
    #[arg(long, default_value_t = DEFAULT_DENSITY as u32, value_parser = clap::value_parser!(u32).range(1..))]
    pub density: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ContourArgs {
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 1.5, value_parser = parse_positive)]
    pub y_max: f64,
    /// Grid points in x (inclusive of both ends).
    #[arg(long, default_value_t = 21, value_parser = clap::value_parser!(u32).range(2..))]
    pub nx: u32,
    /// Grid points in y, at y_max * k / ny for k = 1..ny.
    #[arg(long, default_value_t = 15, value_parser = clap::value_parser!(u32).range(1..))]
    pub ny: u32,
    #[arg(long = "N", short = 'n', default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "1", value_parser = parse_positive)]
    pub alpha: f64,
    #[arg(long, value_parser = parse_theta)]
    pub theta: f64,
    #[arg(long, default_value = "1", value_parser = parse_positive)]
    pub h: f64,
    #[arg(long = "N", short = 'n', value_delimiter = ',', default_values_t = [8u32, 16, 32, 64], value_parser = clap::value_parser!(u32).range(1..))]
    pub n: Vec<u32>,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Parses radians or a multiple of pi: "pi", "pi/6", "2pi/3", "2*pi/3", "0.25pi", "1.0472".
pub fn parse_theta(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "").replace('π', "pi");
    let value = match t.find("pi") {
        None => t.parse::<f64>().map_err(|_| format!("cannot parse angle '{s}'"))?,
        Some(pos) => {
            let coef = t[..pos].trim_end_matches('*');
            let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| format!("bad coefficient in '{s}'"))? };
            let rest = &t[pos + 2..];
            let div = match rest.strip_prefix('/') {
                None if rest.is_empty() => 1.0,
                None => return Err(format!("cannot parse angle '{s}'")),
                Some(d) => d.parse::<f64>().map_err(|_| format!("bad denominator in '{s}'"))?,
            };
            coef * PI / div
        }
    };
    if !(value > 0.0 && value < PI) {
        return Err(format!("theta must lie in (0, pi), got {value}"));
    }
    Ok(value)
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

/// `x` rounded to `digits` significant figures, printed without exponent.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding may carry into a new digit (9.99995 -> 10.0000).
    let rounded: f64 = s.parse().unwrap_or(x);
    if rounded != 0.0 && rounded.abs().log10().floor() as i64 > mag && decimals > 0 {
        return format!("{x:.prec$}", prec = decimals - 1);
    }
    s
}

fn format_num(x: f64, full: bool) -> String {
    if full {
        format!("{x:?}")
    } else {
        format_sig(x, 5)
    }
}

fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            format_sig(x, 5).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn to_json<T: Serialize>(value: &T, full: bool) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Internal(e.to_string()))?;
    if !full {
        v = round_json(v);
    }
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// One CSV cell.
enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Empty,
}

fn to_csv(header: &[&str], rows: &[Vec<Cell>], full: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Internal(e.to_string()))?;
    for row in rows {
        let rec = row.iter().map(|c| match c {
            Cell::Num(x) => format_num(*x, full),
            Cell::Int(i) => i.to_string(),
            Cell::Text(t) => t.clone(),
            Cell::Empty => String::new(),
        });
        w.write_record(rec).map_err(|e| Error::Internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

fn opt(x: Option<f64>) -> Cell {
    x.map_or(Cell::Empty, Cell::Num)
}

fn theta_label(p: u32, q: u32) -> String {
    match p {
        1 => format!("pi/{q}"),
        _ => format!("{p}pi/{q}"),
    }
}

const BOUNDS_HEADER: [&str; 12] = [
    "alpha", "theta", "h", "N", "lambda_hB", "thm31", "cor31", "c_fm", "degree", "cl_lower", "cl_upper", "warnings",
];

fn bounds_row(r: &BoundReport) -> Vec<Cell> {
    vec![
        Cell::Num(r.alpha),
        Cell::Num(r.theta),
        Cell::Num(r.h),
        Cell::Int(r.n),
        Cell::Num(r.lambda_hb),
        Cell::Num(r.lambda_lb_thm31),
        Cell::Num(r.lambda_lb_cor31),
        Cell::Num(r.c_fm_used),
        r.fit_degree.map_or(Cell::Empty, Cell::Int),
        opt(r.cl_lower),
        Cell::Num(r.cl_upper),
        Cell::Text(r.warnings.join("; ")),
    ]
}

pub fn cmd_bounds(args: &BoundsArgs) -> Result<String> {
    let shape = Shape::new(args.alpha, args.theta, args.h)?;
    if let Some(dir) = &args.dump_mesh {
        uniform_mesh(&shape.triangle(), args.n as usize)?.write_csv(dir)?;
    }
    let cfg = BoundsConfig {
        shape,
        n: args.n as usize,
        certify: args.fit.certify(),
        density: args.fit.density as usize,
        keep_minimizer: args.with_minimizer,
    };
    let report = compute_bounds(&cfg)?;
    match args.out.format {
        Format::Json => to_json(&report, args.out.full_precision),
        Format::Csv => to_csv(&BOUNDS_HEADER, &[bounds_row(&report)], args.out.full_precision),
    }
}

/// Reports for every tabulated angle and mesh size, in table order.
pub fn table_reports(ns: &[u32], certify: bool, density: usize) -> Result<Vec<(String, BoundReport)>> {
    let cases: Vec<(u32, u32, u32)> =
        TABLE_THETAS.iter().flat_map(|&(p, q)| ns.iter().map(move |&n| (p, q, n))).collect();
    cases
        .par_iter()
        .map(|&(p, q, n)| {
            let theta = PI * p as f64 / q as f64;
            let mut cfg = BoundsConfig::new(Shape::new(1.0, theta, 1.0)?, n as usize);
            cfg.density = density;
            cfg.certify = if certify { Certify::Degree(default_degree(theta)) } else { Certify::Off };
            Ok((theta_label(p, q), compute_bounds(&cfg)?))
        })
        .collect()
}

#[derive(Serialize)]
struct Table1Row<'a> {
    theta: &'a str,
    #[serde(rename = "N")]
    n: usize,
    lambda_hb: f64,
    thm31: f64,
    cor31: f64,
}

pub fn cmd_table1(args: &TableArgs) -> Result<String> {
    let reports = table_reports(&args.n, false, args.density as usize)?;
    let full = args.out.full_precision;
    match args.out.format {
        Format::Csv => {
            let rows: Vec<Vec<Cell>> = reports
                .iter()
                .map(|(t, r)| {
                    vec![
                        Cell::Text(t.clone()),
                        Cell::Int(r.n),
                        Cell::Num(r.lambda_hb),
                        Cell::Num(r.lambda_lb_thm31),
                        Cell::Num(r.lambda_lb_cor31),
                    ]
                })
                .collect();
            to_csv(&["theta", "N", "lambda_hB", "thm31", "cor31"], &rows, full)
        }
        Format::Json => {
            let rows: Vec<Table1Row> = reports
                .iter()
                .map(|(t, r)| Table1Row {
                    theta: t,
                    n: r.n,
                    lambda_hb: r.lambda_hb,
                    thm31: r.lambda_lb_thm31,
                    cor31: r.lambda_lb_cor31,
                })
                .collect();
            to_json(&rows, full)
        }
    }
}

#[derive(Serialize)]
struct Table2Row<'a> {
    theta: &'a str,
    #[serde(rename = "N")]
    n: usize,
    degree: Option<usize>,
    lambda_hb: f64,
    cl_lower: Option<f64>,
    cl_upper: f64,
}

pub fn cmd_table2(args: &TableArgs) -> Result<String> {
    let reports = table_reports(&args.n, true, args.density as usize)?;
    let full = args.out.full_precision;
    match args.out.format {
        Format::Csv => {
            let rows: Vec<Vec<Cell>> = reports
                .iter()
                .map(|(t, r)| {
                    vec![
                        Cell::Text(t.clone()),
                        Cell::Int(r.n),
                        r.fit_degree.map_or(Cell::Empty, Cell::Int),
                        Cell::Num(r.lambda_hb),
                        opt(r.cl_lower),
                        Cell::Num(r.cl_upper),
                    ]
                })
                .collect();
            to_csv(&["theta", "N", "degree", "lambda_hB", "cl_lower", "cl_upper"], &rows, full)
        }
        Format::Json => {
            let rows: Vec<Table2Row> = reports
                .iter()
                .map(|(t, r)| Table2Row {
                    theta: t,
                    n: r.n,
                    degree: r.fit_degree,
                    lambda_hb: r.lambda_hb,
                    cl_lower: r.cl_lower,
                    cl_upper: r.cl_upper,
                })
                .collect();
            to_json(&rows, full)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContourPoint {
    pub x: f64,
    pub y: f64,
    /// `None` where the triangle is too degenerate to compute.
    pub cl_upper: Option<f64>,
    pub status: &'static str,
}

/// Upper bound of `C^L` for the triangle `(0,0), (1,0), (x,y)`.
pub fn contour_value(x: f64, y: f64, n: usize) -> Result<f64> {
    let alpha = x.hypot(y);
    let theta = y.atan2(x);
    let mut cfg = BoundsConfig::new(Shape::new(alpha, theta, 1.0)?, n);
    cfg.certify = Certify::Off;
    Ok(compute_bounds(&cfg)?.cl_upper)
}

pub fn contour_points(args: &ContourArgs) -> Result<Vec<ContourPoint>> {
    if !(args.x_max > args.x_min) {
        return Err(Error::InvalidParameter("x-max must exceed x-min".into()));
    }
    let (nx, ny) = (args.nx as usize, args.ny as usize);
    let grid: Vec<(f64, f64)> = (1..=ny)
        .flat_map(|k| {
            let y = args.y_max * k as f64 / ny as f64;
            (0..nx).map(move |i| (args.x_min + (args.x_max - args.x_min) * i as f64 / (nx - 1) as f64, y))
        })
        .collect();
    Ok(grid
        .par_iter()
        .map(|&(x, y)| match contour_value(x, y, args.n as usize) {
            Ok(v) if v.is_finite() => ContourPoint { x, y, cl_upper: Some(v), status: "ok" },
            _ => ContourPoint { x, y, cl_upper: None, status: "degenerate" },
        })
        .collect())
}

pub fn cmd_contour(args: &ContourArgs) -> Result<String> {
    let points = contour_points(args)?;
    let full = args.out.full_precision;
    match args.out.format {
        Format::Csv => {
            let rows: Vec<Vec<Cell>> = points
                .iter()
                .map(|p| vec![Cell::Num(p.x), Cell::Num(p.y), opt(p.cl_upper), Cell::Text(p.status.into())])
                .collect();
            to_csv(&["x", "y", "cl_upper", "status"], &rows, full)
        }
        Format::Json => to_json(&points, full),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub cl_lower: Option<f64>,
    pub cl_upper: f64,
    pub gap: Option<f64>,
}

pub fn sweep_reports(args: &SweepArgs) -> Result<Vec<BoundReport>> {
    let shape = Shape::new(args.alpha, args.theta, args.h)?;
    args.n
        .par_iter()
        .map(|&n| {
            let mut cfg = BoundsConfig::new(shape, n as usize);
            cfg.certify = args.fit.certify();
            cfg.density = args.fit.density as usize;
            compute_bounds(&cfg)
        })
        .collect()
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String> {
    let rows: Vec<SweepRow> = sweep_reports(args)?
        .into_iter()
        .map(|r| SweepRow { n: r.n, cl_lower: r.cl_lower, cl_upper: r.cl_upper, gap: r.cl_lower.map(|l| r.cl_upper - l) })
        .collect();
    let full = args.out.full_precision;
    match args.out.format {
        Format::Csv => {
            let cells: Vec<Vec<Cell>> = rows
                .iter()
                .map(|r| vec![Cell::Int(r.n), opt(r.cl_lower), Cell::Num(r.cl_upper), opt(r.gap)])
                .collect();
            to_csv(&["N", "cl_lower", "cl_upper", "gap"], &cells, full)
        }
        Format::Json => to_json(&rows, full),
    }
}

impl Command {
    fn output(&self) -> &OutputArgs {
        match self {
            Command::Bounds(a) => &a.out,
            Command::Table1(a) | Command::Table2(a) => &a.out,
            Command::Contour(a) => &a.out,
            Command::Sweep(a) => &a.out,
        }
    }
}

/// Runs the parsed command and writes its output.
pub fn run(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    let text = match &cli.command {
        Command::Bounds(a) => cmd_bounds(a)?,
        Command::Table1(a) => cmd_table1(a)?,
        Command::Table2(a) => cmd_table2(a)?,
        Command::Contour(a) => cmd_contour(a)?,
        Command::Sweep(a) => cmd_sweep(a)?,
    };
    match &cli.command.output().output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
