//! Command-line front end for the RoPE base feasibility toolkit.
//!
//! Data (CSV/JSON) goes to standard output or `--output`; human-readable
//! summaries go to standard error so pipelines stay clean. Exit codes:
//! 0 success / all stable, 1 invalid input, 2 empty feasibility region,
//! 3 audit found unstable or infeasible configs.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ropebound::audit::{self, ReportStyle};
use ropebound::bounds::{self, StabilityParams, DEFAULT_EPSILON};
use ropebound::precision::{self, FloatFormat};
use ropebound::simulate::{self, Curve, CurveFormat};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "ropebound",
    version,
    about = "Bounds, simulations, and audits for RoPE base selection",
    after_help = "A JSON object of flag defaults may be supplied with --config <file>; \
                  command-line flags override it. ROPE_EPSILON_DEFAULT overrides the \
                  built-in epsilon default of 0.95."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate all bounds for one (context, layers, precision) point
    Bounds(BoundsArgs),
    /// Report the admissible base interval for one configuration
    Region(BoundsArgs),
    /// Generate simulation curves as CSV/JSON
    Scan(ScanArgs),
    /// Map precision dead zones for a (base, format) pair
    Erasure(ErasureArgs),
    /// Audit model configuration files against the feasibility region
    Audit(AuditArgs),
    /// Tabulate bounds across a parameter grid
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Target context length in tokens
    #[arg(long)]
    context: u64,
    /// Transformer depth N
    #[arg(long)]
    layers: u32,
    /// Coherence threshold in (0, 1)
    #[arg(long)]
    epsilon: Option<f64>,
    /// Float format for the precision wall
    #[arg(long, default_value = "FP32")]
    precision: String,
    /// Write data here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(subcommand)]
    kind: ScanKind,
}

#[derive(Subcommand, Debug)]
enum ScanKind {
    /// Fundamental-channel similarity cos(delta/base) across offsets
    Aliasing {
        #[arg(long)]
        base: f64,
        #[arg(long)]
        max_position: u64,
        /// Sampling stride; auto-coarsened when omitted
        #[arg(long)]
        stride: Option<u64>,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write one file per curve into this directory
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// DC-component curves cos(p/base), one per base
    Dc {
        /// Comma-separated list of bases
        #[arg(long)]
        base: String,
        #[arg(long)]
        max_position: u64,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Depth-compounded curves cos(p/base)^N, one per layer count
    Depth {
        #[arg(long)]
        base: f64,
        /// Comma-separated list of layer counts
        #[arg(long)]
        layers: String,
        #[arg(long)]
        max_position: u64,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Distinguishability indicator across positions
    Erasure {
        #[arg(long)]
        base: f64,
        #[arg(long, default_value = "FP32")]
        precision: String,
        #[arg(long)]
        max_position: u64,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ErasureArgs {
    #[arg(long)]
    base: f64,
    #[arg(long, default_value = "FP32")]
    precision: String,
    /// Highest position to scan
    #[arg(long, default_value_t = 1_000_000)]
    scan_limit: u64,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AuditArgs {
    /// JSON file holding one config object or an array of them
    config_path: PathBuf,
    #[arg(long)]
    epsilon: Option<f64>,
    /// markdown, csv, or json
    #[arg(long, default_value = "markdown")]
    format: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Which parameter varies: context, layers, epsilon, or base
    #[arg(long)]
    variable: String,
    /// Grid as start:stop:step (step > 0) or a comma-separated list
    #[arg(long)]
    range: String,
    #[arg(long)]
    context: Option<u64>,
    #[arg(long)]
    layers: Option<u32>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value = "FP32")]
    precision: String,
    /// Fixed base, reported against the region when given
    #[arg(long)]
    base: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match merge_config_file(std::env::args().collect()) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Pull `--config <file>` out of the raw arguments, read the JSON object of
/// flag defaults it names, and splice those flags in directly after the
/// subcommand tokens. Keys already present on the command line are skipped,
/// so explicit flags win.
fn merge_config_file(mut args: Vec<String>) -> Result<Vec<String>> {
    let mut config_path: Option<String> = None;
    let mut i = 0;
    while i < args.len() {
        if args[i] == "--config" {
            if i + 1 >= args.len() {
                bail!("--config requires a file path");
            }
            config_path = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(rest) = args[i].strip_prefix("--config=") {
            config_path = Some(rest.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = config_path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {path}"))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
    let obj = value
        .as_object()
        .ok_or_else(|| anyhow!("{path}: config file must hold a JSON object of flag values"))?;

    // insertion point: after program name, subcommand, and scan kind
    let mut insert_at = (args.len()).min(2);
    if args.get(1).map(String::as_str) == Some("scan") {
        insert_at = (args.len()).min(3);
    }
    let mut injected = Vec::new();
    for (key, val) in obj {
        let flag = format!("--{key}");
        let given = args
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        injected.push(flag);
        let rendered = match val {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        injected.push(rendered);
    }
    args.splice(insert_at..insert_at, injected);
    Ok(args)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Bounds(args) => run_bounds(args, false),
        Command::Region(args) => run_bounds(args, true),
        Command::Scan(args) => run_scan(args.kind),
        Command::Erasure(args) => run_erasure(args),
        Command::Audit(args) => run_audit(args),
        Command::Sweep(args) => run_sweep(args),
    }
}

fn resolve_epsilon(flag: Option<f64>) -> Result<f64> {
    let eps = match flag {
        Some(e) => e,
        None => match std::env::var("ROPE_EPSILON_DEFAULT") {
            Ok(s) => s
                .parse()
                .with_context(|| format!("ROPE_EPSILON_DEFAULT={s} is not a number"))?,
            Err(_) => DEFAULT_EPSILON,
        },
    };
    if !(eps > 0.0 && eps < 1.0) {
        bail!("epsilon must lie in (0, 1), got {eps}");
    }
    Ok(eps)
}

fn parse_format(name: &str) -> Result<FloatFormat> {
    name.parse::<FloatFormat>().map_err(|e| anyhow!("{e}"))
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let file =
                std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Ok(Box::new(file))
        }
        None => Ok(Box::new(std::io::stdout())),
    }
}

fn run_bounds(args: BoundsArgs, region_view: bool) -> Result<u8> {
    let epsilon = resolve_epsilon(args.epsilon)?;
    let format = parse_format(&args.precision)?;
    let params =
        StabilityParams::new(args.context, epsilon, args.layers).map_err(|e| anyhow!("{e}"))?;
    let region = bounds::feasibility_region(&params, format);
    let mut out = open_output(&args.output)?;
    if region_view {
        writeln!(out, "lower={}", region.lower)?;
        writeln!(out, "upper={}", region.upper)?;
        writeln!(out, "non_empty={}", region.non_empty)?;
    } else {
        writeln!(
            out,
            "aliasing_bound={}",
            bounds::aliasing_lower_bound(args.context)
        )?;
        writeln!(out, "depth_bound={}", bounds::depth_lower_bound(&params))?;
        writeln!(out, "min_base={}", region.lower)?;
        writeln!(out, "max_base={}", region.upper)?;
        writeln!(out, "region_non_empty={}", region.non_empty)?;
    }
    if region.non_empty {
        eprintln!(
            "feasible base interval [{:.1}, {:.1}) for L={} N={} eps={} {}",
            region.lower, region.upper, args.context, args.layers, epsilon, format
        );
        Ok(0)
    } else {
        eprintln!(
            "empty feasibility region for L={} N={} eps={} {}: min {:.1} >= max {:.1}",
            args.context, args.layers, epsilon, format, region.lower, region.upper
        );
        Ok(2)
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| anyhow!("invalid {what} value {s:?}"))
        })
        .collect()
}

fn curve_format(name: &str) -> Result<CurveFormat> {
    match name.to_ascii_lowercase().as_str() {
        "csv" => Ok(CurveFormat::Csv),
        "json" => Ok(CurveFormat::Json),
        other => bail!("unknown curve format {other:?} (expected csv or json)"),
    }
}

/// Emit curves either concatenated to one sink or, with `--output-dir`,
/// one file per curve named `<scan>_<base>_<param>.<ext>`.
fn emit_curves(
    curves: &[Curve],
    format: CurveFormat,
    output: &Option<PathBuf>,
    output_dir: &Option<PathBuf>,
) -> Result<()> {
    if let Some(dir) = output_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for curve in curves {
            let ext = match format {
                CurveFormat::Csv => "csv",
                CurveFormat::Json => "json",
            };
            let path = dir.join(format!("{}.{ext}", curve.label));
            simulate::export_curve_to_path(curve, &path, format)?;
            eprintln!("wrote {}", path.display());
        }
        return Ok(());
    }
    let mut out = open_output(output)?;
    for curve in curves {
        simulate::export_curve(curve, &mut out, format)?;
    }
    Ok(())
}

fn run_scan(kind: ScanKind) -> Result<u8> {
    match kind {
        ScanKind::Aliasing {
            base,
            max_position,
            stride,
            format,
            output,
            output_dir,
        } => {
            let stride = stride.unwrap_or_else(|| simulate::auto_stride(max_position));
            let curve = simulate::aliasing_scan(base, max_position, stride)?;
            if let Some((pos, val)) = simulate::locate_spike(&curve) {
                eprintln!(
                    "aliasing spike at position {pos} (value {val:.6}); analytic 2*pi*base = {:.1}",
                    std::f64::consts::TAU * base
                );
            }
            emit_curves(&[curve], curve_format(&format)?, &output, &output_dir)?;
            Ok(0)
        }
        ScanKind::Dc {
            base,
            max_position,
            format,
            output,
            output_dir,
        } => {
            let bases: Vec<f64> = parse_list(&base, "base")?;
            let curves = simulate::dc_stability_scan(&bases, max_position)?;
            for curve in &curves {
                eprintln!(
                    "dc curve base {} ends at value {:.6} ({} full rotations)",
                    curve.metadata["base"],
                    curve.samples.last().map(|s| s.1).unwrap_or(1.0),
                    curve.metadata["full_rotations"],
                );
            }
            emit_curves(&curves, curve_format(&format)?, &output, &output_dir)?;
            Ok(0)
        }
        ScanKind::Depth {
            base,
            layers,
            max_position,
            format,
            output,
            output_dir,
        } => {
            let counts: Vec<u32> = parse_list(&layers, "layers")?;
            let curves = simulate::depth_decay_scan(base, &counts, max_position)?;
            eprintln!("depth decay curves for base {base}, N in {counts:?}");
            emit_curves(&curves, curve_format(&format)?, &output, &output_dir)?;
            Ok(0)
        }
        ScanKind::Erasure {
            base,
            precision,
            max_position,
            format,
            output,
            output_dir,
        } => {
            let fp = parse_format(&precision)?;
            let curve = simulate::precision_erasure_scan(base, fp, max_position)?;
            match precision::erasure_onset(base, fp, max_position)? {
                Some(onset) => eprintln!("erasure onset at position {onset} ({fp}, base {base})"),
                None => eprintln!("no erasure up to position {max_position} ({fp}, base {base})"),
            }
            emit_curves(&[curve], curve_format(&format)?, &output, &output_dir)?;
            Ok(0)
        }
    }
}

fn run_erasure(args: ErasureArgs) -> Result<u8> {
    let fp = parse_format(&args.precision)?;
    let report = precision::dead_zone_map(args.base, fp, args.scan_limit)?;
    match report.onset {
        Some(onset) => eprintln!(
            "erasure onset at position {onset}; {} dead-zone run(s) up to {}",
            report.runs.len(),
            report.scanned_to
        ),
        None => eprintln!("no dead zones up to position {}", report.scanned_to),
    }
    let mut out = open_output(&args.output)?;
    match args.format.to_ascii_lowercase().as_str() {
        "csv" => write!(out, "{}", report.to_csv())?,
        "json" => writeln!(out, "{}", report.to_json())?,
        other => bail!("unknown format {other:?} (expected csv or json)"),
    }
    Ok(0)
}

fn run_audit(args: AuditArgs) -> Result<u8> {
    let epsilon = resolve_epsilon(args.epsilon)?;
    let style = match args.format.to_ascii_lowercase().as_str() {
        "markdown" | "md" => ReportStyle::Markdown,
        "csv" => ReportStyle::Csv,
        "json" => ReportStyle::Json,
        other => bail!("unknown report format {other:?} (expected markdown, csv or json)"),
    };
    let text = std::fs::read_to_string(&args.config_path)
        .with_context(|| format!("reading {}", args.config_path.display()))?;
    let outcome = audit::audit_documents(&text, epsilon)
        .with_context(|| format!("parsing {}", args.config_path.display()))?;
    let mut out = open_output(&args.output)?;
    write!(out, "{}", audit::render_report(&outcome.reports, style))?;
    for err in &outcome.errors {
        eprintln!("config error: {err}");
    }
    if !outcome.errors.is_empty() {
        return Ok(1);
    }
    let all_stable = outcome
        .reports
        .iter()
        .all(|r| r.status == audit::Status::Stable);
    eprintln!(
        "audited {} config(s) at eps={epsilon}: {} stable",
        outcome.reports.len(),
        outcome
            .reports
            .iter()
            .filter(|r| r.status == audit::Status::Stable)
            .count()
    );
    Ok(if all_stable { 0 } else { 3 })
}

fn parse_range(spec: &str) -> Result<Vec<f64>> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("range must be start:stop:step, got {spec:?}");
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| anyhow!("bad range start {:?}", parts[0]))?;
        let stop: f64 = parts[1]
            .parse()
            .map_err(|_| anyhow!("bad range stop {:?}", parts[1]))?;
        let step: f64 = parts[2]
            .parse()
            .map_err(|_| anyhow!("bad range step {:?}", parts[2]))?;
        if step <= 0.0 {
            bail!("range step must be > 0, got {step}");
        }
        if stop < start {
            bail!("inverted range {spec:?}");
        }
        let mut values = Vec::new();
        let mut k = 0u64;
        loop {
            let v = start + step * k as f64;
            if v > stop + step * 1e-9 {
                break;
            }
            values.push(v);
            k += 1;
        }
        if values.is_empty() {
            bail!("empty range {spec:?}");
        }
        Ok(values)
    } else {
        let values = parse_list::<f64>(spec, "range")?;
        if values.is_empty() {
            bail!("empty range {spec:?}");
        }
        Ok(values)
    }
}

fn run_sweep(args: SweepArgs) -> Result<u8> {
    let epsilon = resolve_epsilon(args.epsilon)?;
    let format = parse_format(&args.precision)?;
    let grid = parse_range(&args.range)?;
    let variable = args.variable.to_ascii_lowercase();

    let need = |v: Option<u64>, name: &str| {
        v.ok_or_else(|| anyhow!("--{name} is required when sweeping {variable}"))
    };

    let mut out = open_output(&args.output)?;
    writeln!(out, "# variable={variable}")?;
    if let Some(c) = args.context {
        writeln!(out, "# context={c}")?;
    }
    if let Some(n) = args.layers {
        writeln!(out, "# layers={n}")?;
    }
    writeln!(out, "# epsilon={epsilon}")?;
    writeln!(out, "# precision={format}")?;
    if let Some(b) = args.base {
        writeln!(out, "# base={b}")?;
    }
    let base_columns = args.base.is_some() || variable == "base";
    if base_columns {
        writeln!(
            out,
            "value,aliasing_bound,depth_bound,min_base,max_base,non_empty,base,in_region"
        )?;
    } else {
        writeln!(
            out,
            "value,aliasing_bound,depth_bound,min_base,max_base,non_empty"
        )?;
    }

    for &v in &grid {
        let (context, layers, eps, base) = match variable.as_str() {
            "context" | "l" => (
                v.round() as u64,
                need(args.layers.map(u64::from), "layers")? as u32,
                epsilon,
                args.base,
            ),
            "layers" | "n" => (
                need(args.context, "context")?,
                v.round() as u32,
                epsilon,
                args.base,
            ),
            "epsilon" => (
                need(args.context, "context")?,
                need(args.layers.map(u64::from), "layers")? as u32,
                v,
                args.base,
            ),
            "base" => (
                need(args.context, "context")?,
                need(args.layers.map(u64::from), "layers")? as u32,
                epsilon,
                Some(v),
            ),
            other => bail!(
                "unknown sweep variable {other:?} (expected context, layers, epsilon or base)"
            ),
        };
        let params = StabilityParams::new(context, eps, layers).map_err(|e| anyhow!("{e}"))?;
        let region = bounds::feasibility_region(&params, format);
        let aliasing = bounds::aliasing_lower_bound(context);
        let depth = bounds::depth_lower_bound(&params);
        if base_columns {
            let b = base.ok_or_else(|| anyhow!("--base is required for the in_region column"))?;
            writeln!(
                out,
                "{v},{aliasing},{depth},{},{},{},{b},{}",
                region.lower,
                region.upper,
                region.non_empty,
                region.contains(b)
            )?;
        } else {
            writeln!(
                out,
                "{v},{aliasing},{depth},{},{},{}",
                region.lower, region.upper, region.non_empty
            )?;
        }
    }
    eprintln!("swept {variable} over {} grid point(s)", grid.len());
    Ok(0)
}
