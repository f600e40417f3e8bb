//! Command-line front end. `run` parses arguments, computes, and writes one
//! artifact (CSV, JSON or SVG) to stdout or a file.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical
//! non-convergence, 3 failed self-test.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::ensemble::{make_coupling, norm_constant};
use crate::error::Error;
use crate::groupint::{group_integral, leutwyler_smilga_check, mc_group_integral, GroupIntegralInput};
use crate::kernels::{correlation, kernel_g, kernel_k, kernel_w, level_density, CorrelationRequest, KernelSet};
use crate::linalg::{pfaffian, ComplexMatrix, RngStream};
use crate::montecarlo::{bin_averaged_density, compare_density, mc_density, mean_square_sum, HistogramSpec};
use crate::polynomials::{q, q_tilde, skew_products, Parity, SkewProductSpec};
use crate::quadrature::{integrate_semi_infinite, QuadratureSpec};

/// Environment variable naming the directory for output files.
pub const OUTPUT_DIR_ENV: &str = "CHIRAL_RMT_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NONCONVERGENCE: i32 = 2;
pub const EXIT_SELFTEST: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "chiral-rmt", version, about = "Finite-N spectral statistics of the GUE to chiral GUE crossover")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Level density on a grid
    Density,
    /// Histogram of sampled singular values
    McDensity,
    /// Histogram versus bin-averaged analytic density, with z-scores
    Compare,
    /// Coefficients of the skew-orthogonal polynomials q_j, q̃_j for j ≤ N
    Poly,
    /// K_N, G_N and W_N on a grid of pairs
    Kernel,
    /// Pair correlation R2 on a grid of pairs
    Corr,
    /// Group integral: Pfaffian formula versus Haar Monte Carlo
    Groupint,
    /// Quick invariant checks
    Selftest,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Density => "density",
            Command::McDensity => "mc-density",
            Command::Compare => "compare",
            Command::Poly => "poly",
            Command::Kernel => "kernel",
            Command::Corr => "corr",
            Command::Groupint => "groupint",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| if i + 1 == self.points { self.max } else { self.min + step * i as f64 }).collect()
    }
}

/// Parses `min:max:points` with inclusive endpoints.
pub fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected min:max:points, got '{s}'"));
    }
    let min: f64 = parts[0].trim().parse().map_err(|e| format!("bad grid min '{}': {e}", parts[0]))?;
    let max: f64 = parts[1].trim().parse().map_err(|e| format!("bad grid max '{}': {e}", parts[1]))?;
    let points: usize = parts[2].trim().parse().map_err(|e| format!("bad grid points '{}': {e}", parts[2]))?;
    if !(min.is_finite() && max.is_finite()) || points == 0 || (points > 1 && !(max > min)) {
        return Err(format!("grid needs finite min < max and points >= 1, got '{s}'"));
    }
    Ok(Grid { min, max, points })
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got '{s}'"))?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("bad range '{s}': {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("bad range '{s}': {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(format!("range needs finite lo < hi, got '{s}'"));
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, Args)]
struct Opts {
    /// Matrix size N
    #[arg(long = "n", global = true, default_value_t = 4)]
    n: usize,
    /// Coupling μ
    #[arg(long, global = true, default_value_t = 0.5)]
    mu: f64,
    /// Monte Carlo draws
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: usize,
    /// Histogram bins
    #[arg(long, global = true, default_value_t = 50)]
    bins: usize,
    /// Histogram range lo:hi
    #[arg(long, global = true, value_parser = parse_range, default_value = "0:5")]
    range: (f64, f64),
    /// Evaluation grid min:max:points, endpoints included
    #[arg(long, global = true, value_parser = parse_grid, default_value = "0:5:101")]
    grid: Grid,
    /// Master seed of the random streams
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads for Monte Carlo; 0 uses all cores
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Output file; `-` or absent writes to stdout unless the output
    /// directory variable is set
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format; compare defaults to json, the other commands to csv
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Group integral: comma-separated a values
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    a: Option<Vec<f64>>,
    /// Group integral: ξ
    #[arg(long, global = true, default_value_t = 0.0)]
    xi: f64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numerical(String),
    SelfTest(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence(_) | Error::Singularity(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Floats in output: 17 significant digits, exact round trip.
fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

struct Ctx {
    command: Command,
    command_line: String,
    opts: Opts,
    format: Format,
}

impl Ctx {
    fn provenance(&self) -> Value {
        json!({
            "command_line": self.command_line,
            "seed": self.opts.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "mu": self.opts.mu,
            "n": self.opts.n,
        })
    }

    fn csv_header(&self) -> String {
        format!(
            "# command_line: {}\n# version: {}\n# seed: {}\n# mu: {}\n# n: {}\n",
            self.command_line,
            env!("CARGO_PKG_VERSION"),
            self.opts.seed,
            self.opts.mu,
            self.opts.n
        )
    }

    /// CSV with provenance comments, header row and 17-digit fields.
    fn csv(&self, header: &str, rows: &[Vec<String>]) -> String {
        let mut s = self.csv_header();
        s.push_str(header);
        s.push('\n');
        for r in rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    fn json(&self, mut body: Value) -> String {
        if let Value::Object(m) = &mut body {
            m.insert("provenance".into(), self.provenance());
        }
        let mut s = serde_json::to_string_pretty(&body).expect("serializable");
        s.push('\n');
        s
    }

    fn svg(&self, title: &str, x_label: &str, series: &[Series]) -> String {
        svg_plot(title, x_label, &self.command_line, series)
    }

    fn hist_spec(&self) -> CliResult<HistogramSpec> {
        Ok(HistogramSpec::new(self.opts.bins, self.opts.range.0, self.opts.range.1)?)
    }

    fn kernels(&self) -> CliResult<KernelSet> {
        if self.opts.n == 0 {
            return Err(CliError::Usage("--n must be at least 1".into()));
        }
        let c = make_coupling(self.opts.mu)?;
        Ok(KernelSet::new(self.opts.n, c)?)
    }

    fn grid_nonneg(&self) -> CliResult<Vec<f64>> {
        let g = self.opts.grid.values();
        if g.iter().any(|&x| x < 0.0) {
            return Err(CliError::Usage("grid values must be nonnegative".into()));
        }
        Ok(g)
    }

    fn no_svg(&self) -> CliResult<()> {
        if self.format == Format::Svg {
            return Err(CliError::Usage(format!("{} has no svg output; use csv or json", self.command.name())));
        }
        Ok(())
    }
}

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    points: Vec<(f64, f64)>,
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Single-file 800×600 SVG line plot.
fn svg_plot(title: &str, x_label: &str, provenance: &str, series: &[Series]) -> String {
    let (w, h) = (800.0, 600.0);
    let (l, r, t, b) = (70.0, 20.0, 40.0, 60.0);
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| l + (x - x0) / (x1 - x0) * (w - l - r);
    let sy = |y: f64| h - b - (y - y0) / (y1 - y0) * (h - t - b);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600">"#);
    let _ = writeln!(s, "<desc>{}</desc>", xml_escape(provenance));
    let _ = writeln!(s, r#"<rect width="800" height="600" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="400" y="25" text-anchor="middle" font-size="16">{}</text>"#, xml_escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{l} {t} V{} H{}" fill="none" stroke="black"/>"#,
        h - b,
        w - r
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle" font-size="12">{:.3}</text>"#, sx(fx), h - b + 18.0, fx);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end" font-size="12">{:.3}</text>"#, l - 6.0, sy(fy) + 4.0, fy);
    }
    let _ = writeln!(s, r#"<text x="400" y="{}" text-anchor="middle" font-size="14">{}</text>"#, h - 15.0, xml_escape(x_label));
    for (k, se) in series.iter().enumerate() {
        let coords: Vec<String> = se.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#, se.color, coords.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{}">{}</text>"#,
            w - r - 150.0,
            t + 20.0 + 16.0 * k as f64,
            se.color,
            xml_escape(se.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn cmd_density(ctx: &Ctx) -> CliResult<String> {
    let ks = ctx.kernels()?;
    let grid = ctx.grid_nonneg()?;
    let vals: Vec<f64> = grid.iter().map(|&l| level_density(&ks, l)).collect::<crate::Result<_>>()?;
    Ok(match ctx.format {
        Format::Csv => ctx.csv("lambda,density", &grid.iter().zip(&vals).map(|(l, d)| vec![num(*l), num(*d)]).collect::<Vec<_>>()),
        Format::Json => ctx.json(json!({ "lambda": grid, "density": vals })),
        Format::Svg => ctx.svg(
            &format!("level density, N = {}, mu = {}", ctx.opts.n, ctx.opts.mu),
            "lambda",
            &[Series { label: "analytic", color: "#1f4e9c", points: grid.iter().copied().zip(vals.iter().copied()).collect() }],
        ),
    })
}

fn cmd_mc_density(ctx: &Ctx) -> CliResult<String> {
    let spec = ctx.hist_spec()?;
    let h = mc_density(ctx.opts.n, ctx.opts.mu, ctx.opts.samples, &RngStream::new(ctx.opts.seed, 0), &spec)?;
    let centers = h.bin_centers();
    Ok(match ctx.format {
        Format::Csv => ctx.csv(
            "bin_center,density,std_error",
            &(0..centers.len()).map(|i| vec![num(centers[i]), num(h.density[i]), num(h.std_error[i])]).collect::<Vec<_>>(),
        ),
        Format::Json => ctx.json(json!({
            "bin_center": centers,
            "density": h.density,
            "std_error": h.std_error,
            "sample_count": h.sample_count,
            "outside_fraction": h.outside_fraction,
        })),
        Format::Svg => ctx.svg(
            &format!("singular-value histogram, N = {}, mu = {}", ctx.opts.n, ctx.opts.mu),
            "lambda",
            &[Series { label: "Monte Carlo", color: "#b03a2e", points: centers.iter().copied().zip(h.density.iter().copied()).collect() }],
        ),
    })
}

fn cmd_compare(ctx: &Ctx) -> CliResult<String> {
    let ks = ctx.kernels()?;
    let spec = ctx.hist_spec()?;
    let h = mc_density(ctx.opts.n, ctx.opts.mu, ctx.opts.samples, &RngStream::new(ctx.opts.seed, 0), &spec)?;
    let analytic = bin_averaged_density(&ks, &spec)?;
    let rep = compare_density(&analytic, &h);
    Ok(match ctx.format {
        Format::Json => ctx.json(json!({
            "samples": h.sample_count,
            "bins": rep.bins,
            "chi2": rep.chi2,
            "dof": rep.dof,
            "chi2_per_dof": rep.chi2_per_dof,
            "fraction_within_3se": rep.fraction_within_3se,
            "max_abs_z": rep.max_abs_z,
            "passes": rep.passes(),
        })),
        Format::Csv => {
            let mut s = ctx.csv(
                "bin_center,analytic,histogram,std_error,z",
                &rep.bins
                    .iter()
                    .map(|b| vec![num(b.bin_center), num(b.analytic), num(b.histogram), num(b.std_error), num(b.z)])
                    .collect::<Vec<_>>(),
            );
            let _ = writeln!(s, "# chi2_per_dof: {}\n# fraction_within_3se: {}\n# max_abs_z: {}", num(rep.chi2_per_dof), num(rep.fraction_within_3se), num(rep.max_abs_z));
            s
        }
        Format::Svg => ctx.svg(
            &format!("N = {}, mu = {}: chi2/dof = {:.3}", ctx.opts.n, ctx.opts.mu, rep.chi2_per_dof),
            "lambda",
            &[
                Series { label: "analytic (bin average)", color: "#1f4e9c", points: rep.bins.iter().map(|b| (b.bin_center, b.analytic)).collect() },
                Series { label: "Monte Carlo", color: "#b03a2e", points: rep.bins.iter().map(|b| (b.bin_center, b.histogram)).collect() },
            ],
        ),
    })
}

fn cmd_poly(ctx: &Ctx) -> CliResult<String> {
    ctx.no_svg()?;
    let c = make_coupling(ctx.opts.mu)?;
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for j in 0..=ctx.opts.n {
        for (kind, p) in [("q", q(j, &c)), ("q_tilde", q_tilde(j, &c))] {
            for (k, &v) in p.coeffs.iter().enumerate() {
                rows.push(vec![j.to_string(), kind.to_string(), (2 * k).to_string(), num(v)]);
            }
            items.push(json!({ "j": j, "kind": kind, "coefficients_in_x2": p.coeffs }));
        }
    }
    Ok(match ctx.format {
        Format::Json => ctx.json(json!({ "polynomials": items })),
        _ => ctx.csv("j,kind,power,coefficient", &rows),
    })
}

fn pair_grid(ctx: &Ctx) -> CliResult<Vec<(f64, f64)>> {
    let g = ctx.grid_nonneg()?;
    Ok(g.iter().flat_map(|&a| g.iter().map(move |&b| (a, b))).collect())
}

fn cmd_kernel(ctx: &Ctx) -> CliResult<String> {
    ctx.no_svg()?;
    let ks = ctx.kernels()?;
    let mut rows = Vec::new();
    for (a, b) in pair_grid(ctx)? {
        rows.push([a, b, kernel_k(&ks, a, b), kernel_g(&ks, a, b)?, kernel_w(&ks, a, b)?]);
    }
    Ok(match ctx.format {
        Format::Json => ctx.json(json!({ "rows": rows.iter().map(|r| json!({"lambda1": r[0], "lambda2": r[1], "k": r[2], "g": r[3], "w": r[4]})).collect::<Vec<_>>() })),
        _ => ctx.csv("lambda1,lambda2,k,g,w", &rows.iter().map(|r| r.iter().map(|&v| num(v)).collect()).collect::<Vec<_>>()),
    })
}

fn cmd_corr(ctx: &Ctx) -> CliResult<String> {
    ctx.no_svg()?;
    let ks = ctx.kernels()?;
    let mut rows = Vec::new();
    for (a, b) in pair_grid(ctx)? {
        rows.push([a, b, correlation(&ks, &CorrelationRequest::new(vec![a, b]))?]);
    }
    Ok(match ctx.format {
        Format::Json => ctx.json(json!({ "rows": rows.iter().map(|r| json!({"lambda1": r[0], "lambda2": r[1], "r2": r[2]})).collect::<Vec<_>>() })),
        _ => ctx.csv("lambda1,lambda2,r2", &rows.iter().map(|r| r.iter().map(|&v| num(v)).collect()).collect::<Vec<_>>()),
    })
}

#[derive(Serialize)]
struct GroupRow {
    label: String,
    analytic: f64,
    mc_mean: f64,
    mc_se: f64,
}

fn cmd_groupint(ctx: &Ctx) -> CliResult<String> {
    ctx.no_svg()?;
    let spec = QuadratureSpec::new(1e-13, 1e-11, 200)?;
    let cases: Vec<(Vec<f64>, f64)> = match &ctx.opts.a {
        Some(a) => vec![(a.clone(), ctx.opts.xi)],
        None => vec![(vec![0.7], 0.0), (vec![0.4, 1.1], 0.0), (vec![0.3, 0.7, 1.2], 0.0), (vec![0.4, 1.1], 0.5)],
    };
    let mut rows = Vec::new();
    for (k, (a, xi)) in cases.into_iter().enumerate() {
        let analytic = group_integral(&GroupIntegralInput { a: a.clone(), xi }, &spec)?;
        let m = ComplexMatrix::from_real_diagonal(&a);
        let e = mc_group_integral(&m, &m, xi, ctx.opts.samples, &RngStream::new(ctx.opts.seed, k as u64))?;
        let label = format!("N={} a={} xi={}", a.len(), a.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "), xi);
        rows.push(GroupRow { label, analytic, mc_mean: e.mean, mc_se: e.std_error });
    }
    Ok(match ctx.format {
        Format::Json => ctx.json(json!({ "rows": rows })),
        _ => ctx.csv(
            "label,analytic,mc_mean,mc_se",
            &rows.iter().map(|r| vec![r.label.clone(), num(r.analytic), num(r.mc_mean), num(r.mc_se)]).collect::<Vec<_>>(),
        ),
    })
}

#[derive(Serialize)]
struct Check {
    check: String,
    passed: bool,
    detail: String,
}

fn selftest_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let mut add = |name: &str, r: std::result::Result<(bool, String), Error>| {
        let (passed, detail) = r.unwrap_or_else(|e| (false, e.to_string()));
        out.push(Check { check: name.into(), passed, detail });
    };
    add("normalization", (|| {
        let spec = QuadratureSpec::new(1e-11, 1e-9, 200)?;
        let mut worst: f64 = 0.0;
        for n in 1..=4 {
            for mu in [0.1, 0.5, 0.9] {
                let ks = KernelSet::new(n, make_coupling(mu)?)?;
                let v = integrate_semi_infinite(|l| level_density(&ks, l).unwrap_or(f64::NAN), 3.0, &spec).value;
                worst = worst.max((v - 1.0).abs());
            }
        }
        Ok((worst < 1e-6, format!("max |norm - 1| = {worst:e}")))
    })());
    add("skew_orthonormality", (|| {
        let c = make_coupling(0.5)?;
        let sps = SkewProductSpec::new(Parity::Even, c);
        let pairs = vec![(q(0, &c), q_tilde(0, &c)), (q(0, &c), q(2, &c)), (q(2, &c), q_tilde(2, &c))];
        let v = skew_products(&pairs, &sps)?;
        let (h0, h2) = (crate::ensemble::h(0, &c)?, crate::ensemble::h(2, &c)?);
        let err = ((v[0] - h0) / h0).abs().max((v[1] / h0).abs()).max(((v[2] - h2) / h2).abs());
        Ok((err < 1e-6, format!("max relative deviation {err:e}")))
    })());
    add("pfaffian_squared_is_determinant", (|| {
        let m = [0.0, 1.5, -0.3, 2.0, -1.5, 0.0, 0.7, -1.1, 0.3, -0.7, 0.0, 0.4, -2.0, 1.1, -0.4, 0.0];
        let pf = pfaffian(&m, 4)?;
        let want = 1.5 * 0.4 - (-0.3) * (-1.1) + 2.0 * 0.7;
        Ok(((pf - want).abs() < 1e-14, format!("Pf = {pf}, closed form {want}")))
    })());
    add("k2_closed_form", (|| {
        let c = make_coupling(0.5)?;
        let ks = KernelSet::new(2, c)?;
        let v = kernel_k(&ks, 1.0, 2.0);
        let want = (1.0 - 4.0) / (4.0 * std::f64::consts::PI * 0.25 * 0.75);
        Ok(((v - want).abs() < 1e-12 * want.abs(), format!("K2(1,2) = {v}")))
    })());
    add("pair_correlation_structure", (|| {
        let ks = KernelSet::new(3, make_coupling(0.6)?)?;
        let r12 = correlation(&ks, &CorrelationRequest::new(vec![0.6, 1.4]))?;
        let r21 = correlation(&ks, &CorrelationRequest::new(vec![1.4, 0.6]))?;
        let diag = correlation(&ks, &CorrelationRequest::new(vec![1.0, 1.0 + 1e-5]))?;
        Ok(((r12 - r21).abs() < 1e-10 * r12.abs() && diag.abs() < 1e-6 && r12 > 0.0, format!("R2 = {r12}, near diagonal {diag:e}")))
    })());
    add("normalization_constant", (|| {
        let c = make_coupling(0.5)?;
        let v = norm_constant(1, &c)?;
        let want = 1.0 / (4.0 * std::f64::consts::PI * 0.25f64).sqrt();
        Ok(((v - want).abs() < 1e-14, format!("C_1 = {v}")))
    })());
    add("group_integral_n1", (|| {
        let spec = QuadratureSpec::default();
        let v = group_integral(&GroupIntegralInput { a: vec![0.7], xi: 0.0 }, &spec)?;
        let want = crate::specfun::bessel_i0_scaled(0.49) * 0.49f64.exp();
        Ok(((v - want).abs() < 1e-10, format!("I = {v}")))
    })());
    add("leutwyler_smilga", (|| {
        let spec = QuadratureSpec::new(1e-13, 1e-11, 200)?;
        let (l, r) = leutwyler_smilga_check(0.5, 1.0, &spec)?;
        Ok((((l - r) / r).abs() < 1e-3, format!("limit {l}, reference {r}")))
    })());
    add("second_moment_mc", (|| {
        let e = mean_square_sum(3, 0.5, 20_000, &RngStream::new(99, 0))?;
        let want = 1.25 * 9.0;
        Ok((((e.mean - want) / e.std_error).abs() < 4.0, format!("{} ± {} vs {want}", e.mean, e.std_error)))
    })());
    out
}

fn cmd_selftest(ctx: &Ctx, log: &mut String) -> CliResult<String> {
    ctx.no_svg()?;
    let checks = selftest_checks();
    for c in &checks {
        let _ = writeln!(log, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.check, c.detail);
    }
    let body = match ctx.format {
        Format::Json => ctx.json(json!({ "checks": checks })),
        _ => ctx.csv(
            "check,passed,detail",
            &checks.iter().map(|c| vec![c.check.clone(), c.passed.to_string(), format!("\"{}\"", c.detail.replace('"', "'"))]).collect::<Vec<_>>(),
        ),
    };
    if checks.iter().all(|c| c.passed) {
        Ok(body)
    } else {
        Err(CliError::SelfTest(body))
    }
}

fn destination(ctx: &Ctx) -> Option<PathBuf> {
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    match (&ctx.opts.output, dir) {
        (Some(p), _) if p.as_os_str() == "-" => None,
        (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(p.clone()),
        (None, Some(d)) => Some(d.join(format!("{}.{}", ctx.command.name(), ctx.format.extension()))),
        (None, None) => None,
    }
}

fn emit(ctx: &Ctx, body: &str, out: &mut dyn Write) -> CliResult<()> {
    match destination(ctx) {
        None => out.write_all(body.as_bytes()).map_err(|e| CliError::Usage(format!("cannot write output: {e}"))),
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", parent.display())))?;
            }
            std::fs::write(&p, body).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display())))
        }
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let format = cli.opts.format.unwrap_or(if cli.command == Command::Compare { Format::Json } else { Format::Csv });
    let mut words = vec!["chiral-rmt".to_string()];
    words.extend(args.iter().skip(1).cloned());
    let ctx = Ctx { command: cli.command, command_line: words.join(" "), opts: cli.opts, format };

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(ctx.opts.workers).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_USAGE;
        }
    };
    let mut log = String::new();
    let result = pool.install(|| match ctx.command {
        Command::Density => cmd_density(&ctx),
        Command::McDensity => cmd_mc_density(&ctx),
        Command::Compare => cmd_compare(&ctx),
        Command::Poly => cmd_poly(&ctx),
        Command::Kernel => cmd_kernel(&ctx),
        Command::Corr => cmd_corr(&ctx),
        Command::Groupint => cmd_groupint(&ctx),
        Command::Selftest => cmd_selftest(&ctx, &mut log),
    });
    let _ = err.write_all(log.as_bytes());
    match result {
        Ok(body) => match emit(&ctx, &body, out) {
            Ok(()) => EXIT_OK,
            Err(CliError::Usage(m)) | Err(CliError::Numerical(m)) | Err(CliError::SelfTest(m)) => {
                let _ = writeln!(err, "error: {m}");
                EXIT_USAGE
            }
        },
        Err(CliError::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Numerical(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_NONCONVERGENCE
        }
        Err(CliError::SelfTest(body)) => {
            let _ = emit(&ctx, &body, out);
            let _ = writeln!(err, "error: self-test failed");
            EXIT_SELFTEST
        }
    }
}
