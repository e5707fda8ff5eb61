use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use ccl_core::arith::{kloosterman, weil_bound};
use ccl_core::circle::{build_cover, summarize};
use ccl_core::coeffs::{make_eigenform, Eigenform};
use ccl_core::correlations::{
    divisor_main_term, gamma_star_norm, pipeline_fidelity, scaling_study, shifted_pair_correlation,
    triple_correlation, wilton_sup, CorrelationInput, ExperimentConfig, GammaStarParams, PipelineParams,
    SequenceSpec, Which,
};
use ccl_core::fit::fit_loglog;
use ccl_core::report::{csv_float, write_report, write_rows_csv, ExperimentReport, Format};
use ccl_core::spectral::{petersson_ratio_check, LargeSieve, Petersson};
use ccl_core::voronoi::{voronoi_check, VoronoiInstance};
use ccl_core::windows::{
    bump_window, kuznetsov_transform_dot, kuznetsov_transform_tilde, w_star, Sign, SmoothWindow,
    TransformKernel,
};

use crate::{Command, CorrelateKind, TransformKind};

/// A CSV table with a fixed column order.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
    }
}

fn float(v: f64) -> Result<String> {
    if !v.is_finite() {
        return Err(ccl_core::Error::Serialization(format!("non-finite value {v} in output")).into());
    }
    Ok(csv_float(v))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| ccl_core::Error::Precondition(format!("{}: {e}", path.display())).into())
}

fn weight_arg(w: &str) -> u32 {
    w.parse().expect("clap restricts the weight to 12 or 16")
}

/// Grows the coefficient table until `f` stops asking for more.
fn with_growing_form<T>(
    weight: u32,
    initial: usize,
    mut f: impl FnMut(&Eigenform) -> ccl_core::Result<T>,
) -> Result<T> {
    let mut len = initial.max(1);
    loop {
        let form = make_eigenform(weight, len)?;
        match f(&form) {
            Err(ccl_core::Error::InsufficientCoefficients { needed, .. }) if needed < 50_000_000 => {
                len = needed.max(2 * len);
            }
            other => return Ok(other?),
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Coeffs { weight, upto, out } => coeffs(weight_arg(&weight), upto, &out),
        Command::Kloosterman { a, b, cmax, out } => klo(a, b, cmax, &out),
        Command::Circle { q, delta_exp, out } => circle(&q, delta_exp, &out),
        Command::Voronoi { weight, b, c, n, truncation, out } => {
            voronoi(weight_arg(&weight), b, c, n, truncation, &out)
        }
        Command::Transform { kind, params, grid, out } => transform(kind, &params, &grid, &out),
        Command::Petersson { weight, mmax, cmax, out } => petersson(weight, mmax, cmax, &out),
        Command::Sieve { kmax, m, trials, seed, out } => sieve(kmax, m, trials, seed, &out),
        Command::Correlate { kind, config, out, csv } => correlate(kind, &config, &out, csv.as_deref()),
    }
}

fn coeffs(weight: u32, upto: usize, out: &Path) -> Result<()> {
    let form = make_eigenform(weight, upto)?;
    let mut table = Table::new(&["n", "a", "lambda"]);
    for n in 1..=upto {
        table.push(vec![n.to_string(), form.a(n).to_string(), float(form.lambda(n))?]);
    }
    table.write(out)
}

fn klo(a: i128, b: i128, cmax: u64, out: &Path) -> Result<()> {
    if cmax == 0 {
        bail!(ccl_core::Error::ZeroModulus);
    }
    let mut table = Table::new(&["c", "S", "weil_bound"]);
    for c in 1..=cmax {
        table.push(vec![c.to_string(), float(kloosterman(a, b, c)?)?, float(weil_bound(a, b, c))?]);
    }
    table.write(out)
}

fn circle(qs: &[u64], delta_exp: f64, out: &Path) -> Result<()> {
    let w0 = bump_window();
    let mut table = Table::new(&["Q", "delta", "Lambda", "intervals", "l2_error", "bound_ratio"]);
    for &q in qs {
        let cover = build_cover(|x| w0.value(x), q, (q as f64).powf(-delta_exp))?;
        let s = summarize(&cover);
        table.push(vec![
            s.q.to_string(),
            float(s.delta)?,
            float(s.lambda)?,
            s.intervals.to_string(),
            float(s.l2_error)?,
            float(s.bound_ratio)?,
        ]);
    }
    table.write(out)
}

#[derive(Serialize)]
struct VoronoiArgs {
    weight: u32,
    b: i64,
    c: u64,
    n: f64,
    truncation: Option<usize>,
}

fn voronoi(weight: u32, b: i64, c: u64, n: f64, truncation: Option<usize>, out: &Path) -> Result<()> {
    let window = bump_window();
    let initial = truncation.unwrap_or(0).max((2.0 * n).ceil() as usize + 1).max(20_000);
    let check = with_growing_form(weight, initial, |form| {
        let mut inst = VoronoiInstance::new(form, b, c, n, window);
        inst.rhs_truncation = truncation;
        voronoi_check(&inst)
    })?;
    let mut report = ExperimentReport::new("voronoi", &VoronoiArgs { weight, b, c, n, truncation })?;
    report.set("lhs_re", check.lhs.re);
    report.set("lhs_im", check.lhs.im);
    report.set("rhs_re", check.rhs.re);
    report.set("rhs_im", check.rhs.im);
    report.set("relative_error", check.relative_error);
    report.set("rhs_terms", check.rhs_terms as f64);
    if check.tail_estimate.is_finite() {
        report.set("tail_estimate", check.tail_estimate);
    }
    report.set("quadrature_tolerance", check.quadrature_tolerance);
    write_report(&report, out, Format::from_path(out))?;
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || ccl_core::Error::Precondition(format!("bad grid {spec:?}: use start:stop:count or a,b,c"));
    if let [a, b, n] = spec.split(':').collect::<Vec<_>>()[..] {
        let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        let n: usize = n.parse().map_err(|_| bad())?;
        return Ok(match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        });
    }
    spec.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| bad().into())).collect()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WStarParams {
    kappa: u32,
    w: f64,
    #[serde(default = "bump_window")]
    window: SmoothWindow,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelParams {
    z_scale: f64,
    alpha: f64,
    tau: f64,
    sign: Sign,
}

fn transform(kind: TransformKind, params: &Path, grid: &str, out: &Path) -> Result<()> {
    let grid = parse_grid(grid)?;
    let (label, values) = match kind {
        TransformKind::Wstar => {
            let p: WStarParams = read_json(params)?;
            let v = grid
                .iter()
                .map(|&z| w_star(&p.window, p.kappa, z, p.w))
                .collect::<ccl_core::Result<Vec<_>>>()?;
            ("z", v)
        }
        TransformKind::Dot => {
            let p: KernelParams = read_json(params)?;
            let kernel = TransformKernel::new(p.z_scale, p.alpha, p.tau, p.sign)?;
            let v = grid
                .iter()
                .map(|&k| {
                    if k.fract() != 0.0 || k < 0.0 {
                        return Err(ccl_core::Error::Precondition(format!("weight {k} is not an even integer")));
                    }
                    kuznetsov_transform_dot(&kernel, k as u32)
                })
                .collect::<ccl_core::Result<Vec<_>>>()?;
            ("k", v)
        }
        TransformKind::Tilde => {
            let p: KernelParams = read_json(params)?;
            let kernel = TransformKernel::new(p.z_scale, p.alpha, p.tau, p.sign)?;
            let v = grid
                .iter()
                .map(|&t| kuznetsov_transform_tilde(&kernel, t))
                .collect::<ccl_core::Result<Vec<_>>>()?;
            ("t", v)
        }
    };
    let mut table = Table::new(&[label, "re", "im", "abs"]);
    for (x, v) in grid.iter().zip(values) {
        table.push(vec![float(*x)?, float(v.re)?, float(v.im)?, float(v.norm())?]);
    }
    table.write(out)
}

fn petersson(weight: u32, mmax: u64, cmax: u64, out: &Path) -> Result<()> {
    if mmax == 0 {
        bail!(ccl_core::Error::Precondition("mmax must be ≥ 1".into()));
    }
    let engine = Petersson::new(cmax)?;
    let form = match weight {
        12 | 16 => Some(make_eigenform(weight, mmax as usize)?),
        _ => None,
    };
    let mut table = Table::new(&["m", "n", "P", "tail_bound", "r1", "r2"]);
    for m in 1..=mmax {
        for n in 1..=mmax {
            let p = engine.value(weight, m, n)?;
            let (r1, r2) = match &form {
                Some(f) => {
                    let r = petersson_ratio_check(&engine, f, m, n)?;
                    (float(r.r1)?, float(r.r2)?)
                }
                None => (String::new(), String::new()),
            };
            table.push(vec![m.to_string(), n.to_string(), float(p.value)?, float(p.tail_bound)?, r1, r2]);
        }
    }
    table.write(out)
}

fn sieve(kmax: u32, m: u64, trials: usize, seed: u64, out: &Path) -> Result<()> {
    let sieve = LargeSieve::new(kmax, m, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(&["trial", "lhs", "bound", "ratio"]);
    for trial in 0..trials {
        let a: Vec<f64> = (0..sieve.len()).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let r = sieve.ratio(&a)?;
        table.push(vec![trial.to_string(), float(r.lhs)?, float(r.bound)?, float(r.ratio)?]);
    }
    table.write(out)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DivisorConfig {
    experiment: ExperimentConfig,
    d_max: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WiltonConfig {
    weight: u32,
    x_list: Vec<usize>,
    #[serde(default = "default_grid_factor")]
    grid_factor: usize,
}

fn default_grid_factor() -> usize {
    4
}

fn default_pair() -> [u32; 2] {
    [12, 12]
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GammaStarConfig {
    #[serde(default = "default_pair")]
    weights: [u32; 2],
    params: GammaStarParams,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineConfig {
    #[serde(default = "default_pair")]
    weights: [u32; 2],
    params: PipelineParams,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalingConfig {
    experiment: ExperimentConfig,
    x_list: Vec<u64>,
    theta: f64,
    which: Which,
}

fn note_seed(report: &mut ExperimentReport, cfg: &ExperimentConfig) {
    if let SequenceSpec::Rademacher { seed } = cfg.sequence {
        report.note("seed", seed);
    }
}

fn correlate(kind: CorrelateKind, config: &Path, out: &Path, csv: Option<&Path>) -> Result<()> {
    let report = match kind {
        CorrelateKind::Pair | CorrelateKind::Triple => {
            let cfg: ExperimentConfig = read_json(config)?;
            let input = CorrelationInput::build(&cfg)?;
            let (name, v) = if kind == CorrelateKind::Pair {
                ("pair", shifted_pair_correlation(&input)?)
            } else {
                ("triple", triple_correlation(&input)?)
            };
            let mut report = ExperimentReport::new(name, &cfg)?;
            report.set("value", v.value);
            report.set("bound", v.bound);
            report.set("bound_ratio", v.bound_ratio);
            note_seed(&mut report, &cfg);
            report
        }
        CorrelateKind::Divisor => {
            let cfg: DivisorConfig = read_json(config)?;
            let d = divisor_main_term(&cfg.experiment, cfg.d_max)?;
            let mut report = ExperimentReport::new("divisor", &cfg)?;
            report.set("exact_lhs", d.exact_lhs);
            report.set("main_term", d.main_term);
            report.set("relative_deviation", d.relative_deviation);
            report.set("tail_estimate", d.tail_estimate);
            note_seed(&mut report, &cfg.experiment);
            report
        }
        CorrelateKind::Wilton => {
            let cfg: WiltonConfig = read_json(config)?;
            let top = cfg.x_list.iter().copied().max().unwrap_or(1);
            let form = make_eigenform(cfg.weight, top)?;
            let mut report = ExperimentReport::new("wilton", &cfg)?;
            let mut sups = Vec::new();
            for &x in &cfg.x_list {
                let w = wilton_sup(form.lambdas(), x, cfg.grid_factor)?;
                report.push_row([("x", x as f64), ("sup", w.sup), ("alpha", w.alpha)]);
                sups.push(w.sup);
            }
            if cfg.x_list.len() >= 2 {
                let xs: Vec<f64> = cfg.x_list.iter().map(|&x| x as f64).collect();
                let fit = fit_loglog(&xs, &sups)?;
                report.set("slope", fit.slope);
                report.set_fit("sup", fit);
            }
            report
        }
        CorrelateKind::GammaStar => {
            let cfg: GammaStarConfig = read_json(config)?;
            let p = &cfg.params;
            let f1 = make_eigenform(cfg.weights[0], 2 * p.m1 as usize)?;
            let f2 = make_eigenform(cfg.weights[1], 2 * p.m2 as usize)?;
            let g = gamma_star_norm(f1.lambdas(), f2.lambdas(), p)?;
            let mut report = ExperimentReport::new("gamma_star", &cfg)?;
            report.set("norm_sq", g.norm_sq);
            report.set("bound", g.bound);
            report.set("ratio", g.ratio);
            report
        }
        CorrelateKind::Pipeline => {
            let cfg: PipelineConfig = read_json(config)?;
            let p = &cfg.params;
            let reach = p.n as usize + (2.0 * p.h.max(p.h_prime)).ceil() as usize + 1;
            let f1 = make_eigenform(cfg.weights[0], reach)?;
            let f2 = make_eigenform(cfg.weights[1], reach)?;
            let r = pipeline_fidelity(f1.lambdas(), f2.lambdas(), p)?;
            let mut report = ExperimentReport::new("pipeline", &cfg)?;
            report.set("e_direct", r.e_direct);
            report.set("e_reconstructed_re", r.e_reconstructed_re);
            report.set("e_reconstructed_im", r.e_reconstructed_im);
            report.set("abs_error", r.abs_error);
            report.set("relative_error", r.relative_error);
            report.set("heuristic", r.heuristic);
            report.set("lambda", r.lambda);
            report
        }
        CorrelateKind::Scaling => {
            let cfg: ScalingConfig = read_json(config)?;
            scaling_study(&cfg.experiment, &cfg.x_list, cfg.theta, cfg.which)?
        }
    };
    write_report(&report, out, Format::from_path(out))?;
    if let Some(path) = csv {
        write_rows_csv(&report.rows, path)?;
    }
    Ok(())
}

