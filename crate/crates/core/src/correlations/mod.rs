//! Shifted convolution sums of Hecke eigenvalues and the experiments around them.
//!
//! All float sums that are compared across runs use fixed-order pairwise
//! reduction, so results are bit-stable regardless of thread count.

mod divisor;
mod gamma_star;
mod pipeline;
mod wilton;

pub use divisor::{
    divisor_main_term, divisor_main_term_truncated, fit_polynomial, tau_k_polynomial_fit, DivisorMainTerm,
    PolynomialFit, EULER_GAMMA,
};
pub use gamma_star::{gamma_star_norm, gamma_star_values, GammaStarNorm, GammaStarParams, Weight2};
pub use pipeline::{pipeline_fidelity, plateau_v, PipelineParams, PipelineResult};
pub use wilton::{wilton_sup, WiltonSup};

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{divisor_sieve, make_eigenform};
use crate::fit::fit_loglog;
use crate::report::ExperimentReport;
use crate::sum::pairwise;
use crate::windows::{bump_window, SmoothWindow};
use crate::{Error, Result};

/// The test sequence a(n) on [X, 2X].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpec {
    #[default]
    Ones,
    /// Independent ±1 signs from ChaCha8 seeded with `seed`.
    Rademacher { seed: u64 },
    /// a(n) = λ₃(n), the eigenvalues of the third configured weight.
    Lambda3,
    /// a(n) = τ_k(n), the k-fold divisor function.
    Tau { k: u32 },
}

/// Replaces every λᵢ by a constant sequence (test hook for closed-form checks).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Synthetic {
    Ones,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Pair,
    Triple,
}

fn default_weights() -> [u32; 3] {
    [12, 12, 12]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub x: u64,
    pub h: f64,
    /// Secondary localization scale, X/3 when absent.
    #[serde(default)]
    pub h_prime: Option<f64>,
    #[serde(default = "default_weights")]
    pub weights: [u32; 3],
    #[serde(default = "bump_window")]
    pub window: SmoothWindow,
    #[serde(default)]
    pub sequence: SequenceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<Synthetic>,
}

impl ExperimentConfig {
    pub fn new(x: u64, h: f64) -> Self {
        Self {
            x,
            h,
            h_prime: None,
            weights: default_weights(),
            window: bump_window(),
            sequence: SequenceSpec::Ones,
            synthetic: None,
        }
    }

    pub fn h_prime(&self) -> f64 {
        self.h_prime.unwrap_or(self.x as f64 / 3.0)
    }

    /// Largest index the coefficient tables must reach: 2X + 2H′.
    pub fn coverage_limit(&self) -> usize {
        2 * self.x as usize + (2.0 * self.h_prime()).ceil() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let x = self.x as f64;
        if self.x < 3 {
            return Err(Error::Precondition(format!("X must be ≥ 3, got {}", self.x)));
        }
        if !(self.h >= 0.5) {
            return Err(Error::Precondition(format!(
                "H = {} leaves no integer h with W(h/H) ≠ 0",
                self.h
            )));
        }
        if !(self.h >= 1.0 && self.h <= x / 3.0) {
            return Err(Error::Precondition(format!("need 1 ≤ H ≤ X/3, got H = {}", self.h)));
        }
        let hp = self.h_prime();
        if !(hp >= self.h && hp <= x / 3.0) {
            return Err(Error::Precondition(format!("need H ≤ H′ ≤ X/3, got H′ = {hp}")));
        }
        if let Some(&w) = self.weights.iter().find(|&&w| w != 12 && w != 16) {
            return Err(Error::UnsupportedWeight(w));
        }
        if self.window.eta != 0.0 || !self.window.amplitude.is_finite() {
            return Err(Error::Precondition("correlation windows must be real and finite".into()));
        }
        Ok(())
    }
}

/// Integer shifts h with W(h/H) ≠ 0, and the weights W(h/H).
pub fn shift_weights(window: &SmoothWindow, h: f64) -> Vec<(i64, f64)> {
    let (a, b) = window.support();
    let lo = (a * h).floor() as i64;
    let hi = (b * h).ceil() as i64;
    (lo..=hi)
        .map(|s| (s, window.value(s as f64 / h)))
        .filter(|&(_, w)| w != 0.0)
        .collect()
}

/// a(n) for X ≤ n ≤ 2X; `lambda3` is only read for [`SequenceSpec::Lambda3`].
pub fn sequence_values(spec: SequenceSpec, x: u64, lambda3: &[f64]) -> Result<Vec<f64>> {
    let x = x as usize;
    Ok(match spec {
        SequenceSpec::Ones => vec![1.0; x + 1],
        SequenceSpec::Rademacher { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..=x).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
        }
        SequenceSpec::Lambda3 => lambda3[x..=2 * x].to_vec(),
        SequenceSpec::Tau { k } => divisor_sieve(k, 2 * x)?[x..].iter().map(|&t| t as f64).collect(),
    })
}

/// Coefficient tables and the test sequence for one configuration.
#[derive(Debug, Clone)]
pub struct CorrelationInput {
    pub cfg: ExperimentConfig,
    /// λᵢ(n) for 0 ≤ n ≤ coverage limit.
    pub lambda: [Vec<f64>; 3],
    /// a(n) at index n − X for X ≤ n ≤ 2X.
    pub a: Vec<f64>,
}

impl CorrelationInput {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let limit = cfg.coverage_limit();
        let lambda = match cfg.synthetic {
            Some(Synthetic::Ones) => [vec![1.0; limit + 1], vec![1.0; limit + 1], vec![1.0; limit + 1]],
            Some(Synthetic::Zero) => [vec![0.0; limit + 1], vec![0.0; limit + 1], vec![0.0; limit + 1]],
            None => {
                let mut forms: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
                for &w in &cfg.weights {
                    if !forms.contains_key(&w) {
                        forms.insert(w, make_eigenform(w, limit)?.lambdas().to_vec());
                    }
                }
                cfg.weights.map(|w| forms[&w].clone())
            }
        };
        let mut input = Self { cfg: cfg.clone(), lambda, a: Vec::new() };
        input.set_sequence(cfg.sequence)?;
        Ok(input)
    }

    /// Replaces a(n) without rebuilding the coefficient tables.
    pub fn set_sequence(&mut self, spec: SequenceSpec) -> Result<()> {
        self.a = sequence_values(spec, self.cfg.x, &self.lambda[2])?;
        self.cfg.sequence = spec;
        Ok(())
    }

    pub fn a_norm(&self) -> f64 {
        let sq: Vec<f64> = self.a.iter().map(|v| v * v).collect();
        pairwise(&sq).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationValue {
    pub value: f64,
    pub bound: f64,
    pub bound_ratio: f64,
}

fn ratio(value: f64, bound: f64) -> f64 {
    if bound == 0.0 {
        0.0
    } else {
        value.abs() / bound
    }
}

/// Σ_h w_h Σ_{X≤n≤2X} term(h, n), inner sums parallel over h.
pub(crate) fn shifted_sum(x: u64, shifts: &[(i64, f64)], term: impl Fn(i64, usize) -> f64 + Sync) -> f64 {
    let per_shift: Vec<f64> = shifts
        .par_iter()
        .map(|&(h, w)| {
            let inner: Vec<f64> = (x as usize..=2 * x as usize).map(|n| term(h, n)).collect();
            w * pairwise(&inner)
        })
        .collect();
    pairwise(&per_shift)
}

/// Σ_h W(h/H) Σ_{X≤n≤2X} a(n)λ₁(n+h)λ₂(n−h).
pub fn shifted_pair_correlation(input: &CorrelationInput) -> Result<CorrelationValue> {
    let cfg = &input.cfg;
    let (x, h) = (cfg.x, cfg.h);
    let shifts = shift_weights(&cfg.window, h);
    let [l1, l2, _] = &input.lambda;
    let a = &input.a;
    let value = shifted_sum(x, &shifts, |s, n| {
        a[n - x as usize] * l1[(n as i64 + s) as usize] * l2[(n as i64 - s) as usize]
    });
    let xf = x as f64;
    let bound = (xf / h) * ((xf * h).sqrt() + xf / h.sqrt()) * input.a_norm();
    Ok(CorrelationValue { value, bound, bound_ratio: ratio(value, bound) })
}

/// Σ_h W(h/H) Σ_{X≤n≤2X} λ₁(n−h)λ₂(n)λ₃(n+h).
pub fn triple_correlation(input: &CorrelationInput) -> Result<CorrelationValue> {
    let cfg = &input.cfg;
    let (x, h) = (cfg.x, cfg.h);
    let shifts = shift_weights(&cfg.window, h);
    let [l1, l2, l3] = &input.lambda;
    let value = shifted_sum(x, &shifts, |s, n| {
        l1[(n as i64 - s) as usize] * l2[n] * l3[(n as i64 + s) as usize]
    });
    let xf = x as f64;
    let bound = (xf * h).min(xf * xf / h.sqrt());
    Ok(CorrelationValue { value, bound, bound_ratio: ratio(value, bound) })
}

#[derive(Debug, Clone, Serialize)]
struct ScalingConfig<'a> {
    base: &'a ExperimentConfig,
    x_list: &'a [u64],
    theta: f64,
    which: Which,
}

/// Measures log|sum| against log X with H = round(X^θ), H′ = X/3, and fits
/// the paper's bound over the same points for comparison.
pub fn scaling_study(
    base: &ExperimentConfig,
    x_list: &[u64],
    theta: f64,
    which: Which,
) -> Result<ExperimentReport> {
    if x_list.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "scaling fits need at least 4 values of X, got {}",
            x_list.len()
        )));
    }
    if x_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("X list must be strictly ascending".into()));
    }
    let config_at = |x: u64| ExperimentConfig {
        x,
        h: (x as f64).powf(theta).round(),
        h_prime: None,
        ..base.clone()
    };
    // One set of tables at the largest X serves every smaller X.
    let widest = CorrelationInput::build(&config_at(*x_list.last().unwrap()))?;
    let mut report =
        ExperimentReport::new("scaling", &ScalingConfig { base, x_list, theta, which })?;
    let (mut xs, mut sums, mut bounds) = (Vec::new(), Vec::new(), Vec::new());
    for &x in x_list {
        let cfg = config_at(x);
        cfg.validate()?;
        let mut input = CorrelationInput { cfg: cfg.clone(), lambda: widest.lambda.clone(), a: Vec::new() };
        input.set_sequence(cfg.sequence)?;
        let v = match which {
            Which::Pair => shifted_pair_correlation(&input)?,
            Which::Triple => triple_correlation(&input)?,
        };
        report.push_row([("X", x as f64), ("H", cfg.h), ("value", v.value), ("bound", v.bound)]);
        xs.push(x as f64);
        sums.push(v.value);
        bounds.push(v.bound);
    }
    let bound_fit = fit_loglog(&xs, &bounds)?;
    report.set("bound_slope", bound_fit.slope);
    report.set_fit("bound", bound_fit);
    match fit_loglog(&xs, &sums) {
        Ok(fit) => {
            report.set("slope", fit.slope);
            report.set("slope_excess", fit.slope - bound_fit.slope);
            report.set("degenerate", 0.0);
            report.set_fit("sum", fit);
        }
        Err(Error::DegenerateFit(reason)) => {
            report.set("degenerate", 1.0);
            report.note("degenerate_reason", reason);
        }
        Err(e) => return Err(e),
    }
    if let SequenceSpec::Rademacher { seed } = base.sequence {
        report.note("seed", seed);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::windows::mellin_at;
    use num_complex::Complex64;

    fn input(x: u64, h: f64, weights: [u32; 3]) -> CorrelationInput {
        let cfg = ExperimentConfig { weights, ..ExperimentConfig::new(x, h) };
        CorrelationInput::build(&cfg).unwrap()
    }

    /// n-outer, h-inner loop with naive accumulation.
    fn pair_oracle(inp: &CorrelationInput) -> f64 {
        let cfg = &inp.cfg;
        let mut total = 0.0;
        for n in (cfg.x..=2 * cfg.x).rev() {
            for h in 1..(2.0 * cfg.h) as i64 + 2 {
                let w = cfg.window.value(h as f64 / cfg.h);
                if w != 0.0 {
                    total += inp.a[(n - cfg.x) as usize]
                        * w
                        * inp.lambda[0][(n as i64 + h) as usize]
                        * inp.lambda[1][(n as i64 - h) as usize];
                }
            }
        }
        total
    }

    fn triple_oracle(inp: &CorrelationInput, reflect: bool) -> f64 {
        let cfg = &inp.cfg;
        let [l1, l2, l3] = &inp.lambda;
        let (first, last) = if reflect { (l3, l1) } else { (l1, l3) };
        let mut total = 0.0;
        for n in (cfg.x..=2 * cfg.x).rev() {
            for h in -(2.0 * cfg.h) as i64 - 1..=(2.0 * cfg.h) as i64 + 1 {
                let arg = if reflect { -h } else { h } as f64 / cfg.h;
                let w = cfg.window.value(arg);
                if w != 0.0 {
                    let n = n as i64;
                    total += w * first[(n - h) as usize] * l2[n as usize] * last[(n + h) as usize];
                }
            }
        }
        total
    }

    #[test]
    fn shifts_lie_strictly_inside_the_support() {
        let s = shift_weights(&bump_window(), 6.0);
        assert_eq!(s.iter().map(|p| p.0).collect::<Vec<_>>(), (7..=11).collect::<Vec<_>>());
        assert!(shift_weights(&bump_window(), 0.4).is_empty());
    }

    #[test]
    fn config_contract() {
        assert!(matches!(ExperimentConfig::new(20, 0.3).validate(), Err(Error::Precondition(_))));
        assert!(ExperimentConfig::new(20, 7.0).validate().is_err());
        assert!(ExperimentConfig::new(20, 6.0).validate().is_ok());
        let cfg = ExperimentConfig { weights: [12, 14, 12], ..ExperimentConfig::new(20, 6.0) };
        assert!(matches!(cfg.validate(), Err(Error::UnsupportedWeight(14))));
        let json = r#"{"x": 20, "h": 6, "bogus": 1}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(json).is_err());
        let json = r#"{"x": 20, "h": 6, "sequence": {"kind": "rademacher", "seed": 9}}"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.sequence, SequenceSpec::Rademacher { seed: 9 });
        assert_eq!(cfg.h_prime(), 20.0 / 3.0);
    }

    #[test]
    fn pair_matches_reordered_loop() {
        let mut inp = input(20, 6.0, [12, 12, 12]);
        let v = shifted_pair_correlation(&inp).unwrap().value;
        assert!((v - pair_oracle(&inp)).abs() <= 1e-10 * v.abs().max(1e-300));
        inp.set_sequence(SequenceSpec::Rademacher { seed: 4 }).unwrap();
        let v = shifted_pair_correlation(&inp).unwrap().value;
        assert!((v - pair_oracle(&inp)).abs() <= 1e-10 * v.abs());
        let mut inp = input(300, 40.0, [16, 12, 16]);
        inp.set_sequence(SequenceSpec::Lambda3).unwrap();
        let v = shifted_pair_correlation(&inp).unwrap().value;
        assert!((v - pair_oracle(&inp)).abs() <= 1e-10 * v.abs());
    }

    #[test]
    fn zero_sequence_gives_zero() {
        let mut inp = input(50, 10.0, [12, 12, 12]);
        inp.a.iter_mut().for_each(|v| *v = 0.0);
        let v = shifted_pair_correlation(&inp).unwrap();
        assert_eq!((v.value, v.bound_ratio), (0.0, 0.0));
        let mut inp = input(50, 10.0, [12, 12, 12]);
        inp.lambda[1].iter_mut().for_each(|v| *v = 0.0);
        assert_eq!(triple_correlation(&inp).unwrap().value, 0.0);
    }

    #[test]
    fn triple_matches_oracle_and_reflection() {
        let inp = input(100, 20.0, [12, 12, 12]);
        let v = triple_correlation(&inp).unwrap().value;
        assert!((v - triple_oracle(&inp, false)).abs() <= 1e-10 * v.abs());
        let inp = input(100, 20.0, [12, 16, 16]);
        let v = triple_correlation(&inp).unwrap().value;
        assert!((v - triple_oracle(&inp, true)).abs() <= 1e-10 * v.abs());
    }

    #[test]
    fn synthetic_pair_is_h_times_mass_times_x() {
        let cfg = ExperimentConfig { synthetic: Some(Synthetic::Ones), ..ExperimentConfig::new(3000, 200.0) };
        let v = shifted_pair_correlation(&CorrelationInput::build(&cfg).unwrap()).unwrap().value;
        let mass = mellin_at(&bump_window(), Complex64::new(1.0, 0.0)).unwrap().re;
        let expected = 200.0 * mass * 3001.0;
        assert!((v / expected - 1.0).abs() < 1e-10, "{v} vs {expected}");
    }

    #[test]
    fn scaling_synthetic_slope_is_one_plus_theta() {
        let base = ExperimentConfig { synthetic: Some(Synthetic::Ones), ..ExperimentConfig::new(0, 1.0) };
        let xs = [1u64 << 10, 1 << 11, 1 << 12, 1 << 13, 1 << 14];
        let report = scaling_study(&base, &xs, 0.5, Which::Pair).unwrap();
        assert!((report.results["slope"] - 1.5).abs() < 0.05, "{:?}", report.results);
        assert_eq!(report.rows.len(), 5);
    }

    #[test]
    fn scaling_degenerate_cases() {
        let base = ExperimentConfig { synthetic: Some(Synthetic::Zero), ..ExperimentConfig::new(0, 1.0) };
        let xs = [64u64, 128, 256, 512];
        let report = scaling_study(&base, &xs, 0.5, Which::Triple).unwrap();
        assert_eq!(report.results["degenerate"], 1.0);
        assert!(!report.fits.contains_key("sum"));
        assert!(matches!(scaling_study(&base, &xs[..3], 0.5, Which::Pair), Err(Error::DegenerateFit(_))));
    }
}
