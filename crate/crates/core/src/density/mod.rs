//! Counting functions and h-density measurements of prime sets.
//!
//! All quantities are finite-horizon measurements: profiles report ratios
//! at sample points and summarize the tail, they never claim a limit.

mod sequence;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::{sieve, PrimeTable};
use crate::error::{Error, Result};
use crate::spectra::Spectrum;

pub use sequence::{Sequence, SequenceKind};

#[derive(Clone)]
enum Shape {
    Identity,
    Log,
    LogLog,
    Table(Vec<(f64, f64)>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// An increasing unbounded weight `h` used to compare counting functions.
#[derive(Clone)]
pub struct DensityFunction {
    name: String,
    shape: Shape,
    semi_additive_from: Option<f64>,
}

impl fmt::Debug for DensityFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityFunction")
            .field("name", &self.name)
            .field("semi_additive_from", &self.semi_additive_from)
            .finish()
    }
}

impl DensityFunction {
    pub fn identity() -> Self {
        DensityFunction { name: "identity".into(), shape: Shape::Identity, semi_additive_from: Some(0.0) }
    }

    pub fn log() -> Self {
        DensityFunction { name: "log".into(), shape: Shape::Log, semi_additive_from: Some(2.0) }
    }

    pub fn loglog() -> Self {
        DensityFunction {
            name: "loglog".into(),
            shape: Shape::LogLog,
            semi_additive_from: Some(std::f64::consts::E.powi(2)),
        }
    }

    /// Piecewise-linear interpolation of `(x, h(x))` samples. Both
    /// coordinates must be strictly increasing and `h` positive.
    pub fn from_table(name: impl Into<String>, mut points: Vec<(f64, f64)>) -> Result<Self> {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.len() < 2 {
            return Err(Error::invalid("a table needs at least two points"));
        }
        for w in points.windows(2) {
            if w[0].0 >= w[1].0 || w[0].1 >= w[1].1 {
                return Err(Error::invalid(format!(
                    "table must be strictly increasing, violated between x = {} and x = {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if points[0].1 <= 0.0 || points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::invalid("table values must be finite and positive"));
        }
        Ok(DensityFunction { name: name.into(), shape: Shape::Table(points), semi_additive_from: None })
    }

    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        DensityFunction { name: name.into(), shape: Shape::Custom(Arc::new(f)), semi_additive_from: None }
    }

    pub fn with_semi_additive_from(mut self, bound: f64) -> Self {
        self.semi_additive_from = Some(bound);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The `M` beyond which `h(x + y) <= h(x) + h(y)` is known to hold.
    pub fn semi_additive_from(&self) -> Option<f64> {
        self.semi_additive_from
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = match &self.shape {
            Shape::Identity => x,
            Shape::Log => x.ln(),
            Shape::LogLog => x.ln().ln(),
            Shape::Custom(f) => f(x),
            Shape::Table(points) => {
                let (first, last) = (points[0], points[points.len() - 1]);
                if x < first.0 || x > last.0 {
                    return Err(Error::invalid(format!(
                        "{} is tabulated on [{}, {}], not at {x}",
                        self.name, first.0, last.0
                    )));
                }
                let i = points.partition_point(|p| p.0 <= x).min(points.len() - 1).max(1);
                let ((x0, y0), (x1, y1)) = (points[i - 1], points[i]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        };
        if v.is_nan() {
            return Err(Error::invalid(format!("{} is undefined at {x}", self.name)));
        }
        Ok(v)
    }

    /// Checks positivity and strict increase on a grid.
    pub fn validate(&self, grid: &[f64]) -> Result<()> {
        let mut grid = grid.to_vec();
        grid.sort_by(f64::total_cmp);
        let mut prev: Option<(f64, f64)> = None;
        for &x in &grid {
            let v = self.eval(x)?;
            if v <= 0.0 {
                return Err(Error::invalid(format!("{} is not positive at {x}", self.name)));
            }
            if let Some((px, pv)) = prev {
                if x > px && v <= pv {
                    return Err(Error::invalid(format!("{} is not increasing between {px} and {x}", self.name)));
                }
            }
            prev = Some((x, v));
        }
        Ok(())
    }
}

impl FromStr for DensityFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(DensityFunction::identity()),
            "log" => Ok(DensityFunction::log()),
            "loglog" => Ok(DensityFunction::loglog()),
            other => Err(Error::invalid(format!("unknown h `{other}`, expected identity, log or loglog"))),
        }
    }
}

/// Ratios `h(pi_S(n)) / h(pi(n))` at increasing sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub h: String,
    pub samples: Vec<u64>,
    pub pi_s: Vec<usize>,
    pub pi: Vec<usize>,
    pub ratios: Vec<f64>,
    /// Infimum over the largest quarter of the samples.
    pub tail_inf: f64,
    pub tail_sup: f64,
}

impl DensityProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,pi_S,pi,ratio\n");
        for i in 0..self.samples.len() {
            out.push_str(&format!("{},{},{},{}\n", self.samples[i], self.pi_s[i], self.pi[i], self.ratios[i]));
        }
        out
    }
}

/// `h(count_s) / h(count)`. An empty count gives 0, and negative values of
/// `h` at the numerator are read as 0.
fn ratio(h: &DensityFunction, count_s: usize, count: usize) -> Result<f64> {
    let denom = h.eval(count as f64)?;
    if denom <= 0.0 || !denom.is_finite() {
        return Err(Error::invalid(format!(
            "{}({count}) = {denom} cannot be a denominator; sample larger n",
            h.name()
        )));
    }
    if count_s == 0 {
        return Ok(0.0);
    }
    Ok(h.eval(count_s as f64)?.max(0.0) / denom)
}

fn tail_window(ratios: &[f64]) -> (f64, f64) {
    let k = ratios.len().div_ceil(4).max(1);
    let tail = &ratios[ratios.len().saturating_sub(k)..];
    let inf = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let sup = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (inf, sup)
}

pub fn density_profile(s: &Spectrum, h: &DensityFunction, samples: &[u64]) -> Result<DensityProfile> {
    if samples.is_empty() {
        return Err(Error::invalid("no sample points"));
    }
    if samples.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("sample points must be strictly increasing"));
    }
    let table = s.table();
    let (mut pi_s, mut pi, mut ratios) = (Vec::new(), Vec::new(), Vec::new());
    for &n in samples {
        if n > s.bound() {
            return Err(Error::invalid(format!("sample {n} exceeds the spectrum bound {}", s.bound())));
        }
        let (a, b) = (s.count_upto(n)?, table.pi(n)?);
        ratios.push(ratio(h, a, b)?);
        pi_s.push(a);
        pi.push(b);
    }
    let (tail_inf, tail_sup) = tail_window(&ratios);
    Ok(DensityProfile { h: h.name().to_string(), samples: samples.to_vec(), pi_s, pi, ratios, tail_inf, tail_sup })
}

/// Bracket `(x / (2 log x), 3x / (2 log x))` for the prime counting function.
pub fn pnt_bracket(x: f64) -> (f64, f64) {
    let base = x / x.ln();
    (0.5 * base, 1.5 * base)
}

/// Whether `pi(x)` lies strictly inside [`pnt_bracket`] for every integer
/// `x` from `from` up to the table bound.
pub fn pnt_bounds_check(table: &PrimeTable, from: u64) -> bool {
    first_pnt_violation(table, from).is_none()
}

pub fn first_pnt_violation(table: &PrimeTable, from: u64) -> Option<u64> {
    let from = from.max(2);
    let primes = table.primes();
    let mut count = primes.partition_point(|&p| p < from);
    for x in from..=table.bound() {
        if count < primes.len() && primes[count] == x {
            count += 1;
        }
        let (lo, hi) = pnt_bracket(x as f64);
        let c = count as f64;
        if !(lo < c && c < hi) {
            return Some(x);
        }
    }
    None
}

/// A failure of semi-additivity on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiAdditiveViolation {
    pub x: f64,
    pub y: f64,
    pub kind: ViolationKind,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `h(x + y) > h(x) + h(y)` for `x >= y > M`.
    Sum,
    /// `h(x - y) < h(x) - h(y)` for `x > 2y > 2M`.
    Difference,
}

pub fn semi_additive_check(h: &DensityFunction, bound: f64, grid: &[f64]) -> Result<Vec<SemiAdditiveViolation>> {
    if grid.iter().any(|&g| g <= 0.0 || !g.is_finite()) {
        return Err(Error::invalid("grid values must be positive"));
    }
    let tol = |a: f64, b: f64| 1e-12 * a.abs().max(b.abs()).max(1.0);
    let mut out = Vec::new();
    for &x in grid {
        for &y in grid {
            if y <= bound || x < y {
                continue;
            }
            let (hx, hy) = (h.eval(x)?, h.eval(y)?);
            let lhs = h.eval(x + y)?;
            if lhs > hx + hy + tol(lhs, hx + hy) {
                out.push(SemiAdditiveViolation { x, y, kind: ViolationKind::Sum, lhs, rhs: hx + hy });
            }
            if x > 2.0 * y {
                let lhs = h.eval(x - y)?;
                if lhs < hx - hy - tol(lhs, hx - hy) {
                    out.push(SemiAdditiveViolation { x, y, kind: ViolationKind::Difference, lhs, rhs: hx - hy });
                }
            }
        }
    }
    Ok(out)
}

fn pi_at(table: &PrimeTable, x: u64) -> Result<usize> {
    if x > table.bound() {
        return Err(Error::ResourceLimit(format!(
            "pi({x}) needs a sieve beyond the bound {}",
            table.bound()
        )));
    }
    table.pi(x)
}

/// Whether `r * h(pi(s_n)) < h(pi(s_{n+1}))` for every consecutive pair of
/// materialized terms with `n > skip`.
pub fn is_h_thin(seq: &Sequence, h: &DensityFunction, r: f64, table: &PrimeTable, skip: u32) -> Result<bool> {
    if r <= 3.0 {
        return Err(Error::invalid(format!("thinness needs r > 3, got {r}")));
    }
    let terms: Vec<(u32, u64)> = seq.indexed().filter(|&(n, _)| n > skip).collect();
    let mut values = Vec::with_capacity(terms.len());
    for &(_, s) in &terms {
        values.push(h.eval(pi_at(table, s)? as f64)?);
    }
    Ok(values.windows(2).all(|w| r * w[0] < w[1]))
}

/// Outcome of checking the growth lemma on a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LauxReport {
    pub ratio: f64,
    /// `R * s_n < s_{n+1}` on every consecutive pair.
    pub premise: bool,
    /// `(R / 6) * pi(s_n) < pi(s_{n+1})` on every consecutive pair.
    pub conclusion: bool,
}

impl LauxReport {
    pub fn holds(&self) -> bool {
        self.premise && self.conclusion
    }
}

pub fn laux_check(seq: &Sequence, ratio: f64, table: &PrimeTable) -> Result<LauxReport> {
    if ratio <= 18.0 {
        return Err(Error::invalid(format!("the growth ratio must exceed 18, got {ratio}")));
    }
    let terms = seq.terms();
    let premise = terms.windows(2).all(|w| ratio * (w[0] as f64) < w[1] as f64);
    let mut counts = Vec::with_capacity(terms.len());
    for &s in terms {
        counts.push(pi_at(table, s)? as f64);
    }
    let r = ratio / 6.0;
    let conclusion = counts.windows(2).all(|w| r * w[0] < w[1]);
    Ok(LauxReport { ratio, premise, conclusion })
}

/// Primes of the table in the open intervals `(s_2, s_3), (s_4, s_5), ...`.
/// The sequence must reach past the table bound.
pub fn alternating_set(seq: &Sequence, table: Arc<PrimeTable>) -> Result<Spectrum> {
    let bound = table.bound();
    if !seq.exceeds(bound) {
        return Err(Error::invalid(format!("sequence {} ends before the bound {bound}", seq.description())));
    }
    let mut intervals = Vec::new();
    let mut n = 2;
    while n <= seq.last_index() {
        let lo = match seq.term(n) {
            Some(lo) if lo < bound => lo,
            _ => break,
        };
        let hi = seq.term(n + 1).unwrap_or(u64::MAX);
        intervals.push((lo, hi));
        n += 2;
    }
    Ok(Spectrum::from_fn(table, |p| intervals.iter().any(|&(lo, hi)| lo < p && p < hi)))
}

/// Ratios of a spectrum's profile at the terms of a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub h: String,
    /// `(n, s_n, ratio)` for each term in range.
    pub points: Vec<(u32, u64, f64)>,
    /// Largest ratio at an even index.
    pub low: Option<f64>,
    /// Smallest ratio at an odd index.
    pub high: Option<f64>,
}

impl OscillationReport {
    pub fn ratio_at(&self, n: u32) -> Option<f64> {
        self.points.iter().find(|p| p.0 == n).map(|p| p.2)
    }

    /// `high - low`, when both parities occur.
    pub fn gap(&self) -> Option<f64> {
        Some(self.high? - self.low?)
    }
}

/// Profile of `s` at every term `s_n` with `n >= from_index` and `s_n` at
/// most the spectrum bound.
pub fn oscillation_report(
    s: &Spectrum,
    h: &DensityFunction,
    seq: &Sequence,
    from_index: u32,
) -> Result<OscillationReport> {
    let picked: Vec<(u32, u64)> = seq.indexed().filter(|&(n, t)| n >= from_index && t <= s.bound()).collect();
    if picked.is_empty() {
        return Err(Error::invalid("no sequence terms within the spectrum bound"));
    }
    let samples: Vec<u64> = picked.iter().map(|p| p.1).collect();
    let profile = density_profile(s, h, &samples)?;
    let points: Vec<(u32, u64, f64)> =
        picked.iter().zip(&profile.ratios).map(|(&(n, t), &r)| (n, t, r)).collect();
    let pick = |even: bool| points.iter().filter(move |p| (p.0 % 2 == 0) == even).map(|p| p.2);
    let low = pick(true).reduce(f64::max);
    let high = pick(false).reduce(f64::min);
    Ok(OscillationReport { h: h.name().to_string(), points, low, high })
}

/// Log-thinness of a sequence judged from the prime counting bracket
/// instead of a sieve, for terms too large to enumerate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateThinness {
    pub label: String,
    pub r: f64,
    /// `(n, upper bound of r log pi(s_n), lower bound of log pi(s_{n+1}))`.
    pub pairs: Vec<(u32, f64, f64)>,
    pub holds: bool,
}

/// Checks `r log pi(s_n) < log pi(s_{n+1})` for `from_index <= n < last`,
/// bounding each `pi` by [`pnt_bracket`] evaluated on logarithms. Valid
/// only for terms of at least 17.
pub fn surrogate_log_thinness(seq: &Sequence, r: f64, from_index: u32) -> Result<SurrogateThinness> {
    if r <= 3.0 {
        return Err(Error::invalid(format!("thinness needs r > 3, got {r}")));
    }
    // log pi(x) against log x = L: (L - log L + log c) with c = 1/2 or 3/2.
    let log_pi = |big_l: f64, c: f64| big_l - big_l.ln() + c.ln();
    let mut pairs = Vec::new();
    for n in from_index.max(1)..seq.last_index() {
        let (a, b) = (seq.ln_term(n)?, seq.ln_term(n + 1)?);
        if a < 17f64.ln() {
            return Err(Error::invalid(format!("term {n} is below 17, where the bracket is not valid")));
        }
        pairs.push((n, r * log_pi(a, 1.5), log_pi(b, 0.5)));
    }
    if pairs.is_empty() {
        return Err(Error::invalid("need at least two terms"));
    }
    let holds = pairs.iter().all(|p| p.1 < p.2);
    Ok(SurrogateThinness { label: "surrogate".into(), r, pairs, holds })
}

/// Primes `p <= bound` of the form `a^2 + b^4` with `a, b >= 0`.
pub fn fi_spectrum(bound: u64) -> Result<Spectrum> {
    let table = Arc::new(sieve(bound.max(2))?);
    fi_spectrum_in(table)
}

pub fn fi_spectrum_in(table: Arc<PrimeTable>) -> Result<Spectrum> {
    let bound = table.bound();
    let len = usize::try_from(bound + 1).map_err(|_| Error::invalid("bound too large"))?;
    let mut hit = vec![false; len];
    let mut b = 0u64;
    while b.pow(4) <= bound {
        let rest = bound - b.pow(4);
        let mut a = 0u64;
        while a * a <= rest {
            hit[(a * a + b.pow(4)) as usize] = true;
            a += 1;
        }
        b += 1;
    }
    Ok(Spectrum::from_fn(table, |p| hit[p as usize]))
}
