//! Reproduction suite: every headline claim checked at a finite bound and
//! collected into a versioned JSON report.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{sieve, IntPolynomial, PrimeTable};
use crate::constructions::{
    congruence_sentence, cyclotomic_sentence, poly_root_sentence, power_residue_sentence, psi_sentence,
    supexp_family,
};
use crate::density::{
    alternating_set, density_profile, fi_spectrum, is_h_thin, laux_check, oscillation_report, pnt_bounds_check,
    surrogate_log_thinness, DensityFunction, Sequence,
};
use crate::error::{Error, Result};
use crate::eval::{eval_sentence_with, satisfying_relation, Engine, FastConfig, RingContext};
use crate::logic::random::FormulaGen;
use crate::logic::Sentence;
use crate::spectra::{exceptional_moduli, lagarias_in_b, spectrum, Spectrum, SpectrumOptions};

pub const REPORT_SCHEMA: &str = "ringspectra.verification/1";

pub const CLAIM_COUNT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub id: String,
    pub anchor: String,
    pub status: ClaimStatus,
    pub measured: Value,
    pub exceptions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub suite: String,
    pub bound: u64,
    pub seed: u64,
    pub claims: Vec<ClaimResult>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn claim(&self, id: &str) -> Option<&ClaimResult> {
        self.claims.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Bound for the spectrum sweeps.
    pub bound: u64,
    pub workers: usize,
    /// Seed of the random formulas in the engine comparison.
    pub seed: u64,
    /// Claim ids to run; `None` runs all.
    pub only: Option<BTreeSet<String>>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { bound: 10_000, workers: 1, seed: 20_240_601, only: None }
    }
}

/// `(id, anchor)` of every claim, in report order.
pub const CLAIMS: [(&str, &str); CLAIM_COUNT] = [
    ("1", "quadratic reciprocity spectra"),
    ("2", "boolean combination of quadratic spectra"),
    ("3", "cyclotomic spectra"),
    ("4", "Lagarias criterion and exceptional moduli"),
    ("5", "fraction-order congruence sentences"),
    ("6", "power residue sentences"),
    ("7", "spectrum without natural density"),
    ("8", "alternating set oscillation"),
    ("9", "thin sequences and growth lemma"),
    ("10", "super-exponential formulas"),
    ("11", "primes of the form a^2 + b^4"),
    ("12", "engine equivalence"),
    ("13", "prime counting bracket"),
    ("14", "determinism across worker counts"),
];

struct Outcome {
    pass: bool,
    measured: Value,
    exceptions: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, measured: Value, exceptions: Vec<String>) -> Self {
        Outcome { pass, measured, exceptions }
    }
}

fn listed(xs: impl IntoIterator<Item = u64>) -> Vec<String> {
    xs.into_iter().map(|x| x.to_string()).collect()
}

struct Ctx {
    table: Arc<PrimeTable>,
    opts: SpectrumOptions,
    seed: u64,
}

impl Ctx {
    fn sentence_spectrum(&self, s: &Sentence) -> Result<Spectrum> {
        spectrum(s, self.table.clone(), &self.opts)
    }

    fn poly_sentence(&self, text: &str) -> Result<Spectrum> {
        let f: IntPolynomial = text.parse()?;
        self.sentence_spectrum(&poly_root_sentence(&f)?)
    }

    fn with_workers(&self, workers: usize) -> Ctx {
        Ctx {
            table: self.table.clone(),
            opts: SpectrumOptions { workers, ..self.opts },
            seed: self.seed,
        }
    }
}

fn diff_against(s: &Spectrum, oracle: impl Fn(u64) -> bool) -> Vec<u64> {
    s.table().primes().iter().copied().filter(|&p| s.contains(p) != oracle(p)).collect()
}

fn claim_quadratic(c: &Ctx) -> Result<Outcome> {
    let plus = c.poly_sentence("x^2 + 1")?;
    let minus = c.poly_sentence("x^2 - 2")?;
    let ex_plus = diff_against(&plus, |p| p == 2 || p % 4 == 1);
    let ex_minus = diff_against(&minus, |p| p == 2 || p % 8 == 1 || p % 8 == 7);
    let measured = json!({
        "x^2+1": { "members": plus.count(), "exceptions": ex_plus.len() },
        "x^2-2": { "members": minus.count(), "exceptions": ex_minus.len() },
    });
    let pass = ex_plus.is_empty() && ex_minus.is_empty();
    Ok(Outcome::new(pass, measured, listed(ex_plus.into_iter().chain(ex_minus))))
}

fn claim_boolean(c: &Ctx) -> Result<Outcome> {
    let plus = c.poly_sentence("x^2 + 1")?;
    let minus = c.poly_sentence("x^2 - 2")?;
    let combo = minus.complement().intersection(&plus)?;
    let exceptions = diff_against(&combo, |p| p % 8 == 5);
    let measured = json!({ "members": combo.count(), "exceptions": exceptions.len() });
    Ok(Outcome::new(exceptions.iter().all(|&p| p == 2), measured, listed(exceptions)))
}

fn claim_cyclotomic(c: &Ctx) -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut members = Vec::new();
    for n in 1..=20u64 {
        let s = c.sentence_spectrum(&cyclotomic_sentence(n)?)?;
        members.push(s.count());
        for &p in c.table.primes() {
            let ok = if p % n == 1 % n { s.contains(p) } else { !s.contains(p) || n % p == 0 };
            if !ok {
                bad.push(format!("n={n},p={p}"));
            }
        }
    }
    Ok(Outcome::new(bad.is_empty(), json!({ "members_by_n": members }), bad))
}

fn claim_lagarias() -> Result<Outcome> {
    let moduli = exceptional_moduli(30);
    let two_five = lagarias_in_b(2, 5)?;
    let five_eight = lagarias_in_b(5, 8)?;
    let pass = moduli == [1, 2, 3, 4, 6, 8, 12, 24] && !two_five && five_eight;
    let measured = json!({ "exceptional_moduli": moduli, "in_b(2,5)": two_five, "in_b(5,8)": five_eight });
    Ok(Outcome::new(pass, measured, Vec::new()))
}

fn claim_congruence(c: &Ctx) -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut checked = 0usize;
    let mut hits = 0usize;
    for d in 2..=12u64 {
        for a in 1..d {
            let s = c.sentence_spectrum(&congruence_sentence(a, d)?)?;
            for &p in c.table.primes().iter().filter(|&&p| p > d) {
                checked += 1;
                let member = s.contains(p);
                hits += usize::from(member);
                if member != (p % d == a) {
                    bad.push(format!("a={a},d={d},p={p}"));
                }
            }
        }
    }
    Ok(Outcome::new(bad.is_empty(), json!({ "checked": checked, "satisfied": hits }), bad))
}

fn claim_power_residue(c: &Ctx) -> Result<Outcome> {
    let mut pass = true;
    let mut measured = Vec::new();
    let mut exceptions = Vec::new();
    for (n, d, r) in [(3u64, 3u64, 1u64), (4, 4, 1), (3, 6, 4)] {
        let nd = n * d;
        let s = c.sentence_spectrum(&power_residue_sentence(n, d, r)?)?;
        let ex = diff_against(&s, |p| p % nd == (r * n + 1) % nd);
        pass &= ex.iter().all(|&p| p <= nd);
        measured.push(json!({ "n": n, "d": d, "r": r, "members": s.count(), "exceptions": ex }));
        exceptions.extend(ex.iter().map(|p| format!("n={n},d={d},r={r},p={p}")));
    }
    Ok(Outcome::new(pass, Value::Array(measured), exceptions))
}

fn claim_psi(c: &Ctx) -> Result<Outcome> {
    let q = 3u64;
    let s = c.sentence_spectrum(&psi_sentence(q)?)?;
    let in_window = |p: u64| {
        let mut lo = q * q;
        while lo < p {
            if p < lo * q {
                return true;
            }
            lo *= q * q;
        }
        false
    };
    let ex: Vec<u64> = diff_against(&s, in_window).into_iter().filter(|&p| p > q).collect();
    Ok(Outcome::new(ex.is_empty(), json!({ "q": q, "members": s.count() }), listed(ex)))
}

fn claim_oscillation() -> Result<Outcome> {
    let table = Arc::new(sieve(150_000)?);
    let seq = Sequence::geometric(19, 5)?;
    let h_set = alternating_set(&seq, table)?;
    let id = oscillation_report(&h_set, &DensityFunction::identity(), &seq, 3)?;
    let lg = oscillation_report(&h_set, &DensityFunction::log(), &seq, 3)?;
    let at = |r: &crate::density::OscillationReport, n| r.ratio_at(n).unwrap_or(f64::NAN);
    let (i3, i4, l3, l4) = (at(&id, 3), at(&id, 4), at(&lg, 3), at(&lg, 4));
    let gap = id.gap().unwrap_or(f64::NAN);
    let pass = i3 >= 0.85 && i4 <= 0.10 && l3 >= 0.85 && l4 >= 0.85 && gap >= 0.5;
    let measured = json!({
        "identity": { "s3": i3, "s4": i4, "gap": gap },
        "log": { "s3": l3, "s4": l4 },
    });
    let mut exceptions = Vec::new();
    for (name, v, ok) in [
        ("identity@s3", i3, i3 >= 0.85),
        ("identity@s4", i4, i4 <= 0.10),
        ("log@s3", l3, l3 >= 0.85),
        ("log@s4", l4, l4 >= 0.85),
    ] {
        if !ok {
            exceptions.push(format!("{name}={v:.4}"));
        }
    }
    Ok(Outcome::new(pass, measured, exceptions))
}

fn claim_thin() -> Result<Outcome> {
    let table = sieve(150_000)?;
    let seq = Sequence::geometric(19, 4)?.from_index(2);
    let laux = laux_check(&seq, 18.5, &table)?;
    let thin = is_h_thin(&seq, &DensityFunction::identity(), 3.05, &table, 0)?;
    let tower = surrogate_log_thinness(&Sequence::double_exponential(7, 6)?, 3.05, 2)?;
    let measured = json!({
        "laux_premise": laux.premise,
        "laux_conclusion": laux.conclusion,
        "identity_thin": thin,
        "surrogate_log_thin_7": tower.holds,
    });
    Ok(Outcome::new(laux.holds() && thin, measured, Vec::new()))
}

fn unary_set(m: u64, f: &crate::logic::Formula) -> Result<Vec<u64>> {
    let rel = satisfying_relation(&RingContext::new(m)?, f, Engine::Fast, &FastConfig::default())?;
    Ok(rel.rows().map(|r| r[0] as u64).collect())
}

fn claim_supexp() -> Result<Outcome> {
    let two = unary_set(100_000, &supexp_family(2)?.sup_exp)?;
    let three = unary_set(30, &supexp_family(3)?.sup_exp)?;
    let want_two = [2u64, 4, 16, 65_536];
    let want_three = [3u64, 27];
    let mut exceptions = Vec::new();
    let sym = |got: &[u64], want: &[u64], tag: &str, out: &mut Vec<String>| {
        for x in got.iter().filter(|x| !want.contains(x)) {
            out.push(format!("{tag}: unexpected {x}"));
        }
        for x in want.iter().filter(|x| !got.contains(x)) {
            out.push(format!("{tag}: missing {x}"));
        }
    };
    sym(&two, &want_two, "q=2,m=100000", &mut exceptions);
    sym(&three, &want_three, "q=3,m=30", &mut exceptions);
    let measured = json!({ "q=2,m=100000": two, "q=3,m=30": three });
    Ok(Outcome::new(exceptions.is_empty(), measured, exceptions))
}

fn claim_fi() -> Result<Outcome> {
    let fi = fi_spectrum(1_000_000)?;
    let samples = [1_000u64, 10_000, 100_000, 1_000_000];
    let profile = density_profile(&fi, &DensityFunction::identity(), &samples)?;
    let scaled: Vec<f64> = samples.iter().zip(&profile.pi_s).map(|(&t, &c)| c as f64 / (t as f64).powf(0.75)).collect();
    let decay = profile.ratios[3] < profile.ratios[0] / 2.0;
    let pass = scaled.iter().all(|&v| v <= 2.0) && decay;
    let measured = json!({ "counts": profile.pi_s, "scaled_counts": scaled, "ratios": profile.ratios });
    Ok(Outcome::new(pass, measured, Vec::new()))
}

fn claim_engines(c: &Ctx) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let gen = FormulaGen { max_depth: 5, closed: true, max_literal: 5 };
    let formulas: Vec<Sentence> =
        (0..500).map(|_| Sentence::new(gen.generate(&mut rng))).collect::<Result<_>>()?;
    let mut bad = Vec::new();
    let mut cases = 0usize;
    for (i, s) in formulas.iter().enumerate() {
        for m in 1..=40u64 {
            cases += 1;
            match eval_sentence_with(&RingContext::new(m)?, s, Engine::Both, &FastConfig::default()) {
                Ok(_) => {}
                Err(Error::EngineMismatch { .. }) => bad.push(format!("formula {i}, m={m}: {}", s.formula())),
                Err(e) => bad.push(format!("formula {i}, m={m}: {e}")),
            }
        }
    }
    Ok(Outcome::new(bad.is_empty(), json!({ "cases": cases, "disagreements": bad.len() }), bad))
}

fn claim_pnt() -> Result<Outcome> {
    let table = sieve(100_000)?;
    let first_bad = crate::density::first_pnt_violation(&table, 17);
    let ok = pnt_bounds_check(&table, 17);
    Ok(Outcome::new(ok, json!({ "from": 17, "to": 100_000 }), listed(first_bad)))
}

fn run_one(id: &str, c: &Ctx) -> Result<Outcome> {
    match id {
        "1" => claim_quadratic(c),
        "2" => claim_boolean(c),
        "3" => claim_cyclotomic(c),
        "4" => claim_lagarias(),
        "5" => claim_congruence(c),
        "6" => claim_power_residue(c),
        "7" => claim_psi(c),
        "8" => claim_oscillation(),
        "9" => claim_thin(),
        "10" => claim_supexp(),
        "11" => claim_fi(),
        "12" => claim_engines(c),
        "13" => claim_pnt(),
        other => Err(Error::invalid(format!("unknown claim `{other}`"))),
    }
}

fn result(id: &str, anchor: &str, outcome: Result<Outcome>) -> ClaimResult {
    let (status, measured, exceptions) = match outcome {
        Ok(o) => (if o.pass { ClaimStatus::Pass } else { ClaimStatus::Fail }, o.measured, o.exceptions),
        Err(e) => (ClaimStatus::Fail, json!({ "error": e.to_string() }), Vec::new()),
    };
    ClaimResult { id: id.to_string(), anchor: anchor.to_string(), status, measured, exceptions }
}

fn skipped(id: &str, anchor: &str) -> ClaimResult {
    ClaimResult {
        id: id.to_string(),
        anchor: anchor.to_string(),
        status: ClaimStatus::Skipped,
        measured: Value::Null,
        exceptions: Vec::new(),
    }
}

/// Claims whose outcome should not depend on the worker count.
const DETERMINISM_SCOPE: [&str; 11] = ["1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "11"];

/// Runs the selected claims. Spectrum sweeps use `config.bound`; the
/// remaining claims carry their own fixed scales.
pub fn verify_suite(config: &VerifyConfig) -> Result<VerificationReport> {
    if config.bound < 100 {
        return Err(Error::invalid("the suite needs a bound of at least 100"));
    }
    if config.workers == 0 {
        return Err(Error::invalid("worker count must be at least 1"));
    }
    if let Some(only) = &config.only {
        if let Some(bad) = only.iter().find(|id| !CLAIMS.iter().any(|c| c.0 == id.as_str())) {
            return Err(Error::invalid(format!("unknown claim `{bad}`")));
        }
    }
    let selected = |id: &str| config.only.as_ref().is_none_or(|o| o.contains(id));
    let ctx = Ctx {
        table: Arc::new(sieve(config.bound)?),
        opts: SpectrumOptions { workers: config.workers, ..Default::default() },
        seed: config.seed,
    };
    let mut claims = Vec::with_capacity(CLAIM_COUNT);
    for (id, anchor) in &CLAIMS[..CLAIM_COUNT - 1] {
        claims.push(if selected(id) { result(id, anchor, run_one(id, &ctx)) } else { skipped(id, anchor) });
    }
    let (id14, anchor14) = CLAIMS[CLAIM_COUNT - 1];
    if selected(id14) {
        let other = if config.workers == 1 { 8 } else { 1 };
        let alt = ctx.with_workers(other);
        let mut differing = Vec::new();
        let mut compared = 0usize;
        for (i, id) in DETERMINISM_SCOPE.iter().enumerate() {
            if !selected(id) {
                continue;
            }
            compared += 1;
            let again = result(id, CLAIMS[i].1, run_one(id, &alt));
            if again != claims[i] {
                differing.push(id.to_string());
            }
        }
        let mut counts = [config.workers, other];
        counts.sort_unstable();
        let measured = json!({ "worker_counts": counts, "claims_compared": compared });
        let status = if differing.is_empty() { ClaimStatus::Pass } else { ClaimStatus::Fail };
        claims.push(ClaimResult {
            id: id14.to_string(),
            anchor: anchor14.to_string(),
            status,
            measured,
            exceptions: differing,
        });
    } else {
        claims.push(skipped(id14, anchor14));
    }
    let tally = |s| claims.iter().filter(|c| c.status == s).count();
    Ok(VerificationReport {
        schema: REPORT_SCHEMA.to_string(),
        suite: "paper".to_string(),
        bound: config.bound,
        seed: config.seed,
        passed: tally(ClaimStatus::Pass),
        failed: tally(ClaimStatus::Fail),
        skipped: tally(ClaimStatus::Skipped),
        claims,
    })
}
