//! Sparse Bregman decoding: choose `k*`, keep the top-`k*` entries of `p`
//! and renormalize them.
//!
//! For a fixed `k` the best support is always a top-`k` set, so the
//! regularized objective reduces to the one-dimensional
//! `cost(k) = Div((T(p[1:k]), 0), p) + λk`. That function is discretely
//! convex, so `k*` is the first `k` with `cost(k+1) >= cost(k)` and can be
//! found by binary or exponential search.

use std::cell::RefCell;
use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generators::{Generator, GeneratorKind, Slope};
use crate::renorm_dual::renorm_dual;
use crate::renorm_primal::renorm_primal;
use crate::rootfind::Tolerances;
use crate::simplex::{ProbVector, RenormResult, SubProbVector};

/// Where the estimate sits in the divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// `D(p̂, p)`.
    #[default]
    Primal,
    /// `D(p, p̂)`.
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Search {
    #[default]
    Binary,
    Exponential,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeConfig {
    pub mode: Mode,
    pub generator: Generator,
    /// Price paid per kept entry.
    pub lambda: f64,
    /// Upper bound on `k*`; `None` means `V`.
    pub k_max: Option<usize>,
    pub search: Search,
    pub tol: Tolerances,
    /// Softmax temperature, only used when decoding logits.
    pub temperature: f64,
}

impl DecodeConfig {
    pub fn new(mode: Mode, generator: Generator, lambda: f64) -> Self {
        Self {
            mode,
            generator,
            lambda,
            k_max: None,
            search: Search::default(),
            tol: Tolerances::default(),
            temperature: 1.0,
        }
    }

    pub fn primal(generator: Generator, lambda: f64) -> Self {
        Self::new(Mode::Primal, generator, lambda)
    }

    pub fn dual(generator: Generator, lambda: f64) -> Self {
        Self::new(Mode::Dual, generator, lambda)
    }

    pub fn with_k_max(mut self, k_max: Option<usize>) -> Self {
        self.k_max = k_max;
        self
    }

    pub fn with_search(mut self, search: Search) -> Self {
        self.search = search;
        self
    }

    pub fn with_tol(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Input(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Input(format!(
                "temperature must be finite and > 0, got {}",
                self.temperature
            )));
        }
        if self.k_max == Some(0) {
            return Err(Error::Range {
                what: "k_max",
                value: 0,
                lo: 1,
                hi: usize::MAX,
            });
        }
        if !(self.tol.outer > 0.0 && self.tol.inner > 0.0) {
            return Err(Error::Input("tolerances must be positive".into()));
        }
        validate_cost_generator(self.mode, &self.generator)
    }

    /// The effective cap on `k` for a vector of length `v`.
    pub fn k_cap(&self, v: usize) -> usize {
        self.k_max.map_or(v, |m| m.min(v))
    }
}

/// Generators for which `cost(k)` is defined in the given mode.
fn validate_cost_generator(mode: Mode, g: &Generator) -> Result<()> {
    if g.is_limit() {
        return Err(Error::UnsupportedGenerator(format!(
            "{g} has no divergence; it is only available as a fixed-k renormalizer"
        )));
    }
    match mode {
        Mode::Primal => match g.kind() {
            GeneratorKind::AlphaEntropy(a) if a < 0.0 => Err(Error::Generator(format!(
                "{g}: alpha < 0 makes every sparse support infinitely costly"
            ))),
            _ => Ok(()),
        },
        Mode::Dual if g.is_dual_valid() => Ok(()),
        Mode::Dual => Err(Error::Generator(format!("{g} is not dual valid (needs alpha > 1)"))),
    }
}

/// Renormalizes a kept sub-vector in the given mode.
pub fn renormalize(mode: Mode, g: &Generator, x: &SubProbVector, tol: &Tolerances) -> Result<RenormResult> {
    match mode {
        Mode::Primal => renorm_primal(g, x, tol),
        Mode::Dual => renorm_dual(g, x, tol),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub k_star: usize,
    /// Kept indices, ascending.
    pub support: Vec<usize>,
    /// Full-length distribution, zero outside `support`.
    pub sparse_probs: Vec<f64>,
    pub nu: f64,
    pub cost: f64,
    /// The cap `min(k_max, V)` the search ran under.
    pub k_cap: usize,
    /// `(k, cost(k))` for every `k` the search evaluated, ascending in `k`.
    pub cost_curve: Option<Vec<(usize, f64)>>,
}

impl DecodeResult {
    /// `k*` hit a `k_max` that is below `V`.
    pub fn is_capped(&self) -> bool {
        self.k_star == self.k_cap && self.k_cap < self.sparse_probs.len()
    }

    /// Kept probabilities in `support` order.
    pub fn support_probs(&self) -> Vec<f64> {
        self.support.iter().map(|&i| self.sparse_probs[i]).collect()
    }
}

/// Renormalized top-`k` distribution for a fixed `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopK {
    pub support: Vec<usize>,
    pub sparse_probs: Vec<f64>,
    pub nu: f64,
}

fn by_prob_desc(p: &[f64]) -> impl Fn(&usize, &usize) -> std::cmp::Ordering + '_ {
    move |&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b))
}

/// The `k` largest entries of `p` in descending order with their indices.
/// Ties go to the lower index.
pub fn select_top_k(p: &ProbVector, k: usize) -> Result<(SubProbVector, Vec<usize>)> {
    let probs = p.as_slice();
    let v = probs.len();
    if k == 0 || k > v {
        return Err(Error::Range {
            what: "k",
            value: k,
            lo: 1,
            hi: v,
        });
    }
    let mut idx: Vec<usize> = (0..v).collect();
    let cmp = by_prob_desc(probs);
    if k < v {
        idx.select_nth_unstable_by(k - 1, &cmp);
        idx.truncate(k);
    }
    idx.sort_unstable_by(&cmp);
    let values = idx.iter().map(|&i| probs[i]).collect();
    Ok((SubProbVector::new(values)?, idx))
}

/// Generalized top-`k` decoding: keep the top `k` entries and renormalize
/// them with the map of `mode`/`g`. Limit generators are allowed here.
pub fn top_k_renormalize(p: &ProbVector, k: usize, mode: Mode, g: &Generator, tol: &Tolerances) -> Result<TopK> {
    if mode == Mode::Dual && !g.is_dual_valid() {
        return Err(Error::Generator(format!("{g} is not dual valid (needs alpha > 1)")));
    }
    let (x, idx) = select_top_k(p, k)?;
    let r = renormalize(mode, g, &x, tol)?;
    let (support, sparse_probs) = scatter(p.len(), &idx, &r.probs);
    Ok(TopK {
        support,
        sparse_probs,
        nu: r.nu,
    })
}

fn scatter(v: usize, idx: &[usize], values: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let mut dense = vec![0.0; v];
    for (&i, &q) in idx.iter().zip(values) {
        dense[i] = q;
    }
    let mut support = idx.to_vec();
    support.sort_unstable();
    (support, dense)
}

/// Evaluates `cost(k)` from one descending sort of `p` and precomputed tail
/// sums of the dropped-coordinate divergences.
pub struct CostModel<'a> {
    cfg: &'a DecodeConfig,
    sorted: Vec<f64>,
    order: Vec<usize>,
    /// `tail[k]` is the divergence of the coordinates after the first `k`.
    tail: Vec<f64>,
    memo: RefCell<BTreeMap<usize, f64>>,
}

impl<'a> CostModel<'a> {
    pub fn new(p: &ProbVector, cfg: &'a DecodeConfig) -> Result<Self> {
        cfg.validate()?;
        let probs = p.as_slice();
        // Entries are nonnegative, so their bit patterns sort like the values;
        // packing the complement with the index gives descending order with
        // ties to the lower index in a single integer sort. Adding 0 folds -0 into +0.
        let mut keys: Vec<u128> = probs
            .iter()
            .enumerate()
            .map(|(i, &q)| ((!(q + 0.0).to_bits() as u128) << 64) | i as u128)
            .collect();
        keys.sort_unstable();
        let order: Vec<usize> = keys.iter().map(|&key| key as u64 as usize).collect();
        let sorted: Vec<f64> = order.iter().map(|&i| probs[i]).collect();

        let g = &cfg.generator;
        let v = sorted.len();
        let mut tail = vec![0.0; v + 1];
        for j in (0..v).rev() {
            let t = match cfg.mode {
                Mode::Primal => g.primal_tail(sorted[j]),
                Mode::Dual => g.dual_tail(sorted[j]),
            };
            tail[j] = tail[j + 1] + t;
        }
        Ok(Self {
            cfg,
            sorted,
            order,
            tail,
            memo: RefCell::new(BTreeMap::new()),
        })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn k_cap(&self) -> usize {
        self.cfg.k_cap(self.len())
    }

    /// Original indices in descending-probability order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `cost(k)` together with the renormalized top-`k` entries.
    pub fn evaluate(&self, k: usize) -> Result<(f64, RenormResult)> {
        let v = self.len();
        if k == 0 || k > v {
            return Err(Error::Range {
                what: "k",
                value: k,
                lo: 1,
                hi: v,
            });
        }
        let g = &self.cfg.generator;
        let x = SubProbVector::new(self.sorted[..k].to_vec())?;
        let r = renormalize(self.cfg.mode, g, &x, &self.cfg.tol)?;
        let head: f64 = match self.cfg.mode {
            Mode::Primal => x.as_slice().iter().zip(&r.probs).map(|(&xi, &t)| divergence(g, t, xi)).sum(),
            Mode::Dual => x.as_slice().iter().zip(&r.probs).map(|(&xi, &t)| divergence(g, xi, t)).sum(),
        };
        let cost = head + self.tail[k] + self.cfg.lambda * k as f64;
        self.memo.borrow_mut().insert(k, cost);
        Ok((cost, r))
    }

    /// Memoized `cost(k)`.
    pub fn cost(&self, k: usize) -> Result<f64> {
        if let Some(&c) = self.memo.borrow().get(&k) {
            return Ok(c);
        }
        self.evaluate(k).map(|(c, _)| c)
    }

    /// Every `(k, cost)` evaluated so far, ascending in `k`.
    pub fn evaluated(&self) -> Vec<(usize, f64)> {
        self.memo.borrow().iter().map(|(&k, &c)| (k, c)).collect()
    }

    pub fn evaluations(&self) -> usize {
        self.memo.borrow().len()
    }
}

/// `d(a, b)` for values already known to lie in `[0, 1]`.
fn divergence(g: &Generator, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    match g.slope_unchecked(b) {
        Slope::Finite(fb) => g.div_with_slope(a, b, fb),
        Slope::NegInfinity => f64::INFINITY,
    }
}

/// `cost(k)` for a single `k`, with the renormalized top-`k` entries in
/// descending order.
pub fn cost_at_k(p: &ProbVector, k: usize, cfg: &DecodeConfig) -> Result<(f64, RenormResult)> {
    CostModel::new(p, cfg)?.evaluate(k)
}

/// Outcome of a `k*` search.
#[derive(Debug, Clone, PartialEq)]
pub struct KSearch {
    pub k: usize,
    pub cost: f64,
    pub evaluations: usize,
}

/// Smallest minimizer of `cost` over `[1, min(k_max, V)]`.
pub fn find_k_star(p: &ProbVector, cfg: &DecodeConfig) -> Result<usize> {
    let model = CostModel::new(p, cfg)?;
    Ok(search_k_star(&model, cfg.search)?.k)
}

pub fn search_k_star(model: &CostModel<'_>, search: Search) -> Result<KSearch> {
    let cap = model.k_cap();
    let k = match search {
        Search::Linear => linear(model, cap)?,
        Search::Binary => binary(model, cap)?,
        Search::Exponential => exponential(model, cap)?,
    };
    Ok(KSearch {
        k,
        cost: model.cost(k)?,
        evaluations: model.evaluations(),
    })
}

fn linear(model: &CostModel<'_>, cap: usize) -> Result<usize> {
    let mut best = (1, model.cost(1)?);
    for k in 2..=cap {
        let c = model.cost(k)?;
        if c < best.1 {
            best = (k, c);
        }
    }
    Ok(best.0)
}

/// `cost(k+1) >= cost(k)`; true at the cap. Under discrete convexity this is
/// false then true, and the first true `k` is the smallest minimizer.
fn turns_up(model: &CostModel<'_>, k: usize, cap: usize) -> Result<bool> {
    if k >= cap {
        return Ok(true);
    }
    Ok(model.cost(k + 1)? >= model.cost(k)?)
}

fn binary(model: &CostModel<'_>, cap: usize) -> Result<usize> {
    if turns_up(model, 1, cap)? {
        return Ok(1);
    }
    if !turns_up(model, cap - 1, cap)? {
        return Ok(cap);
    }
    // turns_up(lo) is false and turns_up(hi) is true.
    let (mut lo, mut hi) = (1, cap - 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if turns_up(model, mid, cap)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn exponential(model: &CostModel<'_>, cap: usize) -> Result<usize> {
    // lo = 0 stands for "nothing known yet".
    let mut lo = 0;
    let mut probe = 1;
    let hi = loop {
        if probe >= cap {
            break cap;
        }
        if turns_up(model, probe, cap)? {
            break probe;
        }
        lo = probe;
        probe *= 2;
    };
    let mut hi = hi;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if turns_up(model, mid, cap)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Full decode: search `k*`, renormalize the top `k*` entries and scatter
/// them back to the original indices.
pub fn decode(p: &ProbVector, cfg: &DecodeConfig) -> Result<DecodeResult> {
    let model = CostModel::new(p, cfg)?;
    let found = search_k_star(&model, cfg.search)?;
    let (cost, r) = model.evaluate(found.k)?;
    let (support, sparse_probs) = scatter(model.len(), &model.order()[..found.k], &r.probs);
    Ok(DecodeResult {
        k_star: found.k,
        support,
        sparse_probs,
        nu: r.nu,
        cost,
        k_cap: model.k_cap(),
        cost_curve: Some(model.evaluated()),
    })
}

/// Decodes independent vectors in parallel; output order matches input.
pub fn decode_batch(ps: &[ProbVector], cfg: &DecodeConfig) -> Vec<Result<DecodeResult>> {
    ps.par_iter().map(|p| decode(p, cfg)).collect()
}

/// The cost function over an inclusive range of `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostCurve {
    pub entries: Vec<(usize, f64)>,
}

impl CostCurve {
    /// `cost(k+1) - 2 cost(k) + cost(k-1)` for consecutive interior points.
    pub fn second_differences(&self) -> Vec<(usize, f64)> {
        self.entries
            .windows(3)
            .filter(|w| w[0].0 + 1 == w[1].0 && w[1].0 + 1 == w[2].0)
            .map(|w| (w[1].0, w[2].1 - 2.0 * w[1].1 + w[0].1))
            .collect()
    }

    pub fn is_discretely_convex(&self, tol: f64) -> bool {
        self.second_differences().iter().all(|&(_, d2)| d2 >= -tol)
    }
}

/// `cost(k)` for every `k` in `lo..=hi`.
pub fn cost_curve(p: &ProbVector, cfg: &DecodeConfig, lo: usize, hi: usize) -> Result<CostCurve> {
    let model = CostModel::new(p, cfg)?;
    if lo == 0 || hi > model.len() || lo > hi {
        return Err(Error::Range {
            what: "k range end",
            value: if lo == 0 { lo } else { hi },
            lo: 1,
            hi: model.len(),
        });
    }
    let entries = (lo..=hi)
        .map(|k| model.cost(k).map(|c| (k, c)))
        .collect::<Result<_>>()?;
    Ok(CostCurve { entries })
}

/// Numerically stable softmax of `logits / temperature`.
pub fn logits_to_probs(logits: &[f64], temperature: f64) -> Result<ProbVector> {
    if logits.is_empty() {
        return Err(Error::Input("logits are empty".into()));
    }
    if let Some((i, v)) = logits.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Input(format!("logit {i} = {v} is not finite")));
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Input(format!("temperature must be finite and > 0, got {temperature}")));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| ((l - max) / temperature).exp()).collect();
    let total: f64 = exps.iter().sum();
    ProbVector::new(exps.into_iter().map(|e| e / total).collect())
}

/// Log-probabilities on the support and `-∞` elsewhere, so that a softmax of
/// the output reproduces the decoded distribution.
pub fn logits_processor(logits: &[f64], cfg: &DecodeConfig) -> Result<Vec<f64>> {
    let p = logits_to_probs(logits, cfg.temperature)?;
    let r = decode(&p, cfg)?;
    let mut out = vec![f64::NEG_INFINITY; logits.len()];
    for &i in &r.support {
        out[i] = r.sparse_probs[i].ln();
    }
    Ok(out)
}

/// One inverse-CDF draw from the decoded distribution.
pub fn sample(result: &DecodeResult, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw(result, &mut rng)
}

/// `n` draws from a single seeded stream.
pub fn sample_n(result: &DecodeResult, seed: u64, n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| draw(result, &mut rng)).collect()
}

fn draw<R: Rng>(result: &DecodeResult, rng: &mut R) -> usize {
    let total: f64 = result.support.iter().map(|&i| result.sparse_probs[i]).sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for &i in &result.support {
        acc += result.sparse_probs[i];
        if u < acc {
            return i;
        }
    }
    // Rounding can leave u a hair above the final cumulative sum.
    *result
        .support
        .iter()
        .rev()
        .find(|&&i| result.sparse_probs[i] > 0.0)
        .unwrap_or(&result.support[0])
}
