//! Configurations `γ` and error indicators `J(q, γ)` with evaluation
//! accounting.

use std::collections::HashSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::eim::{EimBasis, ParamFunctionFamily};
use crate::error::{Error, Result};
use crate::geometry::ParamBox;
use crate::rbm::{ReducedBasis, SnapshotProvider};

fn key_of(p: &[f64]) -> Vec<u64> {
    // Normalize -0.0 so that it matches 0.0.
    p.iter().map(|&x| (x + 0.0).to_bits()).collect()
}

/// Ordered set of distinct parameter points.
#[derive(Clone, Default)]
pub struct Configuration {
    points: Vec<Vec<f64>>,
    keys: HashSet<Vec<u64>>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let mut gamma = Self::new();
        for p in points {
            gamma.push(p)?;
        }
        Ok(gamma)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.keys.contains(&key_of(p))
    }

    pub fn push(&mut self, p: Vec<f64>) -> Result<()> {
        if let Some(first) = self.points.first() {
            if first.len() != p.len() {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    got: p.len(),
                });
            }
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("configuration points must be finite"));
        }
        if !self.keys.insert(key_of(&p)) {
            return Err(Error::DuplicatePoint);
        }
        self.points.push(p);
        Ok(())
    }

    pub fn into_points(self) -> Vec<Vec<f64>> {
        self.points
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.points).finish()
    }
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
    }
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.points.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let points = Vec::<Vec<f64>>::deserialize(d)?;
        Configuration::from_points(points).map_err(serde::de::Error::custom)
    }
}

/// State-carrying error indicator. `value` must be safe to call from many
/// threads at once; `extend` is only called between evaluation phases.
pub trait Indicator: Send + Sync {
    fn name(&self) -> &str;
    /// Parameter dimension, if the indicator knows it.
    fn dim(&self) -> Option<usize>;
    /// `J(q, γ)` for the current internal `γ`.
    fn value(&self, q: &[f64]) -> Result<f64>;
    /// Updates the state for `γ ∪ {p}`.
    fn extend(&mut self, p: &[f64]) -> Result<()>;
    /// Same indicator with `γ = ∅`.
    fn empty(&self) -> Box<dyn Indicator>;
    /// Size of the underlying basis, where there is one.
    fn basis_size(&self) -> usize {
        0
    }
}

#[derive(Default)]
struct EvalCounter {
    total: AtomicU64,
    distinct: Mutex<HashSet<Vec<u64>>>,
}

impl EvalCounter {
    fn record(&self, q: &[f64]) {
        self.total.fetch_add(1, Ordering::Relaxed);
        self.distinct.lock().expect("counter lock").insert(key_of(q));
    }
}

/// An indicator synchronized with a configuration, counting every
/// evaluation and every distinct evaluated point.
pub struct Objective {
    indicator: Box<dyn Indicator>,
    gamma: Configuration,
    counter: EvalCounter,
}

impl Objective {
    pub fn new(indicator: Box<dyn Indicator>) -> Self {
        Self {
            indicator,
            gamma: Configuration::new(),
            counter: EvalCounter::default(),
        }
    }

    pub fn fill_distance(root: &ParamBox) -> Self {
        Self::new(Box::new(FillDistance::new(root)))
    }

    pub fn reduced_basis(provider: Arc<dyn SnapshotProvider>) -> Self {
        Self::new(Box::new(RbIndicator::new(provider)))
    }

    pub fn eim(family: Arc<dyn ParamFunctionFamily>) -> Self {
        Self::new(Box::new(EimIndicator::new(family)))
    }

    pub fn name(&self) -> &str {
        self.indicator.name()
    }

    pub fn indicator(&self) -> &dyn Indicator {
        self.indicator.as_ref()
    }

    /// `J(q, γ)`. Counts one evaluation.
    pub fn evaluate(&self, q: &[f64]) -> Result<f64> {
        if let Some(d) = self.indicator.dim() {
            if q.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: q.len(),
                });
            }
        }
        self.counter.record(q);
        let v = self.indicator.value(q)?;
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Objective(format!(
                "{} returned {v} at {q:?}",
                self.indicator.name()
            )));
        }
        Ok(v)
    }

    /// Evaluates in parallel; the output order follows `qs`.
    pub fn evaluate_many(&self, qs: &[Vec<f64>]) -> Result<Vec<f64>> {
        qs.par_iter().map(|q| self.evaluate(q)).collect()
    }

    /// Appends `p` to `γ` and updates the indicator state.
    pub fn notify_appended(&mut self, p: &[f64]) -> Result<()> {
        if self.gamma.contains(p) {
            return Err(Error::DuplicatePoint);
        }
        if let Some(d) = self.indicator.dim() {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.len(),
                });
            }
        }
        self.indicator.extend(p)?;
        self.gamma.push(p.to_vec())
    }

    pub fn configuration(&self) -> &Configuration {
        &self.gamma
    }

    pub fn evaluations(&self) -> u64 {
        self.counter.total.load(Ordering::Relaxed)
    }

    pub fn distinct_points(&self) -> usize {
        self.counter.distinct.lock().expect("counter lock").len()
    }

    pub fn basis_size(&self) -> usize {
        self.indicator.basis_size()
    }

    /// Same indicator with `γ = ∅` and zeroed counters.
    pub fn fresh(&self) -> Objective {
        Objective::new(self.indicator.empty())
    }

    /// From-scratch rebuild on the current `γ`, with zeroed counters.
    pub fn rebuilt(&self) -> Result<Objective> {
        let mut obj = self.fresh();
        for p in self.gamma.points() {
            obj.notify_appended(p)?;
        }
        Ok(obj)
    }
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("indicator", &self.indicator.name())
            .field("gamma", &self.gamma.len())
            .field("evaluations", &self.evaluations())
            .finish()
    }
}

/// `min_{p∈γ} |q − p|²`; greedy maximization is farthest-point sampling.
/// With `γ = ∅` the value is `|q − c|² + diam²` for the box center `c`.
#[derive(Clone, Debug)]
pub struct FillDistance {
    center: Vec<f64>,
    diam_sq: f64,
    points: Vec<Vec<f64>>,
}

impl FillDistance {
    pub fn new(root: &ParamBox) -> Self {
        Self {
            center: root.center(),
            diam_sq: root.diameter().powi(2),
            points: Vec::new(),
        }
    }
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl Indicator for FillDistance {
    fn name(&self) -> &str {
        "fill"
    }

    fn dim(&self) -> Option<usize> {
        Some(self.center.len())
    }

    fn value(&self, q: &[f64]) -> Result<f64> {
        if self.points.is_empty() {
            return Ok(dist_sq(q, &self.center) + self.diam_sq);
        }
        Ok(self
            .points
            .iter()
            .map(|p| dist_sq(q, p))
            .fold(f64::INFINITY, f64::min))
    }

    fn extend(&mut self, p: &[f64]) -> Result<()> {
        self.points.push(p.to_vec());
        Ok(())
    }

    fn empty(&self) -> Box<dyn Indicator> {
        Box::new(Self {
            center: self.center.clone(),
            diam_sq: self.diam_sq,
            points: Vec::new(),
        })
    }
}

pub fn fill_distance_j(q: &[f64], gamma: &Configuration, root: &ParamBox) -> f64 {
    let mut f = FillDistance::new(root);
    f.points = gamma.points().to_vec();
    f.value(q).expect("fill distance is total")
}

/// Squared projection error of `u(q)` onto `span{u(p) : p ∈ γ}`.
pub struct RbIndicator {
    provider: Arc<dyn SnapshotProvider>,
    basis: ReducedBasis,
}

impl RbIndicator {
    pub fn new(provider: Arc<dyn SnapshotProvider>) -> Self {
        let basis = ReducedBasis::new(provider.norm_weight());
        Self { provider, basis }
    }

    pub fn basis(&self) -> &ReducedBasis {
        &self.basis
    }
}

impl Indicator for RbIndicator {
    fn name(&self) -> &str {
        "rb"
    }

    fn dim(&self) -> Option<usize> {
        Some(self.provider.param_dim())
    }

    fn value(&self, q: &[f64]) -> Result<f64> {
        let u = self.provider.snapshot(q)?;
        Ok(self.basis.projection_error_sq(&u))
    }

    fn extend(&mut self, p: &[f64]) -> Result<()> {
        let u = self.provider.snapshot(p)?;
        self.basis.extend(&u)?;
        Ok(())
    }

    fn empty(&self) -> Box<dyn Indicator> {
        Box::new(Self::new(Arc::clone(&self.provider)))
    }

    fn basis_size(&self) -> usize {
        self.basis.len()
    }
}

pub fn rb_objective(provider: Arc<dyn SnapshotProvider>) -> Objective {
    Objective::reduced_basis(provider)
}

/// Sup-norm EIM residual `|s(q) − s_{γ,I}(q)|_∞`.
pub struct EimIndicator {
    family: Arc<dyn ParamFunctionFamily>,
    basis: EimBasis,
}

impl EimIndicator {
    pub fn new(family: Arc<dyn ParamFunctionFamily>) -> Self {
        Self {
            family,
            basis: EimBasis::new(),
        }
    }

    pub fn basis(&self) -> &EimBasis {
        &self.basis
    }
}

impl Indicator for EimIndicator {
    fn name(&self) -> &str {
        "eim"
    }

    fn dim(&self) -> Option<usize> {
        None
    }

    fn value(&self, q: &[f64]) -> Result<f64> {
        let s = self.family.evaluate(q)?;
        let approx = self.basis.interpolate(&s)?;
        Ok(s.iter()
            .zip(&approx)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    fn extend(&mut self, p: &[f64]) -> Result<()> {
        let s = self.family.evaluate(p)?;
        self.basis.extend(&s)?;
        Ok(())
    }

    fn empty(&self) -> Box<dyn Indicator> {
        Box::new(Self::new(Arc::clone(&self.family)))
    }

    fn basis_size(&self) -> usize {
        self.basis.len()
    }
}

pub fn eim_objective(family: Arc<dyn ParamFunctionFamily>) -> Objective {
    Objective::eim(family)
}

/// One point of a verification curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyPoint {
    /// Length of the `γ` prefix.
    pub n_points: usize,
    pub n_basis: usize,
    pub max_err: f64,
}

/// `max_{v ∈ verify} J(v, γ_k)` for every prefix `γ_k` of `gamma`,
/// `k = 0..=|gamma|`, starting from a fresh copy of `template`.
pub fn verification_curve(
    template: &Objective,
    gamma: &[Vec<f64>],
    verify: &[Vec<f64>],
) -> Result<Vec<VerifyPoint>> {
    let mut obj = template.fresh();
    let mut curve = Vec::with_capacity(gamma.len() + 1);
    for k in 0..=gamma.len() {
        let vals = obj.evaluate_many(verify)?;
        curve.push(VerifyPoint {
            n_points: k,
            n_basis: obj.basis_size(),
            max_err: vals.into_iter().fold(0.0f64, f64::max),
        });
        if k < gamma.len() {
            obj.notify_appended(&gamma[k])?;
        }
    }
    Ok(curve)
}
