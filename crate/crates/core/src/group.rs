//! Finitely generated groups with a word-length function.
//!
//! Built-ins are the free abelian groups `Z^r` (ℓ¹ word length on exponent
//! vectors) and the cyclic groups `Z/n`. Anything else can plug in through
//! [`BallGroup`].

use crate::error::{Error, Result};
use crate::operator::schatten::linear_regression;
use serde::{Deserialize, Serialize};

pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub exponents: Vec<i64>,
}

impl GroupElement {
    pub fn new(exponents: Vec<i64>) -> Self {
        Self { exponents }
    }
}

/// `|B_k| ≤ constant·(1+k)^order`, plus the group order when finite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthBound {
    pub constant: f64,
    pub order: f64,
    pub finite_size: Option<usize>,
}

/// A group presented through its balls `B_k = {g : L(g) ≤ k}`.
pub trait BallGroup {
    fn generator_count(&self) -> usize;

    fn identity(&self) -> GroupElement {
        GroupElement::new(vec![0; self.generator_count()])
    }

    fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement>;

    fn inverse(&self, g: &GroupElement) -> Result<GroupElement>;

    fn length(&self, g: &GroupElement) -> Result<f64>;

    /// Elements of length at most `k` in canonical order.
    fn ball_with_cap(&self, k: usize, cap: usize) -> Result<Vec<GroupElement>>;

    fn ball_size(&self, k: usize) -> u128;

    fn growth_bound(&self) -> Option<GrowthBound> {
        None
    }

    fn ball(&self, k: usize) -> Result<Vec<GroupElement>> {
        self.ball_with_cap(k, DEFAULT_ENUMERATION_CAP)
    }

    /// `ρ(g) = exp(-(1 + L(g)))`.
    fn weight(&self, g: &GroupElement) -> Result<f64> {
        Ok((-(1.0 + self.length(g)?)).exp())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroupKind {
    FreeAbelian { rank: usize },
    Cyclic { order: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    kind: GroupKind,
    generator_labels: Vec<String>,
}

impl GroupSpec {
    pub fn new(kind: GroupKind, generator_labels: Vec<String>) -> Result<Self> {
        let expected = match kind {
            GroupKind::FreeAbelian { rank } if rank >= 1 => rank,
            GroupKind::Cyclic { order } if order >= 2 => 1,
            GroupKind::FreeAbelian { .. } => return Err(Error::InvalidArgument("free abelian rank must be >= 1".into())),
            GroupKind::Cyclic { .. } => return Err(Error::InvalidArgument("cyclic order must be >= 2".into())),
        };
        if generator_labels.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "group needs {expected} generator labels, got {}",
                generator_labels.len()
            )));
        }
        Ok(Self { kind, generator_labels })
    }

    /// `Z^rank` with generators `u1, u2, ...`.
    pub fn free_abelian(rank: usize) -> Result<Self> {
        Self::new(GroupKind::FreeAbelian { rank }, (1..=rank).map(|k| format!("u{k}")).collect())
    }

    pub fn cyclic(order: usize) -> Result<Self> {
        Self::new(GroupKind::Cyclic { order }, vec!["u1".into()])
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn generator_labels(&self) -> &[String] {
        &self.generator_labels
    }

    /// Polynomial growth order `r`.
    pub fn growth_order(&self) -> usize {
        match self.kind {
            GroupKind::FreeAbelian { rank } => rank,
            GroupKind::Cyclic { .. } => 0,
        }
    }

    /// The element `u_k` (0-based `k`).
    pub fn generator(&self, k: usize) -> GroupElement {
        let mut e = vec![0; self.generator_count()];
        e[k] = 1;
        GroupElement::new(e)
    }

    fn check(&self, g: &GroupElement) -> Result<()> {
        if g.exponents.len() != self.generator_count() {
            return Err(Error::DimensionMismatch { expected: self.generator_count(), found: g.exponents.len() });
        }
        Ok(())
    }

    fn canonical_cyclic(order: usize, e: i64) -> i64 {
        let n = order as i64;
        let mut r = e.rem_euclid(n);
        if r > n / 2 {
            r -= n;
        }
        r
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn push_l1_ball(rank: usize, budget: i64, prefix: &mut Vec<i64>, out: &mut Vec<GroupElement>) {
    if prefix.len() == rank {
        out.push(GroupElement::new(prefix.clone()));
        return;
    }
    for a in -budget..=budget {
        prefix.push(a);
        push_l1_ball(rank, budget - a.abs(), prefix, out);
        prefix.pop();
    }
}

impl BallGroup for GroupSpec {
    fn generator_count(&self) -> usize {
        match self.kind {
            GroupKind::FreeAbelian { rank } => rank,
            GroupKind::Cyclic { .. } => 1,
        }
    }

    fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        self.check(h)?;
        let sum = g.exponents.iter().zip(&h.exponents).map(|(a, b)| a + b);
        Ok(GroupElement::new(match self.kind {
            GroupKind::FreeAbelian { .. } => sum.collect(),
            GroupKind::Cyclic { order } => sum.map(|e| Self::canonical_cyclic(order, e)).collect(),
        }))
    }

    fn inverse(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        Ok(GroupElement::new(match self.kind {
            GroupKind::FreeAbelian { .. } => g.exponents.iter().map(|a| -a).collect(),
            GroupKind::Cyclic { order } => g.exponents.iter().map(|a| Self::canonical_cyclic(order, -a)).collect(),
        }))
    }

    fn length(&self, g: &GroupElement) -> Result<f64> {
        self.check(g)?;
        Ok(match self.kind {
            GroupKind::FreeAbelian { .. } => g.exponents.iter().map(|a| a.unsigned_abs()).sum::<u64>() as f64,
            GroupKind::Cyclic { order } => Self::canonical_cyclic(order, g.exponents[0]).unsigned_abs() as f64,
        })
    }

    fn ball_with_cap(&self, k: usize, cap: usize) -> Result<Vec<GroupElement>> {
        let size = self.ball_size(k);
        if size > cap as u128 {
            return Err(Error::EnumerationCap { radius: k, size, cap });
        }
        let mut out = Vec::with_capacity(size as usize);
        match self.kind {
            GroupKind::FreeAbelian { rank } => push_l1_ball(rank, k as i64, &mut Vec::with_capacity(rank), &mut out),
            GroupKind::Cyclic { order } => {
                let n = order as i64;
                let lo = -((n - 1) / 2);
                let hi = n / 2;
                for e in lo..=hi {
                    if e.unsigned_abs() as usize <= k {
                        out.push(GroupElement::new(vec![e]));
                    }
                }
            }
        }
        Ok(out)
    }

    fn ball_size(&self, k: usize) -> u128 {
        match self.kind {
            GroupKind::FreeAbelian { rank } => {
                let (r, k) = (rank as u128, k as u128);
                (0..=r.min(k)).map(|i| (1u128 << i) * binomial(r, i) * binomial(k, i)).sum()
            }
            GroupKind::Cyclic { order } => (2 * k as u128 + 1).min(order as u128),
        }
    }

    fn growth_bound(&self) -> Option<GrowthBound> {
        Some(match self.kind {
            // |B_k| ≤ (2k+1)^r ≤ 2^r (1+k)^r
            GroupKind::FreeAbelian { rank } => {
                GrowthBound { constant: 2f64.powi(rank as i32), order: rank as f64, finite_size: None }
            }
            GroupKind::Cyclic { order } => GrowthBound { constant: order as f64, order: 0.0, finite_size: Some(order) },
        })
    }
}

/// Empirical growth order from ball cardinalities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub radii: Vec<usize>,
    pub ball_sizes: Vec<u128>,
    pub fitted_order: f64,
    /// Root-mean-square residual of the log-log regression.
    pub residual: f64,
}

/// Slope of `log|B_k|` against `log(1+k)` for `k = 1..=k_max`.
pub fn fit_growth_order(group: &impl BallGroup, k_max: usize) -> Result<GrowthFit> {
    if k_max < 3 {
        return Err(Error::InvalidArgument(format!("growth fit needs k_max >= 3, got {k_max}")));
    }
    let radii: Vec<usize> = (1..=k_max).collect();
    let mut ball_sizes = Vec::with_capacity(k_max);
    for &k in &radii {
        let size = group.ball_size(k);
        if size > DEFAULT_ENUMERATION_CAP as u128 {
            return Err(Error::EnumerationCap { radius: k, size, cap: DEFAULT_ENUMERATION_CAP });
        }
        ball_sizes.push(size);
    }
    let xs: Vec<f64> = radii.iter().map(|&k| (1.0 + k as f64).ln()).collect();
    let ys: Vec<f64> = ball_sizes.iter().map(|&s| (s as f64).ln()).collect();
    let (slope, _) = linear_regression(&xs, &ys);
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (my + slope * (x - mx))).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    Ok(GrowthFit { radii, ball_sizes, fitted_order: slope.max(0.0), residual })
}

/// Upper bound on `Σ_{L(u) > K} ρ(u)`.
///
/// Spheres up to `k_max_exact` are counted exactly; beyond that the growth
/// bound `C(1+k)^r` takes over and the series is summed until its terms are
/// negligible, with a geometric bound on the remainder.
pub fn weight_tail_bound(group: &impl BallGroup, radius: usize, k_max_exact: usize) -> Result<f64> {
    if radius > k_max_exact {
        return Err(Error::InvalidArgument(format!("radius {radius} exceeds exact range {k_max_exact}")));
    }
    let bound = group.growth_bound().ok_or(Error::GrowthConstantUnavailable)?;
    let mut exact = 0.0;
    let mut prev = group.ball_size(radius);
    for k in (radius + 1)..=k_max_exact {
        let size = group.ball_size(k);
        exact += (size - prev) as f64 * (-(1.0 + k as f64)).exp();
        prev = size;
    }
    if let Some(total) = bound.finite_size {
        if prev >= total as u128 {
            return Ok(exact);
        }
    }
    let term = |k: f64| bound.constant * (1.0 + k).powf(bound.order) * (-(1.0 + k)).exp();
    let mut analytic = 0.0;
    let mut k = k_max_exact as f64 + 1.0;
    loop {
        let t = term(k);
        let ratio = term(k + 1.0) / t;
        // once the ratio settles below 1/2 the rest is dominated by a geometric series
        if ratio < 0.5 && t < 1e-300_f64.max(analytic * 1e-18) {
            analytic += t / (1.0 - ratio);
            break;
        }
        analytic += t;
        k += 1.0;
        if t == 0.0 {
            break;
        }
    }
    Ok(exact + analytic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashMap, VecDeque};

    /// BFS distances on the Cayley graph of Z^r with generators ±e_i.
    fn bfs_lengths(rank: usize, radius: i64) -> HashMap<Vec<i64>, i64> {
        let mut dist = HashMap::new();
        let origin = vec![0; rank];
        dist.insert(origin.clone(), 0);
        let mut queue = VecDeque::from([origin]);
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            if d == radius {
                continue;
            }
            for i in 0..rank {
                for s in [-1, 1] {
                    let mut w = v.clone();
                    w[i] += s;
                    if !dist.contains_key(&w) {
                        dist.insert(w.clone(), d + 1);
                        queue.push_back(w);
                    }
                }
            }
        }
        dist
    }

    #[test]
    fn lengths_match_cayley_bfs() {
        let z2 = GroupSpec::free_abelian(2).unwrap();
        let bfs = bfs_lengths(2, 6);
        assert_eq!(bfs[&vec![3, -2]], 5);
        assert_eq!(z2.length(&GroupElement::new(vec![3, -2])).unwrap(), 5.0);
        for (v, d) in &bfs {
            assert_eq!(z2.length(&GroupElement::new(v.clone())).unwrap(), *d as f64);
        }
        let z = GroupSpec::free_abelian(1).unwrap();
        assert_eq!(z.length(&GroupElement::new(vec![0])).unwrap(), 0.0);
        assert_eq!(z.length(&GroupElement::new(vec![-4])).unwrap(), 4.0);
        assert!(matches!(z.length(&GroupElement::new(vec![1, 1])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ball_counts() {
        let z = GroupSpec::free_abelian(1).unwrap();
        assert_eq!(z.ball(3).unwrap().len(), 7);
        let z2 = GroupSpec::free_abelian(2).unwrap();
        let scan = (-2..=2i64).flat_map(|a| (-2..=2i64).map(move |b| (a, b))).filter(|(a, b)| a.abs() + b.abs() <= 2).count();
        assert_eq!(z2.ball(2).unwrap().len(), scan);
        assert_eq!(scan, 13);
        for g in [&z as &dyn BallGroup, &z2, &GroupSpec::cyclic(5).unwrap()] {
            assert_eq!(g.ball(0).unwrap(), vec![g.identity()]);
        }
    }

    #[test]
    fn ball_is_lexicographic_and_capped() {
        let z2 = GroupSpec::free_abelian(2).unwrap();
        let b = z2.ball(4).unwrap();
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(z2.ball_with_cap(10, 50), Err(Error::EnumerationCap { .. })));
        for k in 0..8 {
            assert_eq!(z2.ball(k).unwrap().len() as u128, z2.ball_size(k));
        }
    }

    #[test]
    fn cyclic_arithmetic_wraps() {
        let c = GroupSpec::cyclic(12).unwrap();
        let g = GroupElement::new(vec![5]);
        let gg = c.multiply(&g, &g).unwrap();
        assert_eq!(gg.exponents, vec![-2]);
        assert_eq!(c.length(&GroupElement::new(vec![6])).unwrap(), 6.0);
        assert_eq!(c.ball(20).unwrap().len(), 12);
        assert!(GroupSpec::cyclic(1).is_err());
        assert!(GroupSpec::free_abelian(0).is_err());
    }

    #[test]
    fn growth_fits() {
        let z = GroupSpec::free_abelian(1).unwrap();
        let fit = fit_growth_order(&z, 20).unwrap();
        // closed form |B_k| = 2k+1
        assert!(fit.ball_sizes.iter().zip(&fit.radii).all(|(s, k)| *s == 2 * *k as u128 + 1));
        assert!((0.85..=1.15).contains(&fit.fitted_order));
        let z2 = GroupSpec::free_abelian(2).unwrap();
        let fit = fit_growth_order(&z2, 15).unwrap();
        assert!(fit.ball_sizes.iter().zip(&fit.radii).all(|(s, k)| *s == (2 * k * k + 2 * k + 1) as u128));
        assert!((1.8..=2.2).contains(&fit.fitted_order));
        // the saturating ball sizes of a finite group still give a positive
        // slope over 1..=20; it must stay well below the rank-one value
        let c = GroupSpec::cyclic(12).unwrap();
        let fit = fit_growth_order(&c, 20).unwrap();
        assert!((0.0..=0.5).contains(&fit.fitted_order), "{}", fit.fitted_order);
        assert!(fit_growth_order(&z, 2).is_err());
    }

    #[test]
    fn weights() {
        let z = GroupSpec::free_abelian(1).unwrap();
        assert!((z.weight(&z.identity()).unwrap() - 0.367_879_4).abs() < 1e-7);
        assert!((z.weight(&GroupElement::new(vec![1])).unwrap() - 0.135_335_3).abs() < 1e-7);
        let z2 = GroupSpec::free_abelian(2).unwrap();
        assert!((z2.weight(&GroupElement::new(vec![1, 1])).unwrap() - 0.049_787_1).abs() < 1e-7);
    }

    fn direct_tail(group: &GroupSpec, radius: usize) -> f64 {
        (radius + 1..=200)
            .map(|k| (group.ball_size(k) - group.ball_size(k - 1)) as f64 * (-(1.0 + k as f64)).exp())
            .sum()
    }

    #[test]
    fn tail_bounds() {
        let z = GroupSpec::free_abelian(1).unwrap();
        let b = weight_tail_bound(&z, 30, 40).unwrap();
        assert!(b <= 1e-11);
        assert!(b >= direct_tail(&z, 30));
        let z2 = GroupSpec::free_abelian(2).unwrap();
        let b = weight_tail_bound(&z2, 20, 30).unwrap();
        assert!(b <= 1e-5);
        assert!(b >= direct_tail(&z2, 20));
        let c = GroupSpec::cyclic(7).unwrap();
        assert_eq!(weight_tail_bound(&c, 3, 5).unwrap(), 0.0);
        assert!(weight_tail_bound(&z, 5, 4).is_err());
    }
}
