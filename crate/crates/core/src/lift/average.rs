//! Truncated averaging `M_K(T) = Σ_{u∈B_K} ρ(u) u T u*`.

use crate::error::{Error, Result};
use crate::group::{weight_tail_bound, BallGroup, GroupElement};
use crate::module::FredholmModule;
use crate::operator::{eigh, DenseOperator, HermitianOperator, ZERO};
use num_complex::Complex64;

/// Extra sphere layers counted exactly in the tail bound.
const TAIL_EXACT_LAYERS: usize = 32;

/// A unitary with exactly one unimodular entry per column:
/// `U e_j = phase[j]·e_{perm[j]}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    perm: Vec<usize>,
    phase: Vec<Complex64>,
}

impl Monomial {
    pub fn identity(dim: usize) -> Self {
        Self { perm: (0..dim).collect(), phase: vec![Complex64::new(1.0, 0.0); dim] }
    }

    /// `None` unless every column holds a single entry of modulus one and the
    /// column targets form a permutation.
    pub fn from_dense(u: &DenseOperator) -> Option<Self> {
        let n = u.dim();
        let mut perm = vec![usize::MAX; n];
        let mut phase = vec![ZERO; n];
        for i in 0..n {
            for (j, z) in u.row(i).iter().enumerate() {
                if *z == ZERO {
                    continue;
                }
                if perm[j] != usize::MAX || (z.norm() - 1.0).abs() > 1e-14 {
                    return None;
                }
                perm[j] = i;
                phase[j] = *z;
            }
        }
        let mut hit = vec![false; n];
        for &p in &perm {
            if p == usize::MAX || hit[p] {
                return None;
            }
            hit[p] = true;
        }
        Some(Self { perm, phase })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let perm = other.perm.iter().map(|&k| self.perm[k]).collect();
        let phase = other.phase.iter().zip(&other.perm).map(|(z, &k)| z * self.phase[k]).collect();
        Self { perm, phase }
    }

    pub fn inverse(&self) -> Self {
        let n = self.perm.len();
        let mut perm = vec![0; n];
        let mut phase = vec![ZERO; n];
        for j in 0..n {
            perm[self.perm[j]] = j;
            phase[self.perm[j]] = self.phase[j].conj();
        }
        Self { perm, phase }
    }

    /// Length of the longest cycle of the underlying permutation.
    pub fn longest_cycle(&self) -> usize {
        let n = self.perm.len();
        let mut seen = vec![false; n];
        let mut best = 0;
        for start in 0..n {
            let mut len = 0;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.perm[j];
                len += 1;
            }
            best = best.max(len);
        }
        best
    }

    pub fn to_dense(&self) -> DenseOperator {
        let mut out = DenseOperator::zeros(self.perm.len());
        for (j, (&i, &z)) in self.perm.iter().zip(&self.phase).enumerate() {
            out.set(i, j, z);
        }
        out
    }
}

fn power<T: Clone>(base: &T, inv: &T, e: i64, id: T, mul: impl Fn(&T, &T) -> Result<T>) -> Result<T> {
    let step = if e >= 0 { base } else { inv };
    let mut acc = id;
    for _ in 0..e.unsigned_abs() {
        acc = mul(&acc, step)?;
    }
    Ok(acc)
}

enum Representation {
    Monomial(Vec<Monomial>),
    Dense(Vec<DenseOperator>),
}

impl Representation {
    fn of(m: &FredholmModule) -> Self {
        let mono: Option<Vec<Monomial>> = m.unitaries().iter().map(|(_, u)| Monomial::from_dense(u)).collect();
        match mono {
            Some(v) => Representation::Monomial(v),
            None => Representation::Dense(m.unitaries().iter().map(|(_, u)| u.clone()).collect()),
        }
    }
}

/// Unitary of `g = Π u_i^{e_i}` (product taken in generator order).
fn element_monomial(gens: &[Monomial], g: &GroupElement, dim: usize) -> Result<Monomial> {
    let mut acc = Monomial::identity(dim);
    for (u, &e) in gens.iter().zip(&g.exponents) {
        let p = power(u, &u.inverse(), e, Monomial::identity(dim), |a, b| Ok(a.compose(b)))?;
        acc = acc.compose(&p);
    }
    Ok(acc)
}

fn element_dense(gens: &[DenseOperator], g: &GroupElement, dim: usize) -> Result<DenseOperator> {
    let mut acc = DenseOperator::identity(dim);
    for (u, &e) in gens.iter().zip(&g.exponents) {
        let p = power(u, &u.adjoint(), e, DenseOperator::identity(dim), |a, b| a.matmul(b))?;
        acc = acc.matmul(&p)?;
    }
    Ok(acc)
}

/// Unitary implementing a group element in the module's representation.
pub fn represent(m: &FredholmModule, g: &GroupElement) -> Result<DenseOperator> {
    if g.exponents.len() != m.unitaries().len() {
        return Err(Error::DimensionMismatch { expected: m.unitaries().len(), found: g.exponents.len() });
    }
    match Representation::of(m) {
        Representation::Monomial(gens) => Ok(element_monomial(&gens, g, m.dim())?.to_dense()),
        Representation::Dense(gens) => element_dense(&gens, g, m.dim()),
    }
}

#[derive(Clone, Debug)]
pub struct Averaged {
    pub op: HermitianOperator,
    /// `Σ_{u∈B_K} ρ(u)`.
    pub weight_sum: f64,
    /// Bound on `‖M(T) − M_K(T)‖`.
    pub tail_bound: f64,
    pub ball_size: usize,
}

/// `Σ_{u∈B_K} ρ(u)` and the tail bound of the omitted weights.
pub fn ball_weights(group: &impl BallGroup, k: usize) -> Result<(Vec<(GroupElement, f64)>, f64)> {
    let ball = group.ball(k)?;
    let mut out = Vec::with_capacity(ball.len());
    for g in ball {
        let w = group.weight(&g)?;
        out.push((g, w));
    }
    let tail = weight_tail_bound(group, k, k + TAIL_EXACT_LAYERS)?;
    Ok((out, tail))
}

/// Weighted conjugation average over the ball of radius `k`, summed in the
/// canonical ball order.
pub fn average(t: &HermitianOperator, m: &FredholmModule, k: usize) -> Result<Averaged> {
    if t.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: t.dim() });
    }
    let n = t.dim();
    let (weights, tail_weight) = ball_weights(m.group(), k)?;
    let weight_sum: f64 = weights.iter().map(|(_, w)| w).sum();
    let mut acc = DenseOperator::zeros(n);
    match Representation::of(m) {
        Representation::Monomial(gens) => {
            let entries: Vec<(usize, usize, Complex64)> = (0..n)
                .flat_map(|i| t.row(i).iter().enumerate().filter(|(_, z)| **z != ZERO).map(move |(j, z)| (i, j, *z)))
                .collect();
            for (g, w) in &weights {
                let u = element_monomial(&gens, g, n)?;
                for &(i, j, z) in &entries {
                    acc.add_at(u.perm[i], u.perm[j], u.phase[i] * z * u.phase[j].conj() * *w);
                }
            }
        }
        Representation::Dense(gens) => {
            for (g, w) in &weights {
                let u = element_dense(&gens, g, n)?;
                let conj = u.matmul(t)?.matmul(&u.adjoint())?;
                acc = acc.add(&conj.scale_real(*w))?;
            }
        }
    }
    let norm = eigh(t)?.spectral_radius();
    Ok(Averaged { op: HermitianOperator::symmetrize(acc), weight_sum, tail_bound: tail_weight * norm, ball_size: weights.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::build_circle_module;

    #[test]
    fn identity_scales_by_weight_sum() {
        let m = build_circle_module(6).unwrap();
        let a = average(&HermitianOperator::identity(m.dim()), &m, 3).unwrap();
        // 1 + 2(e^{-1} + e^{-2} + e^{-3}), times e^{-1}
        let w = (-1f64).exp() * (1.0 + 2.0 * (1..=3).map(|k| (-(k as f64)).exp()).sum::<f64>());
        assert!((a.weight_sum - w).abs() < 1e-15);
        assert!(a.op.sub(&HermitianOperator::identity(m.dim()).scale(w)).unwrap().max_abs() < 1e-15);
        assert_eq!(a.ball_size, 7);
    }

    #[test]
    fn zero_stays_zero() {
        let m = build_circle_module(4).unwrap();
        let a = average(&HermitianOperator::zeros(m.dim()), &m, 4).unwrap();
        assert_eq!(a.op.max_abs(), 0.0);
        assert_eq!(a.tail_bound, 0.0);
    }

    #[test]
    fn rank_one_spreads_along_orbit() {
        let n = 8usize;
        let m = build_circle_module(n).unwrap();
        let mut diag = vec![0.0; m.dim()];
        diag[n - 1] = 0.3; // e_{-1}
        let a = average(&HermitianOperator::from_diagonal(&diag), &m, n).unwrap();
        for idx in 1..(m.dim() - 1) {
            let mode = idx as i64 - n as i64;
            let expected = (-(1.0 + (mode + 1).abs() as f64)).exp() * 0.3;
            let got = a.op.get(idx, idx).re;
            assert!((got - expected).abs() <= 1e-15 * expected.max(1e-300), "mode {mode}");
        }
    }

    #[test]
    fn monomial_matches_dense_path() {
        let m = build_circle_module(5).unwrap();
        let u = &m.unitaries()[0].1;
        let mono = Monomial::from_dense(u).unwrap();
        assert_eq!(mono.to_dense(), *u);
        assert_eq!(mono.compose(&mono.inverse()), Monomial::identity(m.dim()));
        assert_eq!(mono.longest_cycle(), m.dim());
        let g = GroupElement::new(vec![-3]);
        let dense = element_dense(&[u.clone()], &g, m.dim()).unwrap();
        assert_eq!(element_monomial(&[mono], &g, m.dim()).unwrap().to_dense(), dense);
        assert!(Monomial::from_dense(&DenseOperator::from_diagonal(&[1.0, 0.5])).is_none());
    }
}
