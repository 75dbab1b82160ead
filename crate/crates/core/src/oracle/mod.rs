//! Brute-force ground truth: explicit Gram matrices of the ensemble states and
//! a dense symmetric eigensolver.
//!
//! States are indexed by bitmasks. PAC and agnostic concepts are the `2^d`
//! strings `a` in numeric order; coupon sets are the `k`-subsets of `[n]` in
//! colexicographic order. Every entry depends on the pair only through one
//! integer class (Hamming distance or intersection size), so the matrix stores
//! one value per class and densifies on demand.

mod jacobi;

pub use jacobi::{eig_sym, eig_sym_vectors, SymEigen, MAX_EIG_DIM};

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::combinatorics::{binom_exact, rational_to_f64, ExactScalar};
use crate::error::{domain, Error, Result};
use crate::spectra::{EnsembleParams, Spectrum};

pub const MAX_CUBE_D: usize = 12;
pub const MAX_COUPON_DIM: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverlapClass {
    /// `popcount(a ^ b)`
    Hamming,
    /// `popcount(a & b)`
    Intersection,
}

/// Entry value for each class, already raised to the power `t`.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassValues {
    Exact(Vec<ExactScalar>),
    Float(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub params: EnsembleParams,
    states: Vec<u64>,
    class: OverlapClass,
    values: ClassValues,
    values_f64: Vec<f64>,
    prefactor: ExactScalar,
}

impl GramMatrix {
    fn new(
        params: EnsembleParams,
        states: Vec<u64>,
        class: OverlapClass,
        values: ClassValues,
    ) -> Self {
        let values_f64 = match &values {
            ClassValues::Exact(v) => v.iter().map(rational_to_f64).collect(),
            ClassValues::Float(v) => v.clone(),
        };
        let prefactor = BigRational::new(BigInt::one(), BigInt::from(states.len()));
        GramMatrix {
            params,
            states,
            class,
            values,
            values_f64,
            prefactor,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// The ensemble probability `1/N`.
    pub fn prefactor(&self) -> &ExactScalar {
        &self.prefactor
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn class_values(&self) -> &ClassValues {
        &self.values
    }

    pub fn class_of(&self, i: usize, j: usize) -> usize {
        let (a, b) = (self.states[i], self.states[j]);
        match self.class {
            OverlapClass::Hamming => (a ^ b).count_ones() as usize,
            OverlapClass::Intersection => (a & b).count_ones() as usize,
        }
    }

    /// `⟨ψ_i|ψ_j⟩^t` before the prefactor.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.values_f64[self.class_of(i, j)]
    }

    pub fn entry_exact(&self, i: usize, j: usize) -> Option<ExactScalar> {
        match &self.values {
            ClassValues::Exact(v) => Some(v[self.class_of(i, j)].clone()),
            ClassValues::Float(_) => None,
        }
    }

    /// Dense `G` without the prefactor.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    /// Dense `G / N`, whose nonzero spectrum is that of the averaged state.
    pub fn to_dense_scaled(&self) -> DMatrix<f64> {
        let scale = 1.0 / self.dim() as f64;
        self.to_dense() * scale
    }

    /// Reorders and relabels the states; the result describes the same
    /// ensemble when `relabel` is a symmetry of the overlap class.
    pub fn relabeled(&self, relabel: impl Fn(u64) -> u64, order: &[usize]) -> Result<Self> {
        if order.len() != self.dim() {
            return Err(Error::Contract(format!(
                "ordering has length {}, matrix has dimension {}",
                order.len(),
                self.dim()
            )));
        }
        let states = order.iter().map(|&i| relabel(self.states[i])).collect();
        Ok(GramMatrix::new(
            self.params.clone(),
            states,
            self.class,
            self.values.clone(),
        ))
    }
}

fn check_cube(d: usize) -> Result<()> {
    if d > MAX_CUBE_D {
        return Err(Error::Resource(format!(
            "Gram oracle dimension 2^{d} exceeds 2^{MAX_CUBE_D}"
        )));
    }
    Ok(())
}

fn pow_each(base: Vec<BigRational>, t: usize) -> Vec<BigRational> {
    base.into_iter()
        .map(|b| num_traits::pow::pow(b, t))
        .collect()
}

/// PAC states `√(1-4ε)|0,0⟩ + √(4ε/d) Σ_i |i, a_i⟩`; overlaps count the
/// coordinates where two concepts agree.
pub fn gram_pac(d: usize, eps: &BigRational, t: usize) -> Result<GramMatrix> {
    let params = EnsembleParams::pac(d, eps.clone(), t)?;
    check_cube(d)?;
    let four_eps = eps * BigInt::from(4);
    let anchor = BigRational::one() - &four_eps;
    let per_point = &four_eps / BigInt::from(d);
    let base = (0..=d)
        .map(|h| &anchor + &per_point * BigInt::from(d - h))
        .collect();
    let values = ClassValues::Exact(pow_each(base, t));
    let states = (0..1u64 << d).collect();
    Ok(GramMatrix::new(params, states, OverlapClass::Hamming, values))
}

/// Agnostic states built from `D_a(i, b) = (1 + (-1)^{a_i+b} 4ε) / 2d`: per
/// coordinate the overlap is `1/d` when the concepts agree and
/// `√(1-16ε²)/d` when they disagree.
pub fn gram_agnostic(d: usize, eps: &BigRational, t: usize) -> Result<GramMatrix> {
    let params = EnsembleParams::agnostic(d, eps.clone(), t)?;
    check_cube(d)?;
    let e = rational_to_f64(eps);
    let plus = (1.0 + 4.0 * e) / (2.0 * d as f64);
    let minus = (1.0 - 4.0 * e) / (2.0 * d as f64);
    let agree = plus + minus;
    let disagree = 2.0 * (plus * minus).sqrt();
    let values = (0..=d)
        .map(|h| ((d - h) as f64 * agree + h as f64 * disagree).powi(t as i32))
        .collect();
    let states = (0..1u64 << d).collect();
    Ok(GramMatrix::new(
        params,
        states,
        OverlapClass::Hamming,
        ClassValues::Float(values),
    ))
}

/// All `k`-subsets of `[n]` as bitmasks, in colex order (Gosper's hack).
pub fn colex_subsets(n: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    if k > n || n > 63 {
        return out;
    }
    if k == 0 {
        out.push(0);
        return out;
    }
    let limit = 1u64 << n;
    let mut x = (1u64 << k) - 1;
    while x < limit {
        out.push(x);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

/// Coupon states `(1/√k) Σ_{i∈S} |i⟩`; `⟨ψ_S|ψ_S'⟩ = |S ∩ S'| / k`.
pub fn gram_coupon(n: usize, k: usize, t: usize) -> Result<GramMatrix> {
    let params = EnsembleParams::coupon(n, k, t)?;
    let size = binom_exact(n as u64, k as i64);
    if n > 63 || size > BigUint::from(MAX_COUPON_DIM) {
        return Err(Error::Resource(format!(
            "C({n},{k}) = {size} exceeds the coupon oracle limit {MAX_COUPON_DIM}"
        )));
    }
    let base = (0..=k)
        .map(|j| BigRational::new(BigInt::from(j), BigInt::from(k)))
        .collect();
    let values = ClassValues::Exact(pow_each(base, t));
    let states = colex_subsets(n, k);
    debug_assert_eq!(states.len(), size.to_usize().unwrap());
    Ok(GramMatrix::new(
        params,
        states,
        OverlapClass::Intersection,
        values,
    ))
}

/// Builds the oracle Gram matrix for any ensemble.
pub fn gram_for(params: &EnsembleParams) -> Result<GramMatrix> {
    match params {
        EnsembleParams::Pac { d, eps, t } => gram_pac(*d, eps, *t),
        EnsembleParams::Agnostic { d, eps, t } => gram_agnostic(*d, eps, *t),
        EnsembleParams::Coupon { n, k, t, .. } => gram_coupon(*n, *k, *t),
    }
}

/// Eigenvalues of `G / N`, sorted descending.
pub fn oracle_eigenvalues(gram: &GramMatrix) -> Result<Vec<f64>> {
    eig_sym(&gram.to_dense_scaled())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchReport {
    pub matched: bool,
    pub max_abs_deviation: f64,
    /// Largest `|a-b| / max(1, |a|)`.
    pub max_scaled_deviation: f64,
    /// Position in the sorted multiset with the largest scaled deviation.
    pub witness_index: usize,
    pub expanded: Vec<f64>,
}

/// Expands `spec` into a descending multiset (zero-padded to the oracle
/// dimension) and compares it positionally with `oracle_eigs`.
pub fn spectrum_match(spec: &Spectrum, oracle_eigs: &[f64], rel_tol: f64) -> Result<MatchReport> {
    let dim = oracle_eigs.len();
    let mut expanded = Vec::with_capacity(dim);
    for e in &spec.entries {
        let mult = e.multiplicity.to_usize().filter(|&m| m <= dim).ok_or_else(|| {
            Error::Contract(format!(
                "multiplicity {} exceeds oracle dimension {dim}",
                e.multiplicity
            ))
        })?;
        let value = e.eigenvalue.to_f64();
        expanded.extend(std::iter::repeat_n(value, mult));
        if expanded.len() > dim {
            return Err(Error::Contract(format!(
                "spectrum multiplicities exceed oracle dimension {dim}"
            )));
        }
    }
    expanded.resize(dim, 0.0);
    expanded.sort_by(|a, b| b.total_cmp(a));
    let mut oracle = oracle_eigs.to_vec();
    oracle.sort_by(|a, b| b.total_cmp(a));
    let mut max_abs: f64 = 0.0;
    let mut max_scaled: f64 = 0.0;
    let mut witness_index = 0;
    for (i, (a, b)) in expanded.iter().zip(&oracle).enumerate() {
        let dev = (a - b).abs();
        let scaled = dev / a.abs().max(1.0);
        max_abs = max_abs.max(dev);
        if scaled > max_scaled {
            max_scaled = scaled;
            witness_index = i;
        }
    }
    Ok(MatchReport {
        matched: max_scaled <= rel_tol,
        max_abs_deviation: max_abs,
        max_scaled_deviation: max_scaled,
        witness_index,
        expanded,
    })
}

/// Exact trace of `G / N`, when the entries are exact.
pub fn scaled_trace_exact(gram: &GramMatrix) -> Option<ExactScalar> {
    let mut acc = BigRational::zero();
    for i in 0..gram.dim() {
        acc += gram.entry_exact(i, i)?;
    }
    Some(acc * gram.prefactor())
}

/// Rejects a Gram matrix whose spectrum dips below `-tol`.
pub fn check_psd(eigs: &[f64], tol: f64) -> Result<()> {
    match eigs.iter().copied().find(|&x| x < -tol) {
        Some(bad) => Err(domain!("matrix is not positive semidefinite: eigenvalue {bad}")),
        None => Ok(()),
    }
}
