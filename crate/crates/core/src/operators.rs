//! Matrix forms of vertex weights: R and Ř operators on chains of sites,
//! braid relations, row transfer matrices, Hamiltonians, the classical limit,
//! boundary reflection and inversion relations.
//!
//! Matrices are rank-2 [`DenseTensor`]s whose rows carry the outgoing
//! (upper, β) multi-index and whose columns carry the incoming (α) one,
//! so composition is ordinary matrix multiplication.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg;
use crate::report::{estimate_scalar_factor, ResidualReport, ScalarError};
use crate::tensor::{DenseTensor, TensorError};
use crate::weights::{decoupled_identity, Rapidity, VertexWeights, WeightError};

/// Largest matrix dimension the transfer-matrix builders will produce.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;
/// Condition numbers above this are treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("site indices {i},{j} invalid for a chain of {sites} sites")]
    SiteRange { i: usize, j: usize, sites: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix dimension {dim} exceeds the cap {cap}")]
    SizeCap { dim: u128, cap: usize },
    #[error("matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("family is not the identity at zero (deviation {deviation:e})")]
    NotIdentityAtZero { deviation: f64 },
    #[error("weight does not decouple at equal rapidities (relative residual {residual:e})")]
    NotDecoupled { residual: f64 },
    #[error("product is not proportional to the identity (relative residual {residual:e})")]
    NotProportional { residual: f64 },
    #[error("diagonal boundary ansatz fails at p = {p}: residual {residual:e}")]
    NoDiagonalSolution { p: f64, residual: f64 },
    #[error("diagonal boundary ansatz needs two local states, got {0}")]
    AnsatzStates(usize),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn pow_checked(q: usize, n: usize, cap: usize) -> Result<usize, OperatorError> {
    let dim = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > cap as u128 {
        return Err(OperatorError::SizeCap { dim, cap });
    }
    Ok(dim as usize)
}

fn square_dim(m: &DenseTensor) -> Result<usize, OperatorError> {
    match m.extents() {
        [a, b] if a == b => Ok(*a),
        e => Err(OperatorError::Dimension(format!("expected a square matrix, got extents {e:?}"))),
    }
}

fn local_states(w: &DenseTensor) -> Result<usize, OperatorError> {
    match w.extents() {
        [a, b, c, d] if a == b && b == c && c == d => Ok(*a),
        e => Err(OperatorError::Dimension(format!("expected a Q x Q x Q x Q weight, got {e:?}"))),
    }
}

/// Matrix product of two square matrices.
pub fn matmul(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor, OperatorError> {
    let n = square_dim(a)?;
    if square_dim(b)? != n {
        return Err(OperatorError::Dimension(format!("{:?} times {:?}", a.extents(), b.extents())));
    }
    Ok(a.contract(b, &[(1, 0)])?)
}

fn chain(ms: &[&DenseTensor]) -> Result<DenseTensor, OperatorError> {
    let mut acc = ms[0].clone();
    for m in &ms[1..] {
        acc = matmul(&acc, m)?;
    }
    Ok(acc)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor, OperatorError> {
    let (n, m) = (square_dim(a)?, square_dim(b)?);
    Ok(DenseTensor::from_fn(&[n * m, n * m], |i| {
        a.get(&[i[0] / m, i[1] / m]) * b.get(&[i[0] % m, i[1] % m])
    }))
}

/// `max |AB - BA|`.
pub fn commutator_norm(a: &DenseTensor, b: &DenseTensor) -> Result<f64, OperatorError> {
    Ok(commutator(a, b)?.max_abs().0)
}

fn commutator(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor, OperatorError> {
    Ok(matmul(a, b)?.sub(&matmul(b, a)?)?)
}

/// What an [`OperatorMatrix`] was built from.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorLabel {
    R { i: usize, j: usize },
    Rcheck { i: usize },
    Transfer,
    Hamiltonian,
    ClassicalR,
    Boundary,
    Other(String),
}

/// A `Q^N x Q^N` operator on a chain of `N` sites with `Q` local states.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    sites: usize,
    local_dim: usize,
    matrix: DenseTensor,
    label: OperatorLabel,
}

impl OperatorMatrix {
    pub fn new(sites: usize, local_dim: usize, matrix: DenseTensor, label: OperatorLabel) -> Result<Self, OperatorError> {
        let dim = square_dim(&matrix)?;
        let expected = (local_dim as u128).checked_pow(sites as u32);
        if expected != Some(dim as u128) {
            return Err(OperatorError::Dimension(format!(
                "{dim} x {dim} matrix on {sites} sites of dimension {local_dim}"
            )));
        }
        Ok(Self { sites, local_dim, matrix, label })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dim(&self) -> usize {
        self.matrix.extents()[0]
    }

    pub fn matrix(&self) -> &DenseTensor {
        &self.matrix
    }

    pub fn into_matrix(self) -> DenseTensor {
        self.matrix
    }

    pub fn label(&self) -> &OperatorLabel {
        &self.label
    }
}

/// Two-site Ř block: `[β1 β2][α1 α2] = ω[α1][α2][β1][β2]`.
pub fn local_rcheck(w: &DenseTensor) -> Result<DenseTensor, OperatorError> {
    let q = local_states(w)?;
    Ok(w.permute_axes(&[2, 3, 0, 1])?.reshape(&[q * q, q * q])?)
}

/// Two-site R block with the outgoing indices crossed:
/// `[β_i β_j][α_i α_j] = ω[α_i][α_j][β_j][β_i]`.
pub fn local_r(w: &DenseTensor) -> Result<DenseTensor, OperatorError> {
    let q = local_states(w)?;
    Ok(w.permute_axes(&[3, 2, 0, 1])?.reshape(&[q * q, q * q])?)
}

/// Inverse of [`local_rcheck`]: the weight whose Ř block is `m`.
pub fn weight_from_rcheck(m: &DenseTensor, q: usize) -> Result<DenseTensor, OperatorError> {
    if square_dim(m)? != q * q {
        return Err(OperatorError::Dimension(format!("{:?} is not a two-site block for Q = {q}", m.extents())));
    }
    Ok(m.reshape(&[q, q, q, q])?.permute_axes(&[2, 3, 0, 1])?)
}

/// Places a two-site block on sites `i`, `j` (0-based) of an `n`-site chain,
/// identity elsewhere.
pub fn embed_two_site(local: &DenseTensor, q: usize, i: usize, j: usize, n: usize) -> Result<DenseTensor, OperatorError> {
    if i == j || i >= n || j >= n {
        return Err(OperatorError::SiteRange { i, j, sites: n });
    }
    if square_dim(local)? != q * q {
        return Err(OperatorError::Dimension(format!("{:?} is not a two-site block for Q = {q}", local.extents())));
    }
    let dim = pow_checked(q, n, usize::MAX)?;
    let stride = |k: usize| q.pow((n - 1 - k) as u32);
    let (si, sj) = (stride(i), stride(j));
    let mut out = DenseTensor::zeros(&[dim, dim]);
    for col in 0..dim {
        let (ai, aj) = ((col / si) % q, (col / sj) % q);
        let base = col - ai * si - aj * sj;
        for bi in 0..q {
            for bj in 0..q {
                let v = local.get(&[bi * q + bj, ai * q + aj]);
                if v != Complex64::new(0.0, 0.0) {
                    out.set(&[base + bi * si + bj * sj, col], v);
                }
            }
        }
    }
    Ok(out)
}

/// Single-site operator on site `i` of an `n`-site chain.
pub fn embed_one_site(local: &DenseTensor, i: usize, n: usize) -> Result<DenseTensor, OperatorError> {
    if i >= n {
        return Err(OperatorError::SiteRange { i, j: i, sites: n });
    }
    let q = square_dim(local)?;
    let left = DenseTensor::identity(q.pow(i as u32));
    let right = DenseTensor::identity(q.pow((n - 1 - i) as u32));
    kron(&kron(&left, local)?, &right)
}

/// `R_ij` from an evaluated weight (0-based `i < j`).
pub fn r_matrix(w: &DenseTensor, i: usize, j: usize, n: usize) -> Result<OperatorMatrix, OperatorError> {
    if i >= j || j >= n {
        return Err(OperatorError::SiteRange { i, j, sites: n });
    }
    let q = local_states(w)?;
    let m = embed_two_site(&local_r(w)?, q, i, j, n)?;
    OperatorMatrix::new(n, q, m, OperatorLabel::R { i, j })
}

/// `Ř_{i,i+1}` from an evaluated weight (0-based `i`).
pub fn rcheck_matrix(w: &DenseTensor, i: usize, n: usize) -> Result<OperatorMatrix, OperatorError> {
    if i + 1 >= n {
        return Err(OperatorError::SiteRange { i, j: i + 1, sites: n });
    }
    let q = local_states(w)?;
    let m = embed_two_site(&local_rcheck(w)?, q, i, i + 1, n)?;
    OperatorMatrix::new(n, q, m, OperatorLabel::Rcheck { i })
}

/// `R_ij(p_i, p_j)` for a vertex family.
pub fn build_r_matrix(
    w: &dyn VertexWeights,
    i: usize,
    j: usize,
    n: usize,
    pi: &Rapidity,
    pj: &Rapidity,
) -> Result<OperatorMatrix, OperatorError> {
    if i >= j || j >= n {
        return Err(OperatorError::SiteRange { i, j, sites: n });
    }
    r_matrix(&w.eval(pi, pj)?, i, j, n)
}

/// `Ř_{i,i+1}(p, q)` for a vertex family.
pub fn build_rcheck_matrix(
    w: &dyn VertexWeights,
    i: usize,
    n: usize,
    p: &Rapidity,
    q: &Rapidity,
) -> Result<OperatorMatrix, OperatorError> {
    if i + 1 >= n {
        return Err(OperatorError::SiteRange { i, j: i + 1, sites: n });
    }
    rcheck_matrix(&w.eval(p, q)?, i, n)
}

/// Matrix relation to check. All operands are rank-4 weights `ω[α][μ][λ][β]`.
#[derive(Debug, Clone, Copy)]
pub enum MatrixRelation<'a> {
    /// `R23(q,r) R13(p,r) R12(p,q) = R12(p,q) R13(p,r) R23(q,r)` on three sites.
    RForm { pq: &'a DenseTensor, pr: &'a DenseTensor, qr: &'a DenseTensor },
    /// `Ř_i(q,r) Ř_{i+1}(p,r) Ř_i(p,q) = Ř_{i+1}(p,q) Ř_i(p,r) Ř_{i+1}(q,r)` for every
    /// `i` on a chain, plus far commutation.
    RcheckForm { pq: &'a DenseTensor, pr: &'a DenseTensor, qr: &'a DenseTensor, sites: usize },
    /// `Ř_i Ř_{i+1} Ř_i = Ř_{i+1} Ř_i Ř_{i+1}` for a constant weight, plus far commutation.
    ConstantBraid { weight: &'a DenseTensor, sites: usize },
    /// `Ř_1(p−q) Ř_2(p−r) Ř_1(q−r) = Ř_2(q−r) Ř_1(p−r) Ř_2(p−q)` on three sites.
    DifferenceForm { at_pq: &'a DenseTensor, at_pr: &'a DenseTensor, at_qr: &'a DenseTensor },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixYbeReport {
    pub relation: ResidualReport,
    /// `max |[Ř_i, Ř_j]|` over `|i − j| ≥ 2`, when the relation involves it.
    pub far_commutation: Option<f64>,
}

impl MatrixYbeReport {
    pub fn pass(&self) -> bool {
        self.relation.pass && self.far_commutation.is_none_or(|f| f <= self.relation.tol)
    }
}

fn same_states(ws: &[&DenseTensor]) -> Result<usize, OperatorError> {
    let q = local_states(ws[0])?;
    for w in &ws[1..] {
        if local_states(w)? != q {
            return Err(OperatorError::Dimension(format!("{:?} vs {:?}", ws[0].extents(), w.extents())));
        }
    }
    Ok(q)
}

/// Accumulates per-instance residuals into one report.
struct Worst {
    max_abs: f64,
    norm: f64,
    index: Vec<usize>,
}

impl Worst {
    fn new() -> Self {
        Self { max_abs: 0.0, norm: 0.0, index: Vec::new() }
    }

    fn push(&mut self, lhs: &DenseTensor, rhs: &DenseTensor) -> Result<(), OperatorError> {
        let (d, at) = lhs.sub(rhs)?.max_abs();
        self.norm = self.norm.max(lhs.max_abs().0);
        if d > self.max_abs || d.is_nan() || self.index.is_empty() {
            self.max_abs = d;
            self.index = at;
        }
        Ok(())
    }

    fn report(self, name: &str, tol: f64) -> ResidualReport {
        ResidualReport::from_parts(name, self.max_abs, self.norm, self.index, tol)
    }
}

fn far_commutation(ops: &[Vec<DenseTensor>]) -> Result<f64, OperatorError> {
    let mut worst = 0.0f64;
    for (i, at_i) in ops.iter().enumerate() {
        for at_j in ops.iter().skip(i + 2) {
            for a in at_i {
                for b in at_j {
                    worst = worst.max(commutator_norm(a, b)?);
                }
            }
        }
    }
    Ok(worst)
}

/// Residual of a matrix form of the Yang-Baxter or braid relation.
pub fn check_matrix_ybe(relation: MatrixRelation<'_>, tol: f64) -> Result<MatrixYbeReport, OperatorError> {
    match relation {
        MatrixRelation::RForm { pq, pr, qr } => {
            same_states(&[pq, pr, qr])?;
            let r12 = r_matrix(pq, 0, 1, 3)?.into_matrix();
            let r13 = r_matrix(pr, 0, 2, 3)?.into_matrix();
            let r23 = r_matrix(qr, 1, 2, 3)?.into_matrix();
            let lhs = chain(&[&r23, &r13, &r12])?;
            let rhs = chain(&[&r12, &r13, &r23])?;
            let mut w = Worst::new();
            w.push(&lhs, &rhs)?;
            Ok(MatrixYbeReport { relation: w.report("r-matrix-ybe", tol), far_commutation: None })
        }
        MatrixRelation::RcheckForm { pq, pr, qr, sites } => {
            same_states(&[pq, pr, qr])?;
            if sites < 3 {
                return Err(OperatorError::Parameter(format!("Ř-form needs at least 3 sites, got {sites}")));
            }
            let mut at = Vec::new();
            for i in 0..sites - 1 {
                at.push(vec![
                    rcheck_matrix(pq, i, sites)?.into_matrix(),
                    rcheck_matrix(pr, i, sites)?.into_matrix(),
                    rcheck_matrix(qr, i, sites)?.into_matrix(),
                ]);
            }
            let mut w = Worst::new();
            for i in 0..sites - 2 {
                let (a, b) = (&at[i], &at[i + 1]);
                let lhs = chain(&[&a[2], &b[1], &a[0]])?;
                let rhs = chain(&[&b[0], &a[1], &b[2]])?;
                w.push(&lhs, &rhs)?;
            }
            Ok(MatrixYbeReport { relation: w.report("rcheck-ybe", tol), far_commutation: Some(far_commutation(&at)?) })
        }
        MatrixRelation::ConstantBraid { weight, sites } => {
            local_states(weight)?;
            if sites < 3 {
                return Err(OperatorError::Parameter(format!("braid relations need at least 3 sites, got {sites}")));
            }
            let at = (0..sites - 1)
                .map(|i| Ok(vec![rcheck_matrix(weight, i, sites)?.into_matrix()]))
                .collect::<Result<Vec<_>, OperatorError>>()?;
            let mut w = Worst::new();
            for i in 0..sites - 2 {
                let (a, b) = (&at[i][0], &at[i + 1][0]);
                w.push(&chain(&[a, b, a])?, &chain(&[b, a, b])?)?;
            }
            Ok(MatrixYbeReport { relation: w.report("braid", tol), far_commutation: Some(far_commutation(&at)?) })
        }
        MatrixRelation::DifferenceForm { at_pq, at_pr, at_qr } => {
            same_states(&[at_pq, at_pr, at_qr])?;
            let one = |w, i| rcheck_matrix(w, i, 3).map(OperatorMatrix::into_matrix);
            let lhs = chain(&[&one(at_pq, 0)?, &one(at_pr, 1)?, &one(at_qr, 0)?])?;
            let rhs = chain(&[&one(at_qr, 1)?, &one(at_pr, 0)?, &one(at_pq, 1)?])?;
            let mut w = Worst::new();
            w.push(&lhs, &rhs)?;
            Ok(MatrixYbeReport { relation: w.report("difference-braid", tol), far_commutation: None })
        }
    }
}

/// Row-to-row transfer matrix of a periodic row of `l` vertices:
/// `T[α'][α] = Σ_μ Π_k ω[α_k][μ_k][μ_{k+1}][α'_k]` with `μ_{l+1} = μ_1`.
pub fn transfer_matrix(w: &DenseTensor, l: usize, cap: usize) -> Result<OperatorMatrix, OperatorError> {
    if l == 0 {
        return Err(OperatorError::Parameter(String::from("row length must be at least 1")));
    }
    let q = local_states(w)?;
    let dim = pow_checked(q, l, cap)?;
    // acc[μ1][a][a'][μ] over the sites built so far; a, a' are flattened prefixes.
    let mut acc = w.permute_axes(&[1, 0, 3, 2])?;
    let mut width = q;
    for _ in 1..l {
        let mut next = DenseTensor::zeros(&[q, width * q, width * q, q]);
        for m1 in 0..q {
            for a in 0..width {
                for b in 0..width {
                    for m in 0..q {
                        let x = acc.get(&[m1, a, b, m]);
                        if x == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for ak in 0..q {
                            for bk in 0..q {
                                for mn in 0..q {
                                    let y = w.get(&[ak, m, mn, bk]);
                                    let idx = [m1, a * q + ak, b * q + bk, mn];
                                    let cur = next.get(&idx);
                                    next.set(&idx, cur + x * y);
                                }
                            }
                        }
                    }
                }
            }
        }
        acc = next;
        width *= q;
    }
    let t = DenseTensor::from_fn(&[dim, dim], |i| (0..q).map(|m| acc.get(&[m, i[1], i[0], m])).sum());
    OperatorMatrix::new(l, q, t, OperatorLabel::Transfer)
}

/// A one-parameter family of square matrices.
pub trait OperatorFamily {
    fn eval(&self, x: f64) -> Result<DenseTensor, OperatorError>;
}

impl<F: Fn(f64) -> Result<DenseTensor, OperatorError>> OperatorFamily for F {
    fn eval(&self, x: f64) -> Result<DenseTensor, OperatorError> {
        self(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub matrix: DenseTensor,
    /// 1-norm condition estimate of `T(q0)`.
    pub condition: f64,
    /// `max |D(h) − D(h/2)|` between central differences at `h` and `h/2`.
    pub richardson_gap: f64,
}

fn central_difference(family: &dyn OperatorFamily, x0: f64, h: f64) -> Result<DenseTensor, OperatorError> {
    let plus = family.eval(x0 + h)?;
    let minus = family.eval(x0 - h)?;
    Ok(plus.sub(&minus)?.scaled(Complex64::new(0.5 / h, 0.0)))
}

/// `H = T(q0)^{-1} T'(q0)` with the derivative by central differences.
pub fn hamiltonian_from_family(family: &dyn OperatorFamily, q0: f64, h: f64) -> Result<Hamiltonian, OperatorError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(OperatorError::Parameter(format!("step must be positive, got {h}")));
    }
    let t0 = family.eval(q0)?;
    let n = square_dim(&t0)?;
    let (inv, condition) = linalg::inverse_with_condition(&linalg::to_matrix(&t0))
        .ok_or(OperatorError::IllConditioned { condition: f64::INFINITY })?;
    if !(condition <= CONDITION_LIMIT) {
        return Err(OperatorError::IllConditioned { condition });
    }
    let d = central_difference(family, q0, h)?;
    let d_half = central_difference(family, q0, h / 2.0)?;
    if square_dim(&d)? != n {
        return Err(OperatorError::Dimension(String::from("family changes dimension")));
    }
    let richardson_gap = d.sub(&d_half)?.max_abs().0;
    let h_mat = linalg::from_matrix(&(inv * linalg::to_matrix(&d)));
    Ok(Hamiltonian { matrix: h_mat, condition, richardson_gap })
}

/// `X = (R(ħ) − R(−ħ)) / 2ħ` for a family with `R(0) = 1`.
pub fn extract_classical_r(family: &dyn OperatorFamily, hbar: f64) -> Result<DenseTensor, OperatorError> {
    if !(hbar != 0.0 && hbar.is_finite()) {
        return Err(OperatorError::Parameter(format!("ħ must be nonzero, got {hbar}")));
    }
    let r0 = family.eval(0.0)?;
    let n = square_dim(&r0)?;
    let deviation = r0.sub(&DenseTensor::identity(n))?.max_abs().0;
    if !(deviation <= 1e-12) {
        return Err(OperatorError::NotIdentityAtZero { deviation });
    }
    central_difference(family, 0.0, hbar)
}

/// Residual of `[X12,X13] + [X12,X23] + [X13,X23]`, relative to the largest
/// single commutator.
pub fn check_cybe(x12: &DenseTensor, x13: &DenseTensor, x23: &DenseTensor, tol: f64) -> Result<ResidualReport, OperatorError> {
    let n = square_dim(x12)?;
    if square_dim(x13)? != n || square_dim(x23)? != n {
        return Err(OperatorError::Dimension(String::from("classical r-matrices differ in size")));
    }
    let a = commutator(x12, x13)?;
    let b = commutator(x12, x23)?;
    let c = commutator(x13, x23)?;
    let (max_abs, at) = a.add(&b)?.add(&c)?.max_abs();
    let norm = a.max_abs().0.max(b.max_abs().0).max(c.max_abs().0);
    Ok(ResidualReport::from_parts("cybe", max_abs, norm, at, tol))
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (libm::log(x), libm::log(y));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Checks `Ř(p,q) Ř(q,p) = C(p,q) 1` and returns `C` with the residual.
pub fn local_inversion(
    w: &dyn VertexWeights,
    p: &Rapidity,
    q: &Rapidity,
    tol: f64,
) -> Result<(Complex64, ResidualReport), OperatorError> {
    let n = w.states();
    let at_p = w.eval(p, p)?;
    let dec = decoupled_identity(n);
    let (s, _) = estimate_scalar_factor(&at_p, dec.table())?;
    let decoupling = ResidualReport::from_sides("decoupling", &at_p, dec.table(), s, tol)?;
    if !decoupling.pass {
        return Err(OperatorError::NotDecoupled { residual: decoupling.relative });
    }
    let product = matmul(&local_rcheck(&w.eval(p, q)?)?, &local_rcheck(&w.eval(q, p)?)?)?;
    let id = DenseTensor::identity(n * n);
    let (c, _) = estimate_scalar_factor(&product, &id)?;
    let report = ResidualReport::from_sides("local-inversion", &product, &id, c, tol)?.with_r(c);
    if !report.pass {
        return Err(OperatorError::NotProportional { residual: report.relative });
    }
    Ok((c, report))
}

/// Two-parameter matrix family, used for Ř blocks (`Q² x Q²`) and boundary
/// matrices (`Q x Q`).
pub type MatrixFamily<'a> = dyn Fn(Complex64, Complex64) -> Result<DenseTensor, OperatorError> + 'a;

/// Ř block family `(p, q) ↦ local_rcheck(ω(lift(p), lift(q)))`.
pub fn rcheck_family<'a>(
    w: &'a dyn VertexWeights,
    lift: &'a (dyn Fn(Complex64) -> Rapidity + 'a),
) -> impl Fn(Complex64, Complex64) -> Result<DenseTensor, OperatorError> + 'a {
    move |p, q| local_rcheck(&w.eval(&lift(p), &lift(q))?)
}

fn reflection_sides(
    rcheck: &MatrixFamily<'_>,
    k_at_p: &DenseTensor,
    k_at_q: &DenseTensor,
    mu: Complex64,
    p: Complex64,
    q: Complex64,
) -> Result<(DenseTensor, DenseTensor), OperatorError> {
    let (pb, qb) = (mu - p, mu - q);
    let r = rcheck(q, p)?;
    let n = square_dim(&r)?;
    let local = square_dim(k_at_p)?;
    if local * local != n || square_dim(k_at_q)? != local {
        return Err(OperatorError::Dimension(format!("boundary {local} x {local} against a {n} x {n} block")));
    }
    let id = DenseTensor::identity(local);
    let kp = kron(k_at_p, &id)?;
    let kq = kron(k_at_q, &id)?;
    let lhs = chain(&[&kq, &rcheck(pb, q)?, &kp, &r])?;
    let rhs = chain(&[&rcheck(pb, qb)?, &kp, &rcheck(qb, p)?, &kq])?;
    Ok((lhs, rhs))
}

/// Residual of the boundary reflection relation
/// `Ǩ(q,q̄) Ř(p̄,q) Ǩ(p,p̄) Ř(q,p) = Ř(p̄,q̄) Ǩ(p,p̄) Ř(q̄,p) Ǩ(q,q̄)`
/// with `p̄ = μ − p` and `Ǩ = K ⊗ 1`.
pub fn verify_reflection(
    rcheck: &MatrixFamily<'_>,
    k: &MatrixFamily<'_>,
    mu: Complex64,
    p: Complex64,
    q: Complex64,
    tol: f64,
) -> Result<ResidualReport, OperatorError> {
    let kp = k(p, mu - p)?;
    let kq = k(q, mu - q)?;
    let (lhs, rhs) = reflection_sides(rcheck, &kp, &kq, mu, p, q)?;
    Ok(ResidualReport::from_sides("reflection", &lhs, &rhs, one(), tol)?)
}

/// Diagonal boundary solution `K(p) = diag(1, k(p))` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalK {
    pub grid: Vec<f64>,
    pub k: Vec<Complex64>,
    /// Per grid point: the largest reflection residual against every grid point.
    pub residuals: Vec<f64>,
}

impl DiagonalK {
    fn diag(k: Complex64) -> DenseTensor {
        DenseTensor::new(vec![2, 2], vec![one(), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), k])
            .expect("2 x 2")
    }

    /// `K` at grid point `index`.
    pub fn matrix(&self, index: usize) -> DenseTensor {
        Self::diag(self.k[index])
    }
}

/// Solves `k(p)` at every grid point from the reflection relation against the
/// first grid point, whose value is fixed to `k_ref`.
pub fn solve_diagonal_k(
    rcheck: &MatrixFamily<'_>,
    mu: Complex64,
    grid: &[f64],
    k_ref: Complex64,
    tol: f64,
) -> Result<DiagonalK, OperatorError> {
    let Some(&p_ref) = grid.first() else {
        return Err(OperatorError::Parameter(String::from("empty grid")));
    };
    let probe = rcheck(Complex64::new(p_ref, 0.0), Complex64::new(p_ref, 0.0))?;
    if square_dim(&probe)? != 4 {
        return Err(OperatorError::AnsatzStates(probe.extents()[0]));
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let k_ref_m = DiagonalK::diag(k_ref);
    let mut ks = vec![k_ref];
    let mut all_degenerate = true;
    for &p in &grid[1..] {
        // Residual is affine in k(p): f(k) = f(0) + k (f(1) − f(0)).
        let f = |k: Complex64| -> Result<DenseTensor, OperatorError> {
            let (l, r) = reflection_sides(rcheck, &DiagonalK::diag(k), &k_ref_m, mu, c(p), c(p_ref))?;
            Ok(l.sub(&r)?)
        };
        let f0 = f(Complex64::new(0.0, 0.0))?;
        let a = f(one())?.sub(&f0)?;
        let an: f64 = a.data().iter().map(|z| z.norm_sqr()).sum();
        let scale = f0.max_abs().0.max(1.0);
        if libm::sqrt(an) <= 1e-14 * scale {
            ks.push(one());
            continue;
        }
        all_degenerate = false;
        let atb: Complex64 = a.data().iter().zip(f0.data()).map(|(x, y)| x.conj() * -y).sum();
        ks.push(atb / an);
    }
    if all_degenerate {
        ks[0] = one();
    }
    let sol = DiagonalK { grid: grid.to_vec(), k: ks, residuals: Vec::new() };
    let mut residuals = vec![0.0f64; grid.len()];
    for (i, &p) in grid.iter().enumerate() {
        for (j, &q) in grid.iter().enumerate() {
            let (l, r) = reflection_sides(rcheck, &sol.matrix(i), &sol.matrix(j), mu, c(p), c(q))?;
            let rep = ResidualReport::from_sides("reflection", &l, &r, one(), tol)?;
            residuals[i] = residuals[i].max(rep.relative);
        }
    }
    if let Some((i, &res)) = residuals.iter().enumerate().find(|(_, r)| !(**r <= tol)) {
        return Err(OperatorError::NoDiagonalSolution { p: grid[i], residual: res });
    }
    Ok(DiagonalK { residuals, ..sol })
}

/// One row of the global inversion table.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionRow {
    pub rows: usize,
    pub cols: usize,
    pub z_pq: Complex64,
    pub z_qp: Complex64,
    /// `Z(p,q)^{1/MN} Z(q,p)^{1/MN} / C(q,p)`.
    pub ratio: Complex64,
}

/// Partition function `Tr T^rows` of a periodic `rows x cols` lattice.
pub fn torus_partition_function(w: &DenseTensor, rows: usize, cols: usize, cap: usize) -> Result<Complex64, OperatorError> {
    if rows == 0 {
        return Err(OperatorError::Parameter(String::from("torus needs at least one row")));
    }
    let t = transfer_matrix(w, cols, cap)?.into_matrix();
    let mut acc = t.clone();
    for _ in 1..rows {
        acc = matmul(&acc, &t)?;
    }
    let n = acc.extents()[0];
    Ok((0..n).map(|i| acc.get(&[i, i])).sum())
}

/// Per-site inversion trend on `s x s` tori for each size `s`. Reports only.
pub fn global_inversion_demo(
    w: &dyn VertexWeights,
    sizes: &[usize],
    p: &Rapidity,
    q: &Rapidity,
    tol: f64,
) -> Result<Vec<InversionRow>, OperatorError> {
    let states = w.states();
    for &s in sizes {
        pow_checked(states, s, DEFAULT_DIMENSION_CAP)?;
    }
    let (c_qp, _) = local_inversion(w, q, p, tol)?;
    let w_pq = w.eval(p, q)?;
    let w_qp = w.eval(q, p)?;
    sizes
        .iter()
        .map(|&s| {
            let z_pq = torus_partition_function(&w_pq, s, s, DEFAULT_DIMENSION_CAP)?;
            let z_qp = torus_partition_function(&w_qp, s, s, DEFAULT_DIMENSION_CAP)?;
            let e = 1.0 / (s * s) as f64;
            let ratio = z_pq.powf(e) * z_qp.powf(e) / c_qp;
            Ok(InversionRow { rows: s, cols: s, z_pq, z_qp, ratio })
        })
        .collect()
}
