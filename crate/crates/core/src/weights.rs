//! Weight families in the four lattice languages, and the built-in solutions.
//!
//! Index placement for every rank-4 array follows the crossing picture:
//! a vertex weight is stored as `[α][μ][λ][β]` (lower pair first), a face
//! weight with corner spins `a, b` below and `c, d` above as `[a][b][c][d]`,
//! and a mixed edge/face weight as the eight-index concatenation
//! `[α][μ][λ][β][a][b][c][d]`. State indices are 0-based.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use thiserror::Error;

use crate::report::ResidualReport;
use crate::tensor::{DenseTensor, TensorError};

/// Moduli below this are treated as exact zeros of a denominator.
pub const POLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("expected a {expected} rapidity")]
    RapidityForm { expected: &'static str },
    #[error("vector rapidity has {got} components, expected {expected}")]
    VectorLength { expected: usize, got: usize },
    #[error("gauge component {component} of a vector rapidity is zero")]
    ZeroGauge { component: i64 },
    #[error("rapidity contains a non-finite component")]
    NonFiniteRapidity,
    #[error("singular weight: {what} vanishes at u = {u}")]
    Pole { what: &'static str, u: Complex64 },
    #[error("G[{rho}][{sigma}]·G[{sigma}][{rho}] = {product}, expected 1")]
    GProduct { rho: usize, sigma: usize, product: Complex64 },
    #[error("epsilon has {plus} entries +1, expected {expected}")]
    EpsilonCount { plus: usize, expected: usize },
    #[error("epsilon entries must be +1 or -1")]
    EpsilonValue,
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("normalization is zero")]
    ZeroNormalization,
    #[error("N = 4 Potts model is degenerate (theta = 0)")]
    PottsDegenerate,
    #[error("Potts N = {0} outside the trigonometric range 0 <= N < 4")]
    PottsRange(f64),
    #[error("Potts N = {0} is not a positive integer state count")]
    PottsStates(f64),
    #[error("weight evaluates to a non-finite value")]
    NonFinite,
    #[error("weight has extents {got:?}, expected {expected:?}")]
    Extents { expected: Vec<usize>, got: Vec<usize> },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Spectral parameter attached to a line.
#[derive(Debug, Clone, PartialEq)]
pub enum Rapidity {
    Scalar(Complex64),
    /// `2Q+1` components ordered from index `-Q` to `+Q`.
    Vector(Vec<Complex64>),
    /// Two scalars, for composite lines made of a pair of rapidity lines.
    Pair(Complex64, Complex64),
}

impl Rapidity {
    pub fn real(x: f64) -> Self {
        Rapidity::Scalar(Complex64::new(x, 0.0))
    }

    /// Vector rapidity with centre `p0` and all gauge components equal to 1.
    pub fn trivial_gauge(p0: Complex64, states: usize) -> Self {
        let mut v = vec![Complex64::new(1.0, 0.0); 2 * states + 1];
        v[states] = p0;
        Rapidity::Vector(v)
    }

    pub fn scalar(&self) -> Result<Complex64, WeightError> {
        match self {
            Rapidity::Scalar(z) => Ok(*z),
            _ => Err(WeightError::RapidityForm { expected: "scalar" }),
        }
    }

    pub fn pair(&self) -> Result<(Complex64, Complex64), WeightError> {
        match self {
            Rapidity::Pair(a, b) => Ok((*a, *b)),
            _ => Err(WeightError::RapidityForm { expected: "pair" }),
        }
    }

    /// Components of a vector rapidity for `states` line states.
    pub fn vector(&self, states: usize) -> Result<&[Complex64], WeightError> {
        match self {
            Rapidity::Vector(v) if v.len() == 2 * states + 1 => Ok(v),
            Rapidity::Vector(v) => Err(WeightError::VectorLength { expected: 2 * states + 1, got: v.len() }),
            _ => Err(WeightError::RapidityForm { expected: "vector" }),
        }
    }

    pub fn is_finite(&self) -> bool {
        let fin = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        match self {
            Rapidity::Scalar(z) => fin(z),
            Rapidity::Vector(v) => v.iter().all(fin),
            Rapidity::Pair(a, b) => fin(a) && fin(b),
        }
    }
}

pub trait VertexWeights: Send + Sync {
    fn states(&self) -> usize;
    /// Rank-4 array `[α][μ][λ][β]` at rapidities `(p, q)`.
    fn eval(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError>;
}

pub trait SpinWeights: Send + Sync {
    fn states(&self) -> usize;
    fn eval_w(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError>;
    fn eval_wbar(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError>;
}

pub trait IrfWeights: Send + Sync {
    /// Extents of the `[a][b][c][d]` axes. Checkerboard weights may colour
    /// alternate corners differently.
    fn face_extents(&self) -> [usize; 4];
    fn eval(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError>;
}

pub trait IrfVertexWeights: Send + Sync {
    fn edge_states(&self) -> usize;
    fn face_extents(&self) -> [usize; 4];
    /// Rank-8 array `[α][μ][λ][β][a][b][c][d]`.
    fn eval(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError>;
}

macro_rules! forward {
    ($tr:ident { $($body:tt)* }) => {
        impl<T: $tr + ?Sized> $tr for Box<T> { $($body)* }
        impl<T: $tr + ?Sized> $tr for &T { $($body)* }
        impl<T: $tr + ?Sized> $tr for alloc::sync::Arc<T> { $($body)* }
    };
}

forward!(VertexWeights {
    fn states(&self) -> usize { (**self).states() }
    fn eval(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> { (**self).eval(p, q) }
});

forward!(SpinWeights {
    fn states(&self) -> usize { (**self).states() }
    fn eval_w(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> { (**self).eval_w(p, q) }
    fn eval_wbar(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> { (**self).eval_wbar(p, q) }
});

forward!(IrfWeights {
    fn face_extents(&self) -> [usize; 4] { (**self).face_extents() }
    fn eval(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> { (**self).eval(p, q) }
});

forward!(IrfVertexWeights {
    fn edge_states(&self) -> usize { (**self).edge_states() }
    fn face_extents(&self) -> [usize; 4] { (**self).face_extents() }
    fn eval(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> { (**self).eval(p, q) }
});

/// Plain and barred weights of a checkerboard lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkerboard<F> {
    pub plain: F,
    pub barred: F,
}

type Eval = dyn Fn(&Rapidity, &Rapidity) -> Result<DenseTensor, WeightError> + Send + Sync;

/// Vertex family backed by a closure.
pub struct FnVertex {
    states: usize,
    f: Box<Eval>,
}

impl FnVertex {
    pub fn new(
        states: usize,
        f: impl Fn(&Rapidity, &Rapidity) -> Result<DenseTensor, WeightError> + Send + Sync + 'static,
    ) -> Self {
        Self { states, f: Box::new(f) }
    }
}

impl VertexWeights for FnVertex {
    fn states(&self) -> usize {
        self.states
    }
    fn eval(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
        (self.f)(p, q)
    }
}

/// Rapidity-independent vertex weight.
#[derive(Debug, Clone, PartialEq)]
pub struct TableVertex {
    table: DenseTensor,
}

impl TableVertex {
    pub fn new(table: DenseTensor) -> Result<Self, WeightError> {
        let q = table.extents().first().copied().unwrap_or(0);
        check_extents(&table, &[q; 4])?;
        Ok(Self { table })
    }

    pub fn table(&self) -> &DenseTensor {
        &self.table
    }
}

impl VertexWeights for TableVertex {
    fn states(&self) -> usize {
        self.table.extents()[0]
    }
    fn eval(&self, _: &Rapidity, _: &Rapidity) -> Result<DenseTensor, WeightError> {
        Ok(self.table.clone())
    }
}

/// `ω[α][μ][λ][β] = δ(α,λ) δ(μ,β)`: lines pass through without interacting.
pub fn decoupled_identity(states: usize) -> TableVertex {
    let t = DenseTensor::from_fn(&[states; 4], |i| {
        if i[0] == i[2] && i[1] == i[3] {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    TableVertex { table: t }
}

pub struct FnSpin {
    states: usize,
    w: Box<Eval>,
    wbar: Box<Eval>,
}

impl FnSpin {
    pub fn new(
        states: usize,
        w: impl Fn(&Rapidity, &Rapidity) -> Result<DenseTensor, WeightError> + Send + Sync + 'static,
        wbar: impl Fn(&Rapidity, &Rapidity) -> Result<DenseTensor, WeightError> + Send + Sync + 'static,
    ) -> Self {
        Self { states, w: Box::new(w), wbar: Box::new(wbar) }
    }
}

impl SpinWeights for FnSpin {
    fn states(&self) -> usize {
        self.states
    }
    fn eval_w(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
        (self.w)(p, q)
    }
    fn eval_wbar(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
        (self.wbar)(p, q)
    }
}

/// Rapidity-independent spin pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSpin {
    pub w: DenseTensor,
    pub wbar: DenseTensor,
}

impl TableSpin {
    pub fn new(w: DenseTensor, wbar: DenseTensor) -> Result<Self, WeightError> {
        let q = w.extents().first().copied().unwrap_or(0);
        check_extents(&w, &[q, q])?;
        check_extents(&wbar, &[q, q])?;
        Ok(Self { w, wbar })
    }

    pub fn all_ones(states: usize) -> Self {
        let one = DenseTensor::from_fn(&[states, states], |_| Complex64::new(1.0, 0.0));
        Self { w: one.clone(), wbar: one }
    }
}

impl SpinWeights for TableSpin {
    fn states(&self) -> usize {
        self.w.extents()[0]
    }
    fn eval_w(&self, _: &Rapidity, _: &Rapidity) -> Result<DenseTensor, WeightError> {
        Ok(self.w.clone())
    }
    fn eval_wbar(&self, _: &Rapidity, _: &Rapidity) -> Result<DenseTensor, WeightError> {
        Ok(self.wbar.clone())
    }
}

pub struct FnIrf {
    extents: [usize; 4],
    f: Box<Eval>,
}

impl FnIrf {
    pub fn new(
        extents: [usize; 4],
        f: impl Fn(&Rapidity, &Rapidity) -> Result<DenseTensor, WeightError> + Send + Sync + 'static,
    ) -> Self {
        Self { extents, f: Box::new(f) }
    }
}

impl IrfWeights for FnIrf {
    fn face_extents(&self) -> [usize; 4] {
        self.extents
    }
    fn eval(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
        (self.f)(p, q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableIrf {
    table: DenseTensor,
}

impl TableIrf {
    pub fn new(table: DenseTensor) -> Result<Self, WeightError> {
        if table.rank() != 4 {
            return Err(WeightError::Extents { expected: vec![0; 4], got: table.extents().to_vec() });
        }
        Ok(Self { table })
    }

    pub fn table(&self) -> &DenseTensor {
        &self.table
    }
}

impl IrfWeights for TableIrf {
    fn face_extents(&self) -> [usize; 4] {
        let e = self.table.extents();
        [e[0], e[1], e[2], e[3]]
    }
    fn eval(&self, _: &Rapidity, _: &Rapidity) -> Result<DenseTensor, WeightError> {
        Ok(self.table.clone())
    }
}

pub struct FnIrfVertex {
    edge: usize,
    faces: [usize; 4],
    f: Box<Eval>,
}

impl FnIrfVertex {
    pub fn new(
        edge: usize,
        faces: [usize; 4],
        f: impl Fn(&Rapidity, &Rapidity) -> Result<DenseTensor, WeightError> + Send + Sync + 'static,
    ) -> Self {
        Self { edge, faces, f: Box::new(f) }
    }
}

impl IrfVertexWeights for FnIrfVertex {
    fn edge_states(&self) -> usize {
        self.edge
    }
    fn face_extents(&self) -> [usize; 4] {
        self.faces
    }
    fn eval(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
        (self.f)(p, q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableIrfVertex {
    table: DenseTensor,
}

impl TableIrfVertex {
    pub fn new(table: DenseTensor) -> Result<Self, WeightError> {
        let e = table.extents();
        if e.len() != 8 || e[..4].iter().any(|&x| x != e[0]) {
            return Err(WeightError::Extents { expected: vec![0; 8], got: e.to_vec() });
        }
        Ok(Self { table })
    }

    pub fn table(&self) -> &DenseTensor {
        &self.table
    }
}

impl IrfVertexWeights for TableIrfVertex {
    fn edge_states(&self) -> usize {
        self.table.extents()[0]
    }
    fn face_extents(&self) -> [usize; 4] {
        let e = self.table.extents();
        [e[4], e[5], e[6], e[7]]
    }
    fn eval(&self, _: &Rapidity, _: &Rapidity) -> Result<DenseTensor, WeightError> {
        Ok(self.table.clone())
    }
}

pub(crate) fn check_extents(t: &DenseTensor, expected: &[usize]) -> Result<(), WeightError> {
    if t.extents() != expected {
        return Err(WeightError::Extents { expected: expected.to_vec(), got: t.extents().to_vec() });
    }
    Ok(())
}

pub(crate) fn check_finite(t: DenseTensor) -> Result<DenseTensor, WeightError> {
    if t.is_finite() {
        Ok(t)
    } else {
        Err(WeightError::NonFinite)
    }
}

// ---------------------------------------------------------------------------
// sl(m|n)

/// Overall prefactor of the sl(m|n) weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    Constant(Complex64),
    /// `c / sinh(p0 - q0)`.
    OverSinhDifference(Complex64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlmnParams {
    pub m: usize,
    pub n: usize,
    pub eta: Complex64,
    /// `Q x Q` row-major; diagonal entries are unused.
    pub g: Vec<Complex64>,
    pub norm: Normalization,
    pub epsilon: Vec<i8>,
}

impl SlmnParams {
    /// Defaults: all `G = 1`, unit normalization, the first `m` signs +1.
    pub fn new(m: usize, n: usize, eta: Complex64) -> Self {
        let q = m + n;
        let mut epsilon = vec![1i8; m];
        epsilon.extend(core::iter::repeat_n(-1i8, n));
        Self {
            m,
            n,
            eta,
            g: vec![Complex64::new(1.0, 0.0); q * q],
            norm: Normalization::Constant(Complex64::new(1.0, 0.0)),
            epsilon,
        }
    }

    /// The Q = 2, m = 0 case: the six-vertex model.
    pub fn six_vertex(eta: f64) -> Self {
        Self::new(0, 2, Complex64::new(eta, 0.0))
    }

    /// Six-vertex family normalised so that the weight at `eta = 0` is the
    /// pure exchange `δ(α,β) δ(μ,λ)`, i.e. the R-matrix is the identity.
    pub fn classical(hbar: f64) -> Self {
        let mut p = Self::new(0, 2, Complex64::new(hbar, 0.0));
        p.g = vec![Complex64::new(-1.0, 0.0); 4];
        p.norm = Normalization::OverSinhDifference(Complex64::new(-1.0, 0.0));
        p
    }

    pub fn with_g(mut self, g: Vec<Complex64>) -> Self {
        self.g = g;
        self
    }

    pub fn with_norm(mut self, norm: Normalization) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_epsilon(mut self, epsilon: Vec<i8>) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn states(&self) -> usize {
        self.m + self.n
    }

    /// All invariant violations; empty when the parameters are usable.
    pub fn validate(&self) -> Vec<WeightError> {
        let q = self.states();
        let mut out = Vec::new();
        if q == 0 {
            out.push(WeightError::Params(String::from("m + n must be at least 1")));
            return out;
        }
        if self.g.len() != q * q {
            out.push(WeightError::Extents { expected: vec![q, q], got: vec![self.g.len()] });
        } else {
            for rho in 0..q {
                for sigma in rho + 1..q {
                    let product = self.g[rho * q + sigma] * self.g[sigma * q + rho];
                    if (product - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
                        out.push(WeightError::GProduct { rho, sigma, product });
                    }
                }
            }
        }
        if self.epsilon.len() != q {
            out.push(WeightError::Extents { expected: vec![q], got: vec![self.epsilon.len()] });
        } else if self.epsilon.iter().any(|&e| e != 1 && e != -1) {
            out.push(WeightError::EpsilonValue);
        } else {
            let plus = self.epsilon.iter().filter(|&&e| e == 1).count();
            if plus != self.m {
                out.push(WeightError::EpsilonCount { plus, expected: self.m });
            }
        }
        let c = match self.norm {
            Normalization::Constant(c) | Normalization::OverSinhDifference(c) => c,
        };
        if c.norm() == 0.0 {
            out.push(WeightError::ZeroNormalization);
        }
        let fin = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !fin(&self.eta) || !fin(&c) || !self.g.iter().all(fin) {
            out.push(WeightError::NonFinite);
        }
        out
    }
}

/// The sl(m|n) vertex family over vector rapidities.
#[derive(Debug, Clone, PartialEq)]
pub struct SlmnVertex {
    params: SlmnParams,
}

pub fn slmn_vertex_weight(params: SlmnParams) -> Result<SlmnVertex, WeightError> {
    if let Some(e) = params.validate().into_iter().next() {
        return Err(e);
    }
    Ok(SlmnVertex { params })
}

impl SlmnVertex {
    pub fn params(&self) -> &SlmnParams {
        &self.params
    }

    /// Weight at centre components only, before gauge dressing.
    pub fn bare(&self, p0: Complex64, q0: Complex64) -> Result<DenseTensor, WeightError> {
        let q = self.params.states();
        let u = p0 - q0;
        let norm = match self.params.norm {
            Normalization::Constant(c) => c,
            Normalization::OverSinhDifference(c) => {
                let s = u.sinh();
                if s.norm() < POLE_EPS {
                    return Err(WeightError::Pole { what: "sinh(p0 - q0)", u });
                }
                c / s
            }
        };
        let eta = self.params.eta;
        let sinh_u = u.sinh();
        let sinh_eta = eta.sinh();
        let mut w = DenseTensor::zeros(&[q; 4]);
        for r in 0..q {
            let eps = f64::from(self.params.epsilon[r]);
            w.set(&[r, r, r, r], norm * (eta + u * eps).sinh());
            for s in 0..q {
                if r == s {
                    continue;
                }
                // exchange: colour r continues on the μ→λ string, s on α→β
                w.set(&[s, r, r, s], norm * self.params.g[r * q + s] * sinh_u);
                let sign = if r > s { 1.0 } else { -1.0 };
                w.set(&[s, r, s, r], norm * (u * sign).exp() * sinh_eta);
            }
        }
        Ok(w)
    }
}

impl VertexWeights for SlmnVertex {
    fn states(&self) -> usize {
        self.params.states()
    }

    fn eval(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
        let n = self.params.states();
        let pv = p.vector(n)?;
        let qv = q.vector(n)?;
        for (v, _) in [(pv, 'p'), (qv, 'q')] {
            for (k, z) in v.iter().enumerate() {
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(WeightError::NonFiniteRapidity);
                }
                if k != n && z.norm() == 0.0 {
                    return Err(WeightError::ZeroGauge { component: k as i64 - n as i64 });
                }
            }
        }
        let mut w = self.bare(pv[n], qv[n])?;
        // p_{+ρ} sits at n + ρ for 1-based ρ, i.e. n + 1 + state
        let plus = |v: &[Complex64], s: usize| v[n + 1 + s];
        let minus = |v: &[Complex64], s: usize| v[n - 1 - s];
        let mut idx = [0usize; 4];
        for (k, z) in w.data_mut().iter_mut().enumerate() {
            if z.re == 0.0 && z.im == 0.0 {
                continue;
            }
            let mut o = k;
            for slot in idx.iter_mut().rev() {
                *slot = o % n;
                o /= n;
            }
            let [a, mu, l, b] = idx;
            *z *= plus(pv, l) * minus(qv, b) / (plus(qv, a) * minus(pv, mu));
        }
        check_finite(w)
    }
}

// ---------------------------------------------------------------------------
// Potts

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PottsParams {
    n: f64,
    theta: f64,
    /// Scale constant of the impedance form of the zero-state limit.
    pub c: f64,
}

impl PottsParams {
    pub fn new(n: f64) -> Result<Self, WeightError> {
        if n == 4.0 {
            return Err(WeightError::PottsDegenerate);
        }
        if !(0.0..4.0).contains(&n) {
            return Err(WeightError::PottsRange(n));
        }
        Ok(Self { n, theta: libm::acos(libm::sqrt(n) / 2.0), c: 1.0 })
    }

    /// The `N -> 0` limit, where `theta = π/2` and `x(u) = tan u`.
    pub fn zero_limit() -> Self {
        Self { n: 0.0, theta: core::f64::consts::FRAC_PI_2, c: 1.0 }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `sin(u) / sin(θ - u)`.
    pub fn x(&self, u: Complex64) -> Result<Complex64, WeightError> {
        let den = (Complex64::new(self.theta, 0.0) - u).sin();
        if den.norm() < POLE_EPS {
            return Err(WeightError::Pole { what: "sin(theta - u)", u });
        }
        Ok(u.sin() / den)
    }

    /// `sin(θ - u) / sin(u)`, the reciprocal of [`x`](Self::x).
    pub fn x_bar(&self, u: Complex64) -> Result<Complex64, WeightError> {
        let den = u.sin();
        if den.norm() < POLE_EPS {
            return Err(WeightError::Pole { what: "sin(u)", u });
        }
        Ok((Complex64::new(self.theta, 0.0) - u).sin() / den)
    }
}

/// Potts spin pair `W = 1 + √N x(p-q) δ`, `W̄ = 1 + √N x̄(p-q) δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PottsSpin {
    params: PottsParams,
    states: usize,
}

pub fn potts_spin_weights(params: PottsParams) -> Result<PottsSpin, WeightError> {
    let n = params.n;
    if n < 1.0 || libm::trunc(n) != n {
        return Err(WeightError::PottsStates(n));
    }
    Ok(PottsSpin { params, states: n as usize })
}

impl PottsSpin {
    pub fn params(&self) -> &PottsParams {
        &self.params
    }

    fn build(&self, coupling: Complex64) -> DenseTensor {
        let sq = libm::sqrt(self.params.n);
        DenseTensor::from_fn(&[self.states; 2], |i| {
            if i[0] == i[1] {
                Complex64::new(1.0, 0.0) + coupling * sq
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
    }
}

impl SpinWeights for PottsSpin {
    fn states(&self) -> usize {
        self.states
    }
    fn eval_w(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
        let x = self.params.x(p.scalar()? - q.scalar()?)?;
        check_finite(self.build(x))
    }
    fn eval_wbar(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
        let x = self.params.x_bar(p.scalar()? - q.scalar()?)?;
        check_finite(self.build(x))
    }
}

/// Residual of `x̄(p-q) x(p-r) x̄(q-r) = x̄(p-q) + x(p-r) + x̄(q-r) + √N`.
pub fn potts_rapidity_relation_check(
    params: &PottsParams,
    p: Complex64,
    q: Complex64,
    r: Complex64,
    tol: f64,
) -> Result<ResidualReport, WeightError> {
    let a = params.x_bar(p - q)?;
    let b = params.x(p - r)?;
    let c = params.x_bar(q - r)?;
    let lhs = a * b * c;
    let rhs = a + b + c + Complex64::new(libm::sqrt(params.n), 0.0);
    Ok(ResidualReport::from_parts("potts-rapidity-relation", (lhs - rhs).norm(), lhs.norm(), Vec::new(), tol))
}

/// Problems found in one evaluation of a vertex family. Never fails itself.
pub fn validate_vertex(family: &dyn VertexWeights, p: &Rapidity, q: &Rapidity) -> Vec<WeightError> {
    let mut out = Vec::new();
    match family.eval(p, q) {
        Ok(t) => {
            let n = family.states();
            if t.extents() != [n; 4] {
                out.push(WeightError::Extents { expected: vec![n; 4], got: t.extents().to_vec() });
            }
            if !t.is_finite() {
                out.push(WeightError::NonFinite);
            }
        }
        Err(e) => out.push(e),
    }
    out
}

/// Like [`validate_vertex`], plus the parameter invariants of an sl(m|n) family.
pub fn validate_slmn(params: &SlmnParams, p: &Rapidity, q: &Rapidity) -> Vec<WeightError> {
    let mut out = params.validate();
    if out.is_empty() {
        let fam = SlmnVertex { params: params.clone() };
        out.extend(validate_vertex(&fam, p, q));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::max_abs_diff;
    use core::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn equal_rapidities_decouple() {
        let fam = slmn_vertex_weight(SlmnParams::new(1, 2, c(0.4))).unwrap();
        let p = Rapidity::trivial_gauge(c(0.7), 3);
        let w = fam.eval(&p, &p).unwrap();
        let expect = decoupled_identity(3).table().scaled(libm::sinh(0.4).into());
        assert!(max_abs_diff(&w, &expect).unwrap() <= 1e-12);
    }

    #[test]
    fn six_vertex_has_six_entries() {
        let fam = slmn_vertex_weight(SlmnParams::six_vertex(0.3)).unwrap();
        let w = fam.eval(&Rapidity::trivial_gauge(c(0.9), 2), &Rapidity::trivial_gauge(c(0.2), 2)).unwrap();
        assert_eq!(w.data().iter().filter(|z| z.norm() != 0.0).count(), 6);
    }

    #[test]
    fn diagonal_entry_value() {
        let fam = slmn_vertex_weight(SlmnParams::new(1, 0, c(0.3))).unwrap();
        let w = fam.eval(&Rapidity::trivial_gauge(c(0.5), 1), &Rapidity::trivial_gauge(c(0.3), 1)).unwrap();
        assert!((w.get(&[0, 0, 0, 0]) - c(libm::sinh(0.5))).norm() < 1e-15);
    }

    #[test]
    fn rapidity_form_errors() {
        let fam = slmn_vertex_weight(SlmnParams::six_vertex(0.3)).unwrap();
        let s = Rapidity::real(0.1);
        assert!(matches!(fam.eval(&s, &s), Err(WeightError::RapidityForm { .. })));
        let short = Rapidity::Vector(vec![c(1.0); 3]);
        assert!(matches!(fam.eval(&short, &short), Err(WeightError::VectorLength { expected: 5, got: 3 })));
        let mut v = vec![c(1.0); 5];
        v[0] = c(0.0);
        let zero = Rapidity::Vector(v);
        let ok = Rapidity::trivial_gauge(c(0.1), 2);
        assert!(matches!(fam.eval(&zero, &ok), Err(WeightError::ZeroGauge { component: -2 })));
    }

    #[test]
    fn validation_catches_broken_invariants() {
        assert!(SlmnParams::six_vertex(0.3).validate().is_empty());
        let mut g = vec![c(1.0); 4];
        g[1] = c(2.0);
        let bad = SlmnParams::six_vertex(0.3).with_g(g);
        assert!(matches!(bad.validate()[..], [WeightError::GProduct { rho: 0, sigma: 1, .. }]));
        let eps = SlmnParams::new(1, 1, c(0.3)).with_epsilon(vec![1, 1]);
        assert!(matches!(eps.validate()[..], [WeightError::EpsilonCount { plus: 2, expected: 1 }]));
        assert!(slmn_vertex_weight(bad).is_err());
        let p = Rapidity::trivial_gauge(c(0.3), 2);
        let q = Rapidity::trivial_gauge(c(0.1), 2);
        assert!(validate_slmn(&SlmnParams::six_vertex(0.3), &p, &q).is_empty());
    }

    #[test]
    fn classical_family_is_exchange_at_zero() {
        let fam = slmn_vertex_weight(SlmnParams::classical(0.0)).unwrap();
        let w = fam.eval(&Rapidity::trivial_gauge(c(0.8), 2), &Rapidity::trivial_gauge(c(0.3), 2)).unwrap();
        let expect = DenseTensor::from_fn(&[2; 4], |i| c(if i[0] == i[3] && i[1] == i[2] { 1.0 } else { 0.0 }));
        assert!(max_abs_diff(&w, &expect).unwrap() < 1e-15);
    }

    #[test]
    fn potts_basics() {
        assert!((PottsParams::new(2.0).unwrap().theta() - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(PottsParams::new(4.0), Err(WeightError::PottsDegenerate));
        assert!(matches!(PottsParams::new(5.0), Err(WeightError::PottsRange(_))));
        assert!(matches!(potts_spin_weights(PottsParams::new(2.5).unwrap()), Err(WeightError::PottsStates(_))));
        let z = PottsParams::zero_limit();
        for u in [0.1, 0.37, 1.1] {
            assert!((z.x(c(u)).unwrap() - c(libm::tan(u))).norm() <= 1e-12);
        }
    }

    #[test]
    fn potts_relation_hand_point() {
        let z = PottsParams::zero_limit();
        let p = c(2.0 * FRAC_PI_8);
        let q = c(FRAC_PI_8);
        let r = c(0.0);
        let lhs = z.x_bar(p - q).unwrap() * z.x(p - r).unwrap() * z.x_bar(q - r).unwrap();
        let expect = 3.0 + 2.0 * libm::sqrt(2.0);
        assert!((lhs - c(expect)).norm() < 1e-12);
        assert!(potts_rapidity_relation_check(&z, p, q, r, 1e-12).unwrap().pass);
        let three = PottsParams::new(3.0).unwrap();
        assert!(matches!(
            potts_rapidity_relation_check(&three, c(0.5), c(0.5), c(0.1), 1e-12),
            Err(WeightError::Pole { .. })
        ));
    }

    #[test]
    fn potts_weights_symmetric() {
        let fam = potts_spin_weights(PottsParams::new(3.0).unwrap()).unwrap();
        let w = fam.eval_w(&Rapidity::real(0.8), &Rapidity::real(0.3)).unwrap();
        let t = w.permute_axes(&[1, 0]).unwrap();
        assert_eq!(w, t);
    }

    proptest::proptest! {
        #[test]
        fn x_times_xbar_is_one(u in 0.05f64..0.7, n in 1u32..4) {
            let p = PottsParams::new(f64::from(n)).unwrap();
            let u = c(u);
            let prod = p.x(u).unwrap() * p.x_bar(u).unwrap();
            proptest::prop_assert!((prod - c(1.0)).norm() < 1e-12);
        }

        #[test]
        fn decoupling_for_any_params(eta in 0.1f64..1.0, p0 in 0.1f64..1.2, norm in 0.2f64..3.0, mn in 0usize..4) {
            let (m, n) = [(0, 2), (0, 3), (1, 1), (2, 1)][mn];
            let params = SlmnParams::new(m, n, c(eta)).with_norm(Normalization::Constant(c(norm)));
            let fam = slmn_vertex_weight(params).unwrap();
            let p = Rapidity::trivial_gauge(c(p0), m + n);
            let w = fam.eval(&p, &p).unwrap();
            let expect = decoupled_identity(m + n).table().scaled(c(norm * libm::sinh(eta)));
            proptest::prop_assert!(max_abs_diff(&w, &expect).unwrap() <= 1e-12);
        }
    }
}
