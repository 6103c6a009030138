//! Star-triangle and Yang-Baxter checks in every lattice language.
//!
//! Each check evaluates the weights at `(p,q)`, `(q,r)`, `(p,r)`, builds
//! both sides as dense tensors over the free boundary indices and compares
//! them. Relations that carry a scalar factor estimate it with
//! [`estimate_scalar_factor`] before comparing.
//!
//! Index letters in the contraction strings: `a b c` / `A B C` are the
//! unprimed / primed boundary spins (or `α β γ` / `α' β' γ'` for line
//! states), `x y z` are internal line states and `d`, `e` internal face
//! spins. For mixed edge/face weights the line states use `i j k` / `I J K`.

use alloc::format;
use alloc::string::String;
use num_complex::Complex64;
use thiserror::Error;

use crate::report::{estimate_scalar_factor, ResidualReport, ScalarError};
use crate::tensor::{einsum, einsum_pairwise, DenseTensor, TensorError};
use crate::weights::{IrfVertexWeights, IrfWeights, Rapidity, SpinWeights, VertexWeights, WeightError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("incompatible weights: {0}")]
    Mismatch(String),
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn finite(t: DenseTensor) -> Result<DenseTensor, VerifyError> {
    if t.is_finite() {
        Ok(t)
    } else {
        Err(WeightError::NonFinite.into())
    }
}

/// Weights of one family at the three rapidity pairs of a triangle.
struct Triple {
    pq: DenseTensor,
    qr: DenseTensor,
    pr: DenseTensor,
}

impl Triple {
    fn eval(
        f: impl Fn(&Rapidity, &Rapidity) -> Result<DenseTensor, WeightError>,
        p: &Rapidity,
        q: &Rapidity,
        r: &Rapidity,
    ) -> Result<Self, VerifyError> {
        Ok(Self { pq: finite(f(p, q)?)?, qr: finite(f(q, r)?)?, pr: finite(f(p, r)?)? })
    }
}

const VERTEX_LHS: [&[u8]; 3] = [b"baxy", b"xzCA", b"yczB"];
const VERTEX_RHS: [&[u8]; 3] = [b"yxAB", b"aczx", b"bzCy"];
const VERTEX_OUT: &[u8] = b"abcABC";

fn vertex_side(labels: [&[u8]; 3], w: [&DenseTensor; 3]) -> Result<DenseTensor, TensorError> {
    einsum_pairwise(&[(w[0], labels[0]), (w[1], labels[1]), (w[2], labels[2])], VERTEX_OUT)
}

/// Both sides of the vertex Yang-Baxter equation as rank-6 tensors over
/// `(α, β, γ, α', β', γ')`.
pub fn vertex_ybe_sides(
    pq: &DenseTensor,
    qr: &DenseTensor,
    pr: &DenseTensor,
) -> Result<(DenseTensor, DenseTensor), TensorError> {
    Ok((vertex_side(VERTEX_LHS, [pq, qr, pr])?, vertex_side(VERTEX_RHS, [pq, qr, pr])?))
}

fn check_vertex_shape(w: &dyn VertexWeights) -> Result<(), VerifyError> {
    if w.states() == 0 {
        return Err(VerifyError::Mismatch(String::from("vertex family with zero states")));
    }
    Ok(())
}

pub fn verify_vertex_ybe(
    w: &dyn VertexWeights,
    p: &Rapidity,
    q: &Rapidity,
    r: &Rapidity,
    tol: f64,
) -> Result<ResidualReport, VerifyError> {
    check_vertex_shape(w)?;
    let t = Triple::eval(|a, b| w.eval(a, b), p, q, r)?;
    let (lhs, rhs) = vertex_ybe_sides(&t.pq, &t.qr, &t.pr)?;
    Ok(ResidualReport::from_sides("vertex-ybe", &lhs, &rhs, one(), tol)?)
}

/// Which index order the spin weights enter the star-triangle relations with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpinConvention {
    #[default]
    AsPrinted,
    /// Both spin arguments of all six weights swapped.
    Transposed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub first: ResidualReport,
    pub second: ResidualReport,
}

impl PairReport {
    pub fn pass(&self) -> bool {
        self.first.pass && self.second.pass
    }

    /// `|R - R̄|`, meaningful when both relations estimate a scalar.
    pub fn scalar_gap(&self) -> f64 {
        match (self.first.scalar_r, self.second.scalar_rbar) {
            (Some(a), Some(b)) => (a - b).norm(),
            _ => 0.0,
        }
    }
}

/// Checks a pair of relations sharing one contraction pattern: the first
/// with `(plain, plain, barred)` on the summed side and a scalar `R` on the
/// other, the second with the bars swapped and `R̄` on the summed side.
fn checkerboard_pair(
    name: &str,
    star: impl Fn(&Triple, &Triple) -> Result<DenseTensor, TensorError>,
    other: impl Fn(&Triple, &Triple) -> Result<DenseTensor, TensorError>,
    plain: &Triple,
    barred: &Triple,
    tol: f64,
) -> Result<PairReport, VerifyError> {
    let lhs1 = star(plain, barred)?;
    let rhs1 = other(barred, plain)?;
    let (r, _) = estimate_scalar_factor(&lhs1, &rhs1)?;
    let first = ResidualReport::from_sides(&format!("{name}-1"), &lhs1, &rhs1, r, tol)?.with_r(r);

    let lhs2 = star(barred, plain)?;
    let rhs2 = other(plain, barred)?;
    let (rbar, _) = estimate_scalar_factor(&rhs2, &lhs2)?;
    let second = ResidualReport::from_sides(&format!("{name}-2"), &rhs2, &lhs2, rbar, tol)?.with_rbar(rbar);
    Ok(PairReport { first, second })
}

/// Both spin star-triangle relations with independently estimated `R`, `R̄`.
pub fn verify_spin_star_triangle(
    pair: &dyn SpinWeights,
    p: &Rapidity,
    q: &Rapidity,
    r: &Rapidity,
    tol: f64,
    convention: SpinConvention,
) -> Result<PairReport, VerifyError> {
    let orient = |t: DenseTensor| -> Result<DenseTensor, VerifyError> {
        let t = finite(t)?;
        let n = pair.states();
        if t.extents() != [n, n] {
            return Err(WeightError::Extents { expected: alloc::vec![n, n], got: t.extents().to_vec() }.into());
        }
        Ok(match convention {
            SpinConvention::AsPrinted => t,
            SpinConvention::Transposed => t.permute_axes(&[1, 0])?,
        })
    };
    let w = Triple {
        pq: orient(pair.eval_w(p, q)?)?,
        qr: orient(pair.eval_w(q, r)?)?,
        pr: orient(pair.eval_w(p, r)?)?,
    };
    let wb = Triple {
        pq: orient(pair.eval_wbar(p, q)?)?,
        qr: orient(pair.eval_wbar(q, r)?)?,
        pr: orient(pair.eval_wbar(p, r)?)?,
    };
    spin_star_triangle_tables(&w, &wb, tol)
}

fn spin_star_triangle_tables(w: &Triple, wb: &Triple, tol: f64) -> Result<PairReport, VerifyError> {
    let lhs1 = einsum(&[(&wb.pq, b"cd"), (&wb.qr, b"db"), (&w.pr, b"da")], b"abc")?;
    let rhs1 = einsum(&[(&w.pq, b"ba"), (&w.qr, b"ca"), (&wb.pr, b"cb")], b"abc")?;
    let (r, _) = estimate_scalar_factor(&lhs1, &rhs1)?;
    let first = ResidualReport::from_sides("star-triangle-1", &lhs1, &rhs1, r, tol)?.with_r(r);

    let sum2 = einsum(&[(&wb.pq, b"dc"), (&wb.qr, b"bd"), (&w.pr, b"ad")], b"abc")?;
    let prod2 = einsum(&[(&w.pq, b"ab"), (&w.qr, b"ac"), (&wb.pr, b"bc")], b"abc")?;
    let (rbar, _) = estimate_scalar_factor(&sum2, &prod2)?;
    let second = ResidualReport::from_sides("star-triangle-2", &sum2, &prod2, rbar, tol)?.with_rbar(rbar);
    Ok(PairReport { first, second })
}

const IRF_STAR: [&[u8]; 3] = [b"cBdA", b"dCbA", b"BaCd"];
const IRF_OTHER: [&[u8]; 3] = [b"eaCb", b"Baec", b"cebA"];
const IRF_OUT: &[u8] = b"abcABC";

fn irf_side(labels: [&[u8]; 3], w: [&DenseTensor; 3]) -> Result<DenseTensor, TensorError> {
    einsum_pairwise(&[(w[0], labels[0]), (w[1], labels[1]), (w[2], labels[2])], IRF_OUT)
}

/// Face-model Yang-Baxter equation, free corner spins `(a,b,c,a',b',c')`.
pub fn verify_irf_ybe(
    w: &dyn IrfWeights,
    p: &Rapidity,
    q: &Rapidity,
    r: &Rapidity,
    tol: f64,
) -> Result<ResidualReport, VerifyError> {
    let t = Triple::eval(|a, b| w.eval(a, b), p, q, r)?;
    let lhs = irf_side(IRF_STAR, [&t.pq, &t.qr, &t.pr])?;
    let rhs = irf_side(IRF_OTHER, [&t.pq, &t.qr, &t.pr])?;
    Ok(ResidualReport::from_sides("irf-ybe", &lhs, &rhs, one(), tol)?)
}

const MIXED_STAR: [&[u8]; 3] = [b"jixycBdA", b"xzKIdCbA", b"ykzJBaCd"];
const MIXED_OTHER: [&[u8]; 3] = [b"yxIJeaCb", b"ikzxBaec", b"jzKycebA"];
const MIXED_OUT: &[u8] = b"ijkIJKabcABC";

fn mixed_side(labels: [&[u8]; 3], w: [&DenseTensor; 3]) -> Result<DenseTensor, TensorError> {
    einsum_pairwise(&[(w[0], labels[0]), (w[1], labels[1]), (w[2], labels[2])], MIXED_OUT)
}

/// Checkerboard vertex relations: plain `ω` and barred `ω̄`.
pub fn verify_checkerboard_vertex(
    plain: &dyn VertexWeights,
    barred: &dyn VertexWeights,
    p: &Rapidity,
    q: &Rapidity,
    r: &Rapidity,
    tol: f64,
) -> Result<PairReport, VerifyError> {
    if plain.states() != barred.states() {
        return Err(VerifyError::Mismatch(format!(
            "plain has {} states, barred {}",
            plain.states(),
            barred.states()
        )));
    }
    let a = Triple::eval(|x, y| plain.eval(x, y), p, q, r)?;
    let b = Triple::eval(|x, y| barred.eval(x, y), p, q, r)?;
    checkerboard_pair(
        "checkerboard-vertex",
        |s, t| vertex_side(VERTEX_LHS, [&s.pq, &s.qr, &t.pr]),
        |s, t| vertex_side(VERTEX_RHS, [&s.pq, &s.qr, &t.pr]),
        &a,
        &b,
        tol,
    )
}

/// Checkerboard face relations. Plain weights carry corner extents
/// `[nA, nB, nA, nB]` and barred weights `[nB, nA, nB, nA]`.
pub fn verify_checkerboard_irf(
    plain: &dyn IrfWeights,
    barred: &dyn IrfWeights,
    p: &Rapidity,
    q: &Rapidity,
    r: &Rapidity,
    tol: f64,
) -> Result<PairReport, VerifyError> {
    let [a0, b0, c0, d0] = plain.face_extents();
    if a0 != c0 || b0 != d0 || barred.face_extents() != [b0, a0, b0, a0] {
        return Err(VerifyError::Mismatch(format!(
            "face extents {:?} / {:?} are not a checkerboard colouring",
            plain.face_extents(),
            barred.face_extents()
        )));
    }
    let a = Triple::eval(|x, y| plain.eval(x, y), p, q, r)?;
    let b = Triple::eval(|x, y| barred.eval(x, y), p, q, r)?;
    checkerboard_pair(
        "checkerboard-irf",
        |s, t| irf_side(IRF_STAR, [&s.pq, &s.qr, &t.pr]),
        |s, t| irf_side(IRF_OTHER, [&s.pq, &s.qr, &t.pr]),
        &a,
        &b,
        tol,
    )
}

/// Checkerboard mixed edge/face relations.
pub fn verify_checkerboard_irf_vertex(
    plain: &dyn IrfVertexWeights,
    barred: &dyn IrfVertexWeights,
    p: &Rapidity,
    q: &Rapidity,
    r: &Rapidity,
    tol: f64,
) -> Result<PairReport, VerifyError> {
    let [a0, b0, c0, d0] = plain.face_extents();
    if plain.edge_states() != barred.edge_states()
        || a0 != c0
        || b0 != d0
        || barred.face_extents() != [b0, a0, b0, a0]
    {
        return Err(VerifyError::Mismatch(String::from("plain and barred mixed weights do not match")));
    }
    let a = Triple::eval(|x, y| plain.eval(x, y), p, q, r)?;
    let b = Triple::eval(|x, y| barred.eval(x, y), p, q, r)?;
    checkerboard_pair(
        "checkerboard-irf-vertex",
        |s, t| mixed_side(MIXED_STAR, [&s.pq, &s.qr, &t.pr]),
        |s, t| mixed_side(MIXED_OTHER, [&s.pq, &s.qr, &t.pr]),
        &a,
        &b,
        tol,
    )
}

/// The general mixed relation: the checkerboard relation with the same
/// weight on both colours. Both members then coincide; the first is returned.
pub fn verify_irf_vertex_ybe(
    w: &dyn IrfVertexWeights,
    p: &Rapidity,
    q: &Rapidity,
    r: &Rapidity,
    tol: f64,
) -> Result<ResidualReport, VerifyError> {
    let [a0, b0, c0, d0] = w.face_extents();
    if !(a0 == b0 && b0 == c0 && c0 == d0) {
        return Err(VerifyError::Mismatch(String::from("uniform faces required when plain = barred")));
    }
    let t = Triple::eval(|x, y| w.eval(x, y), p, q, r)?;
    let lhs = mixed_side(MIXED_STAR, [&t.pq, &t.qr, &t.pr])?;
    let rhs = mixed_side(MIXED_OTHER, [&t.pq, &t.qr, &t.pr])?;
    let (s, _) = estimate_scalar_factor(&lhs, &rhs)?;
    let mut rep = ResidualReport::from_sides("irf-vertex-ybe", &lhs, &rhs, s, tol)?.with_r(s);
    rep.scalar_rbar = Some(s);
    Ok(rep)
}

/// Dispatch over the three checkerboard languages.
pub enum CheckerboardPair<'a> {
    Vertex(&'a dyn VertexWeights, &'a dyn VertexWeights),
    Irf(&'a dyn IrfWeights, &'a dyn IrfWeights),
    IrfVertex(&'a dyn IrfVertexWeights, &'a dyn IrfVertexWeights),
}

pub fn verify_checkerboard(
    pair: &CheckerboardPair<'_>,
    p: &Rapidity,
    q: &Rapidity,
    r: &Rapidity,
    tol: f64,
) -> Result<PairReport, VerifyError> {
    match *pair {
        CheckerboardPair::Vertex(a, b) => verify_checkerboard_vertex(a, b, p, q, r, tol),
        CheckerboardPair::Irf(a, b) => verify_checkerboard_irf(a, b, p, q, r, tol),
        CheckerboardPair::IrfVertex(a, b) => verify_checkerboard_irf_vertex(a, b, p, q, r, tol),
    }
}
