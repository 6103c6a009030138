//! Translations between the lattice languages.
//!
//! * [`square_weight_compose`]: four spin weights around a square become one
//!   vertex weight on composite lines carrying a pair of rapidities.
//! * [`irf_vertex_to_vertex`]: mixed edge/face weights become vertex weights
//!   on composite states `(left face, edge, right face)`.
//! * [`vertex_to_spin`]: vertex weights become spin weights whose spins are
//!   the 4-tuples of segment states around a face.
//! * [`embed_spin_as_checkerboard_irf`]: spin weights become face weights
//!   with single-valued spins on one colour.

use alloc::vec;
use num_complex::Complex64;

use crate::tensor::{for_each_index, DenseTensor};
use crate::weights::{
    check_extents, IrfVertexWeights, IrfWeights, Rapidity, SpinWeights, VertexWeights, WeightError,
};

/// Vertex family built from a spin pair on a square of four weights.
///
/// For `P = (p1, p2)` and `Q = (q1, q2)` the weight is
/// `W[α,μ](p1,q2) · W̄[μ,β](p1,q1) · W̄[α,λ](p2,q2) · W[λ,β](p2,q1)`,
/// where spins play the role of line states. The crossing line's pair is
/// read in reverse order relative to the first line's pair; with the
/// straight pairing `(q1, q2)` the composite fails the vertex relation.
pub struct SquareWeight<S> {
    spins: S,
}

pub fn square_weight_compose<S: SpinWeights>(spins: S) -> SquareWeight<S> {
    SquareWeight { spins }
}

impl<S: SpinWeights> SquareWeight<S> {
    pub fn spins(&self) -> &S {
        &self.spins
    }
}

impl<S: SpinWeights> VertexWeights for SquareWeight<S> {
    fn states(&self) -> usize {
        self.spins.states()
    }

    fn eval(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
        let (p1, p2) = p.pair()?;
        let (q1, q2) = q.pair()?;
        let s = |z: Complex64| Rapidity::Scalar(z);
        let n = self.spins.states();
        let w12 = self.spins.eval_w(&s(p1), &s(q2))?;
        let wb11 = self.spins.eval_wbar(&s(p1), &s(q1))?;
        let wb22 = self.spins.eval_wbar(&s(p2), &s(q2))?;
        let w21 = self.spins.eval_w(&s(p2), &s(q1))?;
        for t in [&w12, &wb11, &wb22, &w21] {
            check_extents(t, &[n, n])?;
        }
        Ok(DenseTensor::from_fn(&[n; 4], |i| {
            let [a, mu, l, b] = [i[0], i[1], i[2], i[3]];
            w12.get(&[a, mu]) * wb11.get(&[mu, b]) * wb22.get(&[a, l]) * w21.get(&[l, b])
        }))
    }
}

/// Vertex family on composite line states of a mixed edge/face family.
///
/// A composite state is `(f1, e, f2)`: the face on one side of the segment,
/// the edge state, the face on the other side, packed as
/// `(f1 * Qe + e) * F + f2` with `F` the largest face extent. The four
/// legs of a vertex read `α̂ = (d, α, a)`, `μ̂ = (a, μ, b)`, `λ̂ = (d, λ, c)`,
/// `β̂ = (c, β, b)`, so each face is shared by exactly the two legs that
/// bound it. Entries whose shared faces disagree are zero.
pub struct IrfVertexAsVertex<W> {
    inner: W,
    faces: usize,
}

pub fn irf_vertex_to_vertex<W: IrfVertexWeights>(w: W) -> IrfVertexAsVertex<W> {
    let faces = w.face_extents().into_iter().max().unwrap_or(0);
    IrfVertexAsVertex { inner: w, faces }
}

impl<W: IrfVertexWeights> IrfVertexAsVertex<W> {
    /// Packed index of the composite state `(f1, e, f2)`.
    pub fn composite(&self, f1: usize, e: usize, f2: usize) -> usize {
        (f1 * self.inner.edge_states() + e) * self.faces + f2
    }

    pub fn inner(&self) -> &W {
        &self.inner
    }
}

impl<W: IrfVertexWeights> VertexWeights for IrfVertexAsVertex<W> {
    fn states(&self) -> usize {
        self.faces * self.inner.edge_states() * self.faces
    }

    fn eval(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
        let qe = self.inner.edge_states();
        let fe = self.inner.face_extents();
        let t = self.inner.eval(p, q)?;
        let mut expect = vec![qe; 4];
        expect.extend_from_slice(&fe);
        check_extents(&t, &expect)?;
        let n = self.states();
        let mut out = DenseTensor::zeros(&[n; 4]);
        for_each_index(&expect, |i| {
            let [al, mu, la, be, a, b, c, d] = [i[0], i[1], i[2], i[3], i[4], i[5], i[6], i[7]];
            let idx = [
                self.composite(d, al, a),
                self.composite(a, mu, b),
                self.composite(d, la, c),
                self.composite(c, be, b),
            ];
            out.set(&idx, t.get(i));
        });
        Ok(out)
    }
}

/// Face family seen as a mixed family with a single edge state.
pub struct IrfAsIrfVertex<W> {
    inner: W,
}

pub fn irf_as_irf_vertex<W: IrfWeights>(w: W) -> IrfAsIrfVertex<W> {
    IrfAsIrfVertex { inner: w }
}

impl<W: IrfWeights> IrfVertexWeights for IrfAsIrfVertex<W> {
    fn edge_states(&self) -> usize {
        1
    }
    fn face_extents(&self) -> [usize; 4] {
        self.inner.face_extents()
    }
    fn eval(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
        let t = self.inner.eval(p, q)?;
        let mut ext = vec![1; 4];
        ext.extend_from_slice(t.extents());
        Ok(t.reshape(&ext)?)
    }
}

/// Unpacks a face spin of [`vertex_to_spin`] into its segment states
/// `(top, left, bottom, right)`.
pub fn spin_segments(spin: usize, states: usize) -> [usize; 4] {
    let n = states;
    [spin / (n * n * n), (spin / (n * n)) % n, (spin / n) % n, spin % n]
}

pub fn spin_from_segments(seg: [usize; 4], states: usize) -> usize {
    ((seg[0] * states + seg[1]) * states + seg[2]) * states + seg[3]
}

/// Spin model on the black faces of the square-lattice checkerboard formed
/// by the lines of a vertex model.
///
/// Each black face carries the states of its four boundary segments as one
/// spin. Around a vertex with segments south `α`, west `μ`, east `λ`, north
/// `β` the two black faces sit either south-west/north-east (weight `W`,
/// `a` = south-west face) or north-west/south-east (weight `W̄`, `a` =
/// north-west face). Every segment bounds exactly one black face, so the
/// spin sum is a relabelling of the segment sum and partition functions
/// agree on any even torus.
pub struct VertexAsSpin<V> {
    inner: V,
}

pub fn vertex_to_spin<V: VertexWeights>(w: V) -> VertexAsSpin<V> {
    VertexAsSpin { inner: w }
}

impl<V: VertexWeights> VertexAsSpin<V> {
    fn expand(&self, p: &Rapidity, q: &Rapidity, barred: bool) -> Result<DenseTensor, WeightError> {
        let n = self.inner.states();
        let w = self.inner.eval(p, q)?;
        check_extents(&w, &[n; 4])?;
        let s = n * n * n * n;
        Ok(DenseTensor::from_fn(&[s, s], |i| {
            let [at, _, ab, ar] = spin_segments(i[0], n);
            let [bt, bl, bb, _] = spin_segments(i[1], n);
            if barred {
                w.get(&[bl, ab, bt, ar])
            } else {
                w.get(&[ar, at, bb, bl])
            }
        }))
    }
}

impl<V: VertexWeights> SpinWeights for VertexAsSpin<V> {
    fn states(&self) -> usize {
        let n = self.inner.states();
        n * n * n * n
    }
    fn eval_w(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
        self.expand(p, q, false)
    }
    fn eval_wbar(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
        self.expand(p, q, true)
    }
}

/// Face weights built from a spin pair, white faces single-valued.
///
/// The plain weight has corner extents `[Q, 1, Q, 1]` with
/// `w[a][0][c][0] = W̄[a][c]`; the barred weight has `[1, Q, 1, Q]` with
/// `w̄[0][b][0][d] = W[d][b]`. Under this placement the two checkerboard
/// face relations reduce term by term to the two spin relations.
pub struct SpinAsIrf<S> {
    spins: S,
    barred: bool,
}

pub fn embed_spin_as_checkerboard_irf<S: SpinWeights + Clone>(
    pair: S,
) -> crate::weights::Checkerboard<SpinAsIrf<S>> {
    crate::weights::Checkerboard {
        plain: SpinAsIrf { spins: pair.clone(), barred: false },
        barred: SpinAsIrf { spins: pair, barred: true },
    }
}

impl<S: SpinWeights> IrfWeights for SpinAsIrf<S> {
    fn face_extents(&self) -> [usize; 4] {
        let n = self.spins.states();
        if self.barred {
            [1, n, 1, n]
        } else {
            [n, 1, n, 1]
        }
    }

    fn eval(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
        let n = self.spins.states();
        if self.barred {
            let w = self.spins.eval_w(p, q)?;
            check_extents(&w, &[n, n])?;
            Ok(w.permute_axes(&[1, 0])?.reshape(&[1, n, 1, n])?)
        } else {
            let wb = self.spins.eval_wbar(p, q)?;
            check_extents(&wb, &[n, n])?;
            Ok(wb.reshape(&[n, 1, n, 1])?)
        }
    }
}

/// Recovers `(W, W̄)` from the embedded plain and barred face tables.
pub fn extract_spin_from_irf(plain: &DenseTensor, barred: &DenseTensor) -> Result<(DenseTensor, DenseTensor), WeightError> {
    let n = plain.extents().first().copied().unwrap_or(0);
    check_extents(plain, &[n, 1, n, 1])?;
    check_extents(barred, &[1, n, 1, n])?;
    let wbar = plain.reshape(&[n, n])?;
    let w = barred.reshape(&[n, n])?.permute_axes(&[1, 0])?;
    Ok((w, wbar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::*;
    use crate::weights::*;
    use alloc::vec::Vec;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        }
    }

    fn pair(a: f64, b: f64) -> Rapidity {
        Rapidity::Pair(c(a), c(b))
    }

    #[derive(Clone)]
    struct Potts(PottsSpin);

    impl SpinWeights for Potts {
        fn states(&self) -> usize {
            self.0.states()
        }
        fn eval_w(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
            self.0.eval_w(p, q)
        }
        fn eval_wbar(&self, p: &Rapidity, q: &Rapidity) -> Result<DenseTensor, WeightError> {
            self.0.eval_wbar(p, q)
        }
    }

    fn potts(n: f64) -> PottsSpin {
        potts_spin_weights(PottsParams::new(n).unwrap()).unwrap()
    }

    #[test]
    fn all_ones_square_is_all_ones() {
        let sq = square_weight_compose(TableSpin::all_ones(2));
        let w = sq.eval(&pair(0.1, 0.2), &pair(0.3, 0.4)).unwrap();
        assert!(w.data().iter().all(|z| *z == c(1.0)));
    }

    #[test]
    fn square_entry_matches_hand_product() {
        let fam = potts(3.0);
        let sq = square_weight_compose(&fam);
        let (p1, p2, q1, q2) = (0.9, 0.7, 0.4, 0.1);
        let w = sq.eval(&pair(p1, p2), &pair(q1, q2)).unwrap();
        let r = Rapidity::real;
        let [a, mu, l, b] = [0, 1, 0, 2];
        let expect = fam.eval_w(&r(p1), &r(q2)).unwrap().get(&[a, mu])
            * fam.eval_wbar(&r(p1), &r(q1)).unwrap().get(&[mu, b])
            * fam.eval_wbar(&r(p2), &r(q2)).unwrap().get(&[a, l])
            * fam.eval_w(&r(p2), &r(q1)).unwrap().get(&[l, b]);
        assert_eq!(w.get(&[a, mu, l, b]), expect);
    }

    #[test]
    fn potts_square_satisfies_vertex_relation() {
        let sq = square_weight_compose(potts(2.0));
        let rep = verify_vertex_ybe(&sq, &pair(1.1, 0.95), &pair(0.7, 0.5), &pair(0.3, 0.12), 1e-10).unwrap();
        assert!(rep.pass, "{}", rep.relative);
    }

    #[test]
    fn embedding_reproduces_spin_residuals() {
        for n in [2.0, 3.0] {
            let fam = Potts(potts(n));
            let (p, q, r) = (Rapidity::real(0.9), Rapidity::real(0.55), Rapidity::real(0.2));
            let spin = verify_spin_star_triangle(&fam, &p, &q, &r, 1e-10, SpinConvention::AsPrinted).unwrap();
            let emb = embed_spin_as_checkerboard_irf(fam);
            let irf = verify_checkerboard_irf(&emb.plain, &emb.barred, &p, &q, &r, 1e-10).unwrap();
            assert!((irf.first.max_abs - spin.first.max_abs).abs() <= 1e-12);
            assert!((irf.second.max_abs - spin.second.max_abs).abs() <= 1e-12);
            assert!((irf.first.scalar_r.unwrap() - spin.first.scalar_r.unwrap()).norm() <= 1e-12);
            assert!((irf.second.scalar_rbar.unwrap() - spin.second.scalar_rbar.unwrap()).norm() <= 1e-12);
        }
    }

    #[test]
    fn embedding_round_trip_and_all_ones() {
        let mut g = lcg(4);
        let w = DenseTensor::from_fn(&[3, 3], |_| Complex64::new(g(), g()));
        let wb = DenseTensor::from_fn(&[3, 3], |_| Complex64::new(g(), g()));
        let t = TableSpin::new(w.clone(), wb.clone()).unwrap();
        let emb = embed_spin_as_checkerboard_irf(t);
        let s = Rapidity::real(0.0);
        let (w2, wb2) = extract_spin_from_irf(&emb.plain.eval(&s, &s).unwrap(), &emb.barred.eval(&s, &s).unwrap()).unwrap();
        assert_eq!(w, w2);
        assert_eq!(wb, wb2);

        let ones = embed_spin_as_checkerboard_irf(TableSpin::all_ones(2));
        let rep = verify_checkerboard_irf(&ones.plain, &ones.barred, &s, &s, &s, 1e-14).unwrap();
        assert_eq!(rep.first.max_abs, 0.0);
        assert_eq!(rep.second.max_abs, 0.0);
    }

    #[test]
    fn composite_state_count_and_zero_entries() {
        let mut g = lcg(5);
        let t = DenseTensor::from_fn(&[2, 2, 2, 2, 3, 3, 3, 3], |_| c(0.5 + g()));
        let fam = irf_vertex_to_vertex(TableIrfVertex::new(t.clone()).unwrap());
        assert_eq!(fam.states(), 3 * 2 * 3);
        let s = Rapidity::real(0.0);
        let w = fam.eval(&s, &s).unwrap();
        // α̂ and μ̂ disagree on the face between them
        let bad = [fam.composite(0, 0, 1), fam.composite(2, 0, 0), fam.composite(0, 0, 0), fam.composite(0, 0, 0)];
        assert_eq!(w.get(&bad), c(0.0));
        let good = [fam.composite(1, 0, 2), fam.composite(2, 1, 0), fam.composite(1, 1, 0), fam.composite(0, 0, 0)];
        assert_eq!(w.get(&good), t.get(&[0, 1, 1, 0, 2, 0, 0, 1]));
    }

    // The composite vertex relation and the mixed relation agree entry by
    // entry, and the composite sides vanish off the consistent boundary.
    #[test]
    fn composite_relation_matches_mixed_relation() {
        let mut g = lcg(6);
        let (qe, nf) = (2, 2);
        let ws: Vec<DenseTensor> = (0..3)
            .map(|_| DenseTensor::from_fn(&[qe, qe, qe, qe, nf, nf, nf, nf], |_| Complex64::new(g() - 0.5, g() - 0.5)))
            .collect();
        let ops = |labels: [&[u8]; 3]| {
            crate::tensor::einsum(&[(&ws[0], labels[0]), (&ws[1], labels[1]), (&ws[2], labels[2])], b"ijkIJKabcABC")
                .unwrap()
        };
        let mixed_lhs = ops([b"jixycBdA", b"xzKIdCbA", b"ykzJBaCd"]);
        let mixed_rhs = ops([b"yxIJeaCb", b"ikzxBaec", b"jzKycebA"]);
        let s = Rapidity::real(0.0);
        let maps: Vec<DenseTensor> =
            ws.iter().map(|t| irf_vertex_to_vertex(TableIrfVertex::new(t.clone()).unwrap()).eval(&s, &s).unwrap()).collect();
        let (lhs, rhs) = vertex_ybe_sides(&maps[0], &maps[1], &maps[2]).unwrap();
        let fam = irf_vertex_to_vertex(TableIrfVertex::new(ws[0].clone()).unwrap());
        let mut worst: f64 = 0.0;
        let mut mass = [0.0f64; 2];
        for_each_index(&[qe, qe, qe, qe, qe, qe, nf, nf, nf, nf, nf, nf], |i| {
            let [al, be, ga, al2, be2, ga2, a, b, cc, a2, b2, c2] =
                [i[0], i[1], i[2], i[3], i[4], i[5], i[6], i[7], i[8], i[9], i[10], i[11]];
            let ix = [
                fam.composite(cc, al, b2),
                fam.composite(a2, be, cc),
                fam.composite(b2, ga, a),
                fam.composite(b, al2, c2),
                fam.composite(c2, be2, a),
                fam.composite(a2, ga2, b),
            ];
            worst = worst.max((lhs.get(&ix) - mixed_lhs.get(i)).norm());
            worst = worst.max((rhs.get(&ix) - mixed_rhs.get(i)).norm());
            mass[0] += mixed_lhs.get(i).norm_sqr();
            mass[1] += mixed_rhs.get(i).norm_sqr();
        });
        assert!(worst < 1e-13, "{worst}");
        let total = |t: &DenseTensor| t.data().iter().map(|z| z.norm_sqr()).sum::<f64>();
        assert!((total(&lhs) - mass[0]).abs() < 1e-10 * mass[0]);
        assert!((total(&rhs) - mass[1]).abs() < 1e-10 * mass[1]);
    }

    #[test]
    fn potts_through_mixed_map_passes_and_scaled_fails() {
        let fam = Potts(potts(2.0));
        let emb = embed_spin_as_checkerboard_irf(fam);
        let plain = irf_vertex_to_vertex(irf_as_irf_vertex(&emb.plain));
        let barred = irf_vertex_to_vertex(irf_as_irf_vertex(&emb.barred));
        let (p, q, r) = (Rapidity::real(0.9), Rapidity::real(0.55), Rapidity::real(0.2));
        let rep = verify_checkerboard_vertex(&plain, &barred, &p, &q, &r, 1e-10).unwrap();
        assert!(rep.pass(), "{:?}", rep);
        let mixed = verify_checkerboard_irf_vertex(&irf_as_irf_vertex(&emb.plain), &irf_as_irf_vertex(&emb.barred), &p, &q, &r, 1e-10).unwrap();
        assert!(mixed.pass());
    }

    // Partition functions of a 2x2 periodic lattice: vertex sum over the
    // eight segments versus spin sum over the two black faces.
    fn torus_vertex_z(w: &DenseTensor, n: usize) -> Complex64 {
        // h[j][i]: horizontal line j, segment right of vertical line i
        // v[i][j]: vertical line i, segment above horizontal line j
        let mut z = c(0.0);
        for_each_index(&[n; 8], |s| {
            let h = |j: usize, i: usize| s[(j % 2) * 2 + (i % 2)];
            let v = |i: usize, j: usize| s[4 + (i % 2) * 2 + (j % 2)];
            let mut prod = c(1.0);
            for i in 0..2 {
                for j in 0..2 {
                    let south = v(i, j + 1);
                    let north = v(i, j);
                    let west = h(j, i + 1);
                    let east = h(j, i);
                    prod *= w.get(&[south, west, east, north]);
                }
            }
            z += prod;
        });
        z
    }

    fn torus_spin_z(wt: &DenseTensor, wbt: &DenseTensor, n: usize) -> Complex64 {
        // black faces (0,0) and (1,1); face (i,j) spans vertical lines i..i+1
        // and horizontal lines j..j+1
        let s = n * n * n * n;
        let mut z = c(0.0);
        for a in 0..s {
            for b in 0..s {
                let face = |i: usize, j: usize| if (i % 2, j % 2) == (0, 0) { a } else { b };
                let mut prod = c(1.0);
                for i in 0..2usize {
                    for j in 0..2usize {
                        // vertex (i,j): faces around it
                        let sw = face(i + 1, j + 1);
                        let ne = face(i, j);
                        let nw = face(i + 1, j);
                        let se = face(i, j + 1);
                        if (i + j) % 2 == 0 {
                            prod *= wt.get(&[sw, ne]);
                        } else {
                            prod *= wbt.get(&[nw, se]);
                        }
                    }
                }
                z += prod;
            }
        }
        z
    }

    #[test]
    fn vertex_to_spin_shapes() {
        let sp = vertex_to_spin(decoupled_identity(2));
        assert_eq!(sp.states(), 16);
        assert_eq!(spin_segments(spin_from_segments([1, 0, 1, 1], 2), 2), [1, 0, 1, 1]);
    }

    #[test]
    fn vertex_to_spin_preserves_torus_partition_function() {
        let mut g = lcg(8);
        let w = DenseTensor::from_fn(&[2; 4], |_| Complex64::new(g(), g() - 0.5));
        let fam = TableVertex::new(w.clone()).unwrap();
        let sp = vertex_to_spin(&fam);
        let s = Rapidity::real(0.0);
        let zv = torus_vertex_z(&w, 2);
        let zs = torus_spin_z(&sp.eval_w(&s, &s).unwrap(), &sp.eval_wbar(&s, &s).unwrap(), 2);
        assert!((zv - zs).norm() <= 1e-12 * zv.norm(), "{zv} {zs}");
    }
}
