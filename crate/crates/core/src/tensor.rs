//! Dense complex multi-index arrays and their contractions.
//!
//! Storage is row-major with extents listed outermost-first, so the flat
//! offset of `[i0, i1, ..., ik]` is `((i0 * e1 + i1) * e2 + ...) + ik`. Every
//! weight array, operator matrix and residual tensor in the crate uses this
//! layout, and the weight-file format serializes it verbatim.
//!
//! Two contraction entry points exist. [`DenseTensor::contract`] sums over
//! explicitly paired axes of two tensors and returns the free axes of `a`
//! followed by the free axes of `b`. [`einsum`] takes labelled operands and
//! handles indices shared by more than two factors, which the face-model
//! equations need (a summed face spin touches all three weights).

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("data length {got} does not match product of extents {expected}")]
    DataLength { expected: usize, got: usize },
    #[error("extent mismatch: {left:?} vs {right:?}")]
    ExtentMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("axis {axis} out of range for rank {rank}")]
    AxisOutOfRange { axis: usize, rank: usize },
    #[error("axis {0} appears more than once in the contraction pairs")]
    DuplicateAxis(usize),
    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("index label '{label}' has inconsistent extents {first} and {second}")]
    LabelExtent { label: char, first: usize, second: usize },
    #[error("output label '{0}' does not occur in any operand")]
    UnknownLabel(char),
    #[error("operand has {labels} labels but rank {rank}")]
    LabelCount { labels: usize, rank: usize },
}

/// Row-major dense tensor of complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    extents: Vec<usize>,
    data: Vec<Complex64>,
}

fn volume(extents: &[usize]) -> usize {
    extents.iter().product()
}

fn strides(extents: &[usize]) -> Vec<usize> {
    let mut s = vec![1; extents.len()];
    for k in (0..extents.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * extents[k + 1];
    }
    s
}

impl DenseTensor {
    pub fn new(extents: Vec<usize>, data: Vec<Complex64>) -> Result<Self, TensorError> {
        let expected = volume(&extents);
        if data.len() != expected {
            return Err(TensorError::DataLength { expected, got: data.len() });
        }
        Ok(Self { extents, data })
    }

    pub fn zeros(extents: &[usize]) -> Self {
        Self { extents: extents.to_vec(), data: vec![Complex64::new(0.0, 0.0); volume(extents)] }
    }

    pub fn scalar(value: Complex64) -> Self {
        Self { extents: Vec::new(), data: vec![value] }
    }

    /// Builds a tensor by evaluating `f` at every multi-index in row-major order.
    pub fn from_fn(extents: &[usize], mut f: impl FnMut(&[usize]) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(volume(extents));
        for_each_index(extents, |idx| data.push(f(idx)));
        Self { extents: extents.to_vec(), data }
    }

    /// `n x n` identity matrix.
    pub fn identity(n: usize) -> Self {
        Self::from_fn(&[n, n], |i| if i[0] == i[1] { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn rank(&self) -> usize {
        self.extents.len()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.extents.len());
        index.iter().zip(&self.extents).fold(0, |acc, (&i, &e)| {
            debug_assert!(i < e);
            acc * e + i
        })
    }

    /// Inverse of [`offset`](Self::offset).
    pub fn unravel(&self, mut offset: usize) -> Vec<usize> {
        let mut idx = vec![0; self.extents.len()];
        for k in (0..self.extents.len()).rev() {
            idx[k] = offset % self.extents[k];
            offset /= self.extents[k];
        }
        idx
    }

    pub fn get(&self, index: &[usize]) -> Complex64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: Complex64) {
        let o = self.offset(index);
        self.data[o] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { extents: self.extents.clone(), data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self, TensorError> {
        self.check_same_extents(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { extents: self.extents.clone(), data })
    }

    fn check_same_extents(&self, other: &Self) -> Result<(), TensorError> {
        if self.extents != other.extents {
            return Err(TensorError::ExtentMismatch { left: self.extents.clone(), right: other.extents.clone() });
        }
        Ok(())
    }

    /// Same data under new extents with equal volume.
    pub fn reshape(&self, extents: &[usize]) -> Result<Self, TensorError> {
        if volume(extents) != self.data.len() {
            return Err(TensorError::DataLength { expected: volume(extents), got: self.data.len() });
        }
        Ok(Self { extents: extents.to_vec(), data: self.data.clone() })
    }

    /// Largest entry modulus and its multi-index (first one on ties).
    pub fn max_abs(&self) -> (f64, Vec<usize>) {
        let mut best = 0.0;
        let mut at = 0;
        for (k, z) in self.data.iter().enumerate() {
            let m = z.norm();
            if m > best {
                best = m;
                at = k;
            }
        }
        (best, self.unravel(at))
    }

    /// Sum over paired axes. The result carries the unpaired axes of `self`
    /// in their original order, followed by the unpaired axes of `other`.
    pub fn contract(&self, other: &Self, pairs: &[(usize, usize)]) -> Result<Self, TensorError> {
        let (ra, rb) = (self.rank(), other.rank());
        let mut used_a = vec![false; ra];
        let mut used_b = vec![false; rb];
        for &(i, j) in pairs {
            if i >= ra {
                return Err(TensorError::AxisOutOfRange { axis: i, rank: ra });
            }
            if j >= rb {
                return Err(TensorError::AxisOutOfRange { axis: j, rank: rb });
            }
            if used_a[i] {
                return Err(TensorError::DuplicateAxis(i));
            }
            if used_b[j] {
                return Err(TensorError::DuplicateAxis(j));
            }
            used_a[i] = true;
            used_b[j] = true;
            if self.extents[i] != other.extents[j] {
                return Err(TensorError::ExtentMismatch {
                    left: self.extents.clone(),
                    right: other.extents.clone(),
                });
            }
        }
        let free_a: Vec<usize> = (0..ra).filter(|&k| !used_a[k]).collect();
        let free_b: Vec<usize> = (0..rb).filter(|&k| !used_b[k]).collect();

        let perm_a: Vec<usize> = free_a.iter().copied().chain(pairs.iter().map(|p| p.0)).collect();
        let perm_b: Vec<usize> = pairs.iter().map(|p| p.1).chain(free_b.iter().copied()).collect();
        let a = self.permute_axes(&perm_a)?;
        let b = other.permute_axes(&perm_b)?;

        let m: usize = free_a.iter().map(|&k| self.extents[k]).product();
        let n: usize = free_b.iter().map(|&k| other.extents[k]).product();
        let inner: usize = pairs.iter().map(|p| self.extents[p.0]).product();

        let mut out = vec![Complex64::new(0.0, 0.0); m * n];
        for i in 0..m {
            let row = &a.data[i * inner..(i + 1) * inner];
            let dst = &mut out[i * n..(i + 1) * n];
            for (l, &av) in row.iter().enumerate() {
                if av.re == 0.0 && av.im == 0.0 {
                    continue;
                }
                let brow = &b.data[l * n..(l + 1) * n];
                for (d, &bv) in dst.iter_mut().zip(brow) {
                    *d += av * bv;
                }
            }
        }
        let extents = free_a
            .iter()
            .map(|&k| self.extents[k])
            .chain(free_b.iter().map(|&k| other.extents[k]))
            .collect();
        Ok(Self { extents, data: out })
    }

    /// Reorders axes: axis `j` of the result is axis `perm[j]` of `self`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self, TensorError> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if perm.len() != r {
            return Err(TensorError::InvalidPermutation(perm.to_vec()));
        }
        for &p in perm {
            if p >= r || seen[p] {
                return Err(TensorError::InvalidPermutation(perm.to_vec()));
            }
            seen[p] = true;
        }
        if perm.iter().enumerate().all(|(j, &p)| j == p) {
            return Ok(self.clone());
        }
        let src_strides = strides(&self.extents);
        let extents: Vec<usize> = perm.iter().map(|&p| self.extents[p]).collect();
        let walk: Vec<usize> = perm.iter().map(|&p| src_strides[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut counter = vec![0usize; r];
        let mut src = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[src]);
            let mut k = r;
            while k > 0 {
                k -= 1;
                counter[k] += 1;
                src += walk[k];
                if counter[k] < extents[k] {
                    break;
                }
                src -= walk[k] * extents[k];
                counter[k] = 0;
            }
        }
        Ok(Self { extents, data })
    }
}

/// Largest entry-wise modulus of `a - b`.
pub fn max_abs_diff(a: &DenseTensor, b: &DenseTensor) -> Result<f64, TensorError> {
    a.check_same_extents(b)?;
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

/// Calls `f` with every multi-index of `extents` in row-major order.
/// A rank-0 shape visits the empty index once.
pub fn for_each_index(extents: &[usize], mut f: impl FnMut(&[usize])) {
    if extents.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; extents.len()];
    loop {
        f(&idx);
        let mut k = extents.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < extents[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Labelled product-and-sum. Each operand carries one byte label per axis;
/// labels absent from `output` are summed over, labels in `output` become the
/// result axes in that order. A label may occur in any number of operands.
pub fn einsum(operands: &[(&DenseTensor, &[u8])], output: &[u8]) -> Result<DenseTensor, TensorError> {
    let mut labels: Vec<u8> = Vec::new();
    let mut extents: Vec<usize> = Vec::new();
    for (t, ls) in operands {
        if ls.len() != t.rank() {
            return Err(TensorError::LabelCount { labels: ls.len(), rank: t.rank() });
        }
        for (&l, &e) in ls.iter().zip(t.extents()) {
            match labels.iter().position(|&x| x == l) {
                Some(k) if extents[k] != e => {
                    return Err(TensorError::LabelExtent { label: l as char, first: extents[k], second: e });
                }
                Some(_) => {}
                None => {
                    labels.push(l);
                    extents.push(e);
                }
            }
        }
    }
    // output labels first, then summed labels innermost
    let mut order: Vec<usize> = Vec::with_capacity(labels.len());
    for &l in output {
        let k = labels.iter().position(|&x| x == l).ok_or(TensorError::UnknownLabel(l as char))?;
        order.push(k);
    }
    for k in 0..labels.len() {
        if !order.contains(&k) {
            order.push(k);
        }
    }
    let ext: Vec<usize> = order.iter().map(|&k| extents[k]).collect();
    let out_ext: Vec<usize> = ext[..output.len()].to_vec();
    let mut out = DenseTensor::zeros(&out_ext);
    if ext.contains(&0) {
        return Ok(out);
    }

    // stride of each (ordered) label inside each operand and inside the output
    let op_strides: Vec<Vec<usize>> = operands
        .iter()
        .map(|(t, ls)| {
            let s = strides(t.extents());
            order
                .iter()
                .map(|&k| ls.iter().zip(&s).filter(|(&l, _)| l == labels[k]).map(|(_, &st)| st).sum())
                .collect()
        })
        .collect();
    let out_s = strides(&out_ext);
    let out_strides: Vec<usize> = (0..order.len()).map(|j| if j < output.len() { out_s[j] } else { 0 }).collect();

    let n = ext.len();
    let mut counter = vec![0usize; n];
    let mut offs = vec![0usize; operands.len()];
    let mut out_off = 0usize;
    let total = volume(&ext);
    for _ in 0..total {
        let mut prod = Complex64::new(1.0, 0.0);
        for (o, (t, _)) in offs.iter().zip(operands) {
            prod *= t.data[*o];
        }
        out.data[out_off] += prod;
        let mut k = n;
        while k > 0 {
            k -= 1;
            counter[k] += 1;
            for (o, s) in offs.iter_mut().zip(&op_strides) {
                *o += s[k];
            }
            out_off += out_strides[k];
            if counter[k] < ext[k] {
                break;
            }
            for (o, s) in offs.iter_mut().zip(&op_strides) {
                *o -= s[k] * ext[k];
            }
            out_off -= out_strides[k] * ext[k];
            counter[k] = 0;
        }
    }
    Ok(out)
}

/// Same result as [`einsum`], evaluated as a left-to-right chain of pairwise
/// products. Each intermediate keeps only the labels still needed, so a
/// three-factor product with three summed indices costs `Q^8` instead of
/// `Q^9` for rank-4 operands.
pub fn einsum_pairwise(operands: &[(&DenseTensor, &[u8])], output: &[u8]) -> Result<DenseTensor, TensorError> {
    if operands.len() <= 2 {
        return einsum(operands, output);
    }
    let (a, la) = operands[0];
    let (b, lb) = operands[1];
    let rest = &operands[2..];
    let mut keep: Vec<u8> = Vec::new();
    for &l in la.iter().chain(lb) {
        let needed = output.contains(&l) || rest.iter().any(|(_, ls)| ls.contains(&l));
        if needed && !keep.contains(&l) {
            keep.push(l);
        }
    }
    let ab = einsum(&[(a, la), (b, lb)], &keep)?;
    let mut ops: Vec<(&DenseTensor, &[u8])> = Vec::with_capacity(rest.len() + 1);
    ops.push((&ab, &keep));
    ops.extend_from_slice(rest);
    einsum_pairwise(&ops, output)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lcg_tensor(extents: &[usize], seed: u64) -> DenseTensor {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        DenseTensor::from_fn(extents, |_| c(next(), next()))
    }

    #[test]
    fn identity_contraction_returns_vector() {
        let v = DenseTensor::new(vec![2], vec![c(1.5, -2.0), c(0.25, 4.0)]).unwrap();
        let r = DenseTensor::identity(2).contract(&v, &[(1, 0)]).unwrap();
        assert_eq!(r, v);
    }

    #[test]
    fn ones_dot_ones_is_three() {
        let ones = DenseTensor::from_fn(&[3], |_| c(1.0, 0.0));
        let r = ones.contract(&ones, &[(0, 0)]).unwrap();
        assert_eq!(r.extents(), &[] as &[usize]);
        assert_eq!(r.data(), &[c(3.0, 0.0)]);
    }

    #[test]
    fn matrix_product_matches_naive_loop() {
        let a = lcg_tensor(&[2, 2], 1);
        let b = lcg_tensor(&[2, 2], 2);
        let ab = a.contract(&b, &[(1, 0)]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = c(0.0, 0.0);
                for k in 0..2 {
                    s += a.get(&[i, k]) * b.get(&[k, j]);
                }
                assert!((ab.get(&[i, j]) - s).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn contraction_rejects_bad_pairs() {
        let a = lcg_tensor(&[2, 3], 3);
        let b = lcg_tensor(&[2, 3], 4);
        assert!(matches!(a.contract(&b, &[(1, 0)]), Err(TensorError::ExtentMismatch { .. })));
        assert_eq!(a.contract(&b, &[(0, 0), (0, 1)]), Err(TensorError::DuplicateAxis(0)));
        assert!(matches!(a.contract(&b, &[(2, 0)]), Err(TensorError::AxisOutOfRange { .. })));
    }

    #[test]
    fn permute_swap_is_transpose() {
        let a = lcg_tensor(&[2, 3], 5);
        let t = a.permute_axes(&[1, 0]).unwrap();
        assert_eq!(t.extents(), &[3, 2]);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(t.get(&[j, i]), a.get(&[i, j]));
            }
        }
        assert_eq!(a.permute_axes(&[0, 1]).unwrap(), a);
    }

    #[test]
    fn permute_rank4_spot_check() {
        let a = lcg_tensor(&[2, 3, 4, 5], 6);
        let t = a.permute_axes(&[2, 3, 0, 1]).unwrap();
        assert_eq!(t.extents(), &[4, 5, 2, 3]);
        for (i0, i1, i2, i3) in [(1, 2, 3, 4), (0, 0, 0, 0), (1, 0, 2, 3), (0, 2, 1, 1)] {
            // direct index arithmetic on the flat arrays
            let src = ((i0 * 3 + i1) * 4 + i2) * 5 + i3;
            let dst = ((i2 * 5 + i3) * 2 + i0) * 3 + i1;
            assert_eq!(t.data()[dst], a.data()[src]);
        }
        assert!(matches!(a.permute_axes(&[0, 0, 1, 2]), Err(TensorError::InvalidPermutation(_))));
        assert!(matches!(a.permute_axes(&[0, 1, 2]), Err(TensorError::InvalidPermutation(_))));
    }

    #[test]
    fn max_abs_diff_cases() {
        let a = lcg_tensor(&[3, 2], 7);
        assert_eq!(max_abs_diff(&a, &a).unwrap(), 0.0);
        let z = DenseTensor::zeros(&[1]);
        let w = DenseTensor::new(vec![1], vec![c(3.0, 4.0)]).unwrap();
        assert_eq!(max_abs_diff(&z, &w).unwrap(), 5.0);
        let b = lcg_tensor(&[3, 2], 8);
        let mut expect: f64 = 0.0;
        for k in 0..6 {
            let d = a.data()[k] - b.data()[k];
            expect = expect.max(libm::hypot(d.re, d.im));
        }
        assert!((max_abs_diff(&a, &b).unwrap() - expect).abs() < 1e-15);
        assert!(max_abs_diff(&a, &z).is_err());
    }

    #[test]
    fn einsum_matches_contract_and_handles_hyperedges() {
        let a = lcg_tensor(&[2, 3], 9);
        let b = lcg_tensor(&[3, 4], 10);
        let e = einsum(&[(&a, b"ik"), (&b, b"kj")], b"ij").unwrap();
        let m = a.contract(&b, &[(1, 0)]).unwrap();
        assert!(max_abs_diff(&e, &m).unwrap() < 1e-14);

        // a label shared by three factors
        let x = lcg_tensor(&[2, 2], 11);
        let y = lcg_tensor(&[2, 2], 12);
        let z = lcg_tensor(&[2, 2], 13);
        let h = einsum(&[(&x, b"ad"), (&y, b"bd"), (&z, b"cd")], b"abc").unwrap();
        for (i, j, k) in [(0, 0, 0), (1, 0, 1), (1, 1, 0)] {
            let s: Complex64 = (0..2).map(|d| x.get(&[i, d]) * y.get(&[j, d]) * z.get(&[k, d])).sum();
            assert!((h.get(&[i, j, k]) - s).norm() < 1e-15);
        }
        let hp = einsum_pairwise(&[(&x, b"ad"), (&y, b"bd"), (&z, b"cd")], b"abc").unwrap();
        assert!(max_abs_diff(&h, &hp).unwrap() < 1e-15);

        let w = lcg_tensor(&[2, 3, 2, 3], 14);
        let v = lcg_tensor(&[2, 2, 3, 3], 15);
        let u = lcg_tensor(&[3, 2, 2, 3], 16);
        let ops: [(&DenseTensor, &[u8]); 3] = [(&w, b"baxy"), (&v, b"xzCA"), (&u, b"yczB")];
        let full = einsum(&ops, b"abcABC").unwrap();
        let chain = einsum_pairwise(&ops, b"abcABC").unwrap();
        assert!(max_abs_diff(&full, &chain).unwrap() < 1e-13);
        assert!(matches!(einsum(&[(&x, b"ab")], b"c"), Err(TensorError::UnknownLabel('c'))));
        assert!(matches!(einsum(&[(&a, b"ab"), (&b, b"ab")], b""), Err(TensorError::LabelExtent { .. })));
    }

    proptest::proptest! {
        #[test]
        fn contraction_is_bilinear(seed in 0u64..1000, re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let a = lcg_tensor(&[2, 3, 2], seed);
            let b = lcg_tensor(&[3, 2], seed + 1);
            let alpha = c(re, im);
            let lhs = a.scaled(alpha).contract(&b, &[(1, 0)]).unwrap();
            let rhs = a.contract(&b, &[(1, 0)]).unwrap().scaled(alpha);
            proptest::prop_assert!(max_abs_diff(&lhs, &rhs).unwrap() <= 1e-14 * (1.0 + alpha.norm()));
        }

        #[test]
        fn identity_on_any_axis_is_noop(seed in 0u64..1000, axis in 0usize..3) {
            let a = lcg_tensor(&[2, 3, 2], seed);
            let n = a.extents()[axis];
            let r = a.contract(&DenseTensor::identity(n), &[(axis, 0)]).unwrap();
            // contracted axis moves to the end; move it back
            let mut perm: Vec<usize> = (0..2).collect();
            perm.insert(axis, 2);
            let back = r.permute_axes(&perm).unwrap();
            proptest::prop_assert!(max_abs_diff(&back, &a).unwrap() <= 1e-15);
        }

        #[test]
        fn permutations_compose(seed in 0u64..1000, p1 in proptest::sample::select(alloc::vec![[0usize,1,2,3],[1,0,3,2],[2,3,0,1],[3,1,2,0],[1,2,3,0]]),
                                p2 in proptest::sample::select(alloc::vec![[0usize,1,2,3],[3,2,1,0],[1,0,2,3],[2,0,3,1]])) {
            let a = lcg_tensor(&[2, 3, 4, 5], seed);
            let stepwise = a.permute_axes(&p1).unwrap().permute_axes(&p2).unwrap();
            let composed: Vec<usize> = p2.iter().map(|&j| p1[j]).collect();
            proptest::prop_assert_eq!(stepwise, a.permute_axes(&composed).unwrap());
            let mut inv = [0usize; 4];
            for (j, &p) in p1.iter().enumerate() { inv[p] = j; }
            proptest::prop_assert_eq!(a.permute_axes(&p1).unwrap().permute_axes(&inv).unwrap(), a.clone());
        }
    }
}
