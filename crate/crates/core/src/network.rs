//! Impedance networks: star/triangle transforms, Kirchhoff solutions and
//! reduction by series, parallel and wye-delta steps.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg;
use crate::report::ResidualReport;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("impedance {0} is zero")]
    ZeroImpedance(usize),
    #[error("impedance {0} is not finite")]
    NonFinite(usize),
    #[error("star/triangle transform is degenerate (zero {0})")]
    Degenerate(&'static str),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("network is not connected")]
    Disconnected,
    #[error("no boundary potentials given")]
    NoBoundary,
    #[error("linear system is singular: {0}")]
    Singular(String),
    #[error("terminals must differ, got `{0}` twice")]
    SameTerminal(String),
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Three impedances, either the legs of a star or the sides of a triangle.
/// In a triangle, side `i` is the one opposite star leg `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceTriple {
    pub z: [Complex64; 3],
}

impl ImpedanceTriple {
    pub fn new(z1: Complex64, z2: Complex64, z3: Complex64) -> Result<Self, NetworkError> {
        let z = [z1, z2, z3];
        for (i, v) in z.iter().enumerate() {
            if !is_finite(*v) {
                return Err(NetworkError::NonFinite(i + 1));
            }
            if *v == zero() {
                return Err(NetworkError::ZeroImpedance(i + 1));
            }
        }
        Ok(Self { z })
    }

    fn pair_sum(&self) -> Complex64 {
        let [a, b, c] = self.z;
        a * b + b * c + c * a
    }
}

/// `Z̄_i = (Z1 Z2 + Z2 Z3 + Z3 Z1) / Z_i`.
pub fn star_to_triangle(star: &ImpedanceTriple) -> Result<ImpedanceTriple, NetworkError> {
    let s = star.pair_sum();
    if s == zero() {
        return Err(NetworkError::Degenerate("sum of pairwise products"));
    }
    ImpedanceTriple::new(s / star.z[0], s / star.z[1], s / star.z[2])
}

/// `Z_i = Z̄_j Z̄_k / (Z̄1 + Z̄2 + Z̄3)`.
pub fn triangle_to_star(tri: &ImpedanceTriple) -> Result<ImpedanceTriple, NetworkError> {
    let [a, b, c] = tri.z;
    let sum = a + b + c;
    if sum == zero() {
        return Err(NetworkError::Degenerate("sum of triangle sides"));
    }
    ImpedanceTriple::new(b * c / sum, c * a / sum, a * b / sum)
}

/// Checks that `Z1 Z̄1`, `Z2 Z̄2`, `Z3 Z̄3`, `Z1 Z2 + Z2 Z3 + Z3 Z1` and
/// `Z̄1 Z̄2 Z̄3 / (Z̄1 + Z̄2 + Z̄3)` all coincide, relative to `|Z1 Z̄1|`.
pub fn kennelly_check(star: &ImpedanceTriple, tri: &ImpedanceTriple, tol: f64) -> ResidualReport {
    let [a, b, c] = tri.z;
    let quantities = [
        star.z[0] * a,
        star.z[1] * b,
        star.z[2] * c,
        star.pair_sum(),
        a * b * c / (a + b + c),
    ];
    let reference = quantities[0];
    let mut worst = (0.0f64, 0usize);
    for (k, v) in quantities.iter().enumerate().skip(1) {
        let d = (v - reference).norm();
        if d > worst.0 || d.is_nan() {
            worst = (d, k);
        }
    }
    ResidualReport::from_parts("kennelly", worst.0, reference.norm(), vec![worst.1], tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: String,
    pub b: String,
    pub z: Complex64,
}

impl Edge {
    pub fn new(a: impl Into<String>, b: impl Into<String>, z: Complex64) -> Self {
        Self { a: a.into(), b: b.into(), z }
    }

    fn touches(&self, n: &str) -> bool {
        self.a == n || self.b == n
    }

    fn other(&self, n: &str) -> &str {
        if self.a == n {
            &self.b
        } else {
            &self.a
        }
    }

    fn same_ends(&self, other: &Edge) -> bool {
        (self.a == other.a && self.b == other.b) || (self.a == other.b && self.b == other.a)
    }
}

/// Connected network of two-terminal impedances.
#[derive(Debug, Clone, PartialEq)]
pub struct ResistorNetwork {
    nodes: BTreeSet<String>,
    edges: Vec<Edge>,
    terminals: Vec<String>,
    potentials: BTreeMap<String, Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KirchhoffSolution {
    pub potentials: BTreeMap<String, Complex64>,
    /// Current through each edge, flowing from `a` to `b`, in edge order.
    pub currents: Vec<Complex64>,
    /// `Σ (φ_a − φ_b)² / z`.
    pub power: Complex64,
    /// Largest `|Σ current|` at an internal node.
    pub max_imbalance: f64,
}

impl ResistorNetwork {
    pub fn new(
        nodes: impl IntoIterator<Item = String>,
        edges: Vec<Edge>,
        terminals: Vec<String>,
        potentials: BTreeMap<String, Complex64>,
    ) -> Result<Self, NetworkError> {
        let mut set = BTreeSet::new();
        for n in nodes {
            if !set.insert(n.clone()) {
                return Err(NetworkError::DuplicateNode(n));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            for end in [&e.a, &e.b] {
                if !set.contains(end) {
                    return Err(NetworkError::UnknownNode(end.clone()));
                }
            }
            if !is_finite(e.z) {
                return Err(NetworkError::NonFinite(i + 1));
            }
            if e.z == zero() {
                return Err(NetworkError::ZeroImpedance(i + 1));
            }
        }
        for n in terminals.iter().chain(potentials.keys()) {
            if !set.contains(n) {
                return Err(NetworkError::UnknownNode(n.clone()));
            }
        }
        let net = Self { nodes: set, edges, terminals, potentials };
        if let Some(first) = net.nodes.iter().next() {
            if net.component(first).len() != net.nodes.len() {
                return Err(NetworkError::Disconnected);
            }
        }
        Ok(net)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn terminals(&self) -> &[String] {
        &self.terminals
    }

    pub fn potentials(&self) -> &BTreeMap<String, Complex64> {
        &self.potentials
    }

    pub fn with_terminals(mut self, terminals: Vec<String>) -> Result<Self, NetworkError> {
        if let Some(t) = terminals.iter().find(|t| !self.nodes.contains(*t)) {
            return Err(NetworkError::UnknownNode(t.clone()));
        }
        self.terminals = terminals;
        Ok(self)
    }

    pub fn with_potentials(mut self, potentials: BTreeMap<String, Complex64>) -> Result<Self, NetworkError> {
        if let Some(t) = potentials.keys().find(|t| !self.nodes.contains(*t)) {
            return Err(NetworkError::UnknownNode(t.clone()));
        }
        self.potentials = potentials;
        Ok(self)
    }

    fn component(&self, start: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(String::from(start));
        queue.push_back(String::from(start));
        while let Some(n) = queue.pop_front() {
            for e in self.edges.iter().filter(|e| e.touches(&n)) {
                let o = e.other(&n);
                if seen.insert(String::from(o)) {
                    queue.push_back(String::from(o));
                }
            }
        }
        seen
    }

    /// `Σ (φ_a − φ_b)² / z` for arbitrary node potentials.
    pub fn power(&self, potentials: &BTreeMap<String, Complex64>) -> Result<Complex64, NetworkError> {
        let phi = |n: &String| potentials.get(n).copied().ok_or_else(|| NetworkError::UnknownNode(n.clone()));
        let mut p = zero();
        for e in &self.edges {
            let d = phi(&e.a)? - phi(&e.b)?;
            p += d * d / e.z;
        }
        Ok(p)
    }

    /// Solves for the potentials of every node without a boundary value.
    pub fn solve_kirchhoff(&self) -> Result<KirchhoffSolution, NetworkError> {
        if self.potentials.is_empty() {
            return Err(NetworkError::NoBoundary);
        }
        let internal: Vec<&String> = self.nodes.iter().filter(|n| !self.potentials.contains_key(*n)).collect();
        let index: BTreeMap<&str, usize> = internal.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut phi = self.potentials.clone();
        if !internal.is_empty() {
            let n = internal.len();
            let mut y = nalgebra::DMatrix::from_element(n, n, zero());
            let mut rhs = vec![zero(); n];
            for e in self.edges.iter().filter(|e| e.a != e.b) {
                let g = Complex64::new(1.0, 0.0) / e.z;
                for (x, o) in [(&e.a, &e.b), (&e.b, &e.a)] {
                    let Some(&i) = index.get(x.as_str()) else { continue };
                    y[(i, i)] += g;
                    match index.get(o.as_str()) {
                        Some(&j) => y[(i, j)] -= g,
                        None => rhs[i] += g * self.potentials[o],
                    }
                }
            }
            let x = linalg::solve(y, &rhs).ok_or_else(|| NetworkError::Singular(format!("{n} internal nodes")))?;
            for (node, v) in internal.iter().zip(x) {
                phi.insert((*node).clone(), v);
            }
        }
        let currents: Vec<Complex64> = self.edges.iter().map(|e| (phi[&e.a] - phi[&e.b]) / e.z).collect();
        let mut net_out: BTreeMap<&str, Complex64> = BTreeMap::new();
        for (e, i) in self.edges.iter().zip(&currents) {
            *net_out.entry(&e.a).or_insert(zero()) += i;
            *net_out.entry(&e.b).or_insert(zero()) -= i;
        }
        let max_imbalance = internal
            .iter()
            .map(|n| net_out.get(n.as_str()).map_or(0.0, |z| z.norm()))
            .fold(0.0, f64::max);
        if !max_imbalance.is_finite() {
            return Err(NetworkError::Singular(String::from("non-finite potentials")));
        }
        let power = self.power(&phi)?;
        Ok(KirchhoffSolution { potentials: phi, currents, power, max_imbalance })
    }

    /// Impedance seen between `a` and `b` when a unit potential difference is applied.
    pub fn equivalent_impedance(&self, a: &str, b: &str) -> Result<Complex64, NetworkError> {
        for n in [a, b] {
            if !self.nodes.contains(n) {
                return Err(NetworkError::UnknownNode(String::from(n)));
            }
        }
        if a == b {
            return Err(NetworkError::SameTerminal(String::from(a)));
        }
        let comp = self.component(a);
        let mut potentials = BTreeMap::new();
        potentials.insert(String::from(a), Complex64::new(1.0, 0.0));
        potentials.insert(String::from(b), zero());
        let sub = Self {
            edges: self.edges.iter().filter(|e| comp.contains(&e.a)).cloned().collect(),
            nodes: comp,
            terminals: Vec::new(),
            potentials,
        };
        let sol = sub.solve_kirchhoff()?;
        let mut out = zero();
        for (e, i) in sub.edges.iter().zip(&sol.currents) {
            if e.a == a {
                out += i;
            }
            if e.b == a {
                out -= i;
            }
        }
        if out == zero() || !is_finite(out) {
            return Err(NetworkError::Singular(String::from("no current flows between the terminals")));
        }
        Ok(Complex64::new(1.0, 0.0) / out)
    }

    fn protected(&self, n: &str) -> bool {
        self.terminals.iter().any(|t| t == n) || self.potentials.contains_key(n)
    }

    fn incident(&self, n: &str) -> Vec<usize> {
        (0..self.edges.len()).filter(|&i| self.edges[i].touches(n)).collect()
    }

    fn remove_node(&mut self, n: &str, edges: &[usize]) {
        self.nodes.remove(n);
        let mut k = 0;
        self.edges.retain(|_| {
            k += 1;
            !edges.contains(&(k - 1))
        });
    }

    fn try_prune(&mut self) -> bool {
        if let Some(i) = self.edges.iter().position(|e| e.a == e.b) {
            self.edges.remove(i);
            return true;
        }
        let found = self.nodes.iter().find_map(|n| {
            let inc = self.incident(n);
            (!self.protected(n) && inc.len() <= 1).then(|| (n.clone(), inc))
        });
        if let Some((n, inc)) = found {
            self.remove_node(&n, &inc);
            return true;
        }
        false
    }

    fn try_parallel(&mut self) -> bool {
        for i in 0..self.edges.len() {
            for j in i + 1..self.edges.len() {
                if !self.edges[i].same_ends(&self.edges[j]) {
                    continue;
                }
                let (z1, z2) = (self.edges[i].z, self.edges[j].z);
                if z1 + z2 == zero() {
                    continue;
                }
                self.edges[i].z = z1 * z2 / (z1 + z2);
                self.edges.remove(j);
                return true;
            }
        }
        false
    }

    fn try_series(&mut self) -> bool {
        let found = self.nodes.iter().find_map(|n| {
            if self.protected(n) {
                return None;
            }
            let inc = self.incident(n);
            if inc.len() != 2 {
                return None;
            }
            let (e1, e2) = (&self.edges[inc[0]], &self.edges[inc[1]]);
            let (u, v) = (e1.other(n), e2.other(n));
            if u == v || e1.z + e2.z == zero() {
                return None;
            }
            Some((n.clone(), inc.clone(), Edge::new(u, v, e1.z + e2.z)))
        });
        if let Some((n, inc, edge)) = found {
            self.remove_node(&n, &inc);
            self.edges.push(edge);
            return true;
        }
        false
    }

    fn try_wye_delta(&mut self) -> bool {
        let found = self.nodes.iter().find_map(|n| {
            if self.protected(n) {
                return None;
            }
            let inc = self.incident(n);
            if inc.len() != 3 {
                return None;
            }
            let ends: Vec<&str> = inc.iter().map(|&i| self.edges[i].other(n)).collect();
            if ends[0] == ends[1] || ends[1] == ends[2] || ends[0] == ends[2] {
                return None;
            }
            let star = ImpedanceTriple::new(self.edges[inc[0]].z, self.edges[inc[1]].z, self.edges[inc[2]].z).ok()?;
            let tri = star_to_triangle(&star).ok()?;
            let sides = [
                Edge::new(ends[1], ends[2], tri.z[0]),
                Edge::new(ends[2], ends[0], tri.z[1]),
                Edge::new(ends[0], ends[1], tri.z[2]),
            ];
            Some((n.clone(), inc, sides))
        });
        if let Some((n, inc, sides)) = found {
            self.remove_node(&n, &inc);
            self.edges.extend(sides);
            return true;
        }
        false
    }

    /// Eliminates unprotected nodes by prune, parallel, series and wye-delta
    /// steps until none applies. Terminals and nodes with boundary potentials
    /// are kept. Degenerate steps (zero denominators) are skipped.
    pub fn reduce(&self) -> ResistorNetwork {
        let mut net = self.clone();
        while net.try_prune() || net.try_parallel() || net.try_series() || net.try_wye_delta() {}
        net
    }
}

/// Free-function form of [`ResistorNetwork::reduce`].
pub fn reduce_network(net: &ResistorNetwork) -> ResistorNetwork {
    net.reduce()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn r(x: f64) -> Complex64 {
        c(x, 0.0)
    }

    fn net(edges: &[(&str, &str, Complex64)], terminals: &[&str]) -> ResistorNetwork {
        let nodes: BTreeSet<String> = edges.iter().flat_map(|e| [e.0.to_string(), e.1.to_string()]).collect();
        let edges = edges.iter().map(|e| Edge::new(e.0, e.1, e.2)).collect();
        ResistorNetwork::new(nodes, edges, terminals.iter().map(|t| t.to_string()).collect(), BTreeMap::new()).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn star_triangle_examples() {
        let t = star_to_triangle(&ImpedanceTriple::new(r(2.0), r(2.0), r(2.0)).unwrap()).unwrap();
        assert_eq!(t.z, [r(6.0); 3]);
        let t = star_to_triangle(&ImpedanceTriple::new(r(1.0), r(2.0), r(3.0)).unwrap()).unwrap();
        assert!(close(t.z[0], r(11.0), 1e-15) && close(t.z[1], r(5.5), 1e-15) && close(t.z[2], r(11.0 / 3.0), 1e-15));
        let i = c(0.0, 1.0);
        let t = star_to_triangle(&ImpedanceTriple::new(i, i, i).unwrap()).unwrap();
        assert_eq!(t.z, [c(0.0, 3.0); 3]);
        let s = triangle_to_star(&ImpedanceTriple::new(r(11.0), r(5.5), r(11.0 / 3.0)).unwrap()).unwrap();
        assert!(close(s.z[0], r(1.0), 1e-14) && close(s.z[1], r(2.0), 1e-14) && close(s.z[2], r(3.0), 1e-14));
        let s = triangle_to_star(&ImpedanceTriple::new(r(3.0), r(3.0), r(3.0)).unwrap()).unwrap();
        assert_eq!(s.z, [r(1.0); 3]);
    }

    #[test]
    fn zero_impedance_rejected() {
        assert_eq!(ImpedanceTriple::new(r(1.0), r(0.0), r(1.0)), Err(NetworkError::ZeroImpedance(2)));
        let cancel = ImpedanceTriple::new(r(1.0), r(-2.0), r(1.0)).unwrap();
        assert!(matches!(triangle_to_star(&cancel), Err(NetworkError::Degenerate(_))));
        let deg = ImpedanceTriple::new(r(1.0), r(1.0), r(-0.5)).unwrap();
        assert!(matches!(star_to_triangle(&deg), Err(NetworkError::Degenerate(_))));
    }

    #[test]
    fn kennelly_holds_for_transform() {
        let s = ImpedanceTriple::new(c(1.0, 0.5), c(2.0, -0.3), c(0.7, 1.1)).unwrap();
        let t = star_to_triangle(&s).unwrap();
        assert!(kennelly_check(&s, &t, 1e-13).pass);
        let off = ImpedanceTriple::new(t.z[0] * 1.01, t.z[1], t.z[2]).unwrap();
        assert!(!kennelly_check(&s, &off, 1e-6).pass);
    }

    #[test]
    fn series_chain_potentials() {
        let n = net(&[("a", "m", r(1.0)), ("m", "b", r(2.0))], &[]);
        let pots = BTreeMap::from([("a".to_string(), r(3.0)), ("b".to_string(), r(0.0))]);
        let sol = n.with_potentials(pots).unwrap().solve_kirchhoff().unwrap();
        assert!(close(sol.potentials["m"], r(2.0), 1e-14));
        assert!(close(sol.currents[0], r(1.0), 1e-14) && close(sol.currents[1], r(1.0), 1e-14));
        assert!(close(sol.power, r(3.0), 1e-14));
        assert!(sol.max_imbalance <= 1e-11);
    }

    #[test]
    fn equal_boundary_gives_no_current() {
        let n = net(&[("a", "m", r(1.0)), ("m", "b", r(2.0)), ("m", "c", r(5.0))], &[]);
        let pots = BTreeMap::from([("a".to_string(), r(1.5)), ("b".to_string(), r(1.5)), ("c".to_string(), r(1.5))]);
        let sol = n.with_potentials(pots).unwrap().solve_kirchhoff().unwrap();
        assert!(sol.currents.iter().all(|i| i.norm() < 1e-14));
        assert!(sol.power.norm() < 1e-14);
    }

    #[test]
    fn kirchhoff_needs_boundary() {
        let n = net(&[("a", "b", r(1.0))], &[]);
        assert_eq!(n.solve_kirchhoff(), Err(NetworkError::NoBoundary));
    }

    #[test]
    fn disconnected_network_rejected() {
        let nodes = ["a", "b", "c"].map(String::from);
        let res = ResistorNetwork::new(nodes, vec![Edge::new("a", "b", r(1.0))], Vec::new(), BTreeMap::new());
        assert_eq!(res, Err(NetworkError::Disconnected));
    }

    #[test]
    fn equivalent_impedance_examples() {
        let tri = net(&[("a", "b", r(1.0)), ("b", "c", r(1.0)), ("c", "a", r(1.0))], &[]);
        assert!(close(tri.equivalent_impedance("a", "b").unwrap(), r(2.0 / 3.0), 1e-14));
        let series = net(&[("a", "m", r(1.0)), ("m", "b", r(2.0))], &[]);
        assert!(close(series.equivalent_impedance("a", "b").unwrap(), r(3.0), 1e-14));
        let par = net(&[("a", "b", r(1.0)), ("b", "a", r(1.0))], &[]);
        assert!(close(par.equivalent_impedance("a", "b").unwrap(), r(0.5), 1e-14));
        let single = net(&[("a", "b", c(2.0, -1.0))], &[]);
        assert!(close(single.equivalent_impedance("a", "b").unwrap(), c(2.0, -1.0), 1e-14));
        assert!(single.equivalent_impedance("a", "a").is_err());
        assert!(single.equivalent_impedance("a", "zz").is_err());
    }

    #[test]
    fn wye_reduces_to_kennelly_triangle() {
        let n = net(&[("o", "t1", r(1.0)), ("o", "t2", r(2.0)), ("o", "t3", r(3.0))], &["t1", "t2", "t3"]);
        let red = n.reduce();
        assert_eq!(red.nodes().count(), 3);
        assert_eq!(red.edges().len(), 3);
        let side = |u: &str, v: &str| {
            red.edges().iter().find(|e| (e.a == u && e.b == v) || (e.a == v && e.b == u)).unwrap().z
        };
        assert!(close(side("t2", "t3"), r(11.0), 1e-14));
        assert!(close(side("t1", "t3"), r(5.5), 1e-14));
        assert!(close(side("t1", "t2"), r(11.0 / 3.0), 1e-14));
    }

    #[test]
    fn triangle_is_a_fixpoint() {
        let n = net(&[("a", "b", r(1.0)), ("b", "c", r(2.0)), ("c", "a", r(3.0))], &["a", "b", "c"]);
        assert_eq!(n.reduce(), n);
    }

    fn grid(k: usize, seed: u64) -> ResistorNetwork {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            0.5 + (s >> 11) as f64 / (1u64 << 53) as f64
        };
        let id = |i: usize, j: usize| format!("n{i}{j}");
        let mut edges = Vec::new();
        for i in 0..k {
            for j in 0..k {
                if i + 1 < k {
                    edges.push(Edge::new(id(i, j), id(i + 1, j), c(next(), 0.2 * next())));
                }
                if j + 1 < k {
                    edges.push(Edge::new(id(i, j), id(i, j + 1), c(next(), 0.2 * next())));
                }
            }
        }
        let nodes: Vec<String> = (0..k * k).map(|x| id(x / k, x % k)).collect();
        ResistorNetwork::new(nodes, edges, vec![id(0, 0), id(k - 1, k - 1)], BTreeMap::new()).unwrap()
    }

    #[test]
    fn grid_reduces_to_single_edge() {
        let g = grid(3, 5);
        let want = g.equivalent_impedance("n00", "n22").unwrap();
        let red = g.reduce();
        assert_eq!(red.nodes().count(), 2, "{red:?}");
        assert_eq!(red.edges().len(), 1);
        assert!(close(red.edges()[0].z, want, 1e-10));
    }

    #[test]
    fn unit_grid_value() {
        // 3x3 unit grid, opposite corners: 3/2 ohm
        let g = grid(3, 0);
        let unit = ResistorNetwork::new(
            g.nodes().map(String::from),
            g.edges().iter().map(|e| Edge::new(e.a.clone(), e.b.clone(), r(1.0))).collect(),
            g.terminals().to_vec(),
            BTreeMap::new(),
        )
        .unwrap();
        assert!(close(unit.equivalent_impedance("n00", "n22").unwrap(), r(1.5), 1e-13));
        assert!(close(unit.reduce().edges()[0].z, r(1.5), 1e-13));
    }

    fn random_network(seed: u64, n: usize, extra: usize) -> ResistorNetwork {
        let mut s = seed.wrapping_add(99);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut edges = Vec::new();
        // spanning tree, then extra chords
        for i in 1..n {
            let j = (next() * i as f64) as usize;
            edges.push(Edge::new(format!("v{i:02}"), format!("v{j:02}"), c(0.5 + next(), next() - 0.5)));
        }
        for _ in 0..extra {
            let a = (next() * n as f64) as usize;
            let b = (next() * n as f64) as usize;
            edges.push(Edge::new(format!("v{a:02}"), format!("v{b:02}"), c(0.5 + next(), next() - 0.5)));
        }
        let nodes: Vec<String> = (0..n).map(|i| format!("v{i:02}")).collect();
        let terminals = vec![nodes[0].clone(), nodes[n / 2].clone(), nodes[n - 1].clone()];
        ResistorNetwork::new(nodes, edges, terminals, BTreeMap::new()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn round_trip_star_triangle(v in proptest::array::uniform6(-2.0f64..2.0)) {
            let Ok(s) = ImpedanceTriple::new(c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5])) else { return Ok(()) };
            prop_assume!(s.z.iter().all(|z| z.norm() > 0.1));
            let Ok(t) = star_to_triangle(&s) else { return Ok(()) };
            prop_assume!(s.pair_sum().norm() > 1e-2);
            let back = triangle_to_star(&t).unwrap();
            for k in 0..3 {
                prop_assert!((back.z[k] - s.z[k]).norm() <= 1e-13 * s.z[k].norm().max(1.0) * 10.0);
            }
        }

        #[test]
        fn reduction_preserves_terminal_impedances(seed in 0u64..10_000, n in 4usize..12, extra in 0usize..10) {
            let g = random_network(seed, n, extra);
            let red = g.reduce();
            let ts = g.terminals().to_vec();
            for i in 0..ts.len() {
                for j in i + 1..ts.len() {
                    let (Ok(before), Ok(after)) = (g.equivalent_impedance(&ts[i], &ts[j]), red.equivalent_impedance(&ts[i], &ts[j])) else {
                        continue;
                    };
                    prop_assert!((before - after).norm() <= 1e-10 * before.norm().max(1e-300), "{before} {after}");
                }
            }
        }

        #[test]
        fn kirchhoff_solution_minimizes_power(seed in 0u64..10_000, n in 3usize..10, extra in 0usize..6, pick in 0usize..100, sign in proptest::bool::ANY) {
            let g = random_network(seed, n, extra);
            let positive: Vec<Edge> = g.edges().iter().map(|e| Edge::new(e.a.clone(), e.b.clone(), r(e.z.re))).collect();
            let pots = BTreeMap::from([(String::from("v00"), r(1.0)), (format!("v{:02}", n - 1), r(-0.5))]);
            let g = ResistorNetwork::new(g.nodes().map(String::from), positive, Vec::new(), pots).unwrap();
            let sol = g.solve_kirchhoff().unwrap();
            prop_assert!(sol.max_imbalance <= 1e-11);
            let internal: Vec<&String> = sol.potentials.keys().filter(|k| !g.potentials().contains_key(*k)).collect();
            prop_assume!(!internal.is_empty());
            let node = internal[pick % internal.len()].clone();
            // only nodes touched by a non-loop edge change the power
            prop_assume!(g.edges().iter().any(|e| e.a != e.b && e.touches(&node)));
            let mut moved = sol.potentials.clone();
            *moved.get_mut(&node).unwrap() += r(if sign { 1e-3 } else { -1e-3 });
            prop_assert!(g.power(&moved).unwrap().re > sol.power.re);
        }
    }
}
