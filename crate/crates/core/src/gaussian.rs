//! The Gaussian star-triangle integral, the Potts coupling map and the
//! tangent parametrisation of resistor stars in the Potts `N → 0` limit.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

use crate::network::{kennelly_check, ImpedanceTriple, NetworkError};
use crate::report::ResidualReport;

/// Pole guard for `tan` and `cot` arguments.
pub const POLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaussianError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("quadrature did not converge (error estimate {estimate:e})")]
    NonConvergence { estimate: f64 },
    #[error("coupling x = 0, the dual coupling is undefined")]
    DualUndefined,
    #[error("dual coupling has no real value (1 + sqrt(N) / x = {0})")]
    NoRealDual(f64),
    #[error("pole of {what} at argument {u}")]
    Pole { what: &'static str, u: f64 },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Three legs `R_{j,0}` meeting at an integrated centre spin, with the
/// outer spins `φ_j` held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianStar {
    pub beta: f64,
    pub legs: [f64; 3],
    pub phis: [f64; 3],
}

impl GaussianStar {
    pub fn new(beta: f64, legs: [f64; 3], phis: [f64; 3]) -> Result<Self, GaussianError> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(GaussianError::Parameter(format!("beta must be positive, got {beta}")));
        }
        if let Some(r) = legs.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(GaussianError::Parameter(format!("legs must be positive, got {r}")));
        }
        if let Some(p) = phis.iter().find(|p| !p.is_finite()) {
            return Err(GaussianError::Parameter(format!("spin values must be finite, got {p}")));
        }
        Ok(Self { beta, legs, phis })
    }

    /// `(Σ 1/R, Σ φ/R, Σ φ²/R)`.
    fn moments(&self) -> (f64, f64, f64) {
        let mut m = (0.0, 0.0, 0.0);
        for (r, p) in self.legs.iter().zip(&self.phis) {
            m.0 += 1.0 / r;
            m.1 += p / r;
            m.2 += p * p / r;
        }
        m
    }

    fn integrand(&self, x: f64) -> f64 {
        let e: f64 = self.legs.iter().zip(&self.phis).map(|(r, p)| (p - x) * (p - x) / r).sum();
        libm::sqrt(self.beta / core::f64::consts::PI) * libm::exp(-self.beta * e)
    }
}

/// Triangle resistances `[R_{1,2}, R_{2,3}, R_{3,1}]` with
/// `R_{j,j+1} = R_{j,0} R_{j+1,0} Σ_k 1/R_{k,0}`.
pub fn triangle_resistances(legs: [f64; 3]) -> [f64; 3] {
    let a: f64 = legs.iter().map(|r| 1.0 / r).sum();
    [legs[0] * legs[1] * a, legs[1] * legs[2] * a, legs[2] * legs[0] * a]
}

/// `Π R_{j,0}^{1/3} / R_{j,j+1}^{1/6}`.
pub fn triangle_prefactor(legs: [f64; 3]) -> f64 {
    let tri = triangle_resistances(legs);
    legs.iter().zip(&tri).map(|(r, t)| libm::cbrt(*r) / libm::pow(*t, 1.0 / 6.0)).product()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCheck {
    /// Star side by completing the square.
    pub lhs_closed: f64,
    /// Star side by adaptive quadrature.
    pub lhs_quadrature: f64,
    /// Triangle side.
    pub rhs: f64,
    pub closed_form: ResidualReport,
    pub quadrature: ResidualReport,
}

impl GaussianCheck {
    pub fn pass(&self) -> bool {
        self.closed_form.pass && self.quadrature.pass
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

fn adaptive(
    f: &dyn Fn(f64) -> f64,
    (a, fa): (f64, f64),
    (m, fm): (f64, f64),
    (b, fb): (f64, f64),
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, GaussianError> {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if libm::fabs(delta) <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(GaussianError::NonConvergence { estimate: libm::fabs(delta) });
    }
    let l = adaptive(f, (a, fa), (lm, flm), (m, fm), left, tol / 2.0, depth - 1)?;
    let r = adaptive(f, (m, fm), (rm, frm), (b, fb), right, tol / 2.0, depth - 1)?;
    Ok(l + r)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, GaussianError> {
    // a fixed first split keeps narrow peaks from hiding between nodes
    const PANELS: usize = 16;
    let h = (b - a) / PANELS as f64;
    let mut total = 0.0;
    for k in 0..PANELS {
        let (x0, x1) = (a + k as f64 * h, a + (k + 1) as f64 * h);
        let (f0, f1) = (f(x0), f(x1));
        let (m, fm, whole) = simpson(f, x0, f0, x1, f1);
        total += adaptive(f, (x0, f0), (m, fm), (x1, f1), whole, tol / PANELS as f64, 40)?;
    }
    Ok(total)
}

/// Compares the integrated star with the triangle form, both through the
/// completed square (`tol_closed`) and through quadrature (`tol_quadrature`).
pub fn gaussian_star_triangle_check(
    g: &GaussianStar,
    tol_closed: f64,
    tol_quadrature: f64,
) -> Result<GaussianCheck, GaussianError> {
    let (a, b, c) = g.moments();
    let lhs_closed = libm::exp(-g.beta * (c - b * b / a)) / libm::sqrt(a);
    let centre = b / a;
    let half = 40.0 / libm::sqrt(g.beta * a);
    let lhs_quadrature = integrate(&|x| g.integrand(x), centre - half, centre + half, 1e-10)?;
    let tri = triangle_resistances(g.legs);
    let exponent: f64 = tri
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let d = g.phis[j] - g.phis[(j + 1) % 3];
            d * d / r
        })
        .sum();
    let rhs = triangle_prefactor(g.legs) * libm::exp(-g.beta * exponent);
    let closed_form =
        ResidualReport::from_parts("gaussian-closed-form", libm::fabs(lhs_closed - rhs), libm::fabs(lhs_closed), Vec::new(), tol_closed);
    let quadrature = ResidualReport::from_parts(
        "gaussian-quadrature",
        libm::fabs(lhs_quadrature - rhs),
        libm::fabs(lhs_quadrature),
        Vec::new(),
        tol_quadrature,
    );
    Ok(GaussianCheck { lhs_closed, lhs_quadrature, rhs, closed_form, quadrature })
}

/// How the Potts coupling is mapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingMode {
    /// `x = (e^{βJ} − 1)/√N`.
    Finite { states: f64, beta: f64 },
    /// `N → 0` with `β = √N`: `x = J`.
    ZeroLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMap {
    pub x: f64,
    pub x_bar: f64,
    pub j_bar: f64,
}

/// Maps a coupling `J` to `x`, the dual `x̄ = 1/x` and the dual coupling `J̄`.
pub fn potts_coupling_map(j: f64, mode: CouplingMode) -> Result<CouplingMap, GaussianError> {
    if !j.is_finite() {
        return Err(GaussianError::Parameter(format!("coupling must be finite, got {j}")));
    }
    match mode {
        CouplingMode::Finite { states, beta } => {
            if !(states > 0.0 && states.is_finite() && beta > 0.0 && beta.is_finite()) {
                return Err(GaussianError::Parameter(format!("need N > 0 and beta > 0, got N = {states}, beta = {beta}")));
            }
            let root = libm::sqrt(states);
            let x = libm::expm1(beta * j) / root;
            if x == 0.0 {
                return Err(GaussianError::DualUndefined);
            }
            let x_bar = 1.0 / x;
            let arg = 1.0 + root * x_bar;
            if !(arg > 0.0) {
                return Err(GaussianError::NoRealDual(arg));
            }
            Ok(CouplingMap { x, x_bar, j_bar: libm::log(arg) / beta })
        }
        CouplingMode::ZeroLimit => {
            if j == 0.0 {
                return Err(GaussianError::DualUndefined);
            }
            Ok(CouplingMap { x: j, x_bar: 1.0 / j, j_bar: 1.0 / j })
        }
    }
}

/// Resistance `c / J` of a bond in the `N → 0` limit.
pub fn limit_resistance(c: f64, j: f64) -> Result<f64, GaussianError> {
    if j == 0.0 || !(c > 0.0) {
        return Err(GaussianError::Parameter(format!("need c > 0 and J != 0, got c = {c}, J = {j}")));
    }
    Ok(c / j)
}

fn tan_checked(u: f64) -> Result<f64, GaussianError> {
    let cos = libm::cos(u);
    if libm::fabs(cos) < POLE_EPS {
        return Err(GaussianError::Pole { what: "tan", u });
    }
    Ok(libm::sin(u) / cos)
}

fn cot_checked(u: f64) -> Result<f64, GaussianError> {
    let sin = libm::sin(u);
    if libm::fabs(sin) < POLE_EPS {
        return Err(GaussianError::Pole { what: "cot", u });
    }
    Ok(libm::cos(u) / sin)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PottsLimitCheck {
    pub star: ImpedanceTriple,
    pub triangle: ImpedanceTriple,
    pub report: ResidualReport,
}

/// Star `(c tan(p−q), c cot(p−r), c tan(q−r))` against triangle
/// `(c cot(p−q), c tan(p−r), c cot(q−r))`: all five Kennelly quantities
/// must equal `c²`.
pub fn potts_limit_star_triangle_check(c: f64, p: f64, q: f64, r: f64, tol: f64) -> Result<PottsLimitCheck, GaussianError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(GaussianError::Parameter(format!("c must be positive, got {c}")));
    }
    let re = |x: f64| Complex64::new(c * x, 0.0);
    let (t1, t2, t3) = (tan_checked(p - q)?, cot_checked(p - r)?, tan_checked(q - r)?);
    let (b1, b2, b3) = (cot_checked(p - q)?, tan_checked(p - r)?, cot_checked(q - r)?);
    let star = ImpedanceTriple::new(re(t1), re(t2), re(t3))?;
    let triangle = ImpedanceTriple::new(re(b1), re(b2), re(b3))?;
    let mut report = kennelly_check(&star, &triangle, tol);
    report.equation = String::from("potts-limit-star-triangle");
    Ok(PottsLimitCheck { star, triangle, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::star_to_triangle;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    #[test]
    fn unit_legs() {
        assert_eq!(triangle_resistances([1.0; 3]), [3.0; 3]);
        assert!((triangle_prefactor([1.0; 3]) - 1.0 / libm::sqrt(3.0)).abs() < 1e-15);
    }

    #[test]
    fn prefactor_is_inverse_root_of_conductance_sum() {
        let legs = [0.7, 2.3, 1.1];
        let a: f64 = legs.iter().map(|r| 1.0 / r).sum();
        assert!((triangle_prefactor(legs) - 1.0 / libm::sqrt(a)).abs() < 1e-14);
    }

    #[test]
    fn reference_star() {
        let g = GaussianStar::new(1.0, [1.0, 2.0, 3.0], [0.5, -0.3, 1.1]).unwrap();
        let chk = gaussian_star_triangle_check(&g, 1e-13, 1e-8).unwrap();
        assert!(chk.pass(), "{chk:?}");
        assert!(chk.closed_form.relative <= 1e-13);
        assert!(libm::fabs(chk.lhs_quadrature - chk.rhs) <= 1e-8);
    }

    #[test]
    fn equal_spins_leave_prefactor() {
        let g = GaussianStar::new(2.5, [0.4, 1.9, 3.3], [0.8; 3]).unwrap();
        let chk = gaussian_star_triangle_check(&g, 1e-13, 1e-8).unwrap();
        let pre = triangle_prefactor(g.legs);
        assert!((chk.rhs - pre).abs() <= 1e-15 * pre);
        assert!((chk.lhs_closed - pre).abs() <= 1e-14 * pre);
    }

    #[test]
    fn invalid_star() {
        assert!(GaussianStar::new(0.0, [1.0; 3], [0.0; 3]).is_err());
        assert!(GaussianStar::new(1.0, [1.0, -1.0, 1.0], [0.0; 3]).is_err());
    }

    #[test]
    fn quadrature_of_known_integrals() {
        let v = integrate(&|x| libm::exp(-x * x), -40.0, 40.0, 1e-12).unwrap();
        assert!((v - libm::sqrt(PI)).abs() < 1e-11);
        let v = integrate(&libm::sin, 0.0, PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn quadrature_reports_nonconvergence() {
        let res = integrate(&|x| if x > 0.123456 { 1.0 } else { 0.0 }, 0.0, 1.0, 1e-300);
        assert!(matches!(res, Err(GaussianError::NonConvergence { .. })));
    }

    #[test]
    fn coupling_map_examples() {
        let m = potts_coupling_map(0.7, CouplingMode::Finite { states: 3.0, beta: 1.3 }).unwrap();
        assert!((m.x * m.x_bar - 1.0).abs() < 1e-15);
        // the dual coupling maps back to x̄
        let back = potts_coupling_map(m.j_bar, CouplingMode::Finite { states: 3.0, beta: 1.3 }).unwrap();
        assert!((back.x - m.x_bar).abs() < 1e-12);
        assert_eq!(potts_coupling_map(0.0, CouplingMode::Finite { states: 2.0, beta: 1.0 }), Err(GaussianError::DualUndefined));
        let z = potts_coupling_map(0.37, CouplingMode::ZeroLimit).unwrap();
        assert_eq!(z.x, 0.37);
        assert_eq!(z.x_bar, 1.0 / 0.37);
        assert_eq!(limit_resistance(2.0, 0.5).unwrap(), 4.0);
        assert!(potts_coupling_map(1.0, CouplingMode::Finite { states: -1.0, beta: 1.0 }).is_err());
    }

    #[test]
    fn small_states_approach_zero_limit() {
        let j = 0.8;
        let n: f64 = 1e-12;
        let m = potts_coupling_map(j, CouplingMode::Finite { states: n, beta: libm::sqrt(n) }).unwrap();
        assert!((m.x - j).abs() < 1e-5);
    }

    #[test]
    fn tangent_star_hand_value() {
        let (p, q, r) = (PI / 4.0, PI / 8.0, 0.0);
        let chk = potts_limit_star_triangle_check(1.0, p, q, r, 1e-12).unwrap();
        let [a, b, c] = chk.star.z;
        assert!((a * b + b * c + c * a - 1.0).norm() < 1e-15);
        assert!(chk.report.pass, "{:?}", chk.report);
    }

    #[test]
    fn tangent_star_pole() {
        assert!(matches!(potts_limit_star_triangle_check(1.0, 0.3, 0.3, 0.0, 1e-12), Err(GaussianError::Pole { .. })));
        assert!(matches!(
            potts_limit_star_triangle_check(1.0, PI / 2.0 + 0.2, 0.2, 0.0, 1e-12),
            Err(GaussianError::Pole { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn closed_forms_agree(beta in 0.1f64..5.0, legs in proptest::array::uniform3(0.1f64..5.0), phis in proptest::array::uniform3(-2.0f64..2.0)) {
            let g = GaussianStar::new(beta, legs, phis).unwrap();
            let chk = gaussian_star_triangle_check(&g, 1e-12, 1e-8).unwrap();
            prop_assert!(chk.closed_form.pass, "{:?}", chk.closed_form);
        }

        #[test]
        fn wye_delta_matches_gaussian_triangle(legs in proptest::array::uniform3(0.1f64..5.0)) {
            let star = ImpedanceTriple::new(legs[0].into(), legs[1].into(), legs[2].into()).unwrap();
            let tri = star_to_triangle(&star).unwrap();
            let g = triangle_resistances(legs);
            // R_{1,2} is opposite leg 3, and so on
            for (side, k) in [(0usize, 2usize), (1, 0), (2, 1)] {
                prop_assert!((tri.z[k].re - g[side]).abs() <= 1e-13 * g[side]);
            }
        }

        #[test]
        fn coupling_duality(j in 0.01f64..3.0, n in 0.5f64..6.0, beta in 0.2f64..3.0) {
            let m = potts_coupling_map(j, CouplingMode::Finite { states: n, beta }).unwrap();
            prop_assert!((m.x * m.x_bar - 1.0).abs() < 1e-14);
        }

        #[test]
        fn tangent_star_satisfies_kennelly(c in 0.2f64..3.0, p in -1.5f64..1.5, q in -1.5f64..1.5, r in -1.5f64..1.5) {
            let Ok(chk) = potts_limit_star_triangle_check(c, p, q, r, 1e-12) else { return Ok(()) };
            // both Kennelly forms cancel: the leg pair sum sums terms of size |z|² to c²,
            // and the side sum can nearly vanish. Keep to points where roundoff stays small.
            let legs = chk.star.z.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let sides = chk.triangle.z.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let side_sum = chk.triangle.z.iter().sum::<Complex64>().norm();
            prop_assume!(legs / c < 30.0 && side_sum > 0.1 * sides);
            prop_assert!(chk.report.pass, "{:?}", chk.report);
        }
    }
}
