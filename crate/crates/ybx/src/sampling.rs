//! Seeded random inputs. Every draw in a run comes from one generator, in a
//! fixed order, so results depend only on the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ybx_core::{Complex64, Rapidity};

use crate::weightfile::RapidityForm;

pub const RAPIDITY_RANGE: (f64, f64) = (0.1, 1.2);
pub const GAUGE_RANGE: (f64, f64) = (0.5, 1.5);

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    fn centre(&mut self) -> Complex64 {
        Complex64::new(self.uniform(RAPIDITY_RANGE.0, RAPIDITY_RANGE.1), 0.0)
    }

    /// Real rapidity; vector rapidities get random gauge components.
    pub fn rapidity(&mut self, form: RapidityForm) -> Rapidity {
        match form {
            RapidityForm::Scalar => Rapidity::Scalar(self.centre()),
            RapidityForm::Pair => Rapidity::Pair(self.centre(), self.centre()),
            RapidityForm::Vector(q) => {
                let mut v: Vec<Complex64> =
                    (0..=2 * q).map(|_| Complex64::new(self.uniform(GAUGE_RANGE.0, GAUGE_RANGE.1), 0.0)).collect();
                v[q] = self.centre();
                Rapidity::Vector(v)
            }
        }
    }

    pub fn triple(&mut self, form: RapidityForm) -> [Rapidity; 3] {
        [self.rapidity(form), self.rapidity(form), self.rapidity(form)]
    }

    /// Row-major `Q x Q` matrix with `G[ρ][σ] G[σ][ρ] = 1` and unit diagonal.
    pub fn unit_product_g(&mut self, q: usize) -> Vec<Complex64> {
        let mut g = vec![Complex64::new(1.0, 0.0); q * q];
        for r in 0..q {
            for s in r + 1..q {
                let modulus = self.uniform(0.5, 2.0);
                let phase = self.uniform(-std::f64::consts::PI, std::f64::consts::PI);
                let z = Complex64::from_polar(modulus, phase);
                g[r * q + s] = z;
                g[s * q + r] = z.inv();
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draws() {
        let mut a = Sampler::new(11);
        let mut b = Sampler::new(11);
        for _ in 0..5 {
            assert_eq!(a.triple(RapidityForm::Vector(3)), b.triple(RapidityForm::Vector(3)));
        }
        let mut c = Sampler::new(12);
        assert_ne!(Sampler::new(11).rapidity(RapidityForm::Scalar), c.rapidity(RapidityForm::Scalar));
    }

    #[test]
    fn draws_stay_in_range() {
        let mut s = Sampler::new(3);
        for _ in 0..100 {
            let Rapidity::Vector(v) = s.rapidity(RapidityForm::Vector(2)) else { panic!() };
            assert_eq!(v.len(), 5);
            assert!((0.1..1.2).contains(&v[2].re));
            for (k, z) in v.iter().enumerate() {
                if k != 2 {
                    assert!((0.5..1.5).contains(&z.re));
                }
            }
        }
    }

    #[test]
    fn g_has_unit_products() {
        let mut s = Sampler::new(5);
        let g = s.unit_product_g(3);
        for r in 0..3 {
            for t in 0..3 {
                assert!((g[r * 3 + t] * g[t * 3 + r] - 1.0).norm() < 1e-14);
            }
        }
    }
}
