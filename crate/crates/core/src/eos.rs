//! Isentropic equation of state `p = a rho^gamma`, its pressure potential and
//! the extended-valued energy density of a (density, momentum) pair.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EosError {
    #[error("pressure coefficient must be positive, got {0}")]
    Coefficient(f64),
    #[error("adiabatic exponent must exceed 1, got {0}")]
    Exponent(f64),
    #[error("density must be nonnegative and finite, got {0}")]
    Density(f64),
    #[error("dimension must be 1 or 2, got {0}")]
    Dimension(usize),
    #[error("defect constant override must be positive and finite, got {0}")]
    Override(f64),
}

/// Pressure law `p(rho) = a rho^gamma` with `a > 0`, `gamma > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGasLaw", into = "RawGasLaw")]
pub struct GasLaw {
    a: f64,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGasLaw {
    a: f64,
    gamma: f64,
}

impl TryFrom<RawGasLaw> for GasLaw {
    type Error = EosError;
    fn try_from(raw: RawGasLaw) -> Result<Self, Self::Error> {
        GasLaw::new(raw.a, raw.gamma)
    }
}

impl From<GasLaw> for RawGasLaw {
    fn from(law: GasLaw) -> Self {
        RawGasLaw { a: law.a, gamma: law.gamma }
    }
}

impl GasLaw {
    pub fn new(a: f64, gamma: f64) -> Result<Self, EosError> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(EosError::Coefficient(a));
        }
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(EosError::Exponent(gamma));
        }
        Ok(Self { a, gamma })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn check(rho: f64) -> Result<(), EosError> {
        if rho >= 0.0 && rho.is_finite() {
            Ok(())
        } else {
            Err(EosError::Density(rho))
        }
    }

    pub fn pressure(&self, rho: f64) -> Result<f64, EosError> {
        Self::check(rho)?;
        Ok(self.p(rho))
    }

    /// `P(rho) = a/(gamma-1) rho^gamma`, so that `P'(rho) rho - P(rho) = p(rho)`.
    pub fn pressure_potential(&self, rho: f64) -> Result<f64, EosError> {
        Self::check(rho)?;
        Ok(self.potential(rho))
    }

    /// Sound speed `sqrt(p'(rho))`.
    pub fn sound_speed(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            0.0
        } else {
            (self.a * self.gamma * rho.powf(self.gamma - 1.0)).sqrt()
        }
    }

    /// Unchecked pressure for densities already known to be valid.
    #[inline]
    pub(crate) fn p(&self, rho: f64) -> f64 {
        if rho == 0.0 {
            0.0
        } else {
            self.a * rho.powf(self.gamma)
        }
    }

    #[inline]
    pub(crate) fn potential(&self, rho: f64) -> f64 {
        self.p(rho) / (self.gamma - 1.0)
    }

    /// Energy density `|m|^2/(2 rho) + P(rho)`, extended by `0` at the vacuum
    /// with zero momentum and by `+inf` at the vacuum with nonzero momentum.
    pub fn energy(&self, rho: f64, m: &[f64]) -> Result<ExtendedEnergy, EosError> {
        Self::check(rho)?;
        for &c in m {
            if !c.is_finite() {
                return Err(EosError::Density(c));
            }
        }
        Ok(self.energy_unchecked(rho, m))
    }

    #[inline]
    pub(crate) fn energy_unchecked(&self, rho: f64, m: &[f64]) -> ExtendedEnergy {
        let m2: f64 = m.iter().map(|c| c * c).sum();
        if rho == 0.0 {
            if m2 == 0.0 {
                ExtendedEnergy::Finite(0.0)
            } else {
                ExtendedEnergy::Infinite
            }
        } else {
            ExtendedEnergy::Finite(0.5 * m2 / rho + self.potential(rho))
        }
    }
}

/// A nonnegative energy value or the explicit `+inf` marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtendedEnergy {
    Finite(f64),
    Infinite,
}

impl ExtendedEnergy {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedEnergy::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedEnergy::Finite(v) => Some(v),
            ExtendedEnergy::Infinite => None,
        }
    }

    /// The value as an `f64`, mapping the marker to `f64::INFINITY`.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl std::ops::Add for ExtendedEnergy {
    type Output = ExtendedEnergy;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedEnergy::Finite(a), ExtendedEnergy::Finite(b)) => ExtendedEnergy::Finite(a + b),
            _ => ExtendedEnergy::Infinite,
        }
    }
}

/// `r(d, gamma) = min{1/2, d gamma/(gamma - 1)}`, identically 1/2 for `gamma > 1`.
pub fn defect_constant(dim: usize, law: &GasLaw) -> Result<f64, EosError> {
    if !(dim == 1 || dim == 2) {
        return Err(EosError::Dimension(dim));
    }
    let d = dim as f64;
    Ok(0.5_f64.min(d * law.gamma / (law.gamma - 1.0)))
}

/// Which constant multiplies the Reynolds-stress trace in the compatibility
/// inequality.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefectRule {
    /// `min{1/2, d gamma/(gamma-1)}`, which is 1/2 for every admissible law.
    #[default]
    Standard,
    /// `min{1/2, 1/(d (gamma-1))}`: the largest constant for which the
    /// convex-combination stress always satisfies the inequality.
    Sharp,
    /// A user-supplied constant.
    Fixed(f64),
}

impl DefectRule {
    pub fn value(&self, dim: usize, law: &GasLaw) -> Result<f64, EosError> {
        match *self {
            DefectRule::Standard => defect_constant(dim, law),
            DefectRule::Sharp => {
                if !(dim == 1 || dim == 2) {
                    return Err(EosError::Dimension(dim));
                }
                Ok(0.5_f64.min(1.0 / (dim as f64 * (law.gamma - 1.0))))
            }
            DefectRule::Fixed(r) => {
                if r > 0.0 && r.is_finite() {
                    Ok(r)
                } else {
                    Err(EosError::Override(r))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn law(a: f64, g: f64) -> GasLaw {
        GasLaw::new(a, g).unwrap()
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(matches!(GasLaw::new(0.0, 2.0), Err(EosError::Coefficient(_))));
        assert!(matches!(GasLaw::new(1.0, 1.0), Err(EosError::Exponent(_))));
        assert!(matches!(GasLaw::new(1.0, f64::NAN), Err(EosError::Exponent(_))));
    }

    #[test]
    fn pressure_examples() {
        assert_eq!(law(1.0, 2.0).pressure(3.0).unwrap(), 9.0);
        assert_eq!(law(3.0, 1.7).pressure(0.0).unwrap(), 0.0);
        // 2^1.4 = exp(1.4 ln 2), reference from a 30-digit evaluation
        let p = law(1.0, 1.4).pressure(2.0).unwrap();
        assert!((p - 2.639_015_821_545_788_5).abs() < 1e-12);
        assert!(matches!(law(1.0, 2.0).pressure(-1.0), Err(EosError::Density(_))));
    }

    #[test]
    fn potential_examples() {
        assert_eq!(law(1.0, 2.0).pressure_potential(1.0).unwrap(), 1.0);
        assert_eq!(law(1.0, 2.0).pressure_potential(0.0).unwrap(), 0.0);
        let pp = law(1.0, 1.4).pressure_potential(2.0).unwrap();
        assert!((pp - 6.597_539_553_864_471).abs() < 1e-11);
        assert!(law(1.0, 2.0).pressure_potential(-0.5).is_err());
    }

    #[test]
    fn energy_examples() {
        let l = law(1.0, 2.0);
        assert_eq!(l.energy(1.0, &[0.0]).unwrap(), ExtendedEnergy::Finite(1.0));
        assert_eq!(l.energy(0.0, &[0.0, 0.0]).unwrap(), ExtendedEnergy::Finite(0.0));
        assert_eq!(l.energy(0.0, &[1.0, 0.0]).unwrap(), ExtendedEnergy::Infinite);
        assert!(l.energy(-1.0, &[0.0]).is_err());
    }

    #[test]
    fn defect_constant_is_one_half() {
        assert_eq!(defect_constant(1, &law(1.0, 2.0)).unwrap(), 0.5);
        assert_eq!(defect_constant(2, &law(1.0, 5.0 / 3.0)).unwrap(), 0.5);
        assert_eq!(defect_constant(1, &law(1.0, 1.4)).unwrap(), 0.5);
        assert!(defect_constant(3, &law(1.0, 1.4)).is_err());
        assert_eq!(DefectRule::Fixed(0.25).value(1, &law(1.0, 2.0)).unwrap(), 0.25);
        assert!(DefectRule::Fixed(-1.0).value(1, &law(1.0, 2.0)).is_err());
        assert_eq!(DefectRule::Sharp.value(1, &law(1.0, 5.0)).unwrap(), 0.25);
    }

    #[test]
    fn potential_derivative_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let l = law(rng.gen_range(0.1..5.0), rng.gen_range(1.05..4.0));
            let rho = rng.gen_range(0.05..10.0);
            let h = 1e-6 * rho;
            let dp = (l.potential(rho + h) - l.potential(rho - h)) / (2.0 * h);
            let lhs = dp * rho - l.potential(rho);
            let p = l.p(rho);
            assert!((lhs - p).abs() <= 1e-6 * p, "{lhs} vs {p}");
        }
    }

    fn sample_state(rng: &mut ChaCha8Rng) -> (f64, [f64; 2]) {
        (rng.gen_range(0.01..5.0), [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)])
    }

    #[test]
    fn energy_is_convex_and_strictly_so() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let l = law(rng.gen_range(0.1..3.0), rng.gen_range(1.05..3.0));
            let (r1, m1) = sample_state(&mut rng);
            let (r2, m2) = sample_state(&mut rng);
            let lam: f64 = rng.gen_range(0.0..1.0);
            let e = |r: f64, m: [f64; 2]| l.energy(r, &m).unwrap().to_f64();
            let rm = lam * r1 + (1.0 - lam) * r2;
            let mm = [lam * m1[0] + (1.0 - lam) * m2[0], lam * m1[1] + (1.0 - lam) * m2[1]];
            let rhs = lam * e(r1, m1) + (1.0 - lam) * e(r2, m2);
            assert!(e(rm, mm) <= rhs * (1.0 + 1e-12));

            let dist = ((r1 - r2).powi(2) + (m1[0] - m2[0]).powi(2) + (m1[1] - m2[1]).powi(2)).sqrt();
            if dist >= 1e-3 {
                let mid = e(0.5 * (r1 + r2), [0.5 * (m1[0] + m2[0]), 0.5 * (m1[1] + m2[1])]);
                let gap = 0.5 * (e(r1, m1) + e(r2, m2)) - mid;
                assert!(gap >= 1e-10, "midpoint gap {gap} for distance {dist}");
            }
        }
    }
}
