//! Multiband uncertainty sets.
//!
//! Bands are stored by position `0..K` in increasing deviation order; the
//! zero band sits at position [`BandStructure::zero`]. Band index `k` (as used
//! in the model, negative for downward deviations) is `pos - zero`.

use crate::error::{Error, Result};
use crate::instance::Instance;

/// User-facing description of the bands: one entry per band, sorted by
/// deviation fraction, with exactly one zero-fraction band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpec {
    /// Deviation of each band as a fraction of nominal demand.
    pub fractions: Vec<f64>,
    /// Lower count fraction λ per band (ignored for the zero band).
    pub lower: Vec<f64>,
    /// Upper count fraction μ per band (ignored for the zero band).
    pub upper: Vec<f64>,
}

impl Default for BandSpec {
    /// Two negative bands, two positive bands and the zero band.
    fn default() -> Self {
        BandSpec {
            fractions: vec![-0.10, -0.05, 0.0, 0.05, 0.10],
            lower: vec![0.0; 5],
            upper: vec![0.0, 0.0, 1.0, 0.25, 0.10],
        }
    }
}

impl BandSpec {
    /// The single zero band: no uncertainty at all.
    pub fn nominal() -> Self {
        BandSpec {
            fractions: vec![0.0],
            lower: vec![0.0],
            upper: vec![1.0],
        }
    }

    /// Symmetric interval uncertainty `[-f, +f]` where at most a fraction
    /// `mu` of the coefficients of any constraint deviates upward.
    pub fn interval(f: f64, mu: f64) -> Self {
        BandSpec {
            fractions: vec![-f, 0.0, f],
            lower: vec![0.0; 3],
            upper: vec![0.0, 1.0, mu],
        }
    }

    fn zero(&self) -> Result<usize> {
        let zeros: Vec<usize> = (0..self.fractions.len()).filter(|&i| self.fractions[i] == 0.0).collect();
        match zeros.as_slice() {
            [z] => Ok(*z),
            [] => Err(Error::Validation("band fractions must include a zero band".into())),
            _ => Err(Error::Validation("band fractions contain more than one zero band".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.fractions.len();
        if k == 0 || self.lower.len() != k || self.upper.len() != k {
            return Err(Error::Validation("band fractions and bounds must have the same non-zero length".into()));
        }
        if self.fractions.iter().any(|f| !f.is_finite()) {
            return Err(Error::Validation("band fractions must be finite".into()));
        }
        for w in self.fractions.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Validation(format!(
                    "band fractions must be strictly increasing, found {} before {}",
                    w[0], w[1]
                )));
            }
        }
        let zero = self.zero()?;
        if self.fractions[0] < -1.0 {
            return Err(Error::Validation("a negative band may not remove more than the whole demand".into()));
        }
        let mut lower_sum = 0.0;
        for i in (0..k).filter(|&i| i != zero) {
            let (l, u) = (self.lower[i], self.upper[i]);
            if !(0.0..=1.0).contains(&l) || !(0.0..=1.0).contains(&u) {
                return Err(Error::Validation(format!("band {}: count fractions must lie in [0, 1]", i as isize - zero as isize)));
            }
            if l > u {
                return Err(Error::Validation(format!("band {}: lower fraction exceeds upper", i as isize - zero as isize)));
            }
            lower_sum += l;
        }
        if lower_sum > 1.0 + 1e-12 {
            return Err(Error::Validation(format!(
                "lower fractions sum to {lower_sum}; no realization can satisfy every band"
            )));
        }
        Ok(())
    }
}

/// Per-band count bounds as fractions of the constraint size `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRule {
    pub zero: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

// Guards floor/ceil against products such as 0.1 * 30 = 3.0000000000000004.
const COUNT_TOL: f64 = 1e-9;

impl BoundRule {
    /// Integer bounds `(l_k, u_k)` per band position for a constraint with `n`
    /// coefficients. The zero band is unbounded above (`u = n`, `l = 0`).
    pub fn bounds(&self, n: usize) -> (Vec<usize>, Vec<usize>) {
        let nf = n as f64;
        let mut l = Vec::with_capacity(self.lower.len());
        let mut u = Vec::with_capacity(self.lower.len());
        for i in 0..self.lower.len() {
            if i == self.zero {
                l.push(0);
                u.push(n);
            } else {
                l.push(((self.lower[i] * nf + COUNT_TOL).floor() as usize).min(n));
                u.push(((self.upper[i] * nf - COUNT_TOL).ceil().max(0.0) as usize).min(n));
            }
        }
        (l, u)
    }

    /// True when some non-zero band forces a minimum number of deviations.
    pub fn forces_deviation(&self) -> bool {
        (0..self.lower.len()).any(|i| i != self.zero && self.lower[i] > 0.0)
    }

    /// True when some negative band forces deviations.
    pub fn forces_negative(&self) -> bool {
        (0..self.zero).any(|i| self.lower[i] > 0.0)
    }
}

/// Deviation values `delta[c][t][pos]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandStructure {
    pub zero: usize,
    pub count: usize,
    pub delta: Vec<Vec<Vec<f64>>>,
}

impl BandStructure {
    pub fn num_bands(&self) -> usize {
        self.count
    }

    /// Number of negative bands K⁻.
    pub fn k_minus(&self) -> usize {
        self.zero
    }

    /// Number of positive bands K⁺.
    pub fn k_plus(&self) -> usize {
        self.num_bands() - self.zero - 1
    }

    /// Model band index of position `pos`.
    pub fn index(&self, pos: usize) -> isize {
        pos as isize - self.zero as isize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultibandSet {
    pub bands: BandStructure,
    pub rule: BoundRule,
}

impl MultibandSet {
    pub fn zero(&self) -> usize {
        self.bands.zero
    }

    pub fn num_bands(&self) -> usize {
        self.bands.num_bands()
    }

    pub fn delta(&self, c: usize, t: usize) -> &[f64] {
        &self.bands.delta[c][t]
    }

    pub fn profile(&self, n: usize) -> Profile {
        profile(&self.rule, n)
    }

    /// Smallest contribution commodity `c` can make to a load at `t`.
    pub fn low_demand(&self, instance: &Instance, c: usize, t: usize) -> f64 {
        let d = instance.demand[c][t];
        let worst_drop = self.bands.delta[c][t].first().copied().unwrap_or(0.0).min(0.0);
        (d + worst_drop).max(0.0)
    }
}

/// Band counts θ per band position for one constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub zero: usize,
    pub theta: Vec<usize>,
}

impl Profile {
    /// θ for model band index `k`.
    pub fn get(&self, k: isize) -> usize {
        self.theta[(k + self.zero as isize) as usize]
    }

    pub fn total(&self) -> usize {
        self.theta.iter().sum()
    }
}

/// Deviation counts for a constraint with `n` coefficients.
///
/// Every band first receives its lower bound. The remaining coefficients go
/// to the positive bands, outermost first, up to each upper bound; whatever
/// is left stays in the zero band.
pub fn profile(rule: &BoundRule, n: usize) -> Profile {
    let (l, u) = rule.bounds(n);
    let mut theta = l.clone();
    theta[rule.zero] = 0;
    let forced: usize = theta.iter().sum();
    let mut slack = n.saturating_sub(forced);
    for pos in (rule.zero + 1..theta.len()).rev() {
        let add = (u[pos] - l[pos].min(u[pos])).min(slack);
        theta[pos] += add;
        slack -= add;
    }
    let used: usize = theta.iter().sum();
    theta[rule.zero] = n - used;
    Profile {
        zero: rule.zero,
        theta,
    }
}

/// Instantiates `spec` on the demands of `instance`.
pub fn build_multiband(instance: &Instance, spec: &BandSpec) -> Result<MultibandSet> {
    spec.validate()?;
    let zero = spec.zero()?;
    let delta = instance
        .demand
        .iter()
        .map(|row| {
            row.iter()
                .map(|&d| spec.fractions.iter().map(|&f| f * d).collect())
                .collect()
        })
        .collect();
    Ok(MultibandSet {
        bands: BandStructure {
            zero,
            count: spec.fractions.len(),
            delta,
        },
        rule: BoundRule {
            zero,
            lower: spec.lower.clone(),
            upper: spec.upper.clone(),
        },
    })
}
