//! Finite measure representations and their exact algebra.
//!
//! Two representations cover everything the toolkit needs:
//!
//! * [`GridMeasure`] is the step measure of a Cantor construction level: a set
//!   of intervals `[1 + m/N, 1 + (m+1)/N]` carrying mass `1/T` each. Offsets are
//!   integers, so interval masses can be computed in exact rational arithmetic.
//! * [`AtomMeasure`] is a finite list of weighted point masses in one or two
//!   dimensions. Products `mu . nu`, convolutions and discretizations live here.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `exp(-2 pi i t)`, with the argument reduced to `[-1/2, 1/2]` before the
/// trigonometric call.
#[inline]
pub fn cis_neg(t: f64) -> Complex64 {
    let frac = t - t.round();
    let (s, c) = (std::f64::consts::TAU * frac).sin_cos();
    Complex64::new(c, -s)
}

/// `(1 - exp(-2 pi i u)) / (2 pi i u)`, the transform of the unit box `[0,1]`
/// evaluated at `u`. Written as `exp(-pi i u) sin(pi u)/(pi u)` to avoid
/// cancellation near zero.
#[inline]
pub fn unit_box_hat(u: f64) -> Complex64 {
    if u == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let frac = u - 2.0 * (u / 2.0).round();
    let sinc = (std::f64::consts::PI * frac).sin() / (std::f64::consts::PI * u);
    cis_neg(u / 2.0) * sinc
}

/// A point of `R^d` for `d` in {1, 2}.
pub trait Point:
    Copy + Debug + PartialEq + Send + Sync + Serialize + DeserializeOwned + 'static
{
    const DIM: usize;

    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, r: f64) -> Self;
    fn dot(self, other: Self) -> f64;
    fn coords(&self) -> &[f64];
    fn from_coords(c: &[f64]) -> Self;

    fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    fn dist(self, other: Self) -> f64 {
        self.add(other.scale(-1.0)).norm()
    }

    fn is_finite(&self) -> bool {
        self.coords().iter().all(|&c| f64::is_finite(c))
    }
}

impl Point for f64 {
    const DIM: usize = 1;

    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, r: f64) -> Self {
        self * r
    }
    fn dot(self, other: Self) -> f64 {
        self * other
    }
    fn coords(&self) -> &[f64] {
        std::slice::from_ref(self)
    }
    fn from_coords(c: &[f64]) -> Self {
        c[0]
    }
    fn norm(self) -> f64 {
        self.abs()
    }
    fn dist(self, other: Self) -> f64 {
        (self - other).abs()
    }
}

impl Point for [f64; 2] {
    const DIM: usize = 2;

    fn zero() -> Self {
        [0.0, 0.0]
    }
    fn add(self, other: Self) -> Self {
        [self[0] + other[0], self[1] + other[1]]
    }
    fn scale(self, r: f64) -> Self {
        [self[0] * r, self[1] * r]
    }
    fn dot(self, other: Self) -> f64 {
        self[0] * other[0] + self[1] * other[1]
    }
    fn coords(&self) -> &[f64] {
        self.as_slice()
    }
    fn from_coords(c: &[f64]) -> Self {
        [c[0], c[1]]
    }
    fn dist(self, other: Self) -> f64 {
        (self[0] - other[0]).hypot(self[1] - other[1])
    }
}

/// Round to 15 significant decimal digits; the merge key for coincident atoms.
fn round_sig15(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let r: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    r + 0.0
}

fn merge_key<P: Point>(p: &P) -> Vec<f64> {
    p.coords().iter().map(|&c| round_sig15(c)).collect()
}

fn cmp_keys(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<P> {
    pub position: P,
    pub weight: f64,
}

/// Finite positive combination of point masses.
///
/// Serialized as a JSON array of `[position, weight]` pairs; a position is a
/// number in one dimension and a two-element array in two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    into = "Vec<(P, f64)>",
    try_from = "Vec<(P, f64)>",
    bound = "P: Point"
)]
pub struct AtomMeasure<P: Point = f64> {
    atoms: Vec<Atom<P>>,
}

impl<P: Point> From<AtomMeasure<P>> for Vec<(P, f64)> {
    fn from(m: AtomMeasure<P>) -> Self {
        m.atoms.into_iter().map(|a| (a.position, a.weight)).collect()
    }
}

impl<P: Point> TryFrom<Vec<(P, f64)>> for AtomMeasure<P> {
    type Error = Error;

    fn try_from(pairs: Vec<(P, f64)>) -> Result<Self> {
        AtomMeasure::from_pairs(pairs)
    }
}

impl<P: Point> AtomMeasure<P> {
    pub fn new(atoms: Vec<Atom<P>>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        for a in &atoms {
            if !a.position.is_finite() {
                return Err(Error::InvalidAtom(format!(
                    "non-finite position {:?}",
                    a.position
                )));
            }
            if !(a.weight.is_finite() && a.weight > 0.0) {
                return Err(Error::InvalidAtom(format!(
                    "weight {} is not strictly positive",
                    a.weight
                )));
            }
        }
        Ok(Self { atoms })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (P, f64)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(position, weight)| Atom { position, weight })
                .collect(),
        )
    }

    pub fn dirac(position: P, weight: f64) -> Result<Self> {
        Self::new(vec![Atom { position, weight }])
    }

    /// Equal weights `mass / len` on the given points.
    pub fn uniform(points: &[P], mass: f64) -> Result<Self> {
        let w = mass / points.len().max(1) as f64;
        Self::from_pairs(points.iter().map(|&p| (p, w)))
    }

    pub fn atoms(&self) -> &[Atom<P>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        P::DIM
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Largest distance between two atoms.
    pub fn diameter(&self) -> f64 {
        if P::DIM == 1 {
            let (lo, hi) = self.atoms.iter().fold((f64::MAX, f64::MIN), |(lo, hi), a| {
                let x = a.position.coords()[0];
                (lo.min(x), hi.max(x))
            });
            return hi - lo;
        }
        let mut best = 0.0f64;
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[i + 1..] {
                best = best.max(a.position.dist(b.position));
            }
        }
        best
    }

    /// Sort atoms by position and sum the weights of atoms whose positions
    /// agree to 15 significant digits.
    pub fn merged(self) -> Self {
        let mut keyed: Vec<(Vec<f64>, Atom<P>)> = self
            .atoms
            .into_iter()
            .map(|a| (merge_key(&a.position), a))
            .collect();
        keyed.sort_by(|(ka, a), (kb, b)| {
            cmp_keys(ka, kb).then_with(|| cmp_keys(a.position.coords(), b.position.coords()))
        });
        let mut out: Vec<Atom<P>> = Vec::with_capacity(keyed.len());
        let mut last_key: Option<Vec<f64>> = None;
        for (k, a) in keyed {
            match (&last_key, out.last_mut()) {
                (Some(lk), Some(prev)) if cmp_keys(lk, &k).is_eq() => prev.weight += a.weight,
                _ => {
                    out.push(a);
                    last_key = Some(k);
                }
            }
        }
        Self { atoms: out }
    }

    /// Multiply every weight by `factor > 0`.
    pub fn scaled_weights(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.atoms
                .iter()
                .map(|a| Atom {
                    position: a.position,
                    weight: a.weight * factor,
                })
                .collect(),
        )
    }
}

/// `sum_x w_x exp(-2 pi i x . xi)`.
pub fn fourier_atoms<P: Point>(m: &AtomMeasure<P>, xi: P) -> Complex64 {
    m.atoms
        .iter()
        .map(|a| cis_neg(a.position.dot(xi)) * a.weight)
        .sum()
}

/// Pushforward of `mu x nu` under `(r, y) -> r y`.
pub fn product_measure<P: Point>(mu: &AtomMeasure<f64>, nu: &AtomMeasure<P>) -> AtomMeasure<P> {
    let atoms = mu
        .atoms
        .iter()
        .flat_map(|r| {
            nu.atoms.iter().map(move |y| Atom {
                position: y.position.scale(r.position),
                weight: r.weight * y.weight,
            })
        })
        .collect();
    AtomMeasure { atoms }.merged()
}

/// Pushforward of `a x b` under `(x, y) -> x + y`.
pub fn convolve<P: Point>(a: &AtomMeasure<P>, b: &AtomMeasure<P>) -> AtomMeasure<P> {
    let atoms = a
        .atoms
        .iter()
        .flat_map(|x| {
            b.atoms.iter().map(move |y| Atom {
                position: x.position.add(y.position),
                weight: x.weight * y.weight,
            })
        })
        .collect();
    AtomMeasure { atoms }.merged()
}

/// Step measure with density `N/T` on `T` intervals `[1 + m/N, 1 + (m+1)/N]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GridRecord", into = "GridRecord")]
pub struct GridMeasure {
    level: usize,
    scale_den: u64,
    offsets: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRecord {
    level: usize,
    scale_den: u64,
    count: u64,
    offsets: Vec<u64>,
}

impl TryFrom<GridRecord> for GridMeasure {
    type Error = Error;

    fn try_from(r: GridRecord) -> Result<Self> {
        if r.count != r.offsets.len() as u64 {
            return Err(Error::InvalidGrid(format!(
                "count {} does not match {} offsets",
                r.count,
                r.offsets.len()
            )));
        }
        GridMeasure::new(r.level, r.scale_den, r.offsets)
    }
}

impl From<GridMeasure> for GridRecord {
    fn from(g: GridMeasure) -> Self {
        GridRecord {
            level: g.level,
            scale_den: g.scale_den,
            count: g.offsets.len() as u64,
            offsets: g.offsets,
        }
    }
}

impl GridMeasure {
    pub fn new(level: usize, scale_den: u64, offsets: Vec<u64>) -> Result<Self> {
        if scale_den == 0 {
            return Err(Error::InvalidGrid("scale denominator is zero".into()));
        }
        if offsets.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("offsets not strictly increasing".into()));
        }
        if *offsets.last().unwrap() >= scale_den {
            return Err(Error::InvalidGrid(format!(
                "offset {} outside [0, {scale_den})",
                offsets.last().unwrap()
            )));
        }
        Ok(Self {
            level,
            scale_den,
            offsets,
        })
    }

    /// Natural measure at level `depth` of the self-similar set on `[1, 2]`
    /// keeping the base-`base` digits in `digits` at every scale.
    pub fn self_similar(base: u64, digits: &[u64], depth: usize) -> Result<Self> {
        if base < 2 || digits.is_empty() || digits.iter().any(|&b| b >= base) {
            return Err(Error::InvalidGrid(format!("digits {digits:?} in base {base}")));
        }
        let mut digits = digits.to_vec();
        digits.sort_unstable();
        digits.dedup();
        let mut offsets = vec![0u64];
        let mut den = 1u64;
        for _ in 0..depth {
            den = den
                .checked_mul(base)
                .ok_or_else(|| Error::InvalidGrid("scale overflows".into()))?;
            offsets = offsets
                .iter()
                .flat_map(|&m| digits.iter().map(move |&b| m * base + b))
                .collect();
        }
        Self::new(depth, den, offsets)
    }

    /// Lebesgue measure on `[1, 2]`.
    pub fn unit() -> Self {
        Self {
            level: 0,
            scale_den: 1,
            offsets: vec![0],
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `N_j`
    pub fn scale_den(&self) -> u64 {
        self.scale_den
    }

    /// `T_j`
    pub fn count(&self) -> u64 {
        self.offsets.len() as u64
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn total_mass(&self) -> f64 {
        1.0
    }

    /// Left endpoint `1 + m/N` of the interval with offset `m`.
    pub fn endpoint(&self, m: u64) -> f64 {
        1.0 + m as f64 / self.scale_den as f64
    }

    pub fn endpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.offsets.iter().map(|&m| self.endpoint(m))
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.scale_den as f64
    }

    pub fn contains_offset(&self, m: u64) -> bool {
        self.offsets.binary_search(&m).is_ok()
    }

    fn count_in(&self, lo: u64, hi_exclusive: u64) -> u64 {
        if hi_exclusive <= lo {
            return 0;
        }
        let a = self.offsets.partition_point(|&m| m < lo);
        let b = self.offsets.partition_point(|&m| m < hi_exclusive);
        (b - a) as u64
    }

    /// Exact mass of `[lo, hi]`.
    pub fn interval_mass_exact(&self, lo: &BigRational, hi: &BigRational) -> Result<BigRational> {
        if lo > hi {
            return Err(Error::InvalidInterval {
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: hi.to_f64().unwrap_or(f64::NAN),
            });
        }
        let n = BigRational::from_integer(BigInt::from(self.scale_den));
        let one = BigRational::from_integer(BigInt::from(1));
        // cell coordinates: x -> (x - 1) N, cells [m, m+1]
        let mut l = (lo - &one) * &n;
        let mut h = (hi - &one) * &n;
        if l < BigRational::zero() {
            l = BigRational::zero();
        }
        if h > n {
            h = n.clone();
        }
        if l >= h {
            return Ok(BigRational::zero());
        }
        let fl = l.floor().to_integer().to_u64().expect("floor within grid");
        let fh = h.floor().to_integer().to_u64().expect("floor within grid");
        let mut covered = BigRational::zero();
        if fl == fh {
            if self.contains_offset(fl) {
                covered = &h - &l;
            }
        } else {
            if self.contains_offset(fl) {
                covered += BigRational::from_integer(BigInt::from(fl + 1)) - &l;
            }
            covered += BigRational::from_integer(BigInt::from(self.count_in(fl + 1, fh)));
            if fh < self.scale_den && self.contains_offset(fh) {
                covered += &h - BigRational::from_integer(BigInt::from(fh));
            }
        }
        Ok(covered / BigRational::from_integer(BigInt::from(self.count())))
    }

    /// Mass of `[lo, hi]`, computed exactly from the binary values of the
    /// endpoints and rounded once at the end.
    pub fn measure_of_interval(&self, lo: f64, hi: f64) -> Result<f64> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        let lo = lo.max(0.0);
        let hi = hi.min(3.0);
        if lo >= hi {
            return Ok(0.0);
        }
        let l = BigRational::from_float(lo).expect("finite");
        let h = BigRational::from_float(hi).expect("finite");
        Ok(self
            .interval_mass_exact(&l, &h)?
            .to_f64()
            .expect("mass is in [0, 1]"))
    }

    /// Exact mass of the cell of width `1/N_level` anchored at `1 + m/N_level`,
    /// where `N_level` is a coarser scale dividing this grid's scale.
    pub fn ancestor_mass(&self, m: u64, coarse_den: u64) -> Result<BigRational> {
        if coarse_den == 0 || self.scale_den % coarse_den != 0 {
            return Err(Error::InvalidArgument(format!(
                "{coarse_den} does not divide {}",
                self.scale_den
            )));
        }
        let one = BigRational::from_integer(BigInt::from(1));
        let lo = &one + BigRational::new(BigInt::from(m), BigInt::from(coarse_den));
        let hi = &one + BigRational::new(BigInt::from(m + 1), BigInt::from(coarse_den));
        self.interval_mass_exact(&lo, &hi)
    }

    /// `F(t) = mu((-inf, t])`
    pub fn cdf(&self, t: f64) -> f64 {
        let n = self.scale_den as f64;
        let x = (t - 1.0) * n;
        if x.is_nan() || x <= 0.0 {
            return 0.0;
        }
        if x >= n {
            return 1.0;
        }
        let m = x.floor() as u64;
        let full = self.count_in(0, m) as f64;
        let partial = if self.contains_offset(m) {
            x - m as f64
        } else {
            0.0
        };
        (full + partial) / self.count() as f64
    }

    /// One atom of weight `1/T` at each interval midpoint.
    pub fn discretize(&self) -> AtomMeasure<f64> {
        let w = 1.0 / self.count() as f64;
        let half = 0.5 / self.scale_den as f64;
        AtomMeasure {
            atoms: self
                .endpoints()
                .map(|a| Atom {
                    position: a + half,
                    weight: w,
                })
                .collect(),
        }
    }

    /// Transform of the step density:
    /// `(1/T) sum_a exp(-2 pi i a xi) (1 - exp(-2 pi i xi/N)) / (2 pi i xi/N)`.
    pub fn fourier(&self, xi: f64) -> Complex64 {
        if xi == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let n = self.scale_den as f64;
        let sum: Complex64 = self
            .offsets
            .iter()
            .map(|&m| cis_neg(xi + xi * (m as f64 / n)))
            .sum();
        sum * unit_box_hat(xi / n) / self.count() as f64
    }
}

/// Support diameters of `mu` and `mu . nu`, and the check-grid spacing
/// `d0 = 1 / max(diam_mu, diam_prod)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureDiam {
    pub diam_mu: f64,
    pub diam_prod: f64,
    pub d0: f64,
}

impl MeasureDiam {
    pub fn new(diam_mu: f64, diam_prod: f64) -> Result<Self> {
        if !(diam_mu > 0.0 && diam_prod > 0.0 && diam_mu.is_finite() && diam_prod.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "diameters must be positive, got {diam_mu} and {diam_prod}"
            )));
        }
        Ok(Self {
            diam_mu,
            diam_prod,
            d0: 1.0 / diam_mu.max(diam_prod),
        })
    }

    /// Bounds for a measure supported in `[1, 2]`: `diam(supp mu) <= 1`, and
    /// `supp(mu . nu)` lies in the hull of `{r y : r in {1, 2}, y in supp nu}`.
    pub fn for_unit_support(nu: Option<&AtomMeasure<f64>>) -> Result<Self> {
        let Some(nu) = nu else {
            return Self::new(1.0, 1.0);
        };
        let (ylo, yhi) = nu.atoms().iter().fold((f64::MAX, f64::MIN), |(lo, hi), a| {
            (lo.min(a.position), hi.max(a.position))
        });
        let corners = [ylo, 2.0 * ylo, yhi, 2.0 * yhi];
        let lo = corners.iter().cloned().fold(f64::MAX, f64::min);
        let hi = corners.iter().cloned().fold(f64::MIN, f64::max);
        Self::new(1.0, (hi - lo).max(f64::MIN_POSITIVE))
    }
}
