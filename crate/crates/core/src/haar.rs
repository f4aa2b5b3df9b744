//! Haar-random unitaries, low-order Weingarten values, representation
//! dimensions of `U(N)`, and Monte-Carlo checks of moment identities and
//! gradient-variance formulas on dense matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::CMatrix;
use crate::error::{Error, Result};
use crate::lcu::LcuCoefficients;
use crate::rng::stream;

/// Largest dimension handled by the dense routines here.
pub const MAX_DENSE_DIM: usize = 64;

/// Fewest samples a [`MomentReport`] may rest on.
pub const MIN_SAMPLES: usize = 100;

const UNITARITY_TOL: f64 = 1e-10;

/// An `N x N` unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseUnitary {
    matrix: CMatrix,
}

impl DenseUnitary {
    /// Checks `U^dagger U = I` to `1e-10` per entry.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let defect = crate::dense::unitarity_defect(&matrix);
        if !(defect < UNITARITY_TOL) {
            return Err(Error::InvalidConfig(format!("matrix is not unitary (defect {defect:e})")));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// First column, i.e. `U|0>`.
    pub fn first_column(&self) -> DVector<Complex64> {
        self.matrix.column(0).into_owned()
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("Haar sampling needs N >= 2, got {n}")));
    }
    if n > MAX_DENSE_DIM {
        return Err(Error::DimensionTooLarge(n));
    }
    Ok(())
}

/// Ginibre matrix, QR, then `Q diag(r_ii / |r_ii|)` so the law is exactly Haar.
pub fn sample_haar<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DenseUnitary> {
    check_dim(n)?;
    let z = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|x| *x *= phase);
    }
    Ok(DenseUnitary { matrix: q })
}

/// A non-increasing integer sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition(Vec<i64>);

impl Partition {
    pub fn new(parts: Vec<i64>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::MalformedPartition(parts));
        }
        Ok(Self(parts))
    }

    pub fn parts(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `Wg(N, (1)) = 1/N`, `Wg(N, (1,1)) = 1/(N^2-1)`, `Wg(N, (2)) = -1/(N^3-N)`.
pub fn weingarten(n: usize, partition: &Partition) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("Weingarten values need N >= 2, got {n}")));
    }
    let n = n as f64;
    match partition.parts() {
        [1] => Ok(1.0 / n),
        [1, 1] => Ok(1.0 / (n * n - 1.0)),
        [2] => Ok(-1.0 / (n * n * n - n)),
        other => Err(Error::UnsupportedPartition(other.to_vec())),
    }
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Weyl dimension `d_mu = prod_{i<j} (mu_i - mu_j + j - i) / (j - i)`.
pub fn irrep_dimension(partition: &Partition, n: usize) -> Result<u128> {
    if partition.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: partition.len(),
        });
    }
    let mu = partition.parts();
    let (mut num, mut den) = (1i128, 1i128);
    for i in 0..n {
        for j in i + 1..n {
            let gap = (j - i) as i128;
            num *= mu[i] as i128 - mu[j] as i128 + gap;
            den *= gap;
            let g = gcd(num, den).max(1);
            num /= g;
            den /= g;
        }
    }
    if den != 1 || num <= 0 {
        return Err(Error::MalformedPartition(mu.to_vec()));
    }
    Ok(num as u128)
}

/// Calls `visit` on every non-increasing length-`n` sequence with entries in
/// `[-s, r]`, entry sum `r - s` and positive-part sum at most `r`.
fn for_each_weight(n: usize, r: i64, s: i64, visit: &mut dyn FnMut(&[i64])) {
    fn rec(
        buf: &mut Vec<i64>,
        n: usize,
        upper: i64,
        lo: i64,
        remaining_sum: i64,
        pos_budget: i64,
        visit: &mut dyn FnMut(&[i64]),
    ) {
        let left = n - buf.len();
        if left == 0 {
            if remaining_sum == 0 {
                visit(buf);
            }
            return;
        }
        let mut v = upper;
        while v >= lo {
            // remaining entries are all <= v and >= lo
            let rest = (left - 1) as i64;
            let max_rest = v * rest;
            let min_rest = lo * rest;
            let need = remaining_sum - v;
            let pos = v.max(0);
            if need <= max_rest && need >= min_rest && pos <= pos_budget {
                buf.push(v);
                rec(buf, n, v, lo, need, pos_budget - pos, visit);
                buf.pop();
            }
            v -= 1;
        }
    }
    let mut buf = Vec::with_capacity(n);
    rec(&mut buf, n, r, -s, r - s, r, visit);
}

/// `D(N, r, s) = sum d_mu^2` over the weights described in [`for_each_weight`].
pub fn design_dimension(n: usize, r: u32, s: u32) -> Result<u128> {
    if n == 0 {
        return Err(Error::InvalidConfig("design dimension needs N >= 1".into()));
    }
    let mut total = 0u128;
    let mut failure = None;
    for_each_weight(n, r as i64, s as i64, &mut |mu| {
        match Partition::new(mu.to_vec()).and_then(|p| irrep_dimension(&p, n)) {
            Ok(d) => total += d * d,
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Lower bound `D(N, ceil(t/2), floor(t/2))` on the size of a `t`-design.
pub fn design_cardinality_bound(n: usize, t: u32) -> Result<u128> {
    if t == 0 {
        return Err(Error::InvalidConfig("design order t must be >= 1".into()));
    }
    design_dimension(n, t.div_ceil(2), t / 2)
}

/// Monte-Carlo estimate against a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub estimate: f64,
    pub closed_form: f64,
    pub samples: usize,
    pub standard_error: f64,
}

impl MomentReport {
    pub fn deviation(&self) -> f64 {
        (self.estimate - self.closed_form).abs()
    }

    /// Deviation measured in standard errors (infinite if the error is zero
    /// and the values differ).
    pub fn sigmas(&self) -> f64 {
        let dev = self.deviation();
        if dev == 0.0 {
            0.0
        } else {
            dev / self.standard_error
        }
    }

    /// `|estimate - closed_form| <= k * standard_error`, with a round-off
    /// allowance for checks whose samples are all identical.
    pub fn within(&self, k: f64) -> bool {
        let slack = 1e-10 * self.closed_form.abs().max(1.0);
        self.deviation() <= k * self.standard_error + slack
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

fn mean_report(values: &[f64], closed_form: f64) -> MomentReport {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    MomentReport {
        estimate: mean,
        closed_form,
        samples: values.len(),
        standard_error: (var / m).sqrt(),
    }
}

/// Sample variance (denominator `m - 1`) and its standard error, taken as
/// the spread of the per-sample squared deviations over `sqrt(m)`.
fn variance_report(values: &[f64], closed_form: f64) -> MomentReport {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = sq.iter().sum::<f64>() / (m - 1.0);
    let sq_mean = sq.iter().sum::<f64>() / m;
    let sq_var = sq.iter().map(|q| (q - sq_mean).powi(2)).sum::<f64>() / (m - 1.0);
    MomentReport {
        estimate: var,
        closed_form,
        samples: values.len(),
        standard_error: (sq_var / m).sqrt(),
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidConfig(format!(
            "moment checks need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    Ok(())
}

fn check_square(n: usize, ms: &[&CMatrix]) -> Result<()> {
    for m in ms {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if m.nrows() != n { m.nrows() } else { m.ncols() },
            });
        }
    }
    Ok(())
}

/// Draws one `u64` from `rng` and evaluates `f` on per-sample streams
/// derived from it, in parallel, returning results in sample order.
fn sample_parallel<R, F>(samples: usize, rng: &mut R, f: F) -> Result<Vec<f64>>
where
    R: Rng + ?Sized,
    F: Fn(&mut crate::rng::Rng) -> Result<f64> + Sync,
{
    let master: u64 = rng.gen();
    (0..samples)
        .into_par_iter()
        .map(|i| f(&mut stream(master, &[i as u64])))
        .collect()
}

fn trace(m: &CMatrix) -> Complex64 {
    m.trace()
}

/// `Tr{A} Tr{B} / N`.
pub fn haar1_closed_form(a: &CMatrix, b: &CMatrix) -> f64 {
    (trace(a) * trace(b)).re / a.nrows() as f64
}

/// Four-term closed form of `Tr{ int U^dagger A U B U^dagger C U D }`.
pub fn haar2_closed_form(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> f64 {
    let n = a.nrows() as f64;
    let (ta, tb, tc, td) = (trace(a), trace(b), trace(c), trace(d));
    let tac = trace(&(a * c));
    let tbd = trace(&(b * d));
    let first = (ta * tc * tbd + tac * tb * td) / (n * n - 1.0);
    let second = (ta * tb * tc * td + tac * tbd) / (n * n * n - n);
    (first - second).re
}

/// Estimates `Tr{U^dagger A U B}` (real part) over Haar `U`.
pub fn haar_moment1_check<R: Rng + ?Sized>(
    n: usize,
    a: &CMatrix,
    b: &CMatrix,
    samples: usize,
    rng: &mut R,
) -> Result<MomentReport> {
    check_dim(n)?;
    check_square(n, &[a, b])?;
    check_samples(samples)?;
    let values = sample_parallel(samples, rng, |r| {
        let u = sample_haar(n, r)?.into_matrix();
        Ok(trace(&(u.adjoint() * a * &u * b)).re)
    })?;
    Ok(mean_report(&values, haar1_closed_form(a, b)))
}

/// Estimates `Tr{U^dagger A U B U^dagger C U D}` (real part) over Haar `U`.
pub fn haar_moment2_check<R: Rng + ?Sized>(
    n: usize,
    ops: [&CMatrix; 4],
    samples: usize,
    rng: &mut R,
) -> Result<MomentReport> {
    check_dim(n)?;
    check_square(n, &ops)?;
    check_samples(samples)?;
    let [a, b, c, d] = ops;
    let values = sample_parallel(samples, rng, |r| {
        let u = sample_haar(n, r)?.into_matrix();
        let ud = u.adjoint();
        let m = &ud * a * &u * b * &ud * c * &u * d;
        Ok(trace(&m).re)
    })?;
    Ok(mean_report(&values, haar2_closed_form(a, b, c, d)))
}

/// Which gradient and closed form [`mc_grad_variance`] checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradStructure {
    /// `dE` against `Tr{H^2} Tr{rho^2} Tr{V^2} / (N^3 - N)`.
    Design2,
    /// `dE'` against `2 a^2 b^2 / N Tr{H^2 rho} + b^4 <(dE)^2>`.
    Lcu,
    /// `dE''` against `1/(2N) Tr{rho H_phi^2}`.
    StagedT1,
    /// `dE''` against the `t = 2` form with the `Tr{H_phi}^2` correction.
    StagedT2,
}

impl GradStructure {
    pub const ALL: [GradStructure; 4] = [Self::Design2, Self::Lcu, Self::StagedT1, Self::StagedT2];

    pub fn name(self) -> &'static str {
        match self {
            Self::Design2 => "design2",
            Self::Lcu => "lcu",
            Self::StagedT1 => "staged_t1",
            Self::StagedT2 => "staged_t2",
        }
    }
}

impl std::str::FromStr for GradStructure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown structure {s:?}")))
    }
}

/// Default generator: `X` on the leading tensor factor, `X (x) I_{N/2}`.
pub fn default_generator(n: usize) -> Result<CMatrix> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!("default generator needs even N, got {n}")));
    }
    let half = n / 2;
    Ok(CMatrix::from_fn(n, n, |i, j| {
        if (i + half) % n == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

struct TraceData {
    n: f64,
    tr_h: f64,
    tr_h2: f64,
    h2_00: f64,
    tr_v: f64,
    tr_v2: f64,
}

impl TraceData {
    fn new(obs: &CMatrix, v: &CMatrix) -> Self {
        let h2 = obs * obs;
        Self {
            n: obs.nrows() as f64,
            tr_h: trace(obs).re,
            tr_h2: trace(&h2).re,
            h2_00: h2[(0, 0)].re,
            tr_v: trace(v).re,
            tr_v2: trace(&(v * v)).re,
        }
    }

    /// Haar average of `-Tr{[rho_-, V]^2}` for pure `rho`.
    fn commutator_sq(&self) -> f64 {
        let n = self.n;
        2.0 * self.tr_v2 / n - 2.0 * (self.tr_v2 + self.tr_v * self.tr_v) / (n * (n + 1.0))
    }

    fn exact_design2(&self) -> f64 {
        let n = self.n;
        self.commutator_sq() * (n * self.tr_h2 - self.tr_h * self.tr_h) / (n * (n * n - 1.0))
    }
}

/// `Tr{H^2} Tr{rho^2} Tr{V^2} / (N^3 - N)` for pure `rho`.
pub fn design2_closed_form(obs: &CMatrix, v: &CMatrix) -> f64 {
    let t = TraceData::new(obs, v);
    t.tr_h2 * t.tr_v2 / (t.n * t.n * t.n - t.n)
}

/// Exact Haar value of `<(dE)^2>` for pure `rho` and two independent
/// Haar blocks: `-<Tr{[rho_-,V]^2}> (N Tr{H^2} - Tr{H}^2) / (N (N^2-1))`.
pub fn design2_exact(obs: &CMatrix, v: &CMatrix) -> f64 {
    TraceData::new(obs, v).exact_design2()
}

/// `2 a^2 b^2 / N Tr{H^2 rho} Tr{rho} + b^4 <(dE)^2>` with the exact
/// `<(dE)^2>` of [`design2_exact`].
pub fn lcu_closed_form(obs: &CMatrix, v: &CMatrix, coeff: LcuCoefficients) -> f64 {
    let t = TraceData::new(obs, v);
    let (a2, b2) = (coeff.alpha * coeff.alpha, coeff.beta * coeff.beta);
    2.0 * a2 * b2 / t.n * t.h2_00 + b2 * b2 * t.exact_design2()
}

/// `1/(2N) <Tr{rho H_phi^2}> Tr{rho}`, with `H_phi` Haar-conjugated so that
/// `<Tr{rho H_phi^2}> = Tr{H^2} / N`.
pub fn staged_t1_closed_form(obs: &CMatrix, v: &CMatrix) -> f64 {
    let t = TraceData::new(obs, v);
    t.tr_h2 / t.n / (2.0 * t.n)
}

/// `t = 1` form minus `Tr{H_phi}^2 <Tr{[rho_-,V]^2}> / (4 (N^2 - 1))`.
pub fn staged_t2_closed_form(obs: &CMatrix, v: &CMatrix) -> f64 {
    let t = TraceData::new(obs, v);
    let correction = t.tr_h * t.tr_h * t.commutator_sq() / (4.0 * (t.n * t.n - 1.0));
    staged_t1_closed_form(obs, v) + correction
}

/// Exact Haar value of `Var[dE'']`: `2 a^2 b^2 Tr{H^2} / N^2 + b^4 <(dE)^2>`.
pub fn staged_exact(obs: &CMatrix, v: &CMatrix, coeff: LcuCoefficients) -> f64 {
    let t = TraceData::new(obs, v);
    let (a2, b2) = (coeff.alpha * coeff.alpha, coeff.beta * coeff.beta);
    2.0 * a2 * b2 * t.tr_h2 / (t.n * t.n) + b2 * b2 * t.exact_design2()
}

/// Closed form reported by [`mc_grad_variance`] for `structure`.
pub fn variance_closed_form(structure: GradStructure, obs: &CMatrix, v: &CMatrix, coeff: LcuCoefficients) -> f64 {
    match structure {
        GradStructure::Design2 => design2_closed_form(obs, v),
        GradStructure::Lcu => lcu_closed_form(obs, v, coeff),
        GradStructure::StagedT1 => staged_t1_closed_form(obs, v),
        GradStructure::StagedT2 => staged_t2_closed_form(obs, v),
    }
}

/// Exact Haar value of the sampled variance for `structure`.
pub fn variance_exact(structure: GradStructure, obs: &CMatrix, v: &CMatrix, coeff: LcuCoefficients) -> f64 {
    match structure {
        GradStructure::Design2 => design2_exact(obs, v),
        GradStructure::Lcu => lcu_closed_form(obs, v, coeff),
        GradStructure::StagedT1 | GradStructure::StagedT2 => staged_exact(obs, v, coeff),
    }
}

fn im_form(x: &DVector<Complex64>, h: &CMatrix, y: &DVector<Complex64>) -> f64 {
    x.dotc(&(h * y)).im
}

/// One gradient sample with independent Haar `U_-`, `U_+` (and outer `U'`
/// for the staged structures), `rho = |0><0|`:
/// `dE = 2 Im <c|H|d>` with `c = U_+ U_- |0>`, `d = U_+ V U_- |0>`, and the
/// combination adds `2 a b Im <P0|H|Pd>`.
pub fn grad_sample<R: Rng + ?Sized>(
    structure: GradStructure,
    obs: &CMatrix,
    v: &CMatrix,
    coeff: LcuCoefficients,
    rng: &mut R,
) -> Result<f64> {
    let n = obs.nrows();
    let b = sample_haar(n, rng)?.first_column();
    let u_plus = sample_haar(n, rng)?.into_matrix();
    let mut c = &u_plus * &b;
    let mut d = &u_plus * (v * &b);
    let mut p0 = DVector::from_fn(n, |i, _| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
    if matches!(structure, GradStructure::StagedT1 | GradStructure::StagedT2) {
        let outer = sample_haar(n, rng)?.into_matrix();
        c = &outer * c;
        d = &outer * d;
        p0 = outer.column(0).into_owned();
    }
    let de = 2.0 * im_form(&c, obs, &d);
    Ok(match structure {
        GradStructure::Design2 => de,
        _ => {
            let (a, bb) = (coeff.alpha, coeff.beta);
            2.0 * a * bb * im_form(&p0, obs, &d) + bb * bb * de
        }
    })
}

/// Sample variance of the structure's gradient against its closed form.
pub fn mc_grad_variance<R: Rng + ?Sized>(
    structure: GradStructure,
    obs: &CMatrix,
    samples: usize,
    rng: &mut R,
) -> Result<MomentReport> {
    let v = default_generator(obs.nrows())?;
    mc_grad_variance_with(structure, obs, &v, LcuCoefficients::default(), samples, rng)
}

/// [`mc_grad_variance`] with an explicit generator and coefficients.
pub fn mc_grad_variance_with<R: Rng + ?Sized>(
    structure: GradStructure,
    obs: &CMatrix,
    v: &CMatrix,
    coeff: LcuCoefficients,
    samples: usize,
    rng: &mut R,
) -> Result<MomentReport> {
    let values = mc_grad_samples(structure, obs, v, coeff, samples, rng)?;
    Ok(variance_report(&values, variance_closed_form(structure, obs, v, coeff)))
}

/// Raw gradient samples behind [`mc_grad_variance_with`].
pub fn mc_grad_samples<R: Rng + ?Sized>(
    structure: GradStructure,
    obs: &CMatrix,
    v: &CMatrix,
    coeff: LcuCoefficients,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = obs.nrows();
    check_dim(n)?;
    check_square(n, &[obs, v])?;
    check_samples(samples)?;
    sample_parallel(samples, rng, |r| grad_sample(structure, obs, v, coeff, r))
}

/// Sample mean of gradient values with its standard error, against 0.
pub fn mean_against_zero(values: &[f64]) -> MomentReport {
    mean_report(values, 0.0)
}

/// Sample variance of `values` against `closed_form`.
pub fn variance_against(values: &[f64], closed_form: f64) -> MomentReport {
    variance_report(values, closed_form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::pauli_matrix;
    use crate::rng::rng_from_seed;
    use crate::statevector::PauliString;

    fn zz(n_qubits: usize) -> CMatrix {
        pauli_matrix(&PauliString::z1z2(n_qubits).unwrap())
    }

    #[test]
    fn haar_samples_are_unitary() {
        let mut rng = rng_from_seed(1);
        for _ in 0..100 {
            let u = sample_haar(8, &mut rng).unwrap();
            assert!(crate::dense::unitarity_defect(u.matrix()) < 1e-10);
        }
        assert!(sample_haar(1, &mut rng).is_err());
        assert_eq!(sample_haar(65, &mut rng), Err(Error::DimensionTooLarge(65)));
    }

    #[test]
    fn weingarten_values() {
        let p = |v: Vec<i64>| Partition::new(v).unwrap();
        assert_eq!(weingarten(4, &p(vec![1])).unwrap(), 0.25);
        assert!((weingarten(2, &p(vec![1, 1])).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((weingarten(2, &p(vec![2])).unwrap() + 1.0 / 6.0).abs() < 1e-15);
        assert!(matches!(weingarten(4, &p(vec![3])), Err(Error::UnsupportedPartition(_))));
        assert!(Partition::new(vec![0, 1]).is_err());
    }

    #[test]
    fn irrep_dimensions() {
        let p = |v: Vec<i64>| Partition::new(v).unwrap();
        assert_eq!(irrep_dimension(&p(vec![1, 0]), 2).unwrap(), 2);
        assert_eq!(irrep_dimension(&p(vec![1, -1]), 2).unwrap(), 3);
        assert_eq!(irrep_dimension(&p(vec![0; 6]), 6).unwrap(), 1);
        // symmetric square of U(3)
        assert_eq!(irrep_dimension(&p(vec![2, 0, 0]), 3).unwrap(), 6);
        assert!(irrep_dimension(&p(vec![1, 0]), 3).is_err());
    }

    #[test]
    fn design_dimensions() {
        assert_eq!(design_dimension(2, 1, 0).unwrap(), 4);
        assert_eq!(design_dimension(2, 1, 1).unwrap(), 10);
        assert_eq!(design_dimension(4, 1, 0).unwrap(), 16);
        assert_eq!(design_dimension(5, 0, 0).unwrap(), 1);
        assert_eq!(design_cardinality_bound(2, 2).unwrap(), 10);
        assert_eq!(design_cardinality_bound(2, 1).unwrap(), 4);
        assert!(design_cardinality_bound(2, 0).is_err());
    }

    #[test]
    fn design_bound_monotone_in_t() {
        for n in 2..=4 {
            let vals: Vec<u128> = (1..=4).map(|t| design_cardinality_bound(n, t).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[0] <= w[1]), "N={n}: {vals:?}");
        }
    }

    #[test]
    fn moment_closed_forms() {
        let n = 4;
        let id = CMatrix::identity(n, n);
        assert!((haar1_closed_form(&id, &id) - 4.0).abs() < 1e-12);
        assert!(haar1_closed_form(&zz(2), &id).abs() < 1e-12);
        assert!((haar2_closed_form(&id, &id, &id, &id) - 4.0).abs() < 1e-12);
        let zero = CMatrix::zeros(n, n);
        assert_eq!(haar2_closed_form(&id, &id, &id, &zero), 0.0);
    }

    #[test]
    fn identity_moments_are_exact() {
        let n = 4;
        let id = CMatrix::identity(n, n);
        let r = haar_moment1_check(n, &id, &id, 100, &mut rng_from_seed(2)).unwrap();
        assert!((r.estimate - 4.0).abs() < 1e-10);
        assert!(haar_moment1_check(n, &id, &id, 10, &mut rng_from_seed(2)).is_err());
        let wrong = CMatrix::identity(2, 2);
        assert!(haar_moment1_check(n, &id, &wrong, 100, &mut rng_from_seed(2)).is_err());
    }

    #[test]
    fn closed_forms_at_four() {
        let h = zz(2);
        let v = default_generator(4).unwrap();
        assert!((design2_closed_form(&h, &v) - 16.0 / 60.0).abs() < 1e-15);
        assert!((design2_exact(&h, &v) - 32.0 / 75.0).abs() < 1e-15);
        assert!((staged_t1_closed_form(&h, &v) - 0.125).abs() < 1e-15);
        // traceless observable: no t = 2 correction
        assert_eq!(staged_t2_closed_form(&h, &v), staged_t1_closed_form(&h, &v));
    }

    #[test]
    fn lcu_with_zero_beta_has_zero_variance() {
        let h = zz(2);
        let v = default_generator(4).unwrap();
        let coeff = LcuCoefficients::new(1.0, 0.0).unwrap();
        let r = mc_grad_variance_with(GradStructure::Lcu, &h, &v, coeff, 100, &mut rng_from_seed(3)).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.closed_form, 0.0);
    }

    #[test]
    fn variance_sampling_is_deterministic() {
        let h = zz(2);
        let a = mc_grad_variance(GradStructure::Design2, &h, 200, &mut rng_from_seed(9)).unwrap();
        let b = mc_grad_variance(GradStructure::Design2, &h, 200, &mut rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn structure_names_roundtrip() {
        for s in GradStructure::ALL {
            assert_eq!(s.name().parse::<GradStructure>().unwrap(), s);
        }
        assert!("design3".parse::<GradStructure>().is_err());
    }
}
