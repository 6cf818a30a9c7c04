//! Hamiltonian moments, cumulants, the fourth-order Lanczos ground-energy estimate, and the
//! finite-difference estimator for ground-state observables.
//!
//! For an observable `A` the estimate differentiates the energy estimate of `H + lambda A` at
//! `lambda = 0` with a central difference. `lambda` is a symbolic parameter of the expanded
//! powers, so both shifted energies come from one set of expectation values.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::error::{Error, EstimateError, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::poly::{Assignment, ParamPoly};
use crate::states::Expectations;

/// Name of the derivative parameter in `H + lambda A`.
pub const PARAM_LAMBDA: &str = "lambda";
/// Default central-difference step.
pub const DEFAULT_EPSILON: f64 = 1e-4;

/// `<H^k>` for `k = 1..4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentSet {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl MomentSet {
    pub fn new(m: [f64; 4]) -> Self {
        MomentSet { m1: m[0], m2: m[1], m3: m[2], m4: m[3] }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.m1, self.m2, self.m3, self.m4]
    }
}

/// Cumulants `c_1..c_4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CumulantSet {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl CumulantSet {
    pub fn new(c: [f64; 4]) -> Self {
        CumulantSet { c1: c[0], c2: c[1], c3: c[2], c4: c[3] }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.c1, self.c2, self.c3, self.c4]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateMode {
    Lanczos,
    /// Zero variance: the trial is an eigenstate and the estimate is `c1`.
    EigenstateFallback,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QcmResult {
    pub energy: f64,
    pub mode: EstimateMode,
    /// `c3^2 - c2 c4`
    pub denominator: f64,
    /// `3 c3^2 - 2 c2 c4`
    pub radicand: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Cumulants from raw moments `[<H>, <H^2>, ...]` by the recursion
/// `c_n = m_n - sum_{p=0}^{n-2} C(n-1, p) c_{p+1} m_{n-1-p}` with `m_0 = 1`.
pub fn cumulants_from_moments(moments: &[f64]) -> Vec<f64> {
    let m = |k: usize| if k == 0 { 1.0 } else { moments[k - 1] };
    let mut c: Vec<f64> = Vec::with_capacity(moments.len());
    for n in 1..=moments.len() {
        let mut v = m(n);
        for (p, cp) in c.iter().enumerate().take(n.saturating_sub(1)) {
            v -= binomial(n - 1, p) * cp * m(n - 1 - p);
        }
        c.push(v);
    }
    c
}

pub fn cumulants(m: &MomentSet) -> CumulantSet {
    let c = cumulants_from_moments(&m.as_array());
    CumulantSet::new([c[0], c[1], c[2], c[3]])
}

/// Default variance threshold below which the trial is treated as an eigenstate.
pub fn default_eigen_tol(c: &CumulantSet) -> f64 {
    1e-10 * c.c1.powi(2).max(1.0)
}

/// `E = c1 - c2^2 / (c3^2 - c2 c4) * (sqrt(3 c3^2 - 2 c2 c4) - c3)`.
///
/// `eigen_tol` defaults to [`default_eigen_tol`].
pub fn lanczos_energy(c: &CumulantSet, eigen_tol: Option<f64>) -> Result<QcmResult, EstimateError> {
    let CumulantSet { c1, c2, c3, c4 } = *c;
    if !c.as_array().iter().all(|v| v.is_finite()) {
        return Err(EstimateError::NonFinite);
    }
    let denominator = c3 * c3 - c2 * c4;
    let radicand = 3.0 * c3 * c3 - 2.0 * c2 * c4;
    let tol = eigen_tol.unwrap_or_else(|| default_eigen_tol(c));
    if c2 < tol {
        return Ok(QcmResult { energy: c1, mode: EstimateMode::EigenstateFallback, denominator, radicand });
    }
    if radicand < 0.0 {
        return Err(EstimateError::NegativeRadicand { radicand });
    }
    let scale = c3 * c3 + (c2 * c4).abs();
    if denominator.abs() <= 1e-14 * scale {
        return Err(EstimateError::SingularDenominator { denominator });
    }
    let energy = c1 - c2 * c2 / denominator * (radicand.sqrt() - c3);
    Ok(QcmResult { energy, mode: EstimateMode::Lanczos, denominator, radicand })
}

/// Neumaier-compensated sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `sum_s Re(c_s) <s>` over bound terms, compensated.
pub fn weighted_expectation<S>(terms: &[(PauliString, Complex64)], source: &S) -> Result<f64>
where
    S: Expectations + ?Sized,
{
    let mut acc = CompensatedSum::default();
    for (s, c) in terms {
        let v = if s.is_identity() { 1.0 } else { source.expectation(s)? };
        acc.add(c.re * v);
    }
    Ok(acc.value())
}

/// Moments `<H^k>` from the bound powers `[H, H^2, H^3, H^4]`.
pub fn compute_moments<S>(powers: &[PauliSum], source: &S) -> Result<MomentSet>
where
    S: Expectations + ?Sized,
{
    if powers.len() != 4 {
        return Err(Error::PowerOutOfRange(powers.len()));
    }
    let mut m = [0.0; 4];
    for (k, p) in powers.iter().enumerate() {
        m[k] = weighted_expectation(&p.constant_terms()?, source)?;
    }
    Ok(MomentSet::new(m))
}

/// Energy estimate from moments.
pub fn energy_from_moments(m: &MomentSet) -> Result<QcmResult, EstimateError> {
    lanczos_energy(&cumulants(m), None)
}

/// Symbolic powers of `H + lambda A` (or of `H` alone), expanded once and evaluated at any
/// parameter values against any expectation source.
#[derive(Clone, Debug)]
pub struct MomentPlan {
    observable: Option<PauliSum>,
    // identity coefficient of the observable; its derivative contribution is exact, so it is
    // kept out of the expansion and added back after differencing
    observable_offset: ParamPoly,
    powers: Vec<PauliSum>,
}

impl MomentPlan {
    pub fn new(hamiltonian: &PauliSum, observable: Option<&PauliSum>) -> Result<Self> {
        if hamiltonian.params().contains(PARAM_LAMBDA) {
            return Err(Error::Config(format!("Hamiltonian may not use the reserved parameter `{PARAM_LAMBDA}`")));
        }
        let mut observable_offset = ParamPoly::zero();
        let generator = match observable {
            Some(a) => {
                if a.n_qubits() != hamiltonian.n_qubits() {
                    return Err(Error::QubitMismatch { left: hamiltonian.n_qubits(), right: a.n_qubits() });
                }
                let mut traceless = PauliSum::zero(a.n_qubits());
                for (s, c) in a.terms() {
                    if s.is_identity() {
                        observable_offset = c.clone();
                    } else {
                        traceless.add_term(*s, c.clone())?;
                    }
                }
                hamiltonian.add(&traceless.scale(&ParamPoly::param(PARAM_LAMBDA, 1.0)))?
            }
            None => hamiltonian.clone(),
        };
        Ok(MomentPlan { observable: observable.cloned(), observable_offset, powers: generator.powers(4)? })
    }

    pub fn powers(&self) -> &[PauliSum] {
        &self.powers
    }

    pub fn observable(&self) -> Option<&PauliSum> {
        self.observable.as_ref()
    }

    pub fn n_qubits(&self) -> usize {
        self.powers[0].n_qubits()
    }

    /// Every string whose expectation the plan can need (identity included).
    pub fn strings(&self) -> BTreeSet<PauliString> {
        let mut out: BTreeSet<PauliString> = self.powers.iter().flat_map(|p| p.strings().copied()).collect();
        if let Some(a) = &self.observable {
            out.extend(a.strings().copied());
        }
        out.insert(PauliString::identity(self.n_qubits()));
        out
    }

    fn with_lambda(&self, values: &Assignment, lambda: f64) -> Assignment {
        let mut v = values.clone();
        if self.observable.is_some() {
            v.insert(PARAM_LAMBDA.to_string(), lambda);
        }
        v
    }

    /// Moments at `values` (and `lambda`, when the plan has an observable).
    pub fn moments_at<S>(&self, source: &S, values: &Assignment, lambda: f64) -> Result<MomentSet>
    where
        S: Expectations + ?Sized,
    {
        let v = self.with_lambda(values, lambda);
        let mut m = [0.0; 4];
        for (k, p) in self.powers.iter().enumerate() {
            m[k] = weighted_expectation(&p.bound_terms(&v)?, source)?;
        }
        Ok(MomentSet::new(m))
    }

    /// `(<H>, E^L(4))` at `lambda = 0`.
    pub fn energy_at<S>(&self, source: &S, values: &Assignment) -> Result<(f64, Result<QcmResult, EstimateError>)>
    where
        S: Expectations + ?Sized,
    {
        let m = self.moments_at(source, values, 0.0)?;
        Ok((m.m1, energy_from_moments(&m)))
    }

    /// Direct expectation of the observable at `values`.
    pub fn observable_direct<S>(&self, source: &S, values: &Assignment) -> Result<Option<f64>>
    where
        S: Expectations + ?Sized,
    {
        match &self.observable {
            Some(a) => Ok(Some(weighted_expectation(&a.bound_terms(values)?, source)?)),
            None => Ok(None),
        }
    }

    /// `[E^L(4)(+eps) - E^L(4)(-eps)] / (2 eps)`.
    pub fn observable_at<S>(
        &self,
        source: &S,
        values: &Assignment,
        eps: f64,
    ) -> Result<Result<f64, EstimateError>>
    where
        S: Expectations + ?Sized,
    {
        if self.observable.is_none() {
            return Err(Error::Config("plan has no observable".into()));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {eps}")));
        }
        let shifted = |sign: char, lambda: f64| -> Result<Result<f64, EstimateError>> {
            let m = self.moments_at(source, values, lambda)?;
            Ok(energy_from_moments(&m)
                .map(|r| r.energy)
                .map_err(|e| EstimateError::AtShift { sign, source: Box::new(e) }))
        };
        let plus = shifted('+', eps)?;
        let minus = shifted('-', -eps)?;
        let offset = self.observable_offset.eval(values)?.re;
        Ok(match (plus, minus) {
            (Ok(p), Ok(m)) => Ok((p - m) / (2.0 * eps) + offset),
            (Err(e), _) | (_, Err(e)) => Err(e),
        })
    }

    /// Estimates at `eps` and `eps/2` with the Richardson combination, as a consistency report.
    pub fn observable_richardson<S>(&self, source: &S, values: &Assignment, eps: f64) -> Result<Richardson>
    where
        S: Expectations + ?Sized,
    {
        let coarse = self.observable_at(source, values, eps)?.map_err(Error::Estimate)?;
        let fine = self.observable_at(source, values, eps / 2.0)?.map_err(Error::Estimate)?;
        Ok(Richardson { coarse, fine, extrapolated: (4.0 * fine - coarse) / 3.0 })
    }
}

/// Two-scale central-difference report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Richardson {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

impl Richardson {
    pub fn discrepancy(&self) -> f64 {
        (self.coarse - self.fine).abs()
    }
}

/// Ground-state `<A>` estimate for fully bound `H` and `A`.
pub fn observable_estimate<S>(h: &PauliSum, a: &PauliSum, source: &S, eps: f64) -> Result<f64>
where
    S: Expectations + ?Sized,
{
    let plan = MomentPlan::new(h, Some(a))?;
    Ok(plan.observable_at(source, &Assignment::new(), eps)??)
}

/// One grid point of [`qcm_sweep`].
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub params: Assignment,
    pub e_direct: f64,
    pub e_l4: Result<QcmResult, EstimateError>,
    pub a_direct: Option<f64>,
    pub a_l4: Option<Result<f64, EstimateError>>,
}

/// Cartesian product of the grid (first key varies slowest); an empty grid has no points.
pub fn grid_points(grid: &BTreeMap<String, Vec<f64>>) -> Vec<Assignment> {
    if grid.is_empty() || grid.values().any(Vec::is_empty) {
        return Vec::new();
    }
    let mut points = vec![Assignment::new()];
    for (name, values) in grid {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(name.clone(), *v);
                    q
                })
            })
            .collect();
    }
    points
}

/// Evaluates the plan at every grid point from one expectation source.
pub fn qcm_sweep<S>(plan: &MomentPlan, source: &S, grid: &BTreeMap<String, Vec<f64>>, eps: f64) -> Result<Vec<SweepRow>>
where
    S: Expectations + ?Sized,
{
    grid_points(grid)
        .into_iter()
        .map(|params| {
            let (e_direct, e_l4) = plan.energy_at(source, &params)?;
            let a_direct = plan.observable_direct(source, &params)?;
            let a_l4 = match plan.observable {
                Some(_) => Some(plan.observable_at(source, &params, eps)?),
                None => None,
            };
            Ok(SweepRow { params, e_direct, e_l4, a_direct, a_l4 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{ExpectationTable, StateVector};

    fn sum(text: &str) -> PauliSum {
        PauliSum::from_text(text).unwrap()
    }

    fn plus() -> StateVector {
        StateVector::normalized(1, vec![Complex64::new(1.0, 0.0); 2]).unwrap()
    }

    #[test]
    fn moments_of_z() {
        let p = sum("(1) Z").powers(4).unwrap();
        assert_eq!(compute_moments(&p, &plus()).unwrap().as_array(), [0.0, 1.0, 0.0, 1.0]);
        let one = StateVector::from_bits("1").unwrap();
        assert_eq!(compute_moments(&p, &one).unwrap().as_array(), [-1.0, 1.0, -1.0, 1.0]);
    }

    #[test]
    fn cumulant_examples() {
        let e = 0.7f64;
        let c = cumulants(&MomentSet::new([e, e * e, e.powi(3), e.powi(4)]));
        assert_eq!(c.c1, e);
        for v in [c.c2, c.c3, c.c4] {
            assert!(v.abs() < 1e-15);
        }
        assert_eq!(cumulants(&MomentSet::new([0.0, 1.0, 0.0, 1.0])).as_array(), [0.0, 1.0, 0.0, -2.0]);
        assert_eq!(cumulants(&MomentSet::new([1.0, 2.0, 4.0, 8.0])).as_array(), [1.0, 1.0, 0.0, -2.0]);
    }

    #[test]
    fn lanczos_examples() {
        let r = lanczos_energy(&CumulantSet::new([0.0, 1.0, 0.0, -2.0]), None).unwrap();
        assert_eq!(r.energy, -1.0);
        assert_eq!(r.mode, EstimateMode::Lanczos);
        assert_eq!((r.denominator, r.radicand), (2.0, 4.0));

        let r = lanczos_energy(&CumulantSet::new([-0.3, 0.0, 0.0, 0.0]), None).unwrap();
        assert_eq!((r.energy, r.mode), (-0.3, EstimateMode::EigenstateFallback));

        let r = lanczos_energy(&CumulantSet::new([1.0, 1.0, 0.0, -2.0]), None).unwrap();
        assert_eq!(r.energy, 0.0);
    }

    #[test]
    fn lanczos_errors() {
        // 3c3^2 - 2c2c4 < 0
        assert!(matches!(
            lanczos_energy(&CumulantSet::new([0.0, 1.0, 0.0, 1.0]), None),
            Err(EstimateError::NegativeRadicand { .. })
        ));
        // c3^2 = c2 c4
        assert!(matches!(
            lanczos_energy(&CumulantSet::new([0.0, 1.0, 1.0, 1.0]), None),
            Err(EstimateError::SingularDenominator { .. })
        ));
        assert_eq!(
            lanczos_energy(&CumulantSet::new([f64::NAN, 1.0, 0.0, -2.0]), None),
            Err(EstimateError::NonFinite)
        );
    }

    #[test]
    fn two_level_observables() {
        let z = sum("(1) Z");
        let x = sum("(1) X");
        let est = observable_estimate(&z, &x, &plus(), 1e-4).unwrap();
        assert!(est.abs() < 1e-9, "{est}");
        let est = observable_estimate(&z, &z, &plus(), 1e-4).unwrap();
        assert!((est + 1.0).abs() < 1e-9, "{est}");
        let id = PauliSum::identity(1);
        let est = observable_estimate(&z, &id, &plus(), 1e-3).unwrap();
        assert!((est - 1.0).abs() < 1e-12, "{est}");
    }

    #[test]
    fn bad_epsilon() {
        let z = sum("(1) Z");
        assert!(matches!(observable_estimate(&z, &z, &plus(), 0.0), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_grid_handling() {
        let plan = MomentPlan::new(&sum("(1)*x^1 Z\n(1) X"), None).unwrap();
        let table = ExpectationTable::build(&plus(), &plan.strings()).unwrap();
        assert!(qcm_sweep(&plan, &table, &BTreeMap::new(), 1e-4).unwrap().is_empty());
        let grid: BTreeMap<String, Vec<f64>> = [("x".to_string(), vec![0.0, 1.0])].into();
        let rows = qcm_sweep(&plan, &table, &grid, 1e-4).unwrap();
        assert_eq!(rows.len(), 2);
        // H = X at x = 0 and |+> is its eigenstate
        assert_eq!(rows[0].e_l4.as_ref().unwrap().mode, EstimateMode::EigenstateFallback);
        assert!((rows[0].e_direct - 1.0).abs() < 1e-15);
        // H = Z + X: exact ground energy -sqrt 2, and a two-level system is solved exactly
        assert!((rows[1].e_l4.as_ref().unwrap().energy + 2f64.sqrt()).abs() < 1e-12);
        assert!(rows[1].a_l4.is_none());
    }

    #[test]
    fn grid_is_cartesian() {
        let grid: BTreeMap<String, Vec<f64>> =
            [("a".to_string(), vec![1.0, 2.0]), ("b".to_string(), vec![3.0, 4.0, 5.0])].into();
        let pts = grid_points(&grid);
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1], crate::poly::assign([("a", 1.0), ("b", 4.0)]));
    }

    #[test]
    fn reserved_parameter_rejected() {
        assert!(MomentPlan::new(&sum("(1)*lambda^1 Z"), None).is_err());
    }
}
