//! Time-dependent Lie systems: generator algebras, structure-constant
//! recovery, minimal-algebra closure, and fixed-step integration with
//! invariant monitoring.

use crate::error::{Error, Result};
use crate::expr::{Expression, ParseCtx, Point, SamplingBox};
use crate::multivec::{commutator, ChartRef, MultiVectorField};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

/// Number of joint sample points used by rank and least-squares fits.
const FIT_POINTS: usize = 25;
/// Relative singular-value threshold for rank decisions.
const RANK_TOL: f64 = 1e-9;

/// Fitted constants `[X_i, X_j] = sum_k c[i][j][k] X_k` with the worst
/// normalized fit residual.
#[derive(Clone, Debug, Serialize)]
pub struct StructureConstants {
    pub c: Vec<Vec<Vec<f64>>>,
    pub residual: f64,
}

impl StructureConstants {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[i][j][k]
    }
}

/// Evaluate every component of a vector field at a point as a dense vector.
fn eval_field(x: &MultiVectorField, p: &Point, n: usize) -> Result<Vec<f64>> {
    let mut v = vec![0.0; n];
    for (idx, c) in x.components() {
        v[idx[0]] = c.eval(p)?;
    }
    Ok(v)
}

fn sample_points(bx: &SamplingBox, m: usize, seed: u64) -> Result<Vec<Point>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m).map(|_| bx.sample(&mut rng)).collect()
}

/// Stack generator values at the given points into an (m*n) x r matrix
/// whose column k is generator k.
fn generator_matrix(
    generators: &[MultiVectorField],
    points: &[Point],
    n: usize,
) -> Result<DMatrix<f64>> {
    let r = generators.len();
    let rows = points.len() * n;
    let mut a = DMatrix::zeros(rows, r);
    for (pi, p) in points.iter().enumerate() {
        for (k, g) in generators.iter().enumerate() {
            let v = eval_field(g, p, n)?;
            for (ci, val) in v.iter().enumerate() {
                a[(pi * n + ci, k)] = *val;
            }
        }
    }
    Ok(a)
}

fn numeric_rank(a: &DMatrix<f64>) -> usize {
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|s| **s > RANK_TOL * smax)
        .count()
}

/// Least-squares fit of `[X_i, X_j] = sum_k c_{ij}^k X_k` over joint sample
/// points; residuals are normalized by the commutator's magnitude.
pub fn structure_constants(
    generators: &[MultiVectorField],
    bx: &SamplingBox,
    seed: u64,
) -> Result<StructureConstants> {
    let r = generators.len();
    if r == 0 {
        return Err(Error::RankDeficient("no generators supplied".into()));
    }
    let chart = &generators[0].chart;
    let n = chart.dim();
    let points = sample_points(bx, FIT_POINTS.max(3 * r), seed)?;
    let a = generator_matrix(generators, &points, n)?;
    if numeric_rank(&a) < r {
        return Err(Error::RankDeficient(format!(
            "generators span rank {} < {} on sampled points",
            numeric_rank(&a),
            r
        )));
    }
    let svd = a.clone().svd(true, true);
    let mut c = vec![vec![vec![0.0; r]; r]; r];
    let mut worst = 0.0f64;
    for i in 0..r {
        for j in (i + 1)..r {
            let com = commutator(&generators[i], &generators[j])?;
            let mut b = DVector::zeros(points.len() * n);
            for (pi, p) in points.iter().enumerate() {
                let v = eval_field(&com, p, n)?;
                for (ci, val) in v.iter().enumerate() {
                    b[pi * n + ci] = *val;
                }
            }
            let sol = svd.solve(&b, RANK_TOL).map_err(|e| {
                Error::RankDeficient(format!("least-squares solve failed: {e}"))
            })?;
            let fit = &a * &sol;
            let res = (&b - fit).norm();
            let scale = 1.0 + b.norm();
            worst = worst.max(res / scale);
            for k in 0..r {
                c[i][j][k] = sol[k];
                c[j][i][k] = -sol[k];
            }
        }
    }
    Ok(StructureConstants { c, residual: worst })
}

/// Result of a closure attempt: the basis found plus the verdict.
#[derive(Clone, Debug)]
pub struct Closure {
    pub basis: Vec<MultiVectorField>,
    pub closed: bool,
}

/// Adjoin commutators outside the numeric span until closed or capped.
pub fn lie_closure(
    generators: &[MultiVectorField],
    max_dim: usize,
    bx: &SamplingBox,
    seed: u64,
) -> Result<Closure> {
    if generators.is_empty() {
        return Err(Error::RankDeficient("no generators supplied".into()));
    }
    if max_dim < generators.len() {
        return Err(Error::Degree(format!(
            "max_dim {max_dim} below generator count {}",
            generators.len()
        )));
    }
    let chart = &generators[0].chart;
    let n = chart.dim();
    let points = sample_points(bx, FIT_POINTS, seed)?;

    // drop dependent inputs first
    let mut basis: Vec<MultiVectorField> = Vec::new();
    for g in generators {
        let mut trial = basis.clone();
        trial.push(g.clone());
        let a = generator_matrix(&trial, &points, n)?;
        if numeric_rank(&a) == trial.len() {
            basis = trial;
        }
    }
    loop {
        let mut grew = false;
        let m = basis.len();
        'pairs: for i in 0..m {
            for j in (i + 1)..m {
                let com = commutator(&basis[i], &basis[j])?;
                let mut trial = basis.clone();
                trial.push(com);
                let a = generator_matrix(&trial, &points, n)?;
                if numeric_rank(&a) == trial.len() {
                    if trial.len() > max_dim {
                        return Ok(Closure {
                            basis,
                            closed: false,
                        });
                    }
                    basis = trial;
                    grew = true;
                    break 'pairs;
                }
            }
        }
        if !grew {
            return Ok(Closure {
                basis,
                closed: true,
            });
        }
    }
}

/// A time-dependent field `X(t,x) = sum_i b_i(t) X_i(x)` with optional
/// Hamiltonian functions aligned with the generators, and pinned parameter
/// values used during evaluation.
#[derive(Clone, Debug)]
pub struct LieSystemSpec {
    pub chart: ChartRef,
    pub generators: Vec<MultiVectorField>,
    /// Coefficients b_i as expressions in the reserved variable `t`.
    pub coefficients: Vec<Expression>,
    pub hamiltonians: Option<Vec<Expression>>,
    pub params: BTreeMap<String, f64>,
}

impl LieSystemSpec {
    pub fn new(
        chart: &ChartRef,
        generators: Vec<MultiVectorField>,
        coefficients: Vec<Expression>,
    ) -> Result<LieSystemSpec> {
        if generators.len() != coefficients.len() {
            return Err(Error::Degree(format!(
                "{} generators but {} coefficients",
                generators.len(),
                coefficients.len()
            )));
        }
        Ok(LieSystemSpec {
            chart: chart.clone(),
            generators,
            coefficients,
            hamiltonians: None,
            params: BTreeMap::new(),
        })
    }

    pub fn with_params(mut self, params: BTreeMap<String, f64>) -> LieSystemSpec {
        self.params = params;
        self
    }

    /// Parse a time-coefficient expression (only `t` allowed free).
    pub fn parse_coefficient(text: &str) -> Result<Expression> {
        let ctx = ParseCtx::new(vec!["t".to_string()], Vec::new());
        Expression::parse(text, &ctx)
    }

    /// Right-hand side dx/dt at (t, x); `state` is coordinate-ordered.
    fn rhs(&self, t: f64, state: &[f64]) -> Result<Vec<f64>> {
        let n = self.chart.dim();
        let mut bindings: BTreeMap<String, f64> = self
            .chart
            .coords
            .iter()
            .cloned()
            .zip(state.iter().cloned())
            .collect();
        bindings.insert("t".to_string(), t);
        for (k, v) in &self.params {
            bindings.insert(k.clone(), *v);
        }
        let p = Point::new(bindings);
        let mut out = vec![0.0; n];
        for (bi, x) in self.coefficients.iter().zip(self.generators.iter()) {
            let b = bi.eval(&p)?;
            let v = eval_field(x, &p, n)?;
            for (o, vi) in out.iter_mut().zip(v.iter()) {
                *o += b * vi;
            }
        }
        Ok(out)
    }
}

/// Integration output: inclusive endpoint samples plus metadata.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub coords: Vec<String>,
    /// (t, state) samples with strictly increasing t.
    pub samples: Vec<(f64, Vec<f64>)>,
    pub dt: f64,
    pub method: String,
    /// Set when a domain fault truncated the run; holds the fault time.
    pub fault_at: Option<f64>,
}

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for c in &self.coords {
            s.push(',');
            s.push_str(c);
        }
        s.push('\n');
        for (t, x) in &self.samples {
            s.push_str(&format!("{t:.12e}"));
            for v in x {
                s.push_str(&format!(",{v:.12e}"));
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory serializes")
    }

    pub fn last(&self) -> &(f64, Vec<f64>) {
        self.samples.last().expect("non-empty trajectory")
    }
}

/// Classical fixed-step 4th-order Runge-Kutta on the non-autonomous field.
/// A domain fault mid-run truncates the trajectory and sets `fault_at`.
pub fn integrate(
    sys: &LieSystemSpec,
    x0: &[f64],
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t1 > t0) {
        return Err(Error::Domain(format!(
            "integration needs dt > 0 and t1 > t0, got dt={dt}, [{t0}, {t1}]"
        )));
    }
    if x0.len() != sys.chart.dim() {
        return Err(Error::Degree(format!(
            "x0 has {} entries for a {}-dim chart",
            x0.len(),
            sys.chart.dim()
        )));
    }
    let steps = ((t1 - t0) / dt).round() as usize;
    let steps = steps.max(1);
    let h = (t1 - t0) / steps as f64;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    samples.push((t0, x.clone()));
    let mut fault_at = None;
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let step = || -> Result<Vec<f64>> {
            let k1 = sys.rhs(t, &x)?;
            let x2: Vec<f64> = x.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
            let k2 = sys.rhs(t + 0.5 * h, &x2)?;
            let x3: Vec<f64> = x.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
            let k3 = sys.rhs(t + 0.5 * h, &x3)?;
            let x4: Vec<f64> = x.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
            let k4 = sys.rhs(t + h, &x4)?;
            Ok(x
                .iter()
                .enumerate()
                .map(|(i, a)| a + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect())
        };
        match step() {
            Ok(next) if next.iter().all(|v| v.is_finite()) => {
                x = next;
                samples.push((t + h, x.clone()));
            }
            _ => {
                fault_at = Some(t);
                break;
            }
        }
    }
    Ok(Trajectory {
        coords: sys.chart.coords.clone(),
        samples,
        dt: h,
        method: "rk4".to_string(),
        fault_at,
    })
}

/// Max drift of `h` along a trajectory relative to its initial value.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantDrift {
    pub ok: bool,
    pub max_drift: f64,
    pub tol: f64,
}

/// Check `|h(x(t)) - h(x(t0))| <= tol * (1 + |h(x(t0))|)` along a
/// trajectory; parameter values come from `params`.
pub fn check_invariant_along(
    traj: &Trajectory,
    h: &Expression,
    params: &BTreeMap<String, f64>,
    tol: f64,
) -> Result<InvariantDrift> {
    let point = |state: &[f64]| -> Point {
        let mut b: BTreeMap<String, f64> = traj
            .coords
            .iter()
            .cloned()
            .zip(state.iter().cloned())
            .collect();
        for (k, v) in params {
            b.insert(k.clone(), *v);
        }
        Point::new(b)
    };
    let (_, x0) = &traj.samples[0];
    let h0 = h.eval(&point(x0))?;
    let mut max_drift = 0.0f64;
    for (_, x) in &traj.samples {
        let hv = h.eval(&point(x))?;
        max_drift = max_drift.max((hv - h0).abs());
    }
    Ok(InvariantDrift {
        ok: max_drift <= tol * (1.0 + h0.abs()),
        max_drift,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ex;
    use crate::multivec::Chart;

    fn chart1() -> ChartRef {
        Chart::new(vec!["x".into()], vec![])
    }

    fn field1(c: &ChartRef, t: &str) -> MultiVectorField {
        MultiVectorField::from_components(c, 1, vec![(vec![0], ex(t, &["x"], &[]))]).unwrap()
    }

    #[test]
    fn sl2_closure() {
        let c = chart1();
        let gens = [field1(&c, "1"), field1(&c, "x*x")];
        let cl = lie_closure(&gens, 3, &c.sampling_box, 42).unwrap();
        assert!(cl.closed);
        assert_eq!(cl.basis.len(), 3);
        // capped below the true dimension: reported not closed
        let cl2 = lie_closure(&gens, 2, &c.sampling_box, 42).unwrap();
        assert!(!cl2.closed);
        // closing a closed basis returns the same span
        let cl3 = lie_closure(&cl.basis, 4, &c.sampling_box, 42).unwrap();
        assert!(cl3.closed);
        assert_eq!(cl3.basis.len(), 3);
    }

    #[test]
    fn structure_constants_sl2_triple() {
        // [d;x, x d/dx] = d/dx, [d/dx, x^2 d/dx] = 2x d/dx, [x d/dx, x^2 d/dx] = x^2 d/dx
        let c = chart1();
        let gens = [field1(&c, "1"), field1(&c, "x"), field1(&c, "x*x")];
        let sc = structure_constants(&gens, &c.sampling_box, 42).unwrap();
        assert!(sc.residual < 1e-8, "residual {}", sc.residual);
        let expect = |i: usize, j: usize, want: [f64; 3]| {
            for k in 0..3 {
                assert!(
                    (sc.get(i, j, k) - want[k]).abs() < 1e-6,
                    "c[{i}][{j}][{k}] = {}",
                    sc.get(i, j, k)
                );
            }
        };
        expect(0, 1, [1.0, 0.0, 0.0]);
        expect(0, 2, [0.0, 2.0, 0.0]);
        expect(1, 2, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn structure_constants_rank_deficiency() {
        let c = chart1();
        let gens = [field1(&c, "x"), field1(&c, "2*x")];
        assert!(matches!(
            structure_constants(&gens, &c.sampling_box, 42),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn commuting_fields_zero_constants() {
        let c = Chart::new(vec!["x".into(), "y".into()], vec![]);
        let gens = [
            MultiVectorField::basis_vector(&c, 0),
            MultiVectorField::basis_vector(&c, 1),
        ];
        let sc = structure_constants(&gens, &c.sampling_box, 42).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert!(sc.get(i, j, k).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn rk4_constant_and_quadrature() {
        let c = Chart::new(vec!["x".into(), "y".into()], vec![]);
        let dx = MultiVectorField::basis_vector(&c, 0);
        let one = LieSystemSpec::parse_coefficient("1").unwrap();
        let sys = LieSystemSpec::new(&c, vec![dx.clone()], vec![one]).unwrap();
        let tr = integrate(&sys, &[0.0, 0.0], 0.0, 1.0, 0.1).unwrap();
        let (tf, xf) = tr.last();
        assert!((tf - 1.0).abs() < 1e-12 && (xf[0] - 1.0).abs() < 1e-12 && xf[1] == 0.0);

        let tt = LieSystemSpec::parse_coefficient("t").unwrap();
        let sys2 = LieSystemSpec::new(&c, vec![dx], vec![tt]).unwrap();
        let tr2 = integrate(&sys2, &[0.0, 0.0], 0.0, 1.0, 0.01).unwrap();
        assert!((tr2.last().1[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rk4_faults_truncate() {
        // dx/dt = ln(x) from x0 < 1 drives x to 0 in finite time; once a
        // step overshoots into x <= 0, ln faults and the run truncates.
        let c = chart1();
        let f = field1(&c, "ln(x)");
        let one = LieSystemSpec::parse_coefficient("1").unwrap();
        let sys = LieSystemSpec::new(&c, vec![f], vec![one]).unwrap();
        let tr = integrate(&sys, &[0.3], 0.0, 1.0, 0.001).unwrap();
        assert!(tr.fault_at.is_some());
        assert!(tr.samples.len() > 1);
    }

    #[test]
    fn invariant_drift_detection() {
        let c = Chart::new(vec!["x".into(), "y".into()], vec![]);
        let dx = MultiVectorField::basis_vector(&c, 0);
        let one = LieSystemSpec::parse_coefficient("1").unwrap();
        let sys = LieSystemSpec::new(&c, vec![dx], vec![one]).unwrap();
        let tr = integrate(&sys, &[0.0, 0.7], 0.0, 1.0, 0.1).unwrap();
        let hy = ex("y", &["x", "y"], &[]);
        let d = check_invariant_along(&tr, &hy, &BTreeMap::new(), 1e-12).unwrap();
        assert!(d.ok && d.max_drift == 0.0);
        let hx = ex("x", &["x", "y"], &[]);
        let d2 = check_invariant_along(&tr, &hx, &BTreeMap::new(), 1e-6).unwrap();
        assert!(!d2.ok);
    }

    #[test]
    fn csv_shape() {
        let c = chart1();
        let dx = MultiVectorField::basis_vector(&c, 0);
        let one = LieSystemSpec::parse_coefficient("1").unwrap();
        let sys = LieSystemSpec::new(&c, vec![dx], vec![one]).unwrap();
        let tr = integrate(&sys, &[0.0], 0.0, 0.2, 0.1).unwrap();
        let csv = tr.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,x");
        assert_eq!(lines.count(), 3);
    }
}
