//! Jacobi structures: axiom verification, the Kirillov bracket, Hamiltonian
//! vector fields, constants of motion, and Lie symmetries.
//!
//! A structure is a triple (chart, Λ, E) with a bivector Λ and a vector
//! field E expected to satisfy `[Λ,Λ] = 2 E∧Λ` and `[E,Λ] = 0`. The axioms
//! are verified probabilistically, never assumed: structures load
//! unverified and carry a status flag, because detecting failures in
//! hand-typeset tables is part of the job.

use crate::error::{Error, Result};
use crate::expr::{is_zero, Expression, SamplingBox, ZeroTest};
use crate::multivec::{
    commutator, pair2, schouten, schouten_direct, sharp, wedge_or_zero, ChartRef,
    MultiVectorField, OneForm,
};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

/// A (possibly not-yet-verified) Jacobi structure on a chart.
#[derive(Clone, Debug)]
pub struct JacobiStructure {
    pub chart: ChartRef,
    pub lambda: MultiVectorField,
    pub e: MultiVectorField,
    pub sampling_box: SamplingBox,
    verified: Arc<AtomicBool>,
}

impl JacobiStructure {
    pub fn new(
        chart: &ChartRef,
        lambda: MultiVectorField,
        e: MultiVectorField,
        sampling_box: SamplingBox,
    ) -> Result<JacobiStructure> {
        if lambda.degree != 2 {
            return Err(Error::Degree(format!(
                "structure bivector has degree {}",
                lambda.degree
            )));
        }
        if e.degree != 1 {
            return Err(Error::Degree(format!(
                "structure vector field has degree {}",
                e.degree
            )));
        }
        Ok(JacobiStructure {
            chart: chart.clone(),
            lambda,
            e,
            sampling_box,
            verified: Arc::new(AtomicBool::new(false)),
        })
    }

    /// Whether `verify_jacobi` has passed for this structure.
    pub fn is_verified(&self) -> bool {
        self.verified.load(Ordering::Relaxed)
    }

    /// Parse an expression against this structure's chart.
    pub fn parse(&self, text: &str) -> Result<Expression> {
        Expression::parse(text, &self.chart.parse_ctx())
    }
}

/// Witness point for a failed check, serializable.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub point: BTreeMap<String, f64>,
    pub residual: f64,
}

impl Witness {
    pub fn from_zero_test(t: &ZeroTest) -> Option<Witness> {
        t.witness.as_ref().map(|(p, r)| Witness {
            point: p.bindings.clone(),
            residual: *r,
        })
    }
}

/// Per-axiom outcome inside a [`VerificationReport`].
#[derive(Clone, Debug, Serialize)]
pub struct AxiomCheck {
    /// `"[L,L]-2E^L"` or `"[E,L]"`.
    pub axiom: String,
    pub verdict: bool,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// On failure: whether the independent direct-formula bracket agrees
    /// with the recursive one about the failure. `None` when not re-checked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confirmed_by_direct: Option<bool>,
}

/// Outcome of `verify_jacobi`, reproducible from the recorded seed.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub entry: String,
    pub passed: bool,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub axioms: Vec<AxiomCheck>,
}

/// Flat per-axiom record matching the documented JSON report shape.
#[derive(Clone, Debug, Serialize)]
pub struct AxiomRecord {
    pub entry: String,
    pub axiom: String,
    pub verdict: bool,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
}

impl VerificationReport {
    /// Flatten to one record per axiom.
    pub fn to_records(&self) -> Vec<AxiomRecord> {
        self.axioms
            .iter()
            .map(|a| AxiomRecord {
                entry: self.entry.clone(),
                axiom: a.axiom.clone(),
                verdict: a.verdict,
                max_residual: a.max_residual,
                witness: a.witness.clone(),
                seed: self.seed,
                samples: self.samples,
                tol: self.tol,
            })
            .collect()
    }
}

/// Check both structure axioms componentwise by seeded sampling.
///
/// On a failing component the difference is recomputed with the
/// independent direct-formula bracket; `confirmed_by_direct` records
/// whether the two implementations agree about the failure.
pub fn verify_jacobi(
    j: &JacobiStructure,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<VerificationReport> {
    verify_jacobi_named(j, "", samples, tol, seed)
}

/// Like [`verify_jacobi`] but stamps an entry id into the report.
pub fn verify_jacobi_named(
    j: &JacobiStructure,
    entry: &str,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<VerificationReport> {
    // On 2-charts both sides of the first axiom are identically zero.
    let ll = schouten(&j.lambda, &j.lambda)?;
    let el = wedge_or_zero(&j.e, &j.lambda).scale(Expression::int(2));
    let axiom1 = ll.sub(&el)?;
    let axiom2 = schouten(&j.e, &j.lambda)?;

    let mut axioms = Vec::new();
    for (name, diff, direct_diff) in [
        ("[L,L]-2E^L", &axiom1, {
            let d = schouten_direct(&j.lambda, &j.lambda)?.sub(&el)?;
            d
        }),
        ("[E,L]", &axiom2, schouten_direct(&j.e, &j.lambda)?),
    ] {
        let mut verdict = true;
        let mut max_res = 0.0f64;
        let mut witness = None;
        let mut confirmed = None;
        for (idx, c) in diff.components() {
            let t = is_zero(c, &j.sampling_box, samples, tol, seed)?;
            max_res = max_res.max(t.max_residual);
            if !t.is_zero {
                verdict = false;
                if witness.is_none() {
                    witness = Witness::from_zero_test(&t);
                }
                // cross-check the failing component with the second route
                let dc = direct_diff.comp(idx);
                let td = is_zero(&dc, &j.sampling_box, samples, tol, seed)?;
                let agrees = !td.is_zero;
                confirmed = Some(confirmed.unwrap_or(true) && agrees);
            }
        }
        axioms.push(AxiomCheck {
            axiom: name.to_string(),
            verdict,
            max_residual: max_res,
            witness,
            confirmed_by_direct: confirmed,
        });
    }
    let passed = axioms.iter().all(|a| a.verdict);
    if passed {
        j.verified.store(true, Ordering::Relaxed);
    }
    Ok(VerificationReport {
        entry: entry.to_string(),
        passed,
        seed,
        samples,
        tol,
        axioms,
    })
}

/// Kirillov bracket `{f,g} = L(df,dg) + f E(g) - g E(f)`.
pub fn jacobi_bracket(j: &JacobiStructure, f: &Expression, g: &Expression) -> Result<Expression> {
    let df = OneForm::d(&j.chart, f);
    let dg = OneForm::d(&j.chart, g);
    let p = pair2(&j.lambda, &df, &dg)?;
    let ef = j.e.apply(f)?;
    let eg = j.e.apply(g)?;
    Ok(Expression::add(vec![
        p,
        Expression::mul(vec![f.clone(), eg]),
        Expression::neg(Expression::mul(vec![g.clone(), ef])),
    ]))
}

/// Hamiltonian vector field `X_f = sharp(L, df) + f E`.
pub fn hamiltonian_vf(j: &JacobiStructure, f: &Expression) -> Result<MultiVectorField> {
    let df = OneForm::d(&j.chart, f);
    let s = sharp(&j.lambda, &df)?;
    s.add(&j.e.scale(f.clone()))
}

/// A good Hamiltonian satisfies `E(f) = 0`.
pub fn is_good_hamiltonian(
    j: &JacobiStructure,
    f: &Expression,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<ZeroTest> {
    let ef = j.e.apply(f)?;
    is_zero(&ef, &j.sampling_box, samples, tol, seed)
}

/// Whether `x` equals `hamiltonian_vf(j, f)` componentwise; returns the
/// verdict with the worst residual and a witness on failure.
pub fn check_hamiltonian_pair(
    j: &JacobiStructure,
    x: &MultiVectorField,
    f: &Expression,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<ZeroTest> {
    let xf = hamiltonian_vf(j, f)?;
    let diff = x.sub(&xf)?;
    zero_test_field(&diff, &j.sampling_box, samples, tol, seed)
}

/// Componentwise zero test of a multivector field; merged verdict.
pub fn zero_test_field(
    m: &MultiVectorField,
    bx: &SamplingBox,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<ZeroTest> {
    let mut out = ZeroTest {
        is_zero: true,
        max_residual: 0.0,
        witness: None,
        samples,
        tol,
        seed,
    };
    for (_, c) in m.components() {
        let t = is_zero(c, bx, samples, tol, seed)?;
        out.max_residual = out.max_residual.max(t.max_residual);
        if !t.is_zero {
            out.is_zero = false;
            if out.witness.is_none() {
                out.witness = t.witness;
            }
        }
    }
    Ok(out)
}

/// Whether `{f_i, h} = 0` for every generator Hamiltonian.
pub fn is_constant_of_motion(
    j: &JacobiStructure,
    h: &Expression,
    generators: &[Expression],
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<ZeroTest> {
    let mut out = ZeroTest {
        is_zero: true,
        max_residual: 0.0,
        witness: None,
        samples,
        tol,
        seed,
    };
    for f in generators {
        let b = jacobi_bracket(j, f, h)?;
        let t = is_zero(&b, &j.sampling_box, samples, tol, seed)?;
        out.max_residual = out.max_residual.max(t.max_residual);
        if !t.is_zero {
            out.is_zero = false;
            if out.witness.is_none() {
                out.witness = t.witness;
            }
        }
    }
    Ok(out)
}

/// Symmetry field of a constant of motion; identical to
/// [`hamiltonian_vf`], named separately for report semantics.
pub fn symmetry_field(j: &JacobiStructure, h: &Expression) -> Result<MultiVectorField> {
    hamiltonian_vf(j, h)
}

/// Whether `x_h` commutes with every generator field.
pub fn check_lie_symmetry(
    x_h: &MultiVectorField,
    generators: &[MultiVectorField],
    bx: &SamplingBox,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<ZeroTest> {
    let mut out = ZeroTest {
        is_zero: true,
        max_residual: 0.0,
        witness: None,
        samples,
        tol,
        seed,
    };
    for g in generators {
        let c = commutator(x_h, g)?;
        let t = zero_test_field(&c, bx, samples, tol, seed)?;
        out.max_residual = out.max_residual.max(t.max_residual);
        if !t.is_zero {
            out.is_zero = false;
            if out.witness.is_none() {
                out.witness = t.witness;
            }
        }
    }
    Ok(out)
}

/// Bracket-to-commutator homomorphism:
/// `X_{{f,g}} = [X_f, X_g]` on a verified structure.
pub fn homomorphism_check(
    j: &JacobiStructure,
    f: &Expression,
    g: &Expression,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<ZeroTest> {
    if !j.is_verified() {
        return Err(Error::Unverified);
    }
    let lhs = hamiltonian_vf(j, &jacobi_bracket(j, f, g)?)?;
    let rhs = commutator(&hamiltonian_vf(j, f)?, &hamiltonian_vf(j, g)?)?;
    zero_test_field(&lhs.sub(&rhs)?, &j.sampling_box, samples, tol, seed)
}
