//! Probabilistic zero-testing on sampling boxes.
//!
//! Semantic equality of expressions is decided by sampling: an expression is
//! accepted as zero when its residual stays below a relative tolerance at
//! every sampled point. Failures always carry a witness point.

use super::{Expression, Point};
use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// An expression that must stay bounded away from zero on sampled points.
#[derive(Clone, Debug)]
pub struct Exclusion {
    pub expr: Expression,
    pub clearance: f64,
}

/// Closed coordinate/parameter intervals plus exclusion predicates.
///
/// Needed because catalog entries contain 1/x, ln(y), ln(e^{2x}-1) and Ei
/// near its singularity; the box keeps every sample inside all domains.
#[derive(Clone, Debug, Default)]
pub struct SamplingBox {
    pub coords: BTreeMap<String, (f64, f64)>,
    pub params: BTreeMap<String, (f64, f64)>,
    pub exclusions: Vec<Exclusion>,
}

impl SamplingBox {
    /// The default chart box: every coordinate in [0.2, 1.2].
    pub fn default_for(coords: &[String]) -> SamplingBox {
        SamplingBox {
            coords: coords.iter().map(|c| (c.clone(), (0.2, 1.2))).collect(),
            params: BTreeMap::new(),
            exclusions: Vec::new(),
        }
    }

    /// Pin a parameter to a fixed value (zero-width interval).
    pub fn with_param(mut self, name: &str, v: f64) -> SamplingBox {
        self.params.insert(name.to_string(), (v, v));
        self
    }

    /// Draw one point satisfying every exclusion, or fail as a bad box.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Point> {
        'attempt: for _ in 0..1000 {
            let mut b = BTreeMap::new();
            for (name, (lo, hi)) in self.coords.iter().chain(self.params.iter()) {
                let v = if lo == hi {
                    *lo
                } else {
                    rng.gen_range(*lo..=*hi)
                };
                b.insert(name.clone(), v);
            }
            let p = Point::new(b);
            for excl in &self.exclusions {
                match excl.expr.eval(&p) {
                    Ok(v) if v.abs() >= excl.clearance => {}
                    Ok(_) => continue 'attempt,
                    Err(_) => continue 'attempt,
                }
            }
            return Ok(p);
        }
        Err(Error::BadBox(
            "could not satisfy exclusion predicates in 1000 attempts".into(),
        ))
    }
}

/// Outcome of a probabilistic zero test.
#[derive(Clone, Debug)]
pub struct ZeroTest {
    pub is_zero: bool,
    /// Largest relative residual seen over all samples.
    pub max_residual: f64,
    /// First failing point and its residual, when the verdict is false.
    pub witness: Option<(Point, f64)>,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl ZeroTest {
    fn trivial(samples: usize, tol: f64, seed: u64) -> ZeroTest {
        ZeroTest {
            is_zero: true,
            max_residual: 0.0,
            witness: None,
            samples,
            tol,
            seed,
        }
    }
}

/// Safety factor applied to the propagated roundoff bound: a residual below
/// `NOISE_SAFETY * bound` is indistinguishable from accumulated f64 error.
const NOISE_SAFETY: f64 = 64.0;

/// Test `|e| <= tol * (1 + scale)` at `samples` seeded points, where `scale`
/// is the larger of (a) the largest absolute value among `e`'s top-level
/// additive terms at the point and (b) the propagated f64 roundoff bound
/// scaled to the tolerance. Component (b) keeps identities with large
/// cancelling factors (products of e^{10x} and the like) from being
/// misdeclared nonzero on account of floating-point noise. Evaluation
/// faults surface as [`Error::BadBox`], never as a false verdict.
pub fn is_zero(
    e: &Expression,
    bx: &SamplingBox,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<ZeroTest> {
    assert!(samples >= 1, "samples must be >= 1");
    if e.is_zero_const() {
        return Ok(ZeroTest::trivial(samples, tol, seed));
    }
    let terms = e.additive_terms();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel = 0.0f64;
    for _ in 0..samples {
        let p = bx.sample(&mut rng)?;
        let (v, noise) = e
            .eval_with_err(&p)
            .map_err(|err| Error::BadBox(format!("evaluation fault at {:?}: {err}", p.bindings)))?;
        let mut scale = NOISE_SAFETY * noise / tol;
        for t in &terms {
            let tv = t.eval(&p).map_err(|err| {
                Error::BadBox(format!("evaluation fault at {:?}: {err}", p.bindings))
            })?;
            scale = scale.max(tv.abs());
        }
        let rel = v.abs() / (1.0 + scale);
        max_rel = max_rel.max(rel);
        if v.abs() > tol * (1.0 + scale) {
            return Ok(ZeroTest {
                is_zero: false,
                max_residual: max_rel,
                witness: Some((p, v.abs())),
                samples,
                tol,
                seed,
            });
        }
    }
    Ok(ZeroTest {
        is_zero: true,
        max_residual: max_rel,
        witness: None,
        samples,
        tol,
        seed,
    })
}
