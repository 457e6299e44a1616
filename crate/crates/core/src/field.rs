//! Vector fields ξ = (a, b, c) with an eagerly built table of partial
//! derivatives up to third order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{differentiate, parse, Expr, Var};
use crate::scalar::Scalar;

/// Exponents of ∂x, ∂y, ∂z.
pub type MultiIndex = [u8; 3];

/// Highest derivative order kept in the table.
pub const MAX_ORDER: u8 = 3;

/// Number of multi-indices of order ≤ 3 in three variables.
const SLOTS: usize = 20;

fn slot(m: MultiIndex) -> usize {
    let [a, b, c] = m;
    let order = (a + b + c) as usize;
    assert!(order <= MAX_ORDER as usize, "derivative order {order} > {MAX_ORDER}");
    // Graded lexicographic position: all lower orders first, then ordered by
    // decreasing x, then decreasing y exponent.
    let before = [0, 1, 4, 10][order];
    let (a, b) = (a as usize, b as usize);
    let rest = order - a;
    let offset: usize = (a + 1..=order).map(|k| order - k + 1).sum();
    before + offset + (rest - b)
}

fn all_indices() -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(SLOTS);
    for order in 0..=MAX_ORDER {
        for a in (0..=order).rev() {
            for b in (0..=order - a).rev() {
                out.push([a, b, order - a - b]);
            }
        }
    }
    out
}

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Domain {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Result<Self> {
        for i in 0..3 {
            if !(min[i].is_finite() && max[i].is_finite() && max[i] > min[i]) {
                return Err(Error::FieldSpec(format!(
                    "domain axis {i} has non-positive extent [{}, {}]",
                    min[i], max[i]
                )));
            }
        }
        Ok(Self { min, max })
    }

    pub fn cube(half: f64) -> Self {
        Self { min: [-half; 3], max: [half; 3] }
    }

    pub fn contains(&self, p: &[f64; 3]) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn extent(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.max[i] - self.min[i])
    }

    pub fn diameter(&self) -> f64 {
        self.extent().iter().map(|e| e * e).sum::<f64>().sqrt()
    }
}

/// The JSON form of a field spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSource {
    pub a: String,
    pub b: String,
    pub c: String,
    pub domain: Domain,
}

/// ξ = (a, b, c) on a domain box.
#[derive(Clone, Debug)]
pub struct FieldSpec {
    source: FieldSource,
    /// `table[i][slot(m)]` is ∂^m ξ_i.
    table: [Vec<Expr>; 3],
}

impl FieldSpec {
    pub fn new(a: &str, b: &str, c: &str, domain: Domain) -> Result<Self> {
        Self::from_source(FieldSource { a: a.into(), b: b.into(), c: c.into(), domain })
    }

    pub fn from_source(source: FieldSource) -> Result<Self> {
        let domain = Domain::new(source.domain.min, source.domain.max)?;
        let texts = [("a", &source.a), ("b", &source.b), ("c", &source.c)];
        let mut table: [Vec<Expr>; 3] = Default::default();
        for (i, (name, text)) in texts.into_iter().enumerate() {
            let base = parse(text).map_err(|source| Error::Parse { component: name, source })?;
            table[i] = build_table(base);
        }
        Ok(Self { source: FieldSource { domain, ..source }, table })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let source: FieldSource = serde_json::from_str(text).map_err(|e| Error::FieldSpec(e.to_string()))?;
        Self::from_source(source)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn source(&self) -> &FieldSource {
        &self.source
    }

    pub fn domain(&self) -> &Domain {
        &self.source.domain
    }

    pub fn with_domain(&self, domain: Domain) -> Self {
        Self { source: FieldSource { domain, ..self.source.clone() }, table: self.table.clone() }
    }

    /// ξ_i as parsed.
    pub fn component(&self, i: usize) -> &Expr {
        &self.table[i][0]
    }

    /// ∂^m ξ_i.
    pub fn derivative(&self, i: usize, m: MultiIndex) -> &Expr {
        &self.table[i][slot(m)]
    }

    /// Evaluates ∂^m ξ_i at `p`.
    pub fn eval_partial<T: Scalar>(&self, i: usize, m: MultiIndex, p: &[T; 3]) -> Result<T> {
        Ok(self.derivative(i, m).eval(p)?)
    }

    pub fn xi<T: Scalar>(&self, p: &[T; 3]) -> Result<[T; 3]> {
        Ok([self.component(0).eval(p)?, self.component(1).eval(p)?, self.component(2).eval(p)?])
    }

    /// Multiplies every component by `h`, e.g. for scaling-invariance checks.
    pub fn scaled(&self, h: &str) -> Result<Self> {
        let wrap = |s: &str| format!("({h}) * ({s})");
        Self::new(&wrap(&self.source.a), &wrap(&self.source.b), &wrap(&self.source.c), self.source.domain)
    }
}

fn build_table(base: Expr) -> Vec<Expr> {
    let indices = all_indices();
    let mut table: Vec<Expr> = Vec::with_capacity(SLOTS);
    for m in &indices {
        if *m == [0, 0, 0] {
            table.push(base.clone());
            continue;
        }
        // Differentiate the entry with one fewer power of the first variable present.
        let v = (0..3).find(|&k| m[k] > 0).expect("nonzero order");
        let mut parent = *m;
        parent[v] -= 1;
        let d = differentiate(&table[slot(parent)], Var::ALL[v]);
        table.push(d);
    }
    table
}
