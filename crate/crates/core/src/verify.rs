//! Independent checks: graded isomorphisms, seeded instances with a planted
//! canonical form, and sweeps over plans.
//!
//! Random conjugators come from `ChaCha8Rng::seed_from_u64(seed)`; each
//! entry consumes one `next_u64()`. Over Q an entry is `x % 5 - 2`, over
//! GF(p) it is `x % p`. Diagonal blocks are drawn first, block by block in
//! row-major order and redrawn while singular, then the entries above the
//! block diagonal in row-major order.

use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::constructions::{
    division_realization_2x2, smallest_nonsquare, tensor_algebra, tensor_grading, AbstractGradedAlgebra, Cocycle,
    ConstructionError, DivisionRealization,
};
use crate::decompose::{decompose_with, CanonicalCertificate, CanonicalForm, DecomposeError};
use crate::graded::{jacobson_radical, BlockStructure, GradedError, UTGrading};
use crate::group::{Group, GroupElement, GroupError};
use crate::linalg::{LinalgError, Matrix};
use crate::par::{self, Execution};
use crate::scalar::{Field, Scalar, ScalarError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("map is {rows}x{cols} between algebras of dimensions {source_dim} and {target_dim}")]
    DimensionMismatch { rows: usize, cols: usize, source_dim: usize, target_dim: usize },
    #[error("algebras are over different fields")]
    FieldMismatch,
    #[error("algebras are graded by different groups")]
    GroupMismatch,
    #[error("inconsistent plan: {0}")]
    PlanInconsistent(String),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

impl VerifyError {
    pub fn detail(&self) -> Value {
        match self {
            VerifyError::DimensionMismatch { rows, cols, source_dim, target_dim } => {
                json!({"rows": rows, "cols": cols, "source_dim": source_dim, "target_dim": target_dim})
            }
            VerifyError::PlanInconsistent(why) => json!({"reason": why}),
            VerifyError::Graded(e) => e.detail(),
            VerifyError::Construction(e) => e.detail(),
            _ => Value::Null,
        }
    }
}

/// A finite-dimensional graded algebra with a fixed homogeneous basis.
pub trait GradedAlgebra: Sync {
    fn field(&self) -> Field;
    fn group(&self) -> &Group;
    fn dim(&self) -> usize;
    fn degrees(&self) -> &[GroupElement];
    /// Coordinates of `b_i b_j`.
    fn basis_product(&self, i: usize, j: usize) -> Vec<Scalar>;
    fn multiply(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar>;
    /// Basis matrices, when the algebra is given concretely.
    fn matrices(&self) -> Option<&[Matrix]> {
        None
    }
}

impl GradedAlgebra for UTGrading {
    fn field(&self) -> Field {
        UTGrading::field(self)
    }

    fn group(&self) -> &Group {
        UTGrading::group(self)
    }

    fn dim(&self) -> usize {
        UTGrading::dim(self)
    }

    fn degrees(&self) -> &[GroupElement] {
        UTGrading::degrees(self)
    }

    fn basis_product(&self, i: usize, j: usize) -> Vec<Scalar> {
        self.expand(&(&self.basis()[i] * &self.basis()[j])).expect("products stay in the shape")
    }

    fn multiply(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let n = self.blocks().n();
        let combine = |c: &[Scalar]| {
            let mut m = Matrix::zeros(UTGrading::field(self), n, n);
            for (a, b) in c.iter().zip(self.basis()) {
                m.axpy(a, b);
            }
            m
        };
        self.expand(&(&combine(x) * &combine(y))).expect("products stay in the shape")
    }

    fn matrices(&self) -> Option<&[Matrix]> {
        Some(self.basis())
    }
}

impl GradedAlgebra for AbstractGradedAlgebra {
    fn field(&self) -> Field {
        AbstractGradedAlgebra::field(self)
    }

    fn group(&self) -> &Group {
        AbstractGradedAlgebra::group(self)
    }

    fn dim(&self) -> usize {
        AbstractGradedAlgebra::dim(self)
    }

    fn degrees(&self) -> &[GroupElement] {
        AbstractGradedAlgebra::degrees(self)
    }

    fn basis_product(&self, i: usize, j: usize) -> Vec<Scalar> {
        let mut v = vec![AbstractGradedAlgebra::field(self).zero(); AbstractGradedAlgebra::dim(self)];
        for (k, c) in AbstractGradedAlgebra::basis_product(self, i, j) {
            v[*k] = c.clone();
        }
        v
    }

    fn multiply(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        AbstractGradedAlgebra::multiply(self, x, y)
    }
}

/// A linear map between graded algebras; column k holds the image of the
/// k-th source basis element in target coordinates.
pub struct GradedLinearMap<'a> {
    pub source: &'a dyn GradedAlgebra,
    pub target: &'a dyn GradedAlgebra,
    pub matrix: &'a Matrix,
}

/// First failure found by [`check_graded_iso`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsoWitness {
    NotInvertible { rank: usize },
    NotMultiplicative { i: usize, j: usize },
    DegreeMismatch { index: usize, expected: GroupElement, found: Option<GroupElement> },
}

impl IsoWitness {
    pub fn to_json(&self) -> Value {
        match self {
            IsoWitness::NotInvertible { rank } => json!({"kind": "NotInvertible", "rank": rank}),
            IsoWitness::NotMultiplicative { i, j } => json!({"kind": "NotMultiplicative", "i": i, "j": j}),
            IsoWitness::DegreeMismatch { index, expected, found } => json!({
                "kind": "DegreeMismatch",
                "index": index,
                "expected": expected.to_json(),
                "found": found.as_ref().map_or(Value::Null, GroupElement::to_json),
            }),
        }
    }
}

/// Invertibility, then multiplicativity on all ordered basis pairs (first
/// failure in row-major order), then degree preservation.
pub fn check_graded_iso(f: &GradedLinearMap, exec: Execution) -> Result<Option<IsoWitness>, VerifyError> {
    let (src, dst, m) = (f.source, f.target, f.matrix);
    let d = src.dim();
    if m.rows() != dst.dim() || m.cols() != d || dst.dim() != d {
        return Err(VerifyError::DimensionMismatch {
            rows: m.rows(),
            cols: m.cols(),
            source_dim: d,
            target_dim: dst.dim(),
        });
    }
    if src.field() != dst.field() || m.field() != src.field() {
        return Err(VerifyError::FieldMismatch);
    }
    if src.group() != dst.group() {
        return Err(VerifyError::GroupMismatch);
    }
    let rank = m.rank();
    if rank != d {
        return Ok(Some(IsoWitness::NotInvertible { rank }));
    }
    let columns: Vec<Vec<Scalar>> = (0..d).map(|k| m.column(k)).collect();
    let failure = match dst.matrices() {
        Some(ms) => {
            let images: Vec<Matrix> = par::map_slice(exec, &columns, |col| {
                let mut x = Matrix::zeros(src.field(), ms[0].rows(), ms[0].cols());
                for (c, b) in col.iter().zip(ms) {
                    x.axpy(c, b);
                }
                x
            });
            par::find_first(exec, d, |i| {
                (0..d).find_map(|j| {
                    let mut expected = Matrix::zeros(src.field(), ms[0].rows(), ms[0].cols());
                    for (k, c) in src.basis_product(i, j).iter().enumerate() {
                        if !c.is_zero() {
                            expected.axpy(c, &images[k]);
                        }
                    }
                    (&images[i] * &images[j] != expected).then_some((i, j))
                })
            })
        }
        None => par::find_first(exec, d, |i| {
            (0..d).find_map(|j| {
                let lhs = m.mul_vec(&src.basis_product(i, j)).expect("dimension checked");
                (dst.multiply(&columns[i], &columns[j]) != lhs).then_some((i, j))
            })
        }),
    };
    if let Some((i, j)) = failure {
        return Ok(Some(IsoWitness::NotMultiplicative { i, j }));
    }
    for (index, col) in columns.iter().enumerate() {
        let expected = &src.degrees()[index];
        let mut found: Option<&GroupElement> = None;
        let mut mixed = false;
        for (c, g) in col.iter().zip(dst.degrees()) {
            if c.is_zero() {
                continue;
            }
            match found {
                None => found = Some(g),
                Some(h) if h == g => {}
                Some(_) => mixed = true,
            }
        }
        if mixed || found != Some(expected) {
            let found = if mixed { None } else { found.cloned() };
            return Ok(Some(IsoWitness::DegreeMismatch { index, expected: expected.clone(), found }));
        }
    }
    Ok(None)
}

/// How the planted division algebra is realized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DivisionChoice {
    /// D = K.
    Trivial,
    /// The Pauli grading on M_2 with generators of the given degrees.
    Pauli { a: GroupElement, b: GroupElement },
    /// D_e = K(√c), the other component of degree `a`.
    Quadratic { a: GroupElement, c: Option<Scalar> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConjugatorChoice {
    Random,
    Identity,
    Explicit(Matrix),
}

/// Everything needed to rebuild an instance byte for byte.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstancePlan {
    pub seed: u64,
    pub field: Field,
    pub group: Group,
    pub blocks: Vec<usize>,
    pub eta: Vec<GroupElement>,
    pub division: DivisionChoice,
    pub conjugator: ConjugatorChoice,
}

fn plan_error(why: impl Into<String>) -> VerifyError {
    VerifyError::PlanInconsistent(why.into())
}

impl InstancePlan {
    pub fn to_json(&self) -> Value {
        let division = match &self.division {
            DivisionChoice::Trivial => json!({"kind": "trivial"}),
            DivisionChoice::Pauli { a, b } => json!({"kind": "pauli", "a": a.to_json(), "b": b.to_json()}),
            DivisionChoice::Quadratic { a, c } => {
                let mut v = json!({"kind": "quadratic", "a": a.to_json()});
                if let Some(c) = c {
                    v["c"] = c.to_json();
                }
                v
            }
        };
        let conjugator = match &self.conjugator {
            ConjugatorChoice::Random => json!({"kind": "random"}),
            ConjugatorChoice::Identity => json!({"kind": "identity"}),
            ConjugatorChoice::Explicit(m) => json!({"kind": "explicit", "matrix": m.to_json()}),
        };
        json!({
            "format": 1,
            "seed": self.seed,
            "field": serde_json::to_value(self.field).expect("field serializes"),
            "group": self.group.to_json(),
            "blocks": self.blocks,
            "eta": self.eta.iter().map(GroupElement::to_json).collect::<Vec<_>>(),
            "division": division,
            "conjugator": conjugator,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, VerifyError> {
        let field: Field = serde_json::from_value(v.get("field").cloned().unwrap_or(Value::Null))
            .map_err(|e| plan_error(format!("field: {e}")))?;
        let group = Group::from_json(v.get("group").unwrap_or(&Value::Null))?;
        let seed = v.get("seed").and_then(Value::as_u64).unwrap_or(0);
        let blocks: Vec<usize> = serde_json::from_value(v.get("blocks").cloned().unwrap_or(Value::Null))
            .map_err(|e| plan_error(format!("blocks: {e}")))?;
        let eta = v
            .get("eta")
            .and_then(Value::as_array)
            .ok_or_else(|| plan_error("missing eta"))?
            .iter()
            .map(|g| group.parse_element(g))
            .collect::<Result<Vec<_>, _>>()?;
        let dv = v.get("division").cloned().unwrap_or_else(|| json!({"kind": "trivial"}));
        let elt = |key: &str| group.parse_element(dv.get(key).unwrap_or(&Value::Null));
        let division = match dv.get("kind").and_then(Value::as_str) {
            Some("trivial") => DivisionChoice::Trivial,
            Some("pauli") => DivisionChoice::Pauli { a: elt("a")?, b: elt("b")? },
            Some("quadratic") => {
                let c = match dv.get("c") {
                    Some(c) => Some(field.parse_scalar(c)?),
                    None => None,
                };
                DivisionChoice::Quadratic { a: elt("a")?, c }
            }
            _ => return Err(plan_error("unknown division kind")),
        };
        let cv = v.get("conjugator").cloned().unwrap_or_else(|| json!({"kind": "random"}));
        let conjugator = match cv.get("kind").and_then(Value::as_str) {
            Some("random") => ConjugatorChoice::Random,
            Some("identity") => ConjugatorChoice::Identity,
            Some("explicit") => ConjugatorChoice::Explicit(Matrix::from_json(field, cv.get("matrix").unwrap_or(&Value::Null))?),
            _ => return Err(plan_error("unknown conjugator kind")),
        };
        Ok(InstancePlan { seed, field, group, blocks, eta, division, conjugator })
    }

    fn realization(&self) -> Result<DivisionRealization, VerifyError> {
        let f = self.field;
        Ok(match &self.division {
            DivisionChoice::Trivial => DivisionRealization::trivial(f, &self.group),
            DivisionChoice::Pauli { a, b } => division_realization_2x2(f, &Cocycle::pauli(f), &self.group, a, b)?,
            DivisionChoice::Quadratic { a, c } => {
                let c = c.clone().unwrap_or_else(|| smallest_nonsquare(f));
                crate::constructions::quadratic_division_realization(f, &c, &self.group, a)?
            }
        })
    }
}

/// A generated grading with the canonical form it was built from.
#[derive(Clone, Debug)]
pub struct Instance {
    pub grading: UTGrading,
    /// The tensor grading before scrambling; its basis realizes the planted algebra.
    pub planted: UTGrading,
    pub plant: CanonicalForm,
    pub conjugator: Matrix,
}

fn random_conjugator(field: Field, blocks: &BlockStructure, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || match field {
        Field::Rationals => field.from_i64((rng.next_u64() % 5) as i64 - 2),
        Field::PrimeField { p } => field.from_i64((rng.next_u64() % p) as i64),
    };
    let n = blocks.n();
    let mut s = Matrix::zeros(field, n, n);
    for b in 0..blocks.t() {
        let (off, size) = (blocks.offset(b), blocks.sizes()[b]);
        loop {
            let mut block = Matrix::zeros(field, size, size);
            for i in 0..size {
                for j in 0..size {
                    block.set(i, j, draw());
                }
            }
            if block.rank() == size {
                s.set_block(off, off, &block);
                break;
            }
        }
    }
    for &(i, j) in blocks.positions() {
        if blocks.block_of(i) < blocks.block_of(j) {
            s.set(i, j, draw());
        }
    }
    s
}

/// Build (UT(n'), D, η), scramble it by a block upper triangular conjugator,
/// and return it with the plant. The plant's ψ is the identity because the
/// scrambled basis is the conjugated tensor basis.
pub fn generate_instance(plan: &InstancePlan) -> Result<Instance, VerifyError> {
    let f = plan.field;
    let blocks_prime = BlockStructure::new(plan.blocks.clone())?;
    if plan.eta.len() != blocks_prime.n() {
        return Err(plan_error(format!("eta has length {}, expected {}", plan.eta.len(), blocks_prime.n())));
    }
    let real = plan.realization()?;
    let planted = tensor_grading(&blocks_prime, &plan.eta, &real)?;
    let division = real.to_algebra()?;
    let algebra = tensor_algebra(&blocks_prime, &plan.eta, division.algebra())?;
    let blocks = planted.blocks().clone();
    let n = blocks.n();
    let conjugator = match &plan.conjugator {
        ConjugatorChoice::Random => random_conjugator(f, &blocks, plan.seed),
        ConjugatorChoice::Identity => Matrix::identity(f, n),
        ConjugatorChoice::Explicit(m) => m.clone(),
    };
    let grading = planted.apply_inner_automorphism(&conjugator)?;
    let dim = algebra.dim();
    let plant = CanonicalForm {
        field: f,
        group: plan.group.clone(),
        blocks_prime: plan.blocks.clone(),
        eta: plan.eta.clone(),
        shifts: vec![plan.group.identity(); plan.blocks.len()],
        division,
        realization: real,
        algebra,
        psi: Matrix::identity(f, dim),
        certificate: CanonicalCertificate {
            radical_graded: true,
            weakiso_checked: true,
            eqcom_checked: true,
            psi_hom: true,
            psi_graded: true,
            psi_bijective: true,
            graded_iso: None,
        },
        trace: None,
    };
    Ok(Instance { grading, planted, plant, conjugator })
}

/// Re-derived checks on the intermediate data of a decomposition.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceAudit {
    /// Every E_i homogeneous of degree e and every M_ij graded.
    pub idempotents: bool,
    /// Equal division dimensions, and dim V^{r,r+1} = dim D_r.
    pub dimensions: bool,
    /// Degree relation and multiplicativity of each ψ_{r,r+1}.
    pub weak_isos: bool,
    /// v^{rs} nonzero and intertwining for all r < s.
    pub chain: bool,
    pub weak_iso_count: usize,
    pub chain_count: usize,
}

/// Recheck the stage invariants of `cf` from its trace.
pub fn audit_trace(cf: &CanonicalForm) -> TraceAudit {
    let Some(trace) = cf.trace.as_ref() else {
        return TraceAudit::default();
    };
    let group = &cf.group;
    let f = cf.field;
    let w = &trace.working;
    let blocks = w.blocks();
    let parts = &trace.blocks;
    let s = parts[0].s;
    let dim_d = s * s;
    let idempotents = trace.idempotents.idempotents_homogeneous() && trace.idempotents.blocks_graded();

    let mut dimensions = parts.iter().all(|p| p.division.dim() == dim_d && p.p * p.s == blocks.sizes()[p.block]);
    let sub = |x: &Matrix, blk: usize, a: usize, b: usize, blk2: usize| {
        x.submatrix(blocks.offset(blk) + a * s, blocks.offset(blk2) + b * s, s, s)
    };
    let embed = |blk: usize, a: usize, b: usize, m: &Matrix| {
        let mut x = Matrix::zeros(f, blocks.n(), blocks.n());
        x.set_block(blocks.offset(blk) + a * s, blocks.offset(blk) + b * s, m);
        x
    };
    let realize = |blk: usize, coords: &[Scalar]| {
        let mut m = Matrix::zeros(f, s, s);
        for (c, b) in coords.iter().zip(parts[blk].realization.matrices()) {
            m.axpy(c, b);
        }
        m
    };
    let mut weak_isos = true;
    for step in &trace.chain.steps {
        let (r, t) = (step.source, step.target);
        let pr = parts[r].p;
        let mut span = crate::linalg::Echelon::new(f, dim_d);
        for b in w.basis() {
            span.insert(sub(b, r, pr - 1, 0, t).data());
        }
        dimensions &= span.rank() == dim_d;
        let g_last = &parts[r].sequence[pr - 1];
        let g_first = &parts[t].sequence[0];
        let h = &step.degree;
        for (k, deg) in parts[r].realization.degrees().iter().enumerate() {
            let image = step.map.column(k);
            let degs: Vec<&GroupElement> = image
                .iter()
                .zip(parts[t].realization.degrees())
                .filter(|(c, _)| !c.is_zero())
                .map(|(_, g)| g)
                .collect();
            let homogeneous = !degs.is_empty() && degs.iter().all(|g| *g == degs[0]);
            let ok = homogeneous && {
                let lhs = group.conjugate(g_first, degs[0]);
                let rhs = group.product_of([&group.inverse(h), &group.conjugate(g_last, deg), h]);
                lhs == rhs
            };
            weak_isos &= ok;
        }
        let src = parts[r].division.algebra();
        let dst = parts[t].division.algebra();
        for i in 0..dim_d {
            for j in 0..dim_d {
                let prod = GradedAlgebra::basis_product(src, i, j);
                let lhs = step.map.mul_vec(&prod).expect("dimension of D");
                let rhs = dst.multiply(&step.map.column(i), &step.map.column(j));
                weak_isos &= lhs == rhs;
            }
        }
    }
    let mut chain = true;
    for link in &trace.chain.links {
        let (r, t) = (link.from, link.to);
        let pr = parts[r].p;
        chain &= !link.connector.is_zero();
        for (k, phi) in parts[r].realization.matrices().iter().enumerate() {
            let lhs = &embed(r, pr - 1, pr - 1, phi) * &link.connector;
            let rhs = &link.connector * &embed(t, 0, 0, &realize(t, &link.map.column(k)));
            chain &= lhs == rhs;
        }
    }
    TraceAudit {
        idempotents,
        dimensions,
        weak_isos,
        chain,
        weak_iso_count: trace.chain.steps.len(),
        chain_count: trace.chain.links.len(),
    }
}

/// Per-degree radical dimensions of one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadicalEntry {
    pub graded: bool,
    pub char_precondition: bool,
    pub radical_dim: usize,
    pub components: Vec<(GroupElement, usize)>,
}

impl RadicalEntry {
    pub fn to_json(&self) -> Value {
        json!({
            "graded": self.graded,
            "char_precondition": self.char_precondition,
            "radical_dim": self.radical_dim,
            "components": self.components.iter().map(|(g, d)| json!({"degree": g.to_json(), "dim": d})).collect::<Vec<_>>(),
        })
    }
}

/// Gradedness of the radical for each instance.
pub fn radical_gradedness_sweep(instances: &[UTGrading], exec: Execution) -> Vec<RadicalEntry> {
    par::map_slice(exec, instances, |g| {
        let cert = g.is_subspace_graded(&jacobson_radical(g.field(), g.blocks()));
        RadicalEntry {
            graded: cert.graded,
            char_precondition: g.field().char_precondition(g.dim()),
            radical_dim: cert.dim,
            components: cert.components.into_iter().filter(|(_, d)| *d > 0).collect(),
        }
    })
}

/// Outcome of generating, decomposing and checking one plan.
#[derive(Clone, Debug)]
pub struct InstanceReport {
    pub name: String,
    pub dim: usize,
    pub planted_blocks: Vec<usize>,
    pub planted_division_dim: usize,
    pub recovered_blocks: Option<Vec<usize>>,
    pub recovered_division_dim: Option<usize>,
    pub error: Option<Value>,
    pub psi_iso: bool,
    pub composed_iso: bool,
    pub audit: TraceAudit,
    pub radical: RadicalEntry,
    pub witness: Option<Value>,
    pub elapsed_ms: Option<u128>,
}

impl InstanceReport {
    /// The recovered form matches the plant in block sizes and dim D.
    pub fn shape_recovered(&self) -> bool {
        self.recovered_blocks.as_ref() == Some(&self.planted_blocks)
            && self.recovered_division_dim == Some(self.planted_division_dim)
    }

    pub fn pass(&self) -> bool {
        self.error.is_none()
            && self.psi_iso
            && self.composed_iso
            && self.shape_recovered()
            && self.audit.idempotents
            && self.audit.dimensions
            && self.audit.weak_isos
            && self.audit.chain
            && (self.radical.graded || !self.radical.char_precondition)
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "name": self.name,
            "pass": self.pass(),
            "dim": self.dim,
            "planted_blocks": self.planted_blocks,
            "planted_division_dim": self.planted_division_dim,
            "recovered_blocks": self.recovered_blocks,
            "recovered_division_dim": self.recovered_division_dim,
            "psi_iso": self.psi_iso,
            "composed_iso": self.composed_iso,
            "idempotents": self.audit.idempotents,
            "dimensions": self.audit.dimensions,
            "weak_isos": self.audit.weak_isos,
            "chain": self.audit.chain,
            "radical": self.radical.to_json(),
        });
        if let Some(e) = &self.error {
            v["error"] = e.clone();
        }
        if let Some(w) = &self.witness {
            v["witness"] = w.clone();
        }
        if let Some(ms) = self.elapsed_ms {
            v["elapsed_ms"] = json!(ms);
        }
        v
    }
}

fn decompose_error_json(e: &DecomposeError) -> Value {
    json!({"message": e.to_string(), "detail": e.detail()})
}

/// Generate, decompose, and check both ψ and the composed map to the plant.
pub fn run_plan(name: &str, plan: &InstancePlan, exec: Execution, timed: bool) -> Result<InstanceReport, VerifyError> {
    let start = Instant::now();
    let inst = generate_instance(plan)?;
    let radical = radical_gradedness_sweep(std::slice::from_ref(&inst.grading), Execution::Sequential).remove(0);
    let mut report = InstanceReport {
        name: name.to_string(),
        dim: inst.grading.dim(),
        planted_blocks: plan.blocks.clone(),
        planted_division_dim: inst.plant.division.dim(),
        recovered_blocks: None,
        recovered_division_dim: None,
        error: None,
        psi_iso: false,
        composed_iso: false,
        audit: TraceAudit::default(),
        radical,
        witness: None,
        elapsed_ms: None,
    };
    match decompose_with(&inst.grading, exec) {
        Err(e) => report.error = Some(decompose_error_json(&e)),
        Ok(cf) => {
            report.recovered_blocks = Some(cf.blocks_prime.clone());
            report.recovered_division_dim = Some(cf.division.dim());
            report.audit = audit_trace(&cf);
            let psi = GradedLinearMap { source: &cf.algebra, target: &inst.grading, matrix: &cf.psi };
            let w1 = check_graded_iso(&psi, exec)?;
            report.psi_iso = w1.is_none();
            // planted ψ is the identity, so ψ_plant^-1 ∘ ψ lands in the planted basis
            let composed = &inst.plant.psi.inverse()? * &cf.psi;
            let to_plant = GradedLinearMap { source: &cf.algebra, target: &inst.planted, matrix: &composed };
            let w2 = check_graded_iso(&to_plant, exec)?;
            report.composed_iso = w2.is_none();
            report.witness = w1.or(w2).map(|w| w.to_json());
        }
    }
    if timed {
        report.elapsed_ms = Some(start.elapsed().as_millis());
    }
    Ok(report)
}

/// The plans used by the acceptance grid: t ∈ {1,2,3}, p_i ∈ {1,2,3},
/// several groups, division choices and fields, with per-instance seeds.
pub fn standard_grid() -> Vec<(String, InstancePlan)> {
    let q = Field::Rationals;
    let gf5 = Field::prime(5).expect("prime");
    let gf101 = Field::prime(101).expect("prime");
    let gf10007 = Field::prime(10007).expect("prime");
    let idx = GroupElement::Index;
    let groups: Vec<(&str, Group, Vec<GroupElement>, Vec<DivisionChoice>)> = vec![
        (
            "klein",
            Group::klein_four(),
            (0..4).map(idx).collect(),
            vec![
                DivisionChoice::Trivial,
                DivisionChoice::Pauli { a: idx(1), b: idx(2) },
                DivisionChoice::Quadratic { a: idx(3), c: None },
            ],
        ),
        (
            "z4",
            Group::cyclic(4),
            (0..4).map(idx).collect(),
            vec![DivisionChoice::Trivial, DivisionChoice::Quadratic { a: idx(2), c: None }],
        ),
        (
            "s3",
            Group::symmetric3(),
            (0..6).map(idx).collect(),
            vec![DivisionChoice::Trivial, DivisionChoice::Quadratic { a: idx(1), c: None }],
        ),
        (
            "z1",
            Group::free_abelian(1),
            (-2..=2).map(|k| GroupElement::Vector(vec![k])).collect(),
            vec![DivisionChoice::Trivial],
        ),
    ];
    let shapes: Vec<Vec<usize>> = vec![
        vec![1],
        vec![2],
        vec![3],
        vec![1, 1],
        vec![2, 1],
        vec![1, 2],
        vec![2, 2],
        vec![3, 1],
        vec![1, 1, 1],
        vec![2, 1, 1],
        vec![1, 2, 3],
        vec![3, 2, 1],
        vec![1, 3],
        vec![1, 1, 2],
    ];
    let mut out = Vec::new();
    let mut seed: u64 = 1;
    for (gname, group, pool, divisions) in &groups {
        for division in divisions {
            let s = match division {
                DivisionChoice::Trivial => 1,
                _ => 2,
            };
            let dname = match division {
                DivisionChoice::Trivial => "k",
                DivisionChoice::Pauli { .. } => "pauli",
                DivisionChoice::Quadratic { .. } => "quad",
            };
            for (k, shape) in shapes.iter().enumerate() {
                let n: usize = shape.iter().sum();
                let dim = ut_dim(shape) * s * s;
                // rational arithmetic is kept to the smaller shapes
                let field = match (k % 3, division) {
                    (_, DivisionChoice::Pauli { .. }) if k % 2 == 0 => gf5,
                    (0, _) if dim <= 40 => q,
                    (1, _) => gf101,
                    _ => gf10007,
                };
                let field = if field == gf5 && !gf5.char_precondition(dim) && k % 4 != 0 { gf101 } else { field };
                let eta = (0..n).map(|i| pool[(i * 7 + k * 3 + seed as usize) % pool.len()].clone()).collect();
                let plan = InstancePlan {
                    seed,
                    field,
                    group: group.clone(),
                    blocks: shape.clone(),
                    eta,
                    division: division.clone(),
                    conjugator: ConjugatorChoice::Random,
                };
                let shape_name = shape.iter().map(usize::to_string).collect::<Vec<_>>().join("-");
                out.push((format!("{gname}_{dname}_{shape_name}_s{seed}"), plan));
                seed += 1;
            }
        }
    }
    out
}

fn ut_dim(shape: &[usize]) -> usize {
    let n: usize = shape.iter().sum();
    let diag: usize = shape.iter().map(|x| x * x).sum();
    (n * n + diag) / 2
}
