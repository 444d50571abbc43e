//! Standard gradings: elementary gradings, twisted group algebras, graded
//! division algebras and their tensor products with elementary gradings.

use std::collections::HashMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::graded::{BlockStructure, GradedError, UTGrading};
use crate::group::{Group, GroupElement, GroupError};
use crate::linalg::{Echelon, LinalgError, Matrix};
use crate::poly::{Irreducibility, Poly};
use crate::scalar::{Field, Scalar, ScalarError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("sequence has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("cocycles need a finite support group")]
    NotFinite,
    #[error("cocycle table must be {order}x{order}")]
    TableSize { order: usize },
    #[error("cocycle value at ({a}, {b}) is zero")]
    ZeroValue { a: usize, b: usize },
    #[error("cocycle is not normalized at ({a}, {b})")]
    NotNormalized { a: usize, b: usize },
    #[error("2-cocycle identity fails on ({a}, {b}, {c})")]
    CocycleIdentityFails { a: usize, b: usize, c: usize },
    #[error("structure constants are not associative on basis triple ({i}, {j}, {k})")]
    NotAssociative { i: usize, j: usize, k: usize },
    #[error("product of basis elements {i} and {j} has a component along {k} of the wrong degree")]
    DegreeIncompatible { i: usize, j: usize, k: usize },
    #[error("the unity is not a two-sided identity")]
    NotUnital,
    #[error("structure constant index out of range")]
    IndexOutOfRange,
    #[error("homogeneous basis element {index} is not invertible")]
    NotDivision { index: usize },
    #[error("homogeneous components of a division algebra must have equal dimension")]
    UnequalComponents,
    #[error("only the Pauli cocycle on Z2 x Z2 has a 2x2 realization here")]
    UnsupportedCocycle,
    #[error("construction needs a field of characteristic other than 2")]
    CharacteristicTwo,
    #[error("{0} is a square in the field")]
    SquareParameter(String),
    #[error("embedding of the support is not an injective homomorphism")]
    NotAnEmbedding,
    #[error("realization matrices do not form a basis of the full matrix algebra")]
    NotSpanning,
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("cannot parse: {0}")]
    Parse(String),
}

impl ConstructionError {
    pub fn detail(&self) -> Value {
        match self {
            ConstructionError::LengthMismatch { expected, found } => json!({"expected": expected, "found": found}),
            ConstructionError::ZeroValue { a, b } | ConstructionError::NotNormalized { a, b } => json!({"a": a, "b": b}),
            ConstructionError::CocycleIdentityFails { a, b, c } => json!({"a": a, "b": b, "c": c}),
            ConstructionError::NotAssociative { i, j, k } | ConstructionError::DegreeIncompatible { i, j, k } => {
                json!({"i": i, "j": j, "k": k})
            }
            ConstructionError::NotDivision { index } => json!({"index": index}),
            ConstructionError::Graded(e) => e.detail(),
            _ => Value::Null,
        }
    }
}

/// A sequence (g_1, ..., g_n) defining deg e_ij = g_i g_j^-1.
pub type ElementarySequence = Vec<GroupElement>;

/// The elementary grading on UT(n_1, ..., n_t): matrix units in row-major
/// order with deg e_ij = g_i g_j^-1.
pub fn elementary_grading(
    field: Field,
    group: &Group,
    blocks: &BlockStructure,
    seq: &[GroupElement],
) -> Result<UTGrading, ConstructionError> {
    let n = blocks.n();
    if seq.len() != n {
        return Err(ConstructionError::LengthMismatch { expected: n, found: seq.len() });
    }
    for g in seq {
        group.inv(g)?;
    }
    let basis = blocks
        .positions()
        .iter()
        .map(|&(i, j)| (Matrix::unit(field, n, n, i, j), group.op(&seq[i], &group.inverse(&seq[j]))))
        .collect();
    Ok(UTGrading::new(field, group.clone(), blocks.clone(), basis)?)
}

/// A normalized 2-cocycle σ: T x T → K^×, indexed by elements of a finite group T.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cocycle {
    group: Group,
    order: usize,
    values: Vec<Scalar>,
}

impl Cocycle {
    pub fn new(group: &Group, values: Vec<Vec<Scalar>>) -> Result<Self, ConstructionError> {
        let order = group.order().ok_or(ConstructionError::NotFinite)?;
        if values.len() != order || values.iter().any(|r| r.len() != order) {
            return Err(ConstructionError::TableSize { order });
        }
        let flat: Vec<Scalar> = values.into_iter().flatten().collect();
        let sigma = Cocycle { group: group.clone(), order, values: flat };
        sigma.validate()?;
        Ok(sigma)
    }

    fn validate(&self) -> Result<(), ConstructionError> {
        let o = self.order;
        for a in 0..o {
            for b in 0..o {
                if self.at(a, b).is_zero() {
                    return Err(ConstructionError::ZeroValue { a, b });
                }
            }
        }
        for a in 0..o {
            if !self.at(0, a).is_one() {
                return Err(ConstructionError::NotNormalized { a: 0, b: a });
            }
            if !self.at(a, 0).is_one() {
                return Err(ConstructionError::NotNormalized { a, b: 0 });
            }
        }
        let els = self.group.elements().expect("finite");
        for a in 0..o {
            for b in 0..o {
                let ab = self.index(&self.group.op(&els[a], &els[b]));
                for c in 0..o {
                    let bc = self.index(&self.group.op(&els[b], &els[c]));
                    let lhs = self.at(a, b) * self.at(ab, c);
                    let rhs = self.at(b, c) * self.at(a, bc);
                    if lhs != rhs {
                        return Err(ConstructionError::CocycleIdentityFails { a, b, c });
                    }
                }
            }
        }
        Ok(())
    }

    fn index(&self, g: &GroupElement) -> usize {
        match g {
            GroupElement::Index(i) => *i,
            _ => self.group.elements().expect("finite").iter().position(|x| x == g).expect("element of T"),
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn at(&self, a: usize, b: usize) -> &Scalar {
        &self.values[a * self.order + b]
    }

    /// σ ≡ 1.
    pub fn trivial(field: Field, group: &Group) -> Result<Self, ConstructionError> {
        let o = group.order().ok_or(ConstructionError::NotFinite)?;
        Cocycle::new(group, vec![vec![field.one(); o]; o])
    }

    /// On Z2 x Z2 = <a> x <b> (indices e, a, b, ab), σ(a^x b^y, a^z b^w) = (-1)^(yz).
    pub fn pauli(field: Field) -> Self {
        let group = Group::klein_four();
        let bits = |i: usize| (i & 1, i >> 1);
        let values = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| {
                        let (_, y) = bits(i);
                        let (z, _) = bits(j);
                        if y * z == 1 {
                            -field.one()
                        } else {
                            field.one()
                        }
                    })
                    .collect()
            })
            .collect();
        Cocycle::new(&group, values).expect("Pauli cocycle satisfies the identity")
    }

    /// On Z2 = {e, a}: σ(a, a) = c, all other values 1.
    pub fn quadratic(field: Field, c: Scalar) -> Result<Self, ConstructionError> {
        let one = field.one();
        Cocycle::new(&Group::cyclic(2), vec![vec![one.clone(), one.clone()], vec![one, c]])
    }

    /// The coboundary σ(a, b) = f(a) f(b) f(ab)^-1 of a function with f(e) = 1.
    pub fn coboundary(group: &Group, f: &[Scalar]) -> Result<Self, ConstructionError> {
        let els = group.elements().ok_or(ConstructionError::NotFinite)?;
        let pos: HashMap<&GroupElement, usize> = els.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let mut values = Vec::with_capacity(els.len());
        for a in &els {
            let mut row = Vec::with_capacity(els.len());
            for b in &els {
                let ab = pos[&group.op(a, b)];
                row.push((&f[pos[a]] * &f[pos[b]]).try_div(&f[ab])?);
            }
            values.push(row);
        }
        Cocycle::new(group, values)
    }

    pub fn to_json(&self) -> Value {
        let values: Vec<Vec<Value>> =
            (0..self.order).map(|a| (0..self.order).map(|b| self.at(a, b).to_json()).collect()).collect();
        json!({"support_group": self.group.to_json(), "values": values})
    }

    pub fn from_json(field: Field, v: &Value) -> Result<Self, ConstructionError> {
        let group = Group::from_json(v.get("support_group").unwrap_or(&Value::Null))?;
        let rows = v.get("values").and_then(Value::as_array).ok_or_else(|| ConstructionError::Parse("values".into()))?;
        let values = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| ConstructionError::Parse("values row".into()))?
                    .iter()
                    .map(|x| field.parse_scalar(x).map_err(ConstructionError::from))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Cocycle::new(&group, values)
    }
}

/// Validate a cocycle table over `group`.
pub fn validate_cocycle(group: &Group, values: Vec<Vec<Scalar>>) -> Result<Cocycle, ConstructionError> {
    Cocycle::new(group, values)
}

/// A finite-dimensional graded algebra given by structure constants
/// `b_i b_j = Σ_k c_ij^k b_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractGradedAlgebra {
    field: Field,
    group: Group,
    degrees: Vec<GroupElement>,
    table: Vec<Vec<(usize, Scalar)>>,
    unity: Vec<Scalar>,
}

impl AbstractGradedAlgebra {
    /// Validate degree compatibility, associativity and the unity.
    pub fn new(
        field: Field,
        group: Group,
        degrees: Vec<GroupElement>,
        constants: Vec<(usize, usize, usize, Scalar)>,
        unity: Vec<Scalar>,
    ) -> Result<Self, ConstructionError> {
        let alg = Self::from_parts(field, group, degrees, constants, unity)?;
        alg.check_associative()?;
        alg.check_unity()?;
        Ok(alg)
    }

    fn from_parts(
        field: Field,
        group: Group,
        degrees: Vec<GroupElement>,
        constants: Vec<(usize, usize, usize, Scalar)>,
        unity: Vec<Scalar>,
    ) -> Result<Self, ConstructionError> {
        let d = degrees.len();
        for g in &degrees {
            group.inv(g)?;
        }
        if unity.len() != d {
            return Err(ConstructionError::NotUnital);
        }
        let mut dense: Vec<HashMap<usize, Scalar>> = vec![HashMap::new(); d * d];
        for (i, j, k, c) in constants {
            if i >= d || j >= d || k >= d {
                return Err(ConstructionError::IndexOutOfRange);
            }
            if c.field() != field {
                return Err(ScalarError::FieldMismatch.into());
            }
            let e = dense[i * d + j].entry(k).or_insert_with(|| field.zero());
            *e = &*e + &c;
        }
        let mut table = Vec::with_capacity(d * d);
        for (ij, m) in dense.into_iter().enumerate() {
            let mut row: Vec<(usize, Scalar)> = m.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            row.sort_by_key(|(k, _)| *k);
            let (i, j) = (ij / d, ij % d);
            let gh = group.op(&degrees[i], &degrees[j]);
            if let Some((k, _)) = row.iter().find(|(k, _)| degrees[*k] != gh) {
                return Err(ConstructionError::DegreeIncompatible { i, j, k: *k });
            }
            table.push(row);
        }
        Ok(AbstractGradedAlgebra { field, group, degrees, table, unity })
    }

    fn check_associative(&self) -> Result<(), ConstructionError> {
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut lhs = vec![self.field.zero(); d];
                    for (m, c) in &self.table[i * d + j] {
                        for (r, c2) in &self.table[m * d + k] {
                            lhs[*r].add_mul_assign(c, c2);
                        }
                    }
                    let mut rhs = vec![self.field.zero(); d];
                    for (m, c) in &self.table[j * d + k] {
                        for (r, c2) in &self.table[i * d + m] {
                            rhs[*r].add_mul_assign(c, c2);
                        }
                    }
                    if lhs != rhs {
                        return Err(ConstructionError::NotAssociative { i, j, k });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_unity(&self) -> Result<(), ConstructionError> {
        for k in 0..self.dim() {
            let b = crate::linalg::unit_vector(self.field, self.dim(), k);
            if self.multiply(&self.unity, &b) != b || self.multiply(&b, &self.unity) != b {
                return Err(ConstructionError::NotUnital);
            }
        }
        Ok(())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[GroupElement] {
        &self.degrees
    }

    pub fn unity(&self) -> &[Scalar] {
        &self.unity
    }

    /// Nonzero structure constants of `b_i b_j`, sorted by output index.
    pub fn basis_product(&self, i: usize, j: usize) -> &[(usize, Scalar)] {
        &self.table[i * self.dim() + j]
    }

    pub fn multiply(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let d = self.dim();
        let mut out = vec![self.field.zero(); d];
        for (i, a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a * b;
                for (k, c) in &self.table[i * d + j] {
                    out[*k].add_mul_assign(&ab, c);
                }
            }
        }
        out
    }

    /// Matrix of `y ↦ x y` in the basis.
    pub fn left_multiplication(&self, x: &[Scalar]) -> Matrix {
        let d = self.dim();
        let mut m = Matrix::zeros(self.field, d, d);
        for j in 0..d {
            let col = self.multiply(x, &crate::linalg::unit_vector(self.field, d, j));
            for (i, v) in col.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Inverse of `x`, if it exists.
    pub fn inverse(&self, x: &[Scalar]) -> Option<Vec<Scalar>> {
        let l = self.left_multiplication(x);
        let y = l.solve(&self.unity).ok()??;
        (self.multiply(&y, x) == self.unity).then_some(y)
    }

    /// Basis indices of each degree, in order of first appearance.
    pub fn components(&self) -> Vec<(GroupElement, Vec<usize>)> {
        let mut out: Vec<(GroupElement, Vec<usize>)> = Vec::new();
        for (k, g) in self.degrees.iter().enumerate() {
            match out.iter_mut().find(|(h, _)| h == g) {
                Some((_, ks)) => ks.push(k),
                None => out.push((g.clone(), vec![k])),
            }
        }
        out
    }

    /// The same algebra with every degree pushed through a map.
    pub fn regraded(&self, group: Group, map: impl Fn(&GroupElement) -> GroupElement) -> Result<Self, ConstructionError> {
        let degrees = self.degrees.iter().map(map).collect::<Vec<_>>();
        let constants = self.constants();
        Self::from_parts(self.field, group, degrees, constants, self.unity.clone())
    }

    pub fn constants(&self) -> Vec<(usize, usize, usize, Scalar)> {
        let d = self.dim();
        let mut out = Vec::new();
        for (ij, row) in self.table.iter().enumerate() {
            for (k, c) in row {
                out.push((ij / d, ij % d, *k, c.clone()));
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let constants: Vec<Value> =
            self.constants().into_iter().map(|(i, j, k, c)| json!([i, j, k, c.to_json()])).collect();
        json!({
            "format": 1,
            "field": serde_json::to_value(self.field).expect("field serializes"),
            "group": self.group.to_json(),
            "basis_degrees": self.degrees.iter().map(GroupElement::to_json).collect::<Vec<_>>(),
            "structure_constants": constants,
            "unity": self.unity.iter().map(Scalar::to_json).collect::<Vec<_>>(),
        })
    }

    /// Parse; `field` and `group` may be supplied by an enclosing document.
    pub fn from_json_with(field: Option<Field>, group: Option<&Group>, v: &Value) -> Result<Self, ConstructionError> {
        let field = match v.get("field") {
            Some(f) => serde_json::from_value(f.clone()).map_err(|e| ConstructionError::Parse(format!("field: {e}")))?,
            None => field.ok_or_else(|| ConstructionError::Parse("missing field".into()))?,
        };
        let group = match v.get("group") {
            Some(g) => Group::from_json(g)?,
            None => group.cloned().ok_or_else(|| ConstructionError::Parse("missing group".into()))?,
        };
        let degrees = v
            .get("basis_degrees")
            .and_then(Value::as_array)
            .ok_or_else(|| ConstructionError::Parse("missing basis_degrees".into()))?
            .iter()
            .map(|g| group.parse_element(g))
            .collect::<Result<Vec<_>, _>>()?;
        let mut constants = Vec::new();
        for item in v
            .get("structure_constants")
            .and_then(Value::as_array)
            .ok_or_else(|| ConstructionError::Parse("missing structure_constants".into()))?
        {
            let parts = item.as_array().filter(|a| a.len() == 4).ok_or_else(|| ConstructionError::Parse("constant triple".into()))?;
            let idx = |k: usize| parts[k].as_u64().map(|x| x as usize).ok_or_else(|| ConstructionError::Parse("index".into()));
            constants.push((idx(0)?, idx(1)?, idx(2)?, field.parse_scalar(&parts[3])?));
        }
        let unity = match v.get("unity").and_then(Value::as_array) {
            Some(u) => u.iter().map(|x| field.parse_scalar(x)).collect::<Result<Vec<_>, _>>()?,
            None => return Err(ConstructionError::Parse("missing unity".into())),
        };
        Self::new(field, group, degrees, constants, unity)
    }

    pub fn from_json(v: &Value) -> Result<Self, ConstructionError> {
        Self::from_json_with(None, None, v)
    }
}

/// Whether every nonzero homogeneous element has been shown invertible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DivisionStatus {
    Certified,
    /// No counterexample found, but the identity component could not be
    /// shown to be a division algebra.
    Undecided(String),
    /// A nonzero homogeneous element without inverse.
    Refuted(Vec<Scalar>),
}

impl DivisionStatus {
    pub fn label(&self) -> &'static str {
        match self {
            DivisionStatus::Certified => "certified",
            DivisionStatus::Undecided(_) => "undecided",
            DivisionStatus::Refuted(_) => "refuted",
        }
    }
}

/// Decide the division property: the identity component must be a division
/// algebra and every other component must contain an invertible element.
pub fn division_status(alg: &AbstractGradedAlgebra) -> DivisionStatus {
    let d = alg.dim();
    let f = alg.field();
    let comps = alg.components();
    let e = alg.group().identity();
    for (g, ks) in &comps {
        if *g == e {
            continue;
        }
        if !ks.iter().any(|&k| alg.inverse(&crate::linalg::unit_vector(f, d, k)).is_some()) {
            if ks.len() == 1 {
                return DivisionStatus::Refuted(crate::linalg::unit_vector(f, d, ks[0]));
            }
            return DivisionStatus::Undecided(format!("no invertible basis element in degree {g}"));
        }
    }
    let Some((_, id_ks)) = comps.iter().find(|(g, _)| *g == e) else {
        return DivisionStatus::Refuted(vec![f.zero(); d]);
    };
    identity_component_status(alg, id_ks)
}

fn identity_component_status(alg: &AbstractGradedAlgebra, ks: &[usize]) -> DivisionStatus {
    let d = alg.dim();
    let f = alg.field();
    for &k in ks {
        let b = crate::linalg::unit_vector(f, d, k);
        if alg.inverse(&b).is_none() {
            return DivisionStatus::Refuted(b);
        }
    }
    if ks.len() == 1 {
        return DivisionStatus::Certified;
    }
    // Look for a single generator x; then D_e = K[x] is a field iff the
    // minimal polynomial of x is irreducible.
    for &k in ks {
        let x = crate::linalg::unit_vector(f, d, k);
        let mut powers = Echelon::new(f, d);
        let mut seq = vec![alg.unity().to_vec()];
        powers.insert(alg.unity());
        loop {
            let next = alg.multiply(seq.last().expect("nonempty"), &x);
            if !powers.insert(&next) {
                seq.push(next);
                break;
            }
            seq.push(next);
        }
        let deg = seq.len() - 1;
        if deg != ks.len() {
            continue;
        }
        // express x^deg in terms of lower powers
        let mut m = Matrix::zeros(f, d, deg);
        for (c, v) in seq[..deg].iter().enumerate() {
            for (r, s) in v.iter().enumerate() {
                m.set(r, c, s.clone());
            }
        }
        let Ok(Some(coef)) = m.solve(&seq[deg]) else {
            return DivisionStatus::Undecided("minimal polynomial could not be solved".into());
        };
        let mut p: Vec<Scalar> = coef.iter().map(|c| -c).collect();
        p.push(f.one());
        return match Poly::new(f, p).irreducibility() {
            Irreducibility::Irreducible => DivisionStatus::Certified,
            Irreducibility::HasRoot(Some(r)) => {
                let mut y = x.clone();
                for (a, u) in y.iter_mut().zip(alg.unity()) {
                    *a = &*a - &(&r * u);
                }
                DivisionStatus::Refuted(y)
            }
            Irreducibility::HasRoot(None) | Irreducibility::Reducible => {
                DivisionStatus::Undecided("identity component has zero divisors".into())
            }
            Irreducibility::Unknown => DivisionStatus::Undecided("irreducibility of minimal polynomial not decided".into()),
        };
    }
    DivisionStatus::Undecided("identity component is not generated by one basis element".into())
}

/// A graded division algebra, with its support and division certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedDivisionAlgebra {
    algebra: AbstractGradedAlgebra,
    support: Vec<GroupElement>,
    status: DivisionStatus,
}

impl GradedDivisionAlgebra {
    /// Checks equal component dimensions and rejects refuted algebras.
    pub fn new(algebra: AbstractGradedAlgebra) -> Result<Self, ConstructionError> {
        let comps = algebra.components();
        if comps.windows(2).any(|w| w[0].1.len() != w[1].1.len()) {
            return Err(ConstructionError::UnequalComponents);
        }
        let status = division_status(&algebra);
        if let DivisionStatus::Refuted(x) = &status {
            let index = x.iter().position(|c| !c.is_zero()).unwrap_or(0);
            return Err(ConstructionError::NotDivision { index });
        }
        let support = comps.into_iter().map(|(g, _)| g).collect();
        Ok(GradedDivisionAlgebra { algebra, support, status })
    }

    pub fn algebra(&self) -> &AbstractGradedAlgebra {
        &self.algebra
    }

    pub fn support(&self) -> &[GroupElement] {
        &self.support
    }

    pub fn status(&self) -> &DivisionStatus {
        &self.status
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.algebra.to_json();
        v["support"] = Value::Array(self.support.iter().map(GroupElement::to_json).collect());
        v["division"] = json!(self.status.label());
        v
    }

    pub fn from_json(v: &Value) -> Result<Self, ConstructionError> {
        GradedDivisionAlgebra::new(AbstractGradedAlgebra::from_json(v)?)
    }
}

/// K^σT: basis u_t of degree t with u_a u_b = σ(a, b) u_ab.
pub fn twisted_group_algebra(field: Field, sigma: &Cocycle) -> Result<GradedDivisionAlgebra, ConstructionError> {
    let t = sigma.group();
    let els = t.elements().expect("finite support");
    let o = els.len();
    let pos: HashMap<&GroupElement, usize> = els.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let mut constants = Vec::with_capacity(o * o);
    for a in 0..o {
        for b in 0..o {
            let val = sigma.at(a, b);
            if val.field() != field {
                return Err(ScalarError::FieldMismatch.into());
            }
            constants.push((a, b, pos[&t.op(&els[a], &els[b])], val.clone()));
        }
    }
    let alg = AbstractGradedAlgebra::new(field, t.clone(), els.clone(), constants, crate::linalg::unit_vector(field, o, 0))?;
    // u_t^-1 = σ(t, t^-1)^-1 u_{t^-1}, on both sides
    for (a, g) in els.iter().enumerate() {
        let ai = pos[&t.inverse(g)];
        let mut inv = vec![field.zero(); o];
        inv[ai] = sigma.at(a, ai).inv()?;
        let u = crate::linalg::unit_vector(field, o, a);
        if alg.multiply(&u, &inv) != alg.unity() || alg.multiply(&inv, &u) != alg.unity() {
            return Err(ConstructionError::NotDivision { index: a });
        }
    }
    GradedDivisionAlgebra::new(alg)
}

/// Concrete s x s matrices spanning M_s, each homogeneous of the listed degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisionRealization {
    field: Field,
    group: Group,
    matrices: Vec<Matrix>,
    degrees: Vec<GroupElement>,
}

impl DivisionRealization {
    /// Requires the matrices to form a basis of M_s.
    pub fn new(field: Field, group: Group, matrices: Vec<Matrix>, degrees: Vec<GroupElement>) -> Result<Self, ConstructionError> {
        let s = matrices.first().map_or(0, Matrix::rows);
        if matrices.len() != s * s || degrees.len() != matrices.len() {
            return Err(ConstructionError::NotSpanning);
        }
        let mut e = Echelon::new(field, s * s);
        for m in &matrices {
            if m.rows() != s || m.cols() != s || m.field() != field {
                return Err(ConstructionError::NotSpanning);
            }
            if !e.insert(m.data()) {
                return Err(ConstructionError::NotSpanning);
            }
        }
        for g in &degrees {
            group.inv(g)?;
        }
        Ok(DivisionRealization { field, group, matrices, degrees })
    }

    /// D = K as 1 x 1 matrices.
    pub fn trivial(field: Field, group: &Group) -> Self {
        DivisionRealization {
            field,
            group: group.clone(),
            matrices: vec![Matrix::identity(field, 1)],
            degrees: vec![group.identity()],
        }
    }

    pub fn size(&self) -> usize {
        self.matrices.first().map_or(0, Matrix::rows)
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn degrees(&self) -> &[GroupElement] {
        &self.degrees
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// The abstract algebra on the realization basis; structure constants
    /// by expanding products along the basis.
    /// Coefficients of an s x s matrix along the realization basis.
    pub fn expand(&self, m: &Matrix) -> Vec<Scalar> {
        let s = self.size();
        let d = self.matrices.len();
        let mut basis = Matrix::zeros(self.field, s * s, d);
        for (k, b) in self.matrices.iter().enumerate() {
            for (r, x) in b.data().iter().enumerate() {
                basis.set(r, k, x.clone());
            }
        }
        basis.solve(m.data()).ok().flatten().expect("realization spans M_s")
    }

    /// The abstract graded algebra on the realization basis, without the
    /// division check.
    pub fn to_graded_algebra(&self) -> Result<AbstractGradedAlgebra, ConstructionError> {
        let s = self.size();
        let d = self.matrices.len();
        let mut basis = Matrix::zeros(self.field, s * s, d);
        for (k, m) in self.matrices.iter().enumerate() {
            for (r, x) in m.data().iter().enumerate() {
                basis.set(r, k, x.clone());
            }
        }
        let inv = basis.inverse()?;
        let expand = |m: &Matrix| inv.mul_vec(m.data()).expect("length");
        let mut constants = Vec::new();
        for (i, a) in self.matrices.iter().enumerate() {
            for (j, b) in self.matrices.iter().enumerate() {
                for (k, c) in expand(&(a * b)).into_iter().enumerate() {
                    if !c.is_zero() {
                        constants.push((i, j, k, c));
                    }
                }
            }
        }
        let unity = expand(&Matrix::identity(self.field, s));
        AbstractGradedAlgebra::new(self.field, self.group.clone(), self.degrees.clone(), constants, unity)
    }

    /// The abstract algebra on the realization basis; structure constants
    /// by expanding products along the basis.
    pub fn to_algebra(&self) -> Result<GradedDivisionAlgebra, ConstructionError> {
        GradedDivisionAlgebra::new(self.to_graded_algebra()?)
    }
}

/// Left regular representation of D: basis element ↦ matrix of left multiplication.
pub fn matrix_realization(d: &GradedDivisionAlgebra) -> Result<Vec<Matrix>, ConstructionError> {
    let alg = d.algebra();
    let f = alg.field();
    let n = alg.dim();
    let mats: Vec<Matrix> = (0..n).map(|k| alg.left_multiplication(&crate::linalg::unit_vector(f, n, k))).collect();
    // multiplicative on basis pairs, unital, injective
    for i in 0..n {
        for j in 0..n {
            let mut prod = Matrix::zeros(f, n, n);
            for (k, c) in alg.basis_product(i, j) {
                prod.axpy(c, &mats[*k]);
            }
            if &mats[i] * &mats[j] != prod {
                return Err(ConstructionError::NotAssociative { i, j, k: 0 });
            }
        }
    }
    let mut unit = Matrix::zeros(f, n, n);
    for (k, c) in alg.unity().iter().enumerate() {
        unit.axpy(c, &mats[k]);
    }
    if unit != Matrix::identity(f, n) {
        return Err(ConstructionError::NotUnital);
    }
    let mut e = Echelon::new(f, n * n);
    if !mats.iter().all(|m| e.insert(m.data())) {
        return Err(ConstructionError::NotSpanning);
    }
    Ok(mats)
}

fn check_embedding(group: &Group, support: &Group, images: &[GroupElement]) -> Result<(), ConstructionError> {
    let els = support.elements().ok_or(ConstructionError::NotFinite)?;
    for g in images {
        group.inv(g)?;
    }
    for (i, a) in els.iter().enumerate() {
        for (j, b) in els.iter().enumerate() {
            let k = els.iter().position(|x| *x == support.op(a, b)).expect("closed");
            if group.op(&images[i], &images[j]) != images[k] {
                return Err(ConstructionError::NotAnEmbedding);
            }
            if i != j && images[i] == images[j] {
                return Err(ConstructionError::NotAnEmbedding);
            }
        }
    }
    Ok(())
}

/// The Pauli grading on M_2: I ↦ e, diag(1,-1) ↦ a, [[0,1],[1,0]] ↦ b,
/// their product ↦ ab, where `a` and `b` are the images of the Klein
/// generators in `group`.
pub fn division_realization_2x2(
    field: Field,
    sigma: &Cocycle,
    group: &Group,
    a: &GroupElement,
    b: &GroupElement,
) -> Result<DivisionRealization, ConstructionError> {
    if field.characteristic() == 2 {
        return Err(ConstructionError::CharacteristicTwo);
    }
    if *sigma != Cocycle::pauli(field) {
        return Err(ConstructionError::UnsupportedCocycle);
    }
    let ab = group.mul(a, b)?;
    check_embedding(group, sigma.group(), &[group.identity(), a.clone(), b.clone(), ab.clone()])?;
    let x = Matrix::from_i64(field, &[&[1, 0], &[0, -1]]);
    let y = Matrix::from_i64(field, &[&[0, 1], &[1, 0]]);
    let xy = &x * &y;
    DivisionRealization::new(field, group.clone(), vec![Matrix::identity(field, 2), x, y, xy], vec![group.identity(), a.clone(), b.clone(), ab])
}

/// A Z2-graded division grading on M_2 for a non-square `c`:
/// I and y = [[0,c],[1,0]] in degree e, x = diag(1,-1) and xy in degree `a`
/// (an element of order 2). The identity component is K[y] ≅ K(√c).
pub fn quadratic_division_realization(
    field: Field,
    c: &Scalar,
    group: &Group,
    a: &GroupElement,
) -> Result<DivisionRealization, ConstructionError> {
    if field.characteristic() == 2 {
        return Err(ConstructionError::CharacteristicTwo);
    }
    if c.field() != field {
        return Err(ScalarError::FieldMismatch.into());
    }
    if field.is_square(c) {
        return Err(ConstructionError::SquareParameter(c.to_string()));
    }
    check_embedding(group, &Group::cyclic(2), &[group.identity(), a.clone()])?;
    let y = Matrix::from_rows(field, vec![vec![field.zero(), c.clone()], vec![field.one(), field.zero()]])?;
    let x = Matrix::from_i64(field, &[&[1, 0], &[0, -1]]);
    let xy = &x * &y;
    let e = group.identity();
    DivisionRealization::new(field, group.clone(), vec![Matrix::identity(field, 2), y, x, xy], vec![e.clone(), e, a.clone(), a.clone()])
}

/// The smallest positive integer that is not a square in the field.
pub fn smallest_nonsquare(field: Field) -> Scalar {
    (2..)
        .map(|k| field.from_i64(k))
        .find(|x| !x.is_zero() && !field.is_square(x))
        .expect("every field of odd or zero characteristic has a non-square")
}

/// The grading (B, D, seq) on UT(n_1 s, ..., n_t s): basis `e_ij ⊗ d_k` for
/// positions (i, j) of B in row-major order and then k, realized by
/// Kronecker products, with deg e_ij ⊗ d = g_i deg(d) g_j^-1.
pub fn tensor_grading(
    blocks: &BlockStructure,
    seq: &[GroupElement],
    real: &DivisionRealization,
) -> Result<UTGrading, ConstructionError> {
    let n = blocks.n();
    if seq.len() != n {
        return Err(ConstructionError::LengthMismatch { expected: n, found: seq.len() });
    }
    let group = real.group();
    let field = real.field();
    for g in seq {
        group.inv(g)?;
    }
    let s = real.size();
    let big = BlockStructure::new(blocks.sizes().iter().map(|x| x * s).collect())?;
    let mut basis = Vec::with_capacity(blocks.dim() * s * s);
    for &(i, j) in blocks.positions() {
        let unit = Matrix::unit(field, n, n, i, j);
        let gj_inv = group.inverse(&seq[j]);
        for (m, g) in real.matrices().iter().zip(real.degrees()) {
            basis.push((unit.kronecker(m)?, group.op(&group.op(&seq[i], g), &gj_inv)));
        }
    }
    Ok(UTGrading::new(field, group.clone(), big, basis)?)
}

/// The abstract algebra UT(p_1, ..., p_t) ⊗ D with basis `e_ij ⊗ d_k`
/// (positions in row-major order, then k) and deg e_ij ⊗ d = g_i deg(d) g_j^-1.
pub fn tensor_algebra(
    blocks: &BlockStructure,
    seq: &[GroupElement],
    d: &AbstractGradedAlgebra,
) -> Result<AbstractGradedAlgebra, ConstructionError> {
    let n = blocks.n();
    if seq.len() != n {
        return Err(ConstructionError::LengthMismatch { expected: n, found: seq.len() });
    }
    let group = d.group();
    let m = d.dim();
    let pos = blocks.positions();
    let mut degrees = Vec::with_capacity(pos.len() * m);
    for &(i, j) in pos {
        let gj_inv = group.inverse(&seq[j]);
        for g in d.degrees() {
            degrees.push(group.op(&group.op(&seq[i], g), &gj_inv));
        }
    }
    let mut constants = Vec::new();
    for (p1, &(i, j)) in pos.iter().enumerate() {
        for (p2, &(j2, l)) in pos.iter().enumerate() {
            if j != j2 {
                continue;
            }
            let p3 = blocks.position_index(i, l).expect("closed under products");
            for a in 0..m {
                for b in 0..m {
                    for (c, val) in d.basis_product(a, b) {
                        constants.push((p1 * m + a, p2 * m + b, p3 * m + c, val.clone()));
                    }
                }
            }
        }
    }
    let mut unity = vec![d.field().zero(); pos.len() * m];
    for i in 0..n {
        let p = blocks.position_index(i, i).expect("diagonal");
        for (k, c) in d.unity().iter().enumerate() {
            unity[p * m + k] = c.clone();
        }
    }
    AbstractGradedAlgebra::from_parts(d.field(), group.clone(), degrees, constants, unity)
}
